#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "pvmppt/pv_model.hpp"

using namespace pvmppt;

namespace {

const DiodeParams& default_params() {
  static const DiodeParams p = extract_params(PvDatasheet{});
  return p;
}

EnvSample env(double g, double t) { return {g, t, 0.0}; }

void expect_error(ErrorCode code, auto&& fn, const std::string& field = {}) {
  try {
    fn();
    FAIL() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
    if (!field.empty()) {
      EXPECT_EQ(e.field(), field);
    }
  }
}

}  // namespace

TEST(Datasheet, DefaultIsValidAndNear213W) {
  const PvDatasheet ds;
  EXPECT_NO_THROW(validate(ds));
  EXPECT_NEAR(ds.v_mp_stc * ds.i_mp_stc, 213.0, 0.02 * 213.0);
  EXPECT_GE(ds.v_oc_stc, 15.0);
  EXPECT_LE(ds.v_oc_stc, 40.0);
}

TEST(Datasheet, RejectsViolatedInvariants) {
  PvDatasheet ds;
  ds.v_mp_stc = ds.v_oc_stc;
  expect_error(ErrorCode::InvalidDatasheet, [&] { validate(ds); }, "pv.v_mp");

  ds = PvDatasheet{};
  ds.i_mp_stc = 8.0;
  expect_error(ErrorCode::InvalidDatasheet, [&] { validate(ds); }, "pv.i_mp");

  ds = PvDatasheet{};
  ds.p_rated = 250.0;
  expect_error(ErrorCode::InvalidDatasheet, [&] { validate(ds); }, "pv.p_rated");

  ds = PvDatasheet{};
  ds.beta_voc = 0.001;
  expect_error(ErrorCode::InvalidDatasheet, [&] { validate(ds); }, "pv.beta_voc");

  ds = PvDatasheet{};
  ds.alpha_isc = -0.001;
  expect_error(ErrorCode::InvalidDatasheet, [&] { validate(ds); }, "pv.alpha_isc");

  ds = PvDatasheet{};
  ds.n_cells_series = 0;
  expect_error(ErrorCode::InvalidDatasheet, [&] { extract_params(ds); }, "pv.n_cells");
}

TEST(ExtractParams, SatisfiesStcConstraints) {
  const PvDatasheet ds;
  const auto& p = default_params();
  EXPECT_NEAR(pv_current(p, stc(), 0.0), ds.i_sc_stc, 1e-6);
  EXPECT_NEAR(pv_current(p, stc(), ds.v_oc_stc), 0.0, 1e-6);
  EXPECT_NEAR(pv_current(p, stc(), ds.v_mp_stc), ds.i_mp_stc, 1e-6);
}

TEST(ExtractParams, ParametersArePhysical) {
  const auto& p = default_params();
  EXPECT_GT(p.i_ph_stc, 0.0);
  EXPECT_GT(p.i_0_stc, 0.0);
  EXPECT_GT(p.n_ideality, 0.0);
  EXPECT_GT(p.r_s, 0.0);
  EXPECT_GT(p.r_sh, p.r_s);
  // Calibrated bandgap lands near silicon's.
  EXPECT_GT(p.bandgap_ev, 0.9);
  EXPECT_LT(p.bandgap_ev, 1.4);
}

TEST(ExtractParams, BruteForceScanReachesRating) {
  const PvDatasheet ds;
  const auto best = oracle::brute_force_mpp(default_params(), 1000.0, 25.0, ds.v_oc_stc, 2000);
  EXPECT_NEAR(best.p, 213.0, 0.01 * 213.0);
}

TEST(ExtractParams, ReproducesVocTemperatureCoefficient) {
  const PvDatasheet ds;
  const auto& p = default_params();
  const double v25 = open_circuit_voltage(p, env(1000.0, 25.0));
  const double v35 = open_circuit_voltage(p, env(1000.0, 35.0));
  const double beta = (v35 - v25) / 10.0 / v25;
  EXPECT_NEAR(beta, ds.beta_voc, 0.1 * std::abs(ds.beta_voc));
}

TEST(ExtractParams, OtherModuleClass) {
  // 72-cell, ~300 W class.
  PvDatasheet ds{44.8, 8.9, 36.6, 8.2, 300.0, 0.0006, -0.0032, 72};
  const auto p = extract_params(ds);
  EXPECT_NEAR(pv_current(p, stc(), 0.0), ds.i_sc_stc, 1e-6);
  EXPECT_NEAR(pv_current(p, stc(), ds.v_oc_stc), 0.0, 1e-6);
  EXPECT_NEAR(pv_current(p, stc(), ds.v_mp_stc), ds.i_mp_stc, 1e-6);
}

TEST(ExtractParams, InconsistentDatasheetDoesNotConverge) {
  // Fill factor near 1 is out of reach of a single-diode model.
  PvDatasheet ds{36.3, 7.84, 36.0, 7.80, 280.8, 0.0005, -0.0035, 60};
  expect_error(ErrorCode::NonConvergence, [&] { extract_params(ds); });
}

TEST(PvCurrent, StcEndpoints) {
  const PvDatasheet ds;
  EXPECT_NEAR(pv_current(default_params(), stc(), 0.0), ds.i_sc_stc, 1e-6);
  EXPECT_NEAR(pv_current(default_params(), stc(), ds.v_oc_stc), 0.0, 1e-6);
}

TEST(PvCurrent, HalfIrradianceHalvesShortCircuitCurrent) {
  const PvDatasheet ds;
  const double i = pv_current(default_params(), env(500.0, 25.0), 0.0);
  EXPECT_NEAR(i, 0.5 * ds.i_sc_stc, 0.02 * 0.5 * ds.i_sc_stc);
  EXPECT_NEAR(i, oracle::current(default_params(), 500.0, 25.0, 0.0), 1e-7);
}

TEST(PvCurrent, NewtonMatchesBisectionOnGrid) {
  const auto& p = default_params();
  for (const auto& e : {env(1000.0, 25.0), env(200.0, 60.0), env(800.0, -10.0)}) {
    const double v_max = 1.1 * open_circuit_voltage(p, e);
    for (int k = 0; k < 100; ++k) {
      const double v = v_max * k / 99.0;
      EXPECT_NEAR(pv_current(p, e, v), oracle::current(p, e.irradiance_g, e.cell_temp_c, v), 1e-7)
          << "g=" << e.irradiance_g << " t=" << e.cell_temp_c << " v=" << v;
    }
  }
}

TEST(PvCurrent, AnalyticSlopeMatchesFiniteDifference) {
  const auto& p = default_params();
  std::mt19937 rng(20240611);
  std::uniform_real_distribution<double> g_dist(100.0, 1200.0);
  std::uniform_real_distribution<double> t_dist(-10.0, 75.0);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  const double h = 1e-4;
  for (int k = 0; k < 50; ++k) {
    const EnvSample e = env(g_dist(rng), t_dist(rng));
    const double v = h + frac(rng) * (open_circuit_voltage(p, e) - 2 * h);
    const double analytic = pv_current_slope(p, e, v);
    const double fd = (pv_current(p, e, v + h) - pv_current(p, e, v - h)) / (2 * h);
    EXPECT_NEAR(analytic, fd, 1e-6 * std::abs(fd)) << "v=" << v;
  }
}

TEST(PvCurrent, RejectsInvalidInputs) {
  expect_error(ErrorCode::InvalidSpec, [] { pv_current(default_params(), stc(), -1.0); });
  expect_error(ErrorCode::InvalidProfile, [] { pv_current(default_params(), env(-5.0, 25.0), 1.0); });
  expect_error(ErrorCode::InvalidProfile, [] { pv_current(default_params(), env(500.0, 150.0), 1.0); });
}

TEST(PvCurrent, CorruptedParamsSurfaceNonConvergence) {
  DiodeParams p = default_params();
  p.i_0_stc = std::numeric_limits<double>::infinity();
  expect_error(ErrorCode::NonConvergence, [&] { pv_current(p, stc(), 10.0); });
}

TEST(PvCurrent, DarkModuleProducesNothingAtZeroVolts) {
  EXPECT_EQ(pv_current(default_params(), env(0.0, 25.0), 0.0), 0.0);
  EXPECT_EQ(open_circuit_voltage(default_params(), env(0.0, 25.0)), 0.0);
}

TEST(IvCurve, ThreePointEndpoints) {
  const PvDatasheet ds;
  const auto c = iv_curve(default_params(), stc(), 3);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.front().v, 0.0);
  EXPECT_NEAR(c.front().i, ds.i_sc_stc, 1e-6);
  EXPECT_NEAR(c.back().v, ds.v_oc_stc, 1e-6);
  EXPECT_NEAR(c.back().i, 0.0, 1e-6);
}

TEST(IvCurve, CurrentNonIncreasingAndPowerExact) {
  for (const auto& e : {env(1000.0, 25.0), env(150.0, 5.0), env(900.0, 70.0), env(0.0, 25.0)}) {
    const auto c = iv_curve(default_params(), e, 400);
    for (std::size_t k = 0; k < c.size(); ++k) {
      EXPECT_EQ(c[k].p, c[k].v * c[k].i);
      EXPECT_GE(c[k].v, 0.0);
      if (k > 0) {
        EXPECT_LE(c[k].i, c[k - 1].i);
      }
    }
  }
}

TEST(IvCurve, DarkCurveCarriesNoCurrent) {
  for (const auto& op : iv_curve(default_params(), env(0.0, 25.0), 50)) EXPECT_NEAR(op.i, 0.0, 1e-9);
}

TEST(IvCurve, ArgmaxAgreesWithOracle) {
  const auto c = iv_curve(default_params(), stc(), 2000);
  const auto best = std::max_element(c.begin(), c.end(), [](auto& a, auto& b) { return a.p < b.p; });
  EXPECT_NEAR(best->v, mpp_oracle(default_params(), stc()).v, 0.5);
}

TEST(IvCurve, RejectsTooFewPoints) {
  expect_error(ErrorCode::InvalidSpec, [] { iv_curve(default_params(), stc(), 1); });
}

TEST(MppOracle, StcMatchesRating) {
  const auto mpp = mpp_oracle(default_params(), stc());
  EXPECT_NEAR(mpp.p, 213.0, 0.01 * 213.0);
  EXPECT_EQ(mpp.p, mpp.v * mpp.i);
}

TEST(MppOracle, AgreesWithBruteForceScan) {
  const auto& p = default_params();
  for (const auto& e : {env(1000.0, 25.0), env(300.0, 40.0), env(700.0, 0.0)}) {
    const auto mpp = mpp_oracle(p, e);
    const auto scan = oracle::brute_force_mpp(p, e.irradiance_g, e.cell_temp_c, open_circuit_voltage(p, e), 2000);
    EXPECT_NEAR(mpp.v, scan.v, 0.5);
    EXPECT_GE(mpp.p, scan.p - 1e-6);
  }
}

TEST(MppOracle, IrradianceAndTemperatureTrends) {
  const auto& p = default_params();
  EXPECT_GT(mpp_oracle(p, env(1000.0, 25.0)).p, mpp_oracle(p, env(600.0, 25.0)).p);
  EXPECT_LT(mpp_oracle(p, env(1000.0, 60.0)).p, mpp_oracle(p, env(1000.0, 25.0)).p);

  double prev = 0.0;
  for (double g : {200.0, 400.0, 600.0, 800.0, 1000.0}) {
    const double pw = mpp_oracle(p, env(g, 25.0)).p;
    EXPECT_GT(pw, prev) << "g=" << g;
    prev = pw;
  }
  prev = 1e9;
  for (double t : {0.0, 25.0, 50.0, 75.0}) {
    const double pw = mpp_oracle(p, env(1000.0, t)).p;
    EXPECT_LT(pw, prev) << "t=" << t;
    prev = pw;
  }
}

TEST(PvModel, ConcurrentCallsAgree) {
  const auto& p = default_params();
  const double expected = mpp_oracle(p, env(640.0, 33.0)).p;
  std::vector<double> got(4);
  std::vector<std::thread> threads;
  for (std::size_t k = 0; k < got.size(); ++k) {
    threads.emplace_back([&, k] { got[k] = mpp_oracle(p, env(640.0, 33.0)).p; });
  }
  for (auto& t : threads) t.join();
  for (double g : got) EXPECT_EQ(g, expected);
}
