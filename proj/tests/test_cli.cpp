#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pvmppt/cli.hpp"

namespace fs = std::filesystem;
using namespace pvmppt;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            (std::string("pvmppt_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// Runs the installed binary through the shell, capturing both streams.
Run run_binary(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / "stdout.txt";
  const fs::path err = scratch / "stderr.txt";
  const std::string cmd = std::string(PVMPPT_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Run r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  fs::remove(out);
  fs::remove(err);
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

double field_after(const std::string& text, const std::string& label) {
  const auto pos = text.find(label);
  if (pos == std::string::npos) return -1.0;
  return std::stod(text.substr(pos + label.size()));
}

std::vector<std::vector<double>> read_numeric_csv(const fs::path& p) {
  std::vector<std::vector<double>> rows;
  auto ls = lines(slurp(p));
  for (std::size_t k = 1; k < ls.size(); ++k) {
    std::vector<double> row;
    std::stringstream ss(ls[k]);
    for (std::string cell; std::getline(ss, cell, ',');) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

double max_power(const fs::path& csv) {
  double best = -1.0;
  for (const auto& r : read_numeric_csv(csv)) best = std::max(best, r.at(2));
  return best;
}

}  // namespace

TEST(CliSizeCap, WorkedExample) {
  TempDir tmp;
  const auto r = run_binary("size-cap --power 200 --freq 50 --vdc 35 --ripple 2", tmp.path());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("capacitance: 9.09 mF"), std::string::npos) << r.out;
  EXPECT_NEAR(field_after(r.out, "capacitance_f: "), 9.094568e-3, 1e-8);
}

TEST(CliSizeCap, DoublingPowerDoublesCapacitance) {
  TempDir tmp;
  const auto a = run_binary("size-cap --power 200 --freq 50 --vdc 35 --ripple 2", tmp.path());
  const auto b = run_binary("size-cap --power 400 --freq 50 --vdc 35 --ripple 2", tmp.path());
  ASSERT_EQ(b.code, 0);
  const double doubled = field_after(b.out, "capacitance_f: ");
  EXPECT_NEAR(doubled, 2.0 * field_after(a.out, "capacitance_f: "), 1e-6 * doubled);
}

TEST(CliSizeCap, UsageErrors) {
  TempDir tmp;
  EXPECT_EQ(run_binary("size-cap --power 200 --freq 50 --vdc 35 --ripple 0", tmp.path()).code, 2);
  EXPECT_EQ(run_binary("size-cap --power 200 --freq 50 --vdc 35", tmp.path()).code, 2);
  EXPECT_EQ(run_binary("size-cap --power 200 --freq 50 --vdc 35 --ripple 2 --bogus", tmp.path()).code, 2);
  EXPECT_EQ(run_binary("size-cap --power 200 --freq 50 --vdc 35 --ripple 2 --location roof", tmp.path()).code,
            2);
  const auto r = run_binary("size-cap --power 200 --freq 50 --vdc 35 --ripple 0", tmp.path());
  EXPECT_NE(r.err.find("ripple"), std::string::npos) << r.err;
}

TEST(CliGeneral, HelpAndMissingSubcommand) {
  TempDir tmp;
  EXPECT_EQ(run_binary("--help", tmp.path()).code, 0);
  EXPECT_EQ(run_binary("simulate --help", tmp.path()).code, 0);
  EXPECT_EQ(run_binary("", tmp.path()).code, 2);
  EXPECT_EQ(run_binary("launch", tmp.path()).code, 2);
}

TEST(CliSimulate, AllVariantsWriteSeriesAndSummary) {
  TempDir tmp;
  const auto out = tmp.path() / "out";
  const auto r = run_binary("--out " + out.string() + " simulate --variant all", tmp.path());
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* v : {"PoFixed", "PoModulated", "IncCond"}) {
    const auto series = out / (std::string(v) + "_series.csv");
    ASSERT_TRUE(fs::exists(series)) << v;
    const auto ls = lines(slurp(series));
    EXPECT_EQ(ls.front(), kSeriesHeader);
    EXPECT_EQ(ls.size(), 86401u);
  }
  const auto summary = lines(slurp(out / "summary.csv"));
  ASSERT_EQ(summary.size(), 4u);
  EXPECT_EQ(summary[0], kSummaryHeader);
  EXPECT_TRUE(summary[1].starts_with("PoFixed,"));
  EXPECT_TRUE(summary[2].starts_with("PoModulated,"));
  EXPECT_TRUE(summary[3].starts_with("IncCond,"));
  for (const auto& entry : fs::directory_iterator(out)) {
    EXPECT_NE(entry.path().extension(), ".tmp") << entry.path();
  }
}

TEST(CliSimulate, OutputIsByteIdenticalAcrossRuns) {
  TempDir tmp;
  const auto a = tmp.path() / "a";
  const auto b = tmp.path() / "b";
  ASSERT_EQ(run_binary("--out " + a.string() + " simulate --variant IncCond", tmp.path()).code, 0);
  ASSERT_EQ(run_binary("--out " + b.string() + " simulate --variant IncCond", tmp.path()).code, 0);
  EXPECT_EQ(slurp(a / "IncCond_series.csv"), slurp(b / "IncCond_series.csv"));
  EXPECT_EQ(slurp(a / "summary.csv"), slurp(b / "summary.csv"));
}

TEST(CliSimulate, BadConfigNamesTheKey) {
  TempDir tmp;
  const auto cfg = tmp.path() / "bad.cfg";
  std::ofstream(cfg) << "mppt.step_d = -1\n";
  const auto r = run_binary("--config " + cfg.string() + " --out " + (tmp.path() / "o").string() + " simulate",
                            tmp.path());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("mppt.step_d"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(tmp.path() / "o" / "summary.csv"));
}

TEST(CliSimulate, UnknownVariant) {
  std::ostringstream out;
  std::ostringstream err;
  EXPECT_EQ(cli::cmd_simulate({}, std::string("Fuzzy"), out, err), cli::kExitUsage);
}

TEST(CliIvCurve, MaxPowerNearRating) {
  TempDir tmp;
  const auto r = run_binary("--out " + tmp.path().string() + " iv-curve --g 1000 --t 25 --points 400", tmp.path());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = tmp.path() / "iv_curve.csv";
  EXPECT_EQ(lines(slurp(csv)).front(), kIvHeader);
  EXPECT_NEAR(max_power(csv), 213.0, 0.01 * 213.0);
}

TEST(CliIvCurve, DarkCurveCarriesNoCurrent) {
  TempDir tmp;
  ASSERT_EQ(run_binary("--out " + tmp.path().string() + " iv-curve --g 0", tmp.path()).code, 0);
  for (const auto& r : read_numeric_csv(tmp.path() / "iv_curve.csv")) EXPECT_NEAR(r.at(1), 0.0, 1e-9);
}

TEST(CliIvCurve, PowerRisesWithIrradiance) {
  TempDir tmp;
  double previous = -1.0;
  for (int g = 200; g <= 1000; g += 200) {
    ASSERT_EQ(run_binary("--out " + tmp.path().string() + " iv-curve --g " + std::to_string(g), tmp.path()).code, 0);
    const double p = max_power(tmp.path() / "iv_curve.csv");
    EXPECT_GT(p, previous) << g;
    previous = p;
  }
}

TEST(CliIvCurve, RejectsBadArguments) {
  std::ostringstream out;
  std::ostringstream err;
  cli::IvCurveOptions o;
  o.points = 1;
  EXPECT_EQ(cli::cmd_iv_curve({}, o, out, err), cli::kExitUsage);
  o = {};
  o.g = -5.0;
  EXPECT_EQ(cli::cmd_iv_curve({}, o, out, err), cli::kExitUsage);
}

TEST(CliCompare, DefaultPlacements) {
  std::ostringstream out;
  std::ostringstream err;
  ASSERT_EQ(cli::cmd_compare({}, out, err), cli::kExitOk) << err.str();
  const auto ls = lines(out.str());
  ASSERT_EQ(ls.size(), 4u);
  EXPECT_EQ(ls[0], "location,capacitance_f,capacitance,ratio_to_pv_side");
  EXPECT_TRUE(ls[1].starts_with("PvSide,9.094568e-03,9.09 mF,1"));
}

TEST(CliInverter, PeakVoltage) {
  std::ostringstream out;
  std::ostringstream err;
  ASSERT_EQ(cli::cmd_inverter({}, 10.0, out, err), cli::kExitOk);
  EXPECT_NE(out.str().find("v_pk: 9.5200"), std::string::npos) << out.str();
  EXPECT_EQ(cli::cmd_inverter({}, 0.3, out, err), cli::kExitUsage);
}
