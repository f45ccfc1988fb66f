#ifndef PVMPPT_PVMPPT_HPP
#define PVMPPT_PVMPPT_HPP

#include "pvmppt/config.hpp"
#include "pvmppt/decoupling.hpp"
#include "pvmppt/error.hpp"
#include "pvmppt/io.hpp"
#include "pvmppt/mppt.hpp"
#include "pvmppt/power_stage.hpp"
#include "pvmppt/pv_model.hpp"
#include "pvmppt/sim_engine.hpp"

#endif  // PVMPPT_PVMPPT_HPP
