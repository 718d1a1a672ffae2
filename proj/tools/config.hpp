#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "ubot/gp.hpp"
#include "ubot/mpc.hpp"
#include "ubot/planner.hpp"
#include "ubot/sim.hpp"

namespace ubot::cli {

struct SysidConfig {
    double cutoff_hz = 2.0;   ///< 0 disables the low-pass stage
    int trim_samples = 1;
    std::uint64_t split_seed = 0;
    int max_train_points = 2000;
    int search_subsample = 300;
};

/// Full run configuration. Every section has defaults; unknown keys are
/// rejected anywhere in the document.
struct RunConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    sim::GroundTruthModel ground_truth;
    sim::SweepConfig sweep;
    double sweep_dt = 0.1;
    SysidConfig sysid;
    gp::SearchSpace gp_search;
    mpc::MPCConfig mpc;
    planner::PlannerConfig planner;
    sim::ScenarioConfig scenario; ///< controller/ground_truth filled from above
    double path_f_nominal = 10.0; ///< Hz; sets waypoint spacing a0*f*dt for planner paths
};

RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

/// Serializes the fully-resolved configuration, defaults included.
nlohmann::json run_config_to_json(const RunConfig& cfg);

}  // namespace ubot::cli
