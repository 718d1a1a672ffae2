#pragma once

#include <filesystem>
#include <string>

#include "ubot/planner.hpp"
#include "ubot/sim.hpp"
#include "ubot/sysid.hpp"
#include "ubot/types.hpp"

namespace ubot::io {

/// Shortest round-trip decimal representation; locale-independent, so
/// re-runs produce byte-identical files.
std::string format_double(double v);

void write_raw_trajectory_csv(const std::filesystem::path& file, const sysid::RawTrajectory& traj);

/// Reads the `t,x,y,ux,uy` format. Rejects NaN/Inf and non-monotone time;
/// parse errors carry the 1-based line number.
sysid::RawTrajectory read_raw_trajectory_csv(const std::filesystem::path& file);

void write_trajectory_log_csv(const std::filesystem::path& file, const sim::TrajectoryLog& log);

void write_path_csv(const std::filesystem::path& file, const MatX2& waypoints);
MatX2 read_path_csv(const std::filesystem::path& file);

std::string mae_report_to_json(const sysid::MAEReport& report);

/// Identification artifacts bundled into one document: a0_hat, the linear
/// fit and both per-axis disturbance GPs.
struct ModelBundle {
    double a0_hat = 0.0;
    sysid::LinearFit linear_fit;
    gp::TrainedGP gp_x, gp_y;
};

std::string bundle_to_json(const ModelBundle& bundle);
ModelBundle bundle_from_json(const std::string& text);

void write_text_file(const std::filesystem::path& file, const std::string& text);
std::string read_text_file(const std::filesystem::path& file);

}  // namespace ubot::io
