#pragma once

#include <filesystem>

#include "ubot/planner.hpp"
#include "ubot/sim.hpp"
#include "ubot/types.hpp"

namespace ubot::svg {

/// XY overlay of the reference (dashed) and actual (solid) trajectories,
/// with the world's obstacles when given.
void write_xy_overlay(const std::filesystem::path& file, const sim::TrajectoryLog& log,
                      const planner::World* world = nullptr);

/// Stacked x(t) and y(t) panels, reference dashed and actual solid.
void write_time_traces(const std::filesystem::path& file, const sim::TrajectoryLog& log);

}  // namespace ubot::svg
