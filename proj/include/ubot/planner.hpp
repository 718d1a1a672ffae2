#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ubot/types.hpp"

namespace ubot::planner {

struct Circle {
    Vec2 center = Vec2::Zero();
    double radius = 0.0;
};

struct World {
    Vec2 lower = Vec2::Zero(); ///< bounds rectangle, um
    Vec2 upper = Vec2::Zero();
    std::vector<Circle> obstacles;
    double clearance = 0.0; ///< added to every obstacle radius

    void validate() const;
    bool point_free(const Vec2& p) const;
};

struct PlannerConfig {
    int max_iters = 5000;
    double steer_step = 10.0;          ///< um
    double goal_radius = 5.0;          ///< um
    double rewire_radius_const = 200.0;
    double goal_bias = 0.05;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Path {
    MatX2 waypoints; ///< m x 2, first row = start, last row = goal
    double cost = 0.0; ///< total Euclidean length
};

/// Per-iteration incumbent best cost (inf until the first solution).
struct PlanTrace {
    std::vector<double> incumbent_costs;
};

/// True iff the closed segment stays strictly farther than radius+clearance
/// from every obstacle center and inside the bounds. Exact point-segment
/// distance, no sampling.
bool segment_free(const Vec2& p1, const Vec2& p2, const World& world);

/// RRT* with uniform sampling, goal bias, and neighborhood rewiring.
/// Deterministic per seed. Throws NoPathFound when max_iters pass without a
/// path into the goal region.
Path plan(const Vec2& start, const Vec2& goal, const World& world, const PlannerConfig& cfg,
          PlanTrace* trace = nullptr);

/// Arc-length reparameterization at uniform spacing; the exact final point
/// is always retained.
MatX2 resample_path(const Path& path, double spacing);

World world_from_json(const std::string& text);
std::string world_to_json(const World& world);

}  // namespace ubot::planner
