#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "ubot/mpc.hpp"
#include "ubot/sysid.hpp"
#include "ubot/types.hpp"

namespace ubot::sim {

/// One axis of the synthetic disturbance field: a truncated Fourier series
/// in alpha (harmonics 1..3) scaled by a quadratic polynomial in f.
struct AxisField {
    std::array<double, 3> cos_coef{0.0, 0.0, 0.0};
    std::array<double, 3> sin_coef{0.0, 0.0, 0.0};
    std::array<double, 3> f_poly{1.0, 0.0, 0.0}; ///< c0 + c1 f + c2 f^2

    double eval(double alpha, double f) const;
};

struct GroundTruthModel {
    double a0_true = 1.5;      ///< um/(s*Hz)
    Vec2 bias = Vec2::Zero();  ///< um/s
    AxisField field_x, field_y;
    double brownian_sigma = 0.0; ///< um/sqrt(s)
    std::uint64_t seed = 0;
};

/// Systematic disturbance D*(alpha, f); the Brownian term is added per step
/// inside the plant, never here.
Vec2 eval_disturbance(const GroundTruthModel& model, double alpha, double f);

/// Data-collection sweep over the (f, alpha) grid.
struct SweepConfig {
    double f_max = 40.0;     ///< Hz
    double f_step = 1.0;     ///< Hz
    double alpha_step_deg = 1.0;
    int dwell_steps = 3;     ///< samples each grid command is held for

    void validate() const;
    int grid_size() const;
};

/// Holds each grid command for dwell_steps while integrating the discrete
/// plant with Brownian noise. Deterministic per seed.
sysid::RawTrajectory generate_training_run(const GroundTruthModel& model, const SweepConfig& sweep,
                                           double dt, std::uint64_t seed);

struct LogRecord {
    double t = 0.0;
    Vec2 ref = Vec2::Zero();
    Vec2 pos = Vec2::Zero();
    Vec2 u = Vec2::Zero();
    Vec2 d_hat = Vec2::Zero();
    Vec2 d_true = Vec2::Zero();
    double objective = 0.0;
    bool converged = true;
};

struct TrajectoryLog {
    double dt = 0.0;
    std::vector<LogRecord> records;
};

enum class ScenarioKind { circle, planner_path, custom };

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::circle;
    double duration = 30.0;      ///< s, circle scenario
    double radius = 50.0;        ///< um, circle scenario
    double angular_speed = 0.2;  ///< rad/s, circle scenario
    MatX2 waypoints;             ///< planner_path/custom scenarios
    std::optional<Vec2> start;   ///< defaults to the first reference point
    bool use_gp = true;          ///< false runs the no-learning baseline
    mpc::MPCConfig controller;
    GroundTruthModel ground_truth;

    MatX2 reference() const;
};

/// Closed loop of mpc_step -> plant step at one control update per dt.
/// Pass null GPs (or use_gp=false) for the baseline controller.
TrajectoryLog simulate_closed_loop(const ScenarioConfig& scenario, double a0_hat,
                                   const gp::TrainedGP* gp_x, const gp::TrainedGP* gp_y,
                                   std::uint64_t seed);

MatX2 circle_reference(double radius, double angular_speed, double dt, double duration);

struct Metrics {
    double rms_error = 0.0;
    double max_error = 0.0;
    double mean_abs_dhat_error = 0.0;
};

Metrics metrics(const TrajectoryLog& log);

}  // namespace ubot::sim
