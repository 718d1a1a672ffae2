#include "ubot/sim.hpp"

#include <cmath>
#include <random>

#include "ubot/dynamics.hpp"

namespace ubot::sim {

double AxisField::eval(double alpha, double f) const {
    double series = 0.0;
    for (int h = 1; h <= 3; ++h) {
        series += cos_coef[static_cast<std::size_t>(h - 1)] * std::cos(h * alpha) +
                  sin_coef[static_cast<std::size_t>(h - 1)] * std::sin(h * alpha);
    }
    return series * (f_poly[0] + f_poly[1] * f + f_poly[2] * f * f);
}

Vec2 eval_disturbance(const GroundTruthModel& model, double alpha, double f) {
    return model.bias + Vec2(model.field_x.eval(alpha, f), model.field_y.eval(alpha, f));
}

void SweepConfig::validate() const {
    if (!(f_max >= 0.0) || !(f_step > 0.0) || !(alpha_step_deg > 0.0)) {
        throw std::invalid_argument("SweepConfig: steps must be positive");
    }
    if (dwell_steps < 2) {
        throw std::invalid_argument("SweepConfig: dwell_steps must be >= 2");
    }
}

int SweepConfig::grid_size() const {
    const int nf = static_cast<int>(std::floor(f_max / f_step + 1e-9)) + 1;
    const int na = static_cast<int>(std::ceil(360.0 / alpha_step_deg - 1e-9));
    return nf * na;
}

sysid::RawTrajectory generate_training_run(const GroundTruthModel& model, const SweepConfig& sweep,
                                           double dt, std::uint64_t seed) {
    sweep.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("generate_training_run: dt must be positive");

    const int nf = static_cast<int>(std::floor(sweep.f_max / sweep.f_step + 1e-9)) + 1;
    const int na = static_cast<int>(std::ceil(360.0 / sweep.alpha_step_deg - 1e-9));
    const Eigen::Index rows = static_cast<Eigen::Index>(nf) * na * sweep.dwell_steps;

    sysid::RawTrajectory traj;
    traj.times.resize(rows);
    traj.positions.resize(rows, 2);
    traj.commands.resize(rows, 2);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double noise_sd = model.brownian_sigma * std::sqrt(dt);

    dynamics::ModelParams plant{model.a0_true, dt};
    Vec2 p = Vec2::Zero();
    Eigen::Index k = 0;
    for (int fi = 0; fi < nf; ++fi) {
        const double f = fi * sweep.f_step;
        for (int ai = 0; ai < na; ++ai) {
            const double alpha = ai * sweep.alpha_step_deg * M_PI / 180.0;
            const Vec2 u = dynamics::polar_to_u({f, alpha});
            const Vec2 d = eval_disturbance(model, alpha, f);
            for (int s = 0; s < sweep.dwell_steps; ++s, ++k) {
                traj.times[k] = static_cast<double>(k) * dt;
                traj.positions.row(k) = p.transpose();
                traj.commands.row(k) = u.transpose();
                p = dynamics::step(p, u, d, plant);
                if (noise_sd > 0.0) {
                    p.x() += noise_sd * normal(rng);
                    p.y() += noise_sd * normal(rng);
                }
            }
        }
    }
    return traj;
}

MatX2 circle_reference(double radius, double angular_speed, double dt, double duration) {
    if (!(radius > 0.0) || !(dt > 0.0) || !(duration > 0.0) || angular_speed < 0.0) {
        throw std::invalid_argument("circle_reference: arguments must be positive");
    }
    const Eigen::Index n = static_cast<Eigen::Index>(std::llround(duration / dt)) + 1;
    MatX2 ref(n, 2);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double phase = angular_speed * static_cast<double>(k) * dt;
        ref(k, 0) = radius * std::cos(phase);
        ref(k, 1) = radius * std::sin(phase);
    }
    return ref;
}

MatX2 ScenarioConfig::reference() const {
    if (kind == ScenarioKind::circle) {
        return circle_reference(radius, angular_speed, controller.dt, duration);
    }
    if (waypoints.rows() < 2) {
        throw std::invalid_argument("ScenarioConfig: waypoint scenarios need at least 2 points");
    }
    return waypoints;
}

TrajectoryLog simulate_closed_loop(const ScenarioConfig& scenario, double a0_hat,
                                   const gp::TrainedGP* gp_x, const gp::TrainedGP* gp_y,
                                   std::uint64_t seed) {
    scenario.controller.validate();
    const MatX2 ref = scenario.reference();
    const Eigen::Index steps = ref.rows() - 1;
    if (steps < 1) throw std::invalid_argument("simulate_closed_loop: reference too short");

    const gp::TrainedGP* gx = scenario.use_gp ? gp_x : nullptr;
    const gp::TrainedGP* gy = scenario.use_gp ? gp_y : nullptr;

    const double dt = scenario.controller.dt;
    dynamics::ModelParams plant{scenario.ground_truth.a0_true, dt};

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double noise_sd = scenario.ground_truth.brownian_sigma * std::sqrt(dt);

    TrajectoryLog log;
    log.dt = dt;
    log.records.reserve(static_cast<std::size_t>(steps));

    Vec2 p = scenario.start.value_or(Vec2(ref.row(0).transpose()));
    Vec2 u_prev = Vec2::Zero();

    for (Eigen::Index k = 0; k < steps; ++k) {
        mpc::StepDiagnostics diag;
        const Vec2 u = mpc::mpc_step(p, ref, static_cast<int>(k), gx, gy, a0_hat,
                                     scenario.controller, u_prev, &diag);

        const auto pc = dynamics::u_to_polar(u);
        const Vec2 d_true = eval_disturbance(scenario.ground_truth, pc.heading, pc.freq);

        LogRecord rec;
        rec.t = static_cast<double>(k) * dt;
        rec.ref = ref.row(k).transpose();
        rec.pos = p;
        rec.u = u;
        rec.d_hat = diag.d_hat;
        rec.d_true = d_true;
        rec.objective = diag.objective;
        rec.converged = diag.converged;
        log.records.push_back(rec);

        p = dynamics::step(p, u, d_true, plant);
        if (noise_sd > 0.0) {
            p.x() += noise_sd * normal(rng);
            p.y() += noise_sd * normal(rng);
        }
        u_prev = u;
    }
    return log;
}

Metrics metrics(const TrajectoryLog& log) {
    if (log.records.empty()) throw std::invalid_argument("metrics: empty log");
    Metrics m;
    double sq = 0.0, dsum = 0.0;
    for (const auto& r : log.records) {
        const double err = (r.pos - r.ref).norm();
        sq += err * err;
        m.max_error = std::max(m.max_error, err);
        dsum += (r.d_hat - r.d_true).norm();
    }
    const double n = static_cast<double>(log.records.size());
    m.rms_error = std::sqrt(sq / n);
    m.mean_abs_dhat_error = dsum / n;
    return m;
}

}  // namespace ubot::sim
