#include "ubot/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "ubot/dynamics.hpp"

namespace ubot::sysid {

void RawTrajectory::validate() const {
    const Eigen::Index n = times.size();
    if (positions.rows() != n || commands.rows() != n) {
        throw std::invalid_argument("RawTrajectory: length mismatch between times and rows");
    }
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        if (!(times[i + 1] > times[i])) {
            throw std::invalid_argument("RawTrajectory: times must be strictly increasing");
        }
    }
    if (!positions.allFinite() || !commands.allFinite() || !times.allFinite()) {
        throw std::invalid_argument("RawTrajectory: non-finite entries");
    }
}

MatX2 differentiate(const RawTrajectory& traj) {
    traj.validate();
    const Eigen::Index n = traj.times.size();
    if (n < 3) {
        throw std::invalid_argument("differentiate: need at least 3 samples");
    }

    const double dt_mean = (traj.times[n - 1] - traj.times[0]) / static_cast<double>(n - 1);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const double dt = traj.times[i + 1] - traj.times[i];
        if (std::abs(dt - dt_mean) > 0.01 * dt_mean) {
            throw std::invalid_argument("differentiate: sampling not uniform within 1%");
        }
    }

    MatX2 vel(n, 2);
    vel.row(0) = (traj.positions.row(1) - traj.positions.row(0)) / dt_mean;
    vel.row(n - 1) = (traj.positions.row(n - 1) - traj.positions.row(n - 2)) / dt_mean;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        vel.row(i) = (traj.positions.row(i + 1) - traj.positions.row(i - 1)) / (2.0 * dt_mean);
    }
    return vel;
}

MatX2 lowpass(const MatX2& signal, double cutoff_hz, double sample_hz) {
    if (!(cutoff_hz > 0.0) || !(sample_hz > 0.0)) {
        throw std::invalid_argument("lowpass: cutoff and sample rate must be positive");
    }
    if (cutoff_hz >= 0.5 * sample_hz) {
        throw std::invalid_argument("lowpass: cutoff must be below Nyquist");
    }
    const Eigen::Index n = signal.rows();
    if (n == 0) return signal;

    const double a = std::exp(-2.0 * M_PI * cutoff_hz / sample_hz);

    // Pad length: long enough for the pole response to decay below 1e-15.
    Eigen::Index pad = static_cast<Eigen::Index>(std::ceil(std::log(1e-15) / std::log(a)));
    pad = std::min(pad, n - 1);
    pad = std::max<Eigen::Index>(pad, 0);

    const Eigen::Index m = n + 2 * pad;
    MatX2 ext(m, 2);
    ext.middleRows(pad, n) = signal;
    for (Eigen::Index i = 0; i < pad; ++i) {
        // odd reflection about the end samples
        ext.row(pad - 1 - i) = 2.0 * signal.row(0) - signal.row(1 + i);
        ext.row(pad + n + i) = 2.0 * signal.row(n - 1) - signal.row(n - 2 - i);
    }

    for (int axis = 0; axis < 2; ++axis) {
        double state = ext(0, axis);
        for (Eigen::Index i = 1; i < m; ++i) {
            state = a * state + (1.0 - a) * ext(i, axis);
            ext(i, axis) = state;
        }
        state = ext(m - 1, axis);
        for (Eigen::Index i = m - 2; i >= 0; --i) {
            state = a * state + (1.0 - a) * ext(i, axis);
            ext(i, axis) = state;
        }
    }
    return ext.middleRows(pad, n);
}

VelocityDataset build_velocity_dataset(const RawTrajectory& traj, const MatX2& velocities,
                                       int trim_samples) {
    traj.validate();
    const Eigen::Index n = traj.times.size();
    if (velocities.rows() != n) {
        throw std::invalid_argument("build_velocity_dataset: velocity row count mismatch");
    }
    if (trim_samples < 0) {
        throw std::invalid_argument("build_velocity_dataset: trim_samples must be >= 0");
    }

    const Eigen::Index trim = trim_samples;
    std::vector<Eigen::Index> keep;
    keep.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (trim > 0 && (i < trim || i + trim >= n)) continue;
        bool constant = true;
        for (Eigen::Index j = std::max<Eigen::Index>(0, i - trim);
             j <= std::min(n - 1, i + trim); ++j) {
            if ((traj.commands.row(j).array() != traj.commands.row(i).array()).any()) {
                constant = false;
                break;
            }
        }
        if (constant) keep.push_back(i);
    }

    VelocityDataset out;
    const Eigen::Index m = static_cast<Eigen::Index>(keep.size());
    out.inputs.resize(m, 2);
    out.controls_u.resize(m, 2);
    out.velocities.resize(m, 2);
    for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index i = keep[static_cast<std::size_t>(r)];
        const auto pc = dynamics::u_to_polar(traj.commands.row(i).transpose());
        out.inputs(r, 0) = pc.heading;
        out.inputs(r, 1) = pc.freq;
        out.controls_u.row(r) = traj.commands.row(i);
        out.velocities.row(r) = velocities.row(i);
    }
    return out;
}

namespace {

struct AxisOls {
    double slope, intercept, r2;
};

AxisOls ols_with_intercept(const VecX& u, const VecX& v, const char* axis_name) {
    const Eigen::Index n = u.size();
    const double u_mean = u.mean();
    const double v_mean = v.mean();
    const double suu = (u.array() - u_mean).square().sum();
    if (suu <= 1e-12 * static_cast<double>(n) * std::max(1.0, u_mean * u_mean)) {
        throw std::invalid_argument(std::string("fit_linear: control is constant on the ") +
                                    axis_name + " axis");
    }
    const double suv = ((u.array() - u_mean) * (v.array() - v_mean)).sum();
    AxisOls fit;
    fit.slope = suv / suu;
    fit.intercept = v_mean - fit.slope * u_mean;
    const double ss_tot = (v.array() - v_mean).square().sum();
    const double ss_res = (v.array() - fit.intercept - fit.slope * u.array()).square().sum();
    if (ss_tot > 0.0) {
        fit.r2 = 1.0 - ss_res / ss_tot;
    } else {
        fit.r2 = ss_res > 0.0 ? -std::numeric_limits<double>::infinity() : 1.0;
    }
    return fit;
}

}  // namespace

LinearFit fit_linear(const VelocityDataset& data) {
    if (data.controls_u.rows() < 2) {
        throw std::invalid_argument("fit_linear: need at least 2 samples");
    }
    const auto fx = ols_with_intercept(data.controls_u.col(0), data.velocities.col(0), "x");
    const auto fy = ols_with_intercept(data.controls_u.col(1), data.velocities.col(1), "y");
    LinearFit out;
    out.a0x = fx.slope;
    out.a0y = fy.slope;
    out.dcx = fx.intercept;
    out.dcy = fy.intercept;
    out.r2x = fx.r2;
    out.r2y = fy.r2;
    return out;
}

double effective_radius(const LinearFit& fit) {
    return std::sqrt(0.5 * (fit.a0x * fit.a0x + fit.a0y * fit.a0y));
}

ResidualDataset residuals(const VelocityDataset& data, double a0_hat) {
    ResidualDataset out;
    out.inputs = data.inputs;
    out.residuals_x = data.velocities.col(0) - a0_hat * data.controls_u.col(0);
    out.residuals_y = data.velocities.col(1) - a0_hat * data.controls_u.col(1);
    return out;
}

namespace {

// Evenly spaced picks from indices ordered by (f, alpha), so a cap on the GP
// training size still covers the whole sweep range.
std::vector<Eigen::Index> stratified_cap(const std::vector<Eigen::Index>& idx, const MatX2& inputs,
                                         int cap) {
    if (static_cast<int>(idx.size()) <= cap) return idx;
    std::vector<Eigen::Index> ordered = idx;
    std::sort(ordered.begin(), ordered.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (inputs(a, 1) != inputs(b, 1)) return inputs(a, 1) < inputs(b, 1);
        if (inputs(a, 0) != inputs(b, 0)) return inputs(a, 0) < inputs(b, 0);
        return a < b;
    });
    std::vector<Eigen::Index> picked;
    picked.reserve(static_cast<std::size_t>(cap));
    const double stride = static_cast<double>(ordered.size()) / cap;
    for (int k = 0; k < cap; ++k) {
        picked.push_back(ordered[static_cast<std::size_t>(k * stride)]);
    }
    return picked;
}

MatX gather_inputs(const MatX2& inputs, const std::vector<Eigen::Index>& idx) {
    MatX out(static_cast<Eigen::Index>(idx.size()), 2);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = inputs.row(idx[r]);
    }
    return out;
}

VecX gather(const VecX& v, const std::vector<Eigen::Index>& idx) {
    VecX out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out[static_cast<Eigen::Index>(r)] = v[idx[r]];
    }
    return out;
}

gp::TrainedGP train_axis(const MatX2& inputs, const VecX& targets,
                         const std::vector<Eigen::Index>& train_idx, const TrainOptions& opts) {
    const VecX y = gather(targets, train_idx);
    const double var = (y.array() - y.mean()).square().mean();

    if (var <= 0.0) {
        // Constant targets: the centered GP is identically zero; any valid
        // hyperparameters reproduce the constant.
        gp::KernelParams p;
        p.scale_c = 1.0;
        p.length_scales = VecX::Ones(2);
        p.noise_var = 1e-8;
        return gp::fit(gather_inputs(inputs, train_idx), y, p);
    }

    gp::SearchSpace space = opts.space;
    space.scale_c_min = opts.space.scale_c_min * var;
    space.scale_c_max = opts.space.scale_c_max * var;
    space.noise_var_min = opts.space.noise_var_min * var;
    space.noise_var_max = opts.space.noise_var_max * var;

    const auto search_idx = stratified_cap(train_idx, inputs, opts.search_subsample);
    const gp::KernelParams params = gp::optimize_hyperparameters(
        gather_inputs(inputs, search_idx), gather(targets, search_idx), space);

    return gp::fit(gather_inputs(inputs, train_idx), y, params);
}

double mean_abs_error(const gp::TrainedGP& model, const MatX2& inputs, const VecX& targets,
                      const std::vector<Eigen::Index>& test_idx) {
    double acc = 0.0;
    for (const Eigen::Index i : test_idx) {
        acc += std::abs(gp::predict(model, inputs.row(i).transpose()).mean - targets[i]);
    }
    return acc / static_cast<double>(test_idx.size());
}

MAEAxisReport axis_report(const gp::TrainedGP& model, const MatX2& inputs, const VecX& targets,
                          const std::vector<Eigen::Index>& train_idx,
                          const std::vector<Eigen::Index>& test_idx, std::uint64_t seed) {
    MAEAxisReport rep;
    rep.mae_abs = mean_abs_error(model, inputs, targets, test_idx);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const Eigen::Index i : test_idx) {
        lo = std::min(lo, targets[i]);
        hi = std::max(hi, targets[i]);
    }
    const double range = hi - lo;
    rep.mae_pct = range > 0.0 ? 100.0 * rep.mae_abs / range : 0.0;
    rep.n_train = static_cast<int>(train_idx.size());
    rep.n_test = static_cast<int>(test_idx.size());
    rep.seed = seed;
    return rep;
}

}  // namespace

DisturbanceModels train_disturbance_models(const ResidualDataset& res, const TrainOptions& opts) {
    const Eigen::Index n = res.inputs.rows();
    if (res.residuals_x.size() != n || res.residuals_y.size() != n) {
        throw std::invalid_argument("train_disturbance_models: length mismatch");
    }
    if (n < 10) {
        throw std::invalid_argument("train_disturbance_models: need at least 10 samples");
    }

    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::mt19937_64 rng(opts.split_seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    const std::size_t n_test = static_cast<std::size_t>(n) / 5;
    std::vector<Eigen::Index> test_idx(perm.begin(), perm.begin() + n_test);
    std::vector<Eigen::Index> train_idx(perm.begin() + n_test, perm.end());
    const auto capped_train = stratified_cap(train_idx, res.inputs, opts.max_train_points);

    DisturbanceModels out;
    out.gp_x = train_axis(res.inputs, res.residuals_x, capped_train, opts);
    out.gp_y = train_axis(res.inputs, res.residuals_y, capped_train, opts);
    out.report.x = axis_report(out.gp_x, res.inputs, res.residuals_x, capped_train, test_idx,
                               opts.split_seed);
    out.report.y = axis_report(out.gp_y, res.inputs, res.residuals_y, capped_train, test_idx,
                               opts.split_seed);
    return out;
}

IdentificationResult identify(const RawTrajectory& traj, const PipelineOptions& opts) {
    RawTrajectory working = traj;
    if (opts.cutoff_hz > 0.0) {
        const Eigen::Index n = traj.times.size();
        if (n < 2) throw std::invalid_argument("identify: need at least 2 samples");
        const double sample_hz =
            static_cast<double>(n - 1) / (traj.times[n - 1] - traj.times[0]);
        working.positions = lowpass(traj.positions, opts.cutoff_hz, sample_hz);
    }

    IdentificationResult out;
    const MatX2 vel = differentiate(working);
    out.dataset = build_velocity_dataset(working, vel, opts.trim_samples);
    out.linear_fit = fit_linear(out.dataset);
    out.a0_hat = effective_radius(out.linear_fit);
    out.residual_data = residuals(out.dataset, out.a0_hat);
    out.models = train_disturbance_models(out.residual_data, opts.train);
    return out;
}

}  // namespace ubot::sysid
