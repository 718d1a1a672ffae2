#pragma once

#include <cstdint>

#include "ubot/gp.hpp"
#include "ubot/types.hpp"

namespace ubot::sysid {

/// Logged run: sample times, planar positions (um) and the Cartesian control
/// held over each sampling interval.
struct RawTrajectory {
    VecX times;       ///< strictly increasing, s
    MatX2 positions;  ///< um
    MatX2 commands;   ///< ControlU rows, Hz-equivalent

    void validate() const;
};

/// Per-sample (alpha, f) inputs with the matching Cartesian control and the
/// velocity estimate.
struct VelocityDataset {
    MatX2 inputs;     ///< column 0: alpha (rad), column 1: f (Hz)
    MatX2 controls_u; ///< Cartesian control rows
    MatX2 velocities; ///< um/s
};

struct LinearFit {
    double a0x = 0.0, a0y = 0.0; ///< per-axis slopes
    double dcx = 0.0, dcy = 0.0; ///< intercepts, the mean disturbance, um/s
    double r2x = 0.0, r2y = 0.0; ///< coefficients of determination
};

struct ResidualDataset {
    MatX2 inputs;     ///< (alpha, f) rows
    VecX residuals_x; ///< um/s
    VecX residuals_y; ///< um/s
};

/// Central differences in the interior, one-sided at the ends. Requires
/// uniform sampling within 1%.
MatX2 differentiate(const RawTrajectory& traj);

/// Zero-phase single-pole IIR (forward then backward pass) with coefficient
/// a = exp(-2*pi*cutoff/sample). Signal ends are odd-reflection padded so
/// constant and linear signals pass through unchanged.
MatX2 lowpass(const MatX2& signal, double cutoff_hz, double sample_hz);

/// Pairs velocity rows with commands, converting each command to (alpha, f).
/// Rows whose command is not constant over a +/- trim_samples window are
/// dropped, which removes samples whose finite difference straddles a
/// control switch.
VelocityDataset build_velocity_dataset(const RawTrajectory& traj, const MatX2& velocities,
                                       int trim_samples = 1);

/// Per-axis ordinary least squares of velocity against control with
/// intercept.
LinearFit fit_linear(const VelocityDataset& data);

/// a0_hat = sqrt((a0x^2 + a0y^2) / 2).
double effective_radius(const LinearFit& fit);

/// Residual rows v - a0_hat * u.
ResidualDataset residuals(const VelocityDataset& data, double a0_hat);

struct MAEAxisReport {
    double mae_abs = 0.0; ///< um/s
    double mae_pct = 0.0; ///< % of the test-set peak-to-peak residual range
    int n_train = 0;
    int n_test = 0;
    std::uint64_t seed = 0;
};

struct MAEReport {
    MAEAxisReport x, y;
};

struct TrainOptions {
    std::uint64_t split_seed = 0;
    int max_train_points = 2000;  ///< stratified cap on GP training rows
    int search_subsample = 300;   ///< rows used during hyperparameter search
    gp::SearchSpace space;        ///< bounds rescaled per axis by target variance
};

struct DisturbanceModels {
    gp::TrainedGP gp_x;
    gp::TrainedGP gp_y;
    MAEReport report;
};

/// Deterministic shuffled 80/20 split by seed, per-axis GP training on the
/// 80% portion with held-out MAE evaluation on the rest.
DisturbanceModels train_disturbance_models(const ResidualDataset& res, const TrainOptions& opts);

inline DisturbanceModels train_disturbance_models(const ResidualDataset& res,
                                                  std::uint64_t split_seed) {
    TrainOptions opts;
    opts.split_seed = split_seed;
    return train_disturbance_models(res, opts);
}

struct PipelineOptions {
    double cutoff_hz = 2.0; ///< 0 skips the low-pass stage
    int trim_samples = 1;
    TrainOptions train;
};

struct IdentificationResult {
    LinearFit linear_fit;
    double a0_hat = 0.0;
    VelocityDataset dataset;
    ResidualDataset residual_data;
    DisturbanceModels models;
};

/// The full offline learning phase: filter, differentiate, regress, build
/// residuals and train both disturbance GPs.
IdentificationResult identify(const RawTrajectory& traj, const PipelineOptions& opts);

}  // namespace ubot::sysid
