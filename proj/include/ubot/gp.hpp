#pragma once

#include <cstdint>
#include <string>

#include "ubot/types.hpp"

namespace ubot::gp {

/// Hyperparameters of the RBF + white noise kernel.
struct KernelParams {
    double scale_c = 1.0;   ///< output-scale multiplier, > 0
    VecX length_scales;     ///< one per input dimension, all > 0
    double noise_var = 0.0; ///< white-noise variance on the Gram diagonal, >= 0

    void validate(Eigen::Index dim) const;
};

struct GPPrediction {
    double mean = 0.0;
    double variance = 0.0;
};

/// Exact GP posterior state. Immutable after fit(); predict() is safe for
/// concurrent callers.
struct TrainedGP {
    MatX inputs;      ///< n x d training inputs, standardized
    VecX weights;     ///< solves (K + noise I + jitter I) w = y - y_mean
    MatX chol_factor; ///< lower-triangular L with L L^T = K + noise I + jitter I
    KernelParams params;
    double y_mean = 0.0;
    VecX x_mean;  ///< standardization shift (raw -> standardized)
    VecX x_scale; ///< standardization scale, entries > 0
    double jitter = 0.0; ///< jitter actually used on the Gram diagonal
};

double kernel_eval(const VecX& x, const VecX& x_prime, const KernelParams& params);

/// Gram matrix over the rows of X. Jitter 1e-10 * scale_c is always added to
/// the diagonal; noise_var only when add_noise is set.
MatX gram_matrix(const MatX& X, const KernelParams& params, bool add_noise);

/// Fits by Cholesky factorization. On factorization failure the jitter is
/// escalated x10, at most 3 retries, then NotPositiveDefinite is thrown.
TrainedGP fit(const MatX& X, const VecX& y, const KernelParams& params);

GPPrediction predict(const TrainedGP& gp, const VecX& x_star);

double log_marginal_likelihood(const MatX& X, const VecX& y, const KernelParams& params);

/// Log-uniform search box for hyperparameter selection.
struct SearchSpace {
    double scale_c_min = 1e-3, scale_c_max = 1e3;
    double length_scale_min = 1e-2, length_scale_max = 1e2;
    double noise_var_min = 1e-8, noise_var_max = 1e0;
    int restarts = 8;
    int sweeps = 2;
    std::uint64_t seed = 0;
};

/// Multi-start coordinate-wise golden-section search on the log marginal
/// likelihood, in log space. Deterministic for a fixed seed.
KernelParams optimize_hyperparameters(const MatX& X, const VecX& y, const SearchSpace& space);

std::string to_json(const TrainedGP& gp);
TrainedGP from_json(const std::string& text);

}  // namespace ubot::gp
