#include "ubot/gp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "json.hpp"

namespace ubot::gp {

namespace {

constexpr double kJitterRel = 1e-10;
constexpr int kMaxJitterRetries = 3;

VecX standardize_row(const VecX& x, const VecX& mean, const VecX& scale) {
    return (x - mean).cwiseQuotient(scale);
}

// Squared scaled distance sum_i (a_i - b_i)^2 / l_i^2.
double scaled_sqdist(const VecX& a, const VecX& b, const VecX& ls) {
    return ((a - b).cwiseQuotient(ls)).squaredNorm();
}

struct CholAttempt {
    MatX L;
    double jitter;
};

// Cholesky of K + noise I + jitter I with x10 jitter escalation.
CholAttempt robust_cholesky(const MatX& K_noisy, double base_jitter) {
    const Eigen::Index n = K_noisy.rows();
    double jitter = base_jitter;
    for (int attempt = 0; attempt <= kMaxJitterRetries; ++attempt) {
        MatX G = K_noisy;
        if (attempt > 0) {
            G.diagonal().array() += (jitter - base_jitter);
        }
        Eigen::LLT<MatX> llt(G);
        if (llt.info() == Eigen::Success) {
            return {MatX(llt.matrixL()), jitter};
        }
        jitter *= 10.0;
    }
    throw NotPositiveDefinite("gram matrix not positive definite after jitter escalation (n=" +
                              std::to_string(n) + ")");
}

}  // namespace

void KernelParams::validate(Eigen::Index dim) const {
    if (!(scale_c > 0.0) || !std::isfinite(scale_c)) {
        throw std::invalid_argument("KernelParams: scale_c must be positive");
    }
    if (length_scales.size() != dim) {
        throw std::invalid_argument("KernelParams: length_scales dimension mismatch");
    }
    for (Eigen::Index i = 0; i < length_scales.size(); ++i) {
        if (!(length_scales[i] > 0.0) || !std::isfinite(length_scales[i])) {
            throw std::invalid_argument("KernelParams: length scales must be positive");
        }
    }
    if (noise_var < 0.0 || !std::isfinite(noise_var)) {
        throw std::invalid_argument("KernelParams: noise_var must be non-negative");
    }
}

double kernel_eval(const VecX& x, const VecX& x_prime, const KernelParams& params) {
    if (x.size() != x_prime.size()) {
        throw std::invalid_argument("kernel_eval: input dimensions differ");
    }
    params.validate(x.size());
    return params.scale_c * std::exp(-0.5 * scaled_sqdist(x, x_prime, params.length_scales));
}

MatX gram_matrix(const MatX& X, const KernelParams& params, bool add_noise) {
    const Eigen::Index n = X.rows();
    if (n < 1) {
        throw std::invalid_argument("gram_matrix: need at least one row");
    }
    params.validate(X.cols());

    MatX K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = params.scale_c;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = params.scale_c *
                std::exp(-0.5 * scaled_sqdist(X.row(i).transpose(), X.row(j).transpose(),
                                              params.length_scales));
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    const double extra = kJitterRel * params.scale_c + (add_noise ? params.noise_var : 0.0);
    K.diagonal().array() += extra;
    return K;
}

TrainedGP fit(const MatX& X, const VecX& y, const KernelParams& params) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (n < 1) {
        throw std::invalid_argument("fit: need at least one training point");
    }
    if (y.size() != n) {
        throw std::invalid_argument("fit: X rows and y length differ");
    }
    params.validate(d);

    TrainedGP gp;
    gp.params = params;
    gp.x_mean = X.colwise().mean();
    gp.x_scale = VecX(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const double var = (X.col(j).array() - gp.x_mean[j]).square().mean();
        const double sd = std::sqrt(var);
        gp.x_scale[j] = sd > 1e-12 ? sd : 1.0;
    }
    gp.inputs = (X.rowwise() - gp.x_mean.transpose()).array().rowwise() /
                gp.x_scale.transpose().array();

    gp.y_mean = y.mean();
    const VecX yc = y.array() - gp.y_mean;

    const MatX K = gram_matrix(gp.inputs, params, /*add_noise=*/true);
    auto [L, jitter] = robust_cholesky(K, kJitterRel * params.scale_c);
    gp.chol_factor = std::move(L);
    gp.jitter = jitter;

    gp.weights = gp.chol_factor.triangularView<Eigen::Lower>().solve(yc);
    gp.chol_factor.triangularView<Eigen::Lower>().transpose().solveInPlace(gp.weights);
    return gp;
}

GPPrediction predict(const TrainedGP& gp, const VecX& x_star) {
    if (x_star.size() != gp.inputs.cols()) {
        throw std::invalid_argument("predict: query dimension mismatch");
    }
    const VecX xs = standardize_row(x_star, gp.x_mean, gp.x_scale);

    const Eigen::Index n = gp.inputs.rows();
    VecX k_star(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k_star[i] = gp.params.scale_c *
            std::exp(-0.5 * scaled_sqdist(xs, gp.inputs.row(i).transpose(),
                                          gp.params.length_scales));
    }

    GPPrediction out;
    out.mean = gp.y_mean + k_star.dot(gp.weights);
    const VecX v = gp.chol_factor.triangularView<Eigen::Lower>().solve(k_star);
    out.variance = std::max(0.0, gp.params.scale_c - v.squaredNorm());
    return out;
}

double log_marginal_likelihood(const MatX& X, const VecX& y, const KernelParams& params) {
    const TrainedGP gp = fit(X, y, params);
    const Eigen::Index n = X.rows();
    const VecX yc = y.array() - gp.y_mean;
    const double quad = yc.dot(gp.weights);
    const double logdet = 2.0 * gp.chol_factor.diagonal().array().log().sum();
    return -0.5 * quad - 0.5 * logdet -
           0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

namespace {

// theta layout: [log scale_c, log l_1 .. log l_d, log noise_var]
KernelParams params_from_log(const VecX& theta, Eigen::Index d) {
    KernelParams p;
    p.scale_c = std::exp(theta[0]);
    p.length_scales = theta.segment(1, d).array().exp();
    p.noise_var = std::exp(theta[d + 1]);
    return p;
}

double mll_or_neg_inf(const MatX& X, const VecX& y, const VecX& theta, Eigen::Index d) {
    try {
        const double v = log_marginal_likelihood(X, y, params_from_log(theta, d));
        return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
    } catch (const NotPositiveDefinite&) {
        return -std::numeric_limits<double>::infinity();
    }
}

}  // namespace

KernelParams optimize_hyperparameters(const MatX& X, const VecX& y, const SearchSpace& space) {
    const Eigen::Index d = X.cols();
    const Eigen::Index dim = d + 2;

    VecX lo(dim), hi(dim);
    lo[0] = std::log(space.scale_c_min);
    hi[0] = std::log(space.scale_c_max);
    for (Eigen::Index j = 0; j < d; ++j) {
        lo[1 + j] = std::log(space.length_scale_min);
        hi[1 + j] = std::log(space.length_scale_max);
    }
    lo[d + 1] = std::log(space.noise_var_min);
    hi[d + 1] = std::log(space.noise_var_max);

    std::mt19937_64 rng(space.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    constexpr double kInvPhi = 0.6180339887498949;
    constexpr int kGoldenIters = 20;

    double best_value = -std::numeric_limits<double>::infinity();
    VecX best_theta;

    for (int restart = 0; restart < space.restarts; ++restart) {
        VecX theta(dim);
        for (Eigen::Index k = 0; k < dim; ++k) {
            theta[k] = lo[k] + (hi[k] - lo[k]) * unit(rng);
        }
        double current = mll_or_neg_inf(X, y, theta, d);

        for (int sweep = 0; sweep < space.sweeps; ++sweep) {
            for (Eigen::Index k = 0; k < dim; ++k) {
                double a = lo[k], b = hi[k];
                VecX probe = theta;
                auto eval_at = [&](double t) {
                    probe[k] = t;
                    return mll_or_neg_inf(X, y, probe, d);
                };
                double c1 = b - kInvPhi * (b - a);
                double c2 = a + kInvPhi * (b - a);
                double f1 = eval_at(c1);
                double f2 = eval_at(c2);
                double local_best_t = f1 >= f2 ? c1 : c2;
                double local_best_f = std::max(f1, f2);
                for (int it = 0; it < kGoldenIters; ++it) {
                    if (f1 >= f2) {
                        b = c2;
                        c2 = c1;
                        f2 = f1;
                        c1 = b - kInvPhi * (b - a);
                        f1 = eval_at(c1);
                    } else {
                        a = c1;
                        c1 = c2;
                        f1 = f2;
                        c2 = a + kInvPhi * (b - a);
                        f2 = eval_at(c2);
                    }
                    if (f1 > local_best_f) {
                        local_best_f = f1;
                        local_best_t = c1;
                    }
                    if (f2 > local_best_f) {
                        local_best_f = f2;
                        local_best_t = c2;
                    }
                }
                if (local_best_f > current) {
                    current = local_best_f;
                    theta[k] = local_best_t;
                }
            }
        }

        if (current > best_value) {
            best_value = current;
            best_theta = theta;
        }
    }

    if (!std::isfinite(best_value)) {
        throw NotPositiveDefinite("optimize_hyperparameters: every restart failed to factorize");
    }
    return params_from_log(best_theta, d);
}

namespace {

constexpr int kGPSchemaVersion = 1;

nlohmann::json vec_to_json(const VecX& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

VecX vec_from_json(const nlohmann::json& a) {
    VecX v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
}

}  // namespace

std::string to_json(const TrainedGP& gp) {
    nlohmann::json j;
    j["schema_version"] = kGPSchemaVersion;
    j["scale_c"] = gp.params.scale_c;
    j["length_scales"] = vec_to_json(gp.params.length_scales);
    j["noise_var"] = gp.params.noise_var;
    j["y_mean"] = gp.y_mean;
    j["x_mean"] = vec_to_json(gp.x_mean);
    j["x_scale"] = vec_to_json(gp.x_scale);
    j["jitter"] = gp.jitter;
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < gp.inputs.rows(); ++i) {
        rows.push_back(vec_to_json(gp.inputs.row(i).transpose()));
    }
    j["inputs"] = rows;
    j["weights"] = vec_to_json(gp.weights);
    return j.dump();
}

TrainedGP from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("schema_version").get<int>() != kGPSchemaVersion) {
        throw std::invalid_argument("TrainedGP: unsupported schema_version");
    }
    TrainedGP gp;
    gp.params.scale_c = j.at("scale_c").get<double>();
    gp.params.length_scales = vec_from_json(j.at("length_scales"));
    gp.params.noise_var = j.at("noise_var").get<double>();
    gp.y_mean = j.at("y_mean").get<double>();
    gp.x_mean = vec_from_json(j.at("x_mean"));
    gp.x_scale = vec_from_json(j.at("x_scale"));
    gp.jitter = j.at("jitter").get<double>();
    const auto& rows = j.at("inputs");
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index d = gp.params.length_scales.size();
    gp.inputs.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        gp.inputs.row(i) = vec_from_json(rows[static_cast<std::size_t>(i)]).transpose();
    }
    gp.weights = vec_from_json(j.at("weights"));

    // The Cholesky factor is not serialized; rebuild it from the stored
    // inputs so variance predictions round-trip exactly.
    MatX K = gram_matrix(gp.inputs, gp.params, /*add_noise=*/true);
    K.diagonal().array() += (gp.jitter - kJitterRel * gp.params.scale_c);
    Eigen::LLT<MatX> llt(K);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("TrainedGP: stored gram matrix failed to factorize");
    }
    gp.chol_factor = MatX(llt.matrixL());
    return gp;
}

}  // namespace ubot::gp
