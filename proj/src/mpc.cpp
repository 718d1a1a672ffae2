#include "ubot/mpc.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "json.hpp"
#include "ubot/dynamics.hpp"

namespace ubot::mpc {

namespace {

bool is_psd(const Mat2& M) {
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff())) {
        return false;
    }
    Eigen::SelfAdjointEigenSolver<Mat2> es(M);
    return es.eigenvalues().minCoeff() >= -1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff());
}

}  // namespace

void MPCConfig::validate() const {
    if (horizon_T < 1) throw std::invalid_argument("MPCConfig: horizon_T must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("MPCConfig: dt must be positive");
    if (!(solver_tol > 0.0)) throw std::invalid_argument("MPCConfig: solver_tol must be positive");
    if (max_iters < 1) throw std::invalid_argument("MPCConfig: max_iters must be >= 1");
    if (!(u_min.x() < u_max.x()) || !(u_min.y() < u_max.y())) {
        throw std::invalid_argument("MPCConfig: u_min must be below u_max componentwise");
    }
    if (!is_psd(Q)) throw std::invalid_argument("MPCConfig: Q must be symmetric PSD");
    if (!is_psd(R)) throw std::invalid_argument("MPCConfig: R must be symmetric PSD");
}

QPProblem build_qp(const Vec2& p0, const MatX2& ref, const Vec2& d_hat, double a0_hat,
                   const MPCConfig& cfg) {
    cfg.validate();
    const int T = cfg.horizon_T;
    if (ref.rows() != T) {
        throw std::invalid_argument("build_qp: ref must have exactly horizon_T rows");
    }

    const double b = a0_hat * cfg.dt;
    const Vec2 drift = d_hat * cfg.dt;

    QPProblem qp;
    qp.p0 = p0;
    qp.a0_dt = b;
    qp.drift = drift;
    qp.hessian = MatX::Zero(2 * T, 2 * T);
    qp.gradient = VecX::Zero(2 * T);
    qp.lower.resize(2 * T);
    qp.upper.resize(2 * T);

    // Position error with u eliminated: p_t - r_t = b * sum_{s<=t} u_s + e_t.
    std::vector<Vec2> e(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) {
        e[static_cast<std::size_t>(t - 1)] =
            p0 + static_cast<double>(t) * drift - ref.row(t - 1).transpose();
    }

    for (int s = 1; s <= T; ++s) {
        for (int sp = 1; sp <= T; ++sp) {
            const double count = static_cast<double>(T - std::max(s, sp) + 1);
            qp.hessian.block<2, 2>(2 * (s - 1), 2 * (sp - 1)) = 2.0 * b * b * count * cfg.Q;
        }
        qp.hessian.block<2, 2>(2 * (s - 1), 2 * (s - 1)) += 2.0 * cfg.R;

        Vec2 e_tail = Vec2::Zero();
        for (int t = s; t <= T; ++t) e_tail += e[static_cast<std::size_t>(t - 1)];
        qp.gradient.segment<2>(2 * (s - 1)) = 2.0 * b * cfg.Q * e_tail;

        qp.lower.segment<2>(2 * (s - 1)) = cfg.u_min;
        qp.upper.segment<2>(2 * (s - 1)) = cfg.u_max;
    }

    for (int t = 1; t <= T; ++t) {
        const Vec2& et = e[static_cast<std::size_t>(t - 1)];
        qp.constant += et.dot(cfg.Q * et);
    }
    return qp;
}

namespace {

VecX clamp_box(const VecX& x, const VecX& lo, const VecX& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

double projected_gradient_norm(const VecX& x, const VecX& grad, const VecX& lo, const VecX& hi) {
    return (x - clamp_box(x - grad, lo, hi)).norm();
}

}  // namespace

ControlSequence solve_qp(const QPProblem& qp, const MPCConfig& cfg) {
    const Eigen::Index m = qp.gradient.size();
    const MatX& H = qp.hessian;

    // Gershgorin bound on the largest eigenvalue.
    double L = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        L = std::max(L, H(i, i) + (H.row(i).cwiseAbs().sum() - std::abs(H(i, i))));
    }
    const double step = L > 0.0 ? 1.0 / L : 1.0;

    VecX x = clamp_box(VecX::Zero(m), qp.lower, qp.upper);
    VecX y = x;
    VecX x_prev = x;
    double t_momentum = 1.0;

    auto objective = [&](const VecX& u) { return 0.5 * u.dot(H * u) + qp.gradient.dot(u); };

    bool converged = false;
    int iters = 0;
    double best_obj = objective(x);
    VecX best_x = x;

    for (; iters < cfg.max_iters; ++iters) {
        const VecX grad_y = H * y + qp.gradient;
        x = clamp_box(y - step * grad_y, qp.lower, qp.upper);

        const VecX grad_x = H * x + qp.gradient;
        if (projected_gradient_norm(x, grad_x, qp.lower, qp.upper) <= cfg.solver_tol) {
            converged = true;
            ++iters;
            break;
        }

        // Adaptive restart keeps the momentum sequence monotone.
        if (grad_y.dot(x - x_prev) > 0.0) {
            t_momentum = 1.0;
            y = x;
        } else {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
            y = x + ((t_momentum - 1.0) / t_next) * (x - x_prev);
            y = clamp_box(y, qp.lower, qp.upper);
            t_momentum = t_next;
        }
        x_prev = x;

        const double obj = objective(x);
        if (obj < best_obj) {
            best_obj = obj;
            best_x = x;
        }
    }

    if (!converged) {
        if (objective(x) > best_obj) x = best_x;
    }

    const int T = static_cast<int>(m / 2);
    ControlSequence seq;
    seq.controls.resize(T, 2);
    for (int t = 0; t < T; ++t) seq.controls.row(t) = x.segment<2>(2 * t).transpose();

    seq.predicted_positions.resize(T, 2);
    Vec2 p = qp.p0;
    for (int t = 0; t < T; ++t) {
        p += qp.a0_dt * seq.controls.row(t).transpose() + qp.drift;
        seq.predicted_positions.row(t) = p.transpose();
    }

    seq.objective = objective(x) + qp.constant;
    seq.converged = converged;
    seq.iterations = iters;
    return seq;
}

MatX2 reference_window(const MatX2& full_ref, int step_index, int T) {
    const Eigen::Index n = full_ref.rows();
    if (n < 1) throw std::invalid_argument("reference_window: empty reference");
    MatX2 window(T, 2);
    for (int t = 1; t <= T; ++t) {
        const Eigen::Index idx = std::min<Eigen::Index>(step_index + t, n - 1);
        window.row(t - 1) = full_ref.row(idx);
    }
    return window;
}

Vec2 mpc_step(const Vec2& p0, const MatX2& full_ref, int step_index, const gp::TrainedGP* gp_x,
              const gp::TrainedGP* gp_y, double a0_hat, const MPCConfig& cfg, const Vec2& u_prev,
              StepDiagnostics* diag) {
    if (step_index < 0 || step_index >= full_ref.rows()) {
        throw std::invalid_argument("mpc_step: step_index outside the reference");
    }

    Vec2 d_hat = Vec2::Zero();
    if (gp_x != nullptr && gp_y != nullptr) {
        const auto pc = dynamics::u_to_polar(u_prev);
        VecX query(2);
        query << pc.heading, pc.freq;
        d_hat.x() = gp::predict(*gp_x, query).mean;
        d_hat.y() = gp::predict(*gp_y, query).mean;
    }

    const MatX2 window = reference_window(full_ref, step_index, cfg.horizon_T);
    const QPProblem qp = build_qp(p0, window, d_hat, a0_hat, cfg);
    const ControlSequence seq = solve_qp(qp, cfg);

    if (diag != nullptr) {
        diag->d_hat = d_hat;
        diag->objective = seq.objective;
        diag->converged = seq.converged;
        diag->iterations = seq.iterations;
        diag->predicted_positions = seq.predicted_positions;
    }
    return seq.controls.row(0).transpose();
}

std::string diagnostics_json_line(int step_index, const Vec2& u_applied,
                                  const StepDiagnostics& diag) {
    nlohmann::json j;
    j["step"] = step_index;
    j["u"] = {u_applied.x(), u_applied.y()};
    j["d_hat"] = {diag.d_hat.x(), diag.d_hat.y()};
    j["objective"] = diag.objective;
    j["converged"] = diag.converged;
    j["iterations"] = diag.iterations;
    return j.dump();
}

}  // namespace ubot::mpc
