#pragma once

#include <numbers>
#include <string>

#include "ubot/gp.hpp"
#include "ubot/types.hpp"

namespace ubot::mpc {

struct MPCConfig {
    Mat2 Q = Mat2::Identity();
    Mat2 R = 0.01 * Mat2::Identity();
    int horizon_T = 5;
    double dt = 0.03; ///< s
    Vec2 u_min = Vec2::Constant(-40.0 / std::numbers::sqrt2);
    Vec2 u_max = Vec2::Constant(40.0 / std::numbers::sqrt2);
    double solver_tol = 1e-8;
    int max_iters = 5000;

    void validate() const;
};

/// Condensed box-constrained QP over the stacked control sequence
/// u = [u_1; ...; u_T]: minimize 0.5 u'Hu + g'u + constant.
struct QPProblem {
    MatX hessian;  ///< 2T x 2T, symmetric positive definite
    VecX gradient; ///< 2T
    VecX lower, upper;
    double constant = 0.0; ///< dropped cost terms, kept for reporting

    // Rollout context so a solution can be expanded back into positions.
    Vec2 p0 = Vec2::Zero();
    double a0_dt = 0.0; ///< a0_hat * dt
    Vec2 drift = Vec2::Zero(); ///< d_hat * dt
};

struct ControlSequence {
    MatX2 controls;            ///< T x 2
    MatX2 predicted_positions; ///< T x 2, reconstructed through the dynamics
    double objective = 0.0;    ///< 0.5 u'Hu + g'u + constant at the solution
    bool converged = true;
    int iterations = 0;
};

/// Eliminates positions through p_t = p_{t-1} + a0*dt*u_t + d_hat*dt and
/// condenses the horizon cost over the stacked controls. ref must have
/// exactly horizon_T rows.
QPProblem build_qp(const Vec2& p0, const MatX2& ref, const Vec2& d_hat, double a0_hat,
                   const MPCConfig& cfg);

/// Projected gradient descent with Nesterov acceleration and fixed step 1/L
/// (L bounded via Gershgorin). Terminates when the unit-step projected
/// gradient norm drops below solver_tol; otherwise returns the best iterate
/// with converged=false.
ControlSequence solve_qp(const QPProblem& qp, const MPCConfig& cfg);

/// Rows step_index+1 ... step_index+T of full_ref; rows past the end repeat
/// the final waypoint.
MatX2 reference_window(const MatX2& full_ref, int step_index, int T);

struct StepDiagnostics {
    Vec2 d_hat = Vec2::Zero();
    double objective = 0.0;
    bool converged = true;
    int iterations = 0;
    MatX2 predicted_positions;
};

/// One receding-horizon step: queries both disturbance GPs at the (alpha, f)
/// of the previously applied control, builds and solves the QP over the next
/// horizon_T reference points and returns the first control. Null GPs give
/// the no-learning baseline d_hat = 0.
Vec2 mpc_step(const Vec2& p0, const MatX2& full_ref, int step_index, const gp::TrainedGP* gp_x,
              const gp::TrainedGP* gp_y, double a0_hat, const MPCConfig& cfg, const Vec2& u_prev,
              StepDiagnostics* diag = nullptr);

/// One JSON object per control step, for post-hoc analysis.
std::string diagnostics_json_line(int step_index, const Vec2& u_applied,
                                  const StepDiagnostics& diag);

}  // namespace ubot::mpc
