#pragma once

#include "ubot/types.hpp"

namespace ubot::dynamics {

/// Rotation frequency (Hz) and heading angle in [0, 2pi).
struct PolarControl {
    double freq = 0.0;
    double heading = 0.0;
};

struct ModelParams {
    double a0 = 1.0; ///< effective radius, um/(s*Hz)
    double dt = 0.1; ///< s

    void validate() const;
};

/// u = f * (cos(alpha), sin(alpha)).
Vec2 polar_to_u(const PolarControl& pc);

/// f = |u|, alpha = atan2(uy, ux) normalized to [0, 2pi); u = 0 maps to
/// (f=0, alpha=0).
PolarControl u_to_polar(const Vec2& u);

/// Discrete update p' = p + a0*dt*u + D*dt.
Vec2 step(const Vec2& p, const Vec2& u, const Vec2& disturbance, const ModelParams& params);

/// Wraps an angle into [0, 2pi).
double wrap_angle(double alpha);

}  // namespace ubot::dynamics
