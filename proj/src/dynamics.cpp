#include "ubot/dynamics.hpp"

#include <cmath>

namespace ubot::dynamics {

void ModelParams::validate() const {
    if (!(a0 > 0.0) || !std::isfinite(a0)) {
        throw std::invalid_argument("ModelParams: a0 must be positive");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("ModelParams: dt must be positive");
    }
}

double wrap_angle(double alpha) {
    double a = std::fmod(alpha, 2.0 * M_PI);
    if (a < 0.0) a += 2.0 * M_PI;
    // fmod can return exactly 2pi after the correction when alpha is a tiny
    // negative number.
    if (a >= 2.0 * M_PI) a = 0.0;
    return a;
}

Vec2 polar_to_u(const PolarControl& pc) {
    return {pc.freq * std::cos(pc.heading), pc.freq * std::sin(pc.heading)};
}

PolarControl u_to_polar(const Vec2& u) {
    PolarControl pc;
    pc.freq = u.norm();
    pc.heading = pc.freq > 0.0 ? wrap_angle(std::atan2(u.y(), u.x())) : 0.0;
    return pc;
}

Vec2 step(const Vec2& p, const Vec2& u, const Vec2& disturbance, const ModelParams& params) {
    params.validate();
    return p + params.a0 * params.dt * u + disturbance * params.dt;
}

}  // namespace ubot::dynamics
