#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace qform {

using CartVec = Eigen::Vector2d;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Normalizes a finite angle to [0, 2*pi).
inline double wrap_angle(double theta) {
    if (!std::isfinite(theta)) throw std::invalid_argument("wrap_angle: non-finite angle");
    double w = std::fmod(theta, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;  // fmod + add can land exactly on 2*pi
    return w;
}

// a - b reduced to [-pi, pi). Both inputs must already be in [0, 2*pi).
inline double signed_angle_diff(double a, double b) {
    if (!(a >= 0.0 && a < kTwoPi) || !(b >= 0.0 && b < kTwoPi))
        throw std::invalid_argument("signed_angle_diff: angles must be in [0, 2*pi)");
    double d = a - b;
    if (d < -std::numbers::pi) d += kTwoPi;
    if (d >= std::numbers::pi) d -= kTwoPi;
    return d;
}

// Planar position in polar form: r > 0, theta in [0, 2*pi).
struct PolarVec {
    double r = 1.0;
    double theta = 0.0;

    static PolarVec from_cart(const CartVec& v) {
        const double r = v.norm();
        if (!(r > 0.0) || !std::isfinite(r))
            throw std::invalid_argument("PolarVec: zero-length vector has no angle");
        return {r, wrap_angle(std::atan2(v.y(), v.x()))};
    }

    CartVec to_cart() const { return {r * std::cos(theta), r * std::sin(theta)}; }

    void validate() const {
        if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("PolarVec: radius must be positive");
        if (!(theta >= 0.0 && theta < kTwoPi)) throw std::invalid_argument("PolarVec: angle must be in [0, 2*pi)");
    }
};

// Absolute positions of agents 0..N.
using AbsState = std::vector<CartVec>;
// Relative positions along the chain: entry k is the vector from agent k to agent k+1.
using FormationState = std::vector<PolarVec>;

inline FormationState abs_to_rel(const AbsState& q) {
    if (q.size() < 2) throw std::invalid_argument("abs_to_rel: need at least two agents");
    FormationState y;
    y.reserve(q.size() - 1);
    for (std::size_t i = 1; i < q.size(); ++i) {
        const CartVec d = q[i] - q[i - 1];
        if (d.norm() == 0.0)
            throw std::invalid_argument("abs_to_rel: coincident consecutive agents (degenerate edge)");
        y.push_back(PolarVec::from_cart(d));
    }
    return y;
}

inline AbsState rel_to_abs(const FormationState& y, const CartVec& anchor) {
    AbsState q;
    q.reserve(y.size() + 1);
    q.push_back(anchor);
    for (const PolarVec& e : y) {
        e.validate();
        q.push_back(q.back() + e.to_cart());
    }
    return q;
}

}  // namespace qform
