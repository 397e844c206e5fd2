#pragma once

#include "qform/geometry.hpp"

#include <cmath>
#include <cstdint>
#include <string>

namespace qform {

// Project-wide rounding rule: nearest integer, ties away from zero.
// Symmetric (round(x) == -round(-x)), which is what makes the paired integer
// updates in gossip::step conserve the sum exactly.
inline std::int64_t round_half_away(double x) { return std::llround(x); }

// How the angular deviation is lifted to a real number before scaling by omega:
//   FullTurn — the [0, 2*pi) representative of the group difference,
//   Shortest — the principal (-pi, pi] geodesic, as for means of rotations.
enum class AngularMean { FullTurn, Shortest };

// Log-polar grid: radii {a^k}, angles {k * 2*pi/M}, plus the pair-averaging weight.
struct QuantizerConfig {
    double a = 2.0;       // radial grid ratio, > 1
    int M = 8;            // angular sector count, >= 2
    double omega = 0.618; // averaging weight, in (1/2, 3/4)
    AngularMean angular_mean = AngularMean::FullTurn;

    double theta_b() const { return kTwoPi / M; }
    double log_a() const { return std::log(a); }

    void validate() const {
        if (!(a > 1.0) || !std::isfinite(a)) throw std::invalid_argument("quantizer: step radius a must be > 1");
        if (M < 2) throw std::invalid_argument("quantizer: sector count M must be >= 2");
        if (!(omega > 0.5 && omega < 0.75)) throw std::invalid_argument("quantizer: omega must be in (1/2, 3/4)");
    }

    static QuantizerConfig make(double a, int M, double omega = 0.618) {
        QuantizerConfig cfg{a, M, omega};
        cfg.validate();
        return cfg;
    }
};

inline std::int64_t index_r(const QuantizerConfig& cfg, double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("index_r: radius must be positive");
    return round_half_away(std::log(r) / cfg.log_a());
}

// Nearest grid radius a^k. Works in log space so extreme indices never overflow
// an intermediate.
inline double quantize_r(const QuantizerConfig& cfg, double r) {
    return std::exp(static_cast<double>(index_r(cfg, r)) * cfg.log_a());
}

inline double radius_at(const QuantizerConfig& cfg, std::int64_t k) {
    return std::exp(static_cast<double>(k) * cfg.log_a());
}

inline int index_theta(const QuantizerConfig& cfg, double theta) {
    if (!(theta >= 0.0 && theta < kTwoPi)) throw std::invalid_argument("index_theta: angle must be in [0, 2*pi)");
    return static_cast<int>(round_half_away(theta / cfg.theta_b()) % cfg.M);
}

inline double quantize_theta(const QuantizerConfig& cfg, double theta) {
    return index_theta(cfg, theta) * cfg.theta_b();
}

inline double angle_at(const QuantizerConfig& cfg, int k) {
    return wrap_angle(((k % cfg.M + cfg.M) % cfg.M) * cfg.theta_b());
}

// Radial difference and weighted mean live in the multiplicative group.
inline double diff_r(double ri, double rj) { return ri / rj; }

inline double mean_omega_r(const QuantizerConfig& cfg, double ri, double rj) {
    return std::exp((1.0 - cfg.omega) * std::log(ri) + cfg.omega * std::log(rj));
}

// Angular difference in the rotation group, reduced to [0, 2*pi).
inline double diff_theta(double ti, double tj) { return wrap_angle(ti - tj); }

inline double mean_omega_theta(const QuantizerConfig& cfg, double ti, double tj, AngularMean mode) {
    if (!(ti >= 0.0 && ti < kTwoPi) || !(tj >= 0.0 && tj < kTwoPi))
        throw std::invalid_argument("mean_omega_theta: angles must be in [0, 2*pi)");
    const double dev = mode == AngularMean::FullTurn ? wrap_angle(tj - ti) : signed_angle_diff(tj, ti);
    return wrap_angle(ti + cfg.omega * dev);
}

inline double mean_omega_theta(const QuantizerConfig& cfg, double ti, double tj) {
    return mean_omega_theta(cfg, ti, tj, cfg.angular_mean);
}

inline bool on_grid_r(const QuantizerConfig& cfg, double r, double tol = 1e-9) {
    if (!(r > 0.0) || !std::isfinite(r)) return false;
    const double k = std::log(r) / cfg.log_a();
    return std::abs(k - static_cast<double>(round_half_away(k))) < tol;
}

inline bool on_grid_theta(const QuantizerConfig& cfg, double theta, double tol = 1e-9) {
    if (!(theta >= 0.0 && theta < kTwoPi)) return false;
    const double k = theta / cfg.theta_b();
    return std::abs(k - static_cast<double>(round_half_away(k))) < tol;
}

// Perception contract: the estimate falls in the same grid cell as the truth.
// The truth must itself be a grid point; estimates that are not valid polar
// vectors (r <= 0, non-finite) violate the contract rather than erroring.
inline bool pc_holds(const QuantizerConfig& cfg, const PolarVec& truth, const PolarVec& estimate) {
    if (!on_grid_r(cfg, truth.r) || !on_grid_theta(cfg, truth.theta))
        throw std::invalid_argument("pc_holds: true value must lie on the quantizer grid");
    if (!(estimate.r > 0.0) || !std::isfinite(estimate.r) || !std::isfinite(estimate.theta)) return false;
    return index_r(cfg, estimate.r) == index_r(cfg, truth.r) &&
           index_theta(cfg, wrap_angle(estimate.theta)) == index_theta(cfg, truth.theta);
}

// JSON object {"a": real, "M": int, "omega": real}.
std::string quantizer_to_json(const QuantizerConfig& cfg);
QuantizerConfig quantizer_from_json(const std::string& text);

}  // namespace qform
