// qubit.hpp
// Probability parametrization of a single qubit: three probabilities
// (p1, p2, p3) of spin projection +1/2 along orthonormal directions
// determine the density matrix. Maps to/from Bloch coordinates, angles,
// and the two-time pure-state matrix.

#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "tomrep/errors.hpp"
#include "tomrep/special_math.hpp"

namespace tomrep::qubit {

using math::cplx;

inline constexpr double default_ball_tol = 1e-9; // quadrature-noise allowance

struct Probabilities {
    double p1 = 0.5, p2 = 0.5, p3 = 0.5;
};

struct BlochVector {
    double x = 0.0, y = 0.0, z = 0.0;
};

struct Angles {
    double phi = 0.0;   // in [0, 2*pi)
    double theta = 0.0; // in [0, pi]
};

// s = |p - center|^2; the quantum ball is s <= 1/4
inline double ball_radius_sq(const Probabilities& p) {
    const double d1 = p.p1 - 0.5, d2 = p.p2 - 0.5, d3 = p.p3 - 0.5;
    return d1 * d1 + d2 * d2 + d3 * d3;
}

inline void validate_probs(const Probabilities& p, double tol = default_ball_tol) {
    for (double v : {p.p1, p.p2, p.p3})
        if (!(v >= -tol && v <= 1.0 + tol))
            throw invalid_state("qubit probabilities: entry " + std::to_string(v) +
                                " outside [0, 1]");
    const double s = ball_radius_sq(p);
    if (s > 0.25 + tol)
        throw invalid_state(
            "qubit probabilities violate the ball inequality "
            "(p1-1/2)^2+(p2-1/2)^2+(p3-1/2)^2 <= 1/4: got " +
            std::to_string(s));
}

// rho = [[p3, (p1-1/2) - i(p2-1/2)], [(p1-1/2) + i(p2-1/2), 1 - p3]]
inline Eigen::Matrix2cd density_from_probs(const Probabilities& p,
                                           double tol = default_ball_tol) {
    validate_probs(p, tol);
    Eigen::Matrix2cd rho;
    const cplx off(p.p1 - 0.5, p.p2 - 0.5); // this is rho_21
    rho(0, 0) = p.p3;
    rho(1, 1) = 1.0 - p.p3;
    rho(1, 0) = off;
    rho(0, 1) = std::conj(off);
    return rho;
}

inline Probabilities probs_from_density(const Eigen::Matrix2cd& rho, double tol = 1e-12) {
    if (std::abs(rho(0, 0).imag()) > tol || std::abs(rho(1, 1).imag()) > tol ||
        std::abs(rho(0, 1) - std::conj(rho(1, 0))) > tol)
        throw invalid_state("probs_from_density: matrix is not Hermitian");
    if (std::abs(rho(0, 0).real() + rho(1, 1).real() - 1.0) > tol)
        throw invalid_state("probs_from_density: trace differs from 1");
    Probabilities p;
    p.p1 = 0.5 + rho(1, 0).real();
    p.p2 = 0.5 + rho(1, 0).imag();
    p.p3 = rho(0, 0).real();
    return p;
}

inline BlochVector bloch_from_probs(const Probabilities& p) {
    return {2.0 * p.p1 - 1.0, 2.0 * p.p2 - 1.0, 2.0 * p.p3 - 1.0};
}

inline Probabilities probs_from_bloch(const BlochVector& b) {
    return {(b.x + 1.0) / 2.0, (b.y + 1.0) / 2.0, (b.z + 1.0) / 2.0};
}

enum class StateClass { interior, pure_surface, invalid };

struct Classification {
    StateClass cls = StateClass::interior;
    double s = 0.0;      // squared distance from the ball center
    double purity = 0.0; // Tr rho^2 = 1/2 + 2 s
};

inline Classification classify_state(const Probabilities& p, double tol = default_ball_tol) {
    Classification c;
    c.s = ball_radius_sq(p);
    c.purity = 0.5 + 2.0 * c.s;
    if (c.s > 0.25 + tol)
        c.cls = StateClass::invalid;
    else if (std::abs(c.s - 0.25) <= tol)
        c.cls = StateClass::pure_surface;
    else
        c.cls = StateClass::interior;
    return c;
}

// phi from the in-plane direction (two-argument arctangent, so the sign of
// p2 - 1/2 resolves the quadrant); theta from the polar component.
inline Angles angles_from_probs(const Probabilities& p, double tol = 1e-12) {
    const double d1 = p.p1 - 0.5, d2 = p.p2 - 0.5, d3 = p.p3 - 0.5;
    const double plane = std::sqrt(d1 * d1 + d2 * d2);
    const double r = std::sqrt(plane * plane + d3 * d3);
    if (plane < tol)
        throw undefined_angle("angles_from_probs: p1 = p2 = 1/2, phi is undefined");
    if (r < tol) throw undefined_angle("angles_from_probs: center of the ball, no direction");
    Angles a;
    a.phi = std::atan2(d2, d1);
    if (a.phi < 0.0) a.phi += 2.0 * math::pi;
    a.theta = std::acos(std::min(1.0, std::max(-1.0, d3 / r)));
    return a;
}

// Pure-state vector in the gauge with nonnegative real first component:
// psi = (sqrt(p3), ((p1-1/2) + i(p2-1/2)) / sqrt(p3)).
inline Eigen::Vector2cd pure_state_vector(const Probabilities& p, double tol = default_ball_tol) {
    const auto c = classify_state(p, tol);
    if (c.cls != StateClass::pure_surface)
        throw invalid_state("pure_state_vector: probabilities are not on the pure surface "
                            "(s = " + std::to_string(c.s) + ")");
    if (p.p3 <= tol)
        throw singularity_error("pure_state_vector: p3 ~ 0, the chosen gauge degenerates");
    Eigen::Vector2cd v;
    v[0] = std::sqrt(p.p3);
    v[1] = cplx(p.p1 - 0.5, p.p2 - 0.5) / std::sqrt(p.p3);
    return v;
}

// rho(t1, t2) = |psi(t1)><psi(t2)| for two pure probability triples.
// At p_a = p_b this is the ordinary density matrix; in general
// rho(t1,t2) = rho(t2,t1)^dagger and Tr rho(t1,t2) = <psi(t2)|psi(t1)>.
inline Eigen::Matrix2cd two_time_matrix(const Probabilities& p_a, const Probabilities& p_b,
                                        double tol = default_ball_tol) {
    const auto va = pure_state_vector(p_a, tol);
    const auto vb = pure_state_vector(p_b, tol);
    return va * vb.adjoint();
}

} // namespace tomrep::qubit
