// transitions.hpp
// Transition probabilities between states, three ways: the Born overlap of
// wavefunctions, the double-tomogram frequency-domain integral, and the
// closed Gaussian reduction of that integral. Cross-method agreement is the
// module's own correctness check.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include "tomrep/errors.hpp"
#include "tomrep/special_math.hpp"
#include "tomrep/states.hpp"
#include "tomrep/tomography.hpp"

namespace tomrep::transitions {

using math::cplx;
using tomography::ReferenceFrame;
using tomography::SymplecticTomogram;

struct TransitionResult {
    double probability = 0.0;
    std::string method;  // "born" | "tomographic" | "gaussian-closed"
    double est_error = 0.0;
};

struct TransitionConfig {
    // Zeros mean "size from the states' moments"; the radial cutoff never
    // shrinks below 10.
    double s_max = 0.0;
    int radial_order = 0;
    int theta_points = 0;
};

namespace detail {

inline double clip_probability(double p, const char* method) {
    if (p < -1e-8 || p > 1.0 + 1e-8)
        throw accuracy_error(std::string(method) + ": probability " +
                                 std::to_string(p) +
                                 " lies outside [0, 1] beyond tolerance",
                             p, std::max(-p, p - 1.0));
    return std::clamp(p, 0.0, 1.0);
}

// Quadrature plan for the (mu, nu) integral of a characteristic product.
// Each factor's magnitude is e^{-s^2 v(theta)/2} x polynomial with the
// directional variance v(theta) = vx cos^2 + 2c cos sin + vp sin^2; for
// number-basis sources the envelope is the isotropic vacuum one (1/2, 1/2)
// and `turn` marks the radius where the state polynomial has died off.
// `drift` is the phase-space displacement driving angular oscillation.
struct CharEnvelope {
    double vx = 0.5, vp = 0.5, c = 0.0;
    double turn = 0.0;
    double drift = 0.0;
};

inline CharEnvelope plan_input(const tomography::PhaseSpaceMoments& m,
                               int source_degree) {
    CharEnvelope in;
    if (source_degree > 0) {
        in.turn = std::sqrt(8.0 * std::max(m.max_variance_rate(), 0.5)) + 3.0;
    } else {
        in.vx = m.var_x;
        in.vp = m.var_p;
        in.c = m.cov_xp;
    }
    in.drift = m.drift_rate();
    return in;
}

struct ProductPlan {
    double s_max;
    int radial;
    int theta;
    double tail;  // size estimate of the discarded radial tail
};

inline ProductPlan plan_product(const CharEnvelope& a, const CharEnvelope& b,
                                const TransitionConfig& cfg) {
    // Joint envelope e^{-s^2 (aj + Rj cos(2 theta - phase))/2}.
    const double aj = 0.5 * (a.vx + a.vp + b.vx + b.vp);
    const double rj = std::hypot(0.5 * (a.vx + b.vx - a.vp - b.vp), a.c + b.c);
    const double vj = std::max(aj - rj, 1e-3);
    const double s_gauss = std::sqrt(2.0 * 30.0 / vj);
    ProductPlan plan;
    plan.s_max = std::clamp(std::max({10.0, s_gauss, a.turn, b.turn}), 10.0, 40.0);
    if (cfg.s_max > 0.0) plan.s_max = cfg.s_max;
    plan.radial = std::max(96, static_cast<int>(std::ceil(14.0 * plan.s_max)));
    // The anisotropic factor e^{z cos 2theta} needs harmonics past z, but
    // only out to the radius where rings still carry mass.
    const double s2_eff =
        std::min(plan.s_max * plan.s_max, 2.0 * 30.0 / vj);
    const double z_eff = 0.5 * rj * s2_eff;
    int T = static_cast<int>(std::max(
        {64.0, std::ceil(1.4 * (a.drift + b.drift) * plan.s_max + 48.0),
         std::ceil(2.0 * z_eff + 10.0 * std::sqrt(z_eff) + 16.0)}));
    if (cfg.radial_order > 0) plan.radial = cfg.radial_order;
    if (cfg.theta_points > 0) T = cfg.theta_points;
    T += T % 2;
    plan.theta = T;
    plan.tail = std::exp(-0.5 * plan.s_max * plan.s_max * vj);
    return plan;
}

// p = (1/2pi) integral of I(f) over the (mu, nu) plane in polar form.
// The integrand of a real tomogram pair obeys I(-f) = conj(I(f)), so the
// even theta grid cancels the imaginary part up to quadrature noise; the
// leftover is reported as a diagnostic.
template <class Integrand>
inline TransitionResult polar_transition(const ProductPlan& plan,
                                         const Integrand& integrand,
                                         const char* method) {
    const math::QuadratureRule radial =
        math::gauss_legendre_rule(plan.radial, 0.0, plan.s_max);
    cplx acc = 0.0;
    for (int r = 0; r < plan.radial; ++r) {
        const double s = radial.nodes[r];
        cplx ring = 0.0;
        for (int t = 0; t < plan.theta; ++t) {
            const double theta = 2.0 * math::pi * t / plan.theta;
            ring += integrand(ReferenceFrame{s * std::cos(theta),
                                             s * std::sin(theta)});
        }
        acc += ring * (radial.weights[r] * s / plan.theta);
    }
    if (std::abs(acc.imag()) > 1e-4)
        throw accuracy_error(std::string(method) + ": imaginary residual " +
                                 std::to_string(acc.imag()) +
                                 " signals a non-converged frame integral",
                             acc, std::abs(acc.imag()));
    TransitionResult res;
    res.method = method;
    res.est_error = std::abs(acc.imag()) + plan.tail;
    res.probability = clip_probability(acc.real(), method);
    return res;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Born rule
// ---------------------------------------------------------------------------

// p = |integral conj(psi1) psi2 dx|^2, closed for Gaussian pairs:
// the product is exp(-(conj A1 + A2) x^2 + (conj B1 + B2) x + conj C1 + C2).
inline TransitionResult born_probability(const states::StateSpec& s1,
                                         const states::StateSpec& s2) {
    const states::Wavefunction w1 = states::make_wavefunction(s1);
    const states::Wavefunction w2 = states::make_wavefunction(s2);
    TransitionResult res;
    res.method = "born";
    if (w1.gaussian && w2.gaussian) {
        const cplx S = std::conj(w1.gaussian->A) + w2.gaussian->A;
        const cplx L = std::conj(w1.gaussian->B) + w2.gaussian->B;
        const cplx overlap = std::sqrt(math::pi / S) *
                             std::exp(L * L / (4.0 * S) +
                                      std::conj(w1.gaussian->C) +
                                      w2.gaussian->C);
        res.probability = detail::clip_probability(std::norm(overlap), "born");
        res.est_error = 1e-15;
        return res;
    }
    const auto r = math::integrate_line(
        [&](double x) { return std::conj(w1.psi(x)) * w2.psi(x); });
    res.probability =
        detail::clip_probability(std::norm(r.value), "born");
    res.est_error = 2.0 * std::abs(r.value) * r.error + r.error * r.error;
    return res;
}

// ---------------------------------------------------------------------------
// Tomographic transition
// ---------------------------------------------------------------------------

// The X and Y integrals of the double-tomogram formula are the tomograms'
// characteristic functions at frequency one, leaving
//   p = (1/2pi) integral phi1(mu, nu) phi2(-mu, -nu) dmu dnu.
inline TransitionResult tomographic_transition(
    const SymplecticTomogram& w1, const SymplecticTomogram& w2,
    const TransitionConfig& cfg = {}) {
    const detail::ProductPlan plan = detail::plan_product(
        detail::plan_input(w1.moments(), w1.source_degree()),
        detail::plan_input(w2.moments(), w2.source_degree()), cfg);
    return detail::polar_transition(
        plan,
        [&](const ReferenceFrame& f) {
            return w1.characteristic(f) *
                   w2.characteristic(ReferenceFrame{-f.mu, -f.nu});
        },
        "tomographic");
}

// ---------------------------------------------------------------------------
// Closed Gaussian reduction
// ---------------------------------------------------------------------------

// For Gaussian states the characteristic product is itself the closed form
//   exp(i [mu dx + nu dp] - (sigma1 + sigma2)/2),
// with dx, dp the mean differences and sigma_i the frame variances; only
// the 2D (mu, nu) quadrature remains.
inline TransitionResult gaussian_transition(const states::GaussianState& g1,
                                            const states::GaussianState& g2,
                                            const TransitionConfig& cfg = {}) {
    const states::GaussianStats a = states::gaussian_stats(g1);
    const states::GaussianStats b = states::gaussian_stats(g2);

    detail::CharEnvelope ia, ib;
    ia.vx = a.var_x;
    ia.vp = a.var_p;
    ia.c = a.cov_xp;
    ib.vx = b.var_x;
    ib.vp = b.var_p;
    ib.c = b.cov_xp;
    ia.drift = std::hypot(a.mean_x, a.mean_p);
    ib.drift = std::hypot(b.mean_x, b.mean_p);
    const detail::ProductPlan plan = detail::plan_product(ia, ib, cfg);

    const double vx = a.var_x + b.var_x;
    const double vp = a.var_p + b.var_p;
    const double cxp = a.cov_xp + b.cov_xp;
    const double dx = a.mean_x - b.mean_x;
    const double dp = a.mean_p - b.mean_p;
    TransitionResult res = detail::polar_transition(
        plan,
        [&](const ReferenceFrame& f) {
            const double sigma = f.mu * f.mu * vx + 2.0 * f.mu * f.nu * cxp +
                                 f.nu * f.nu * vp;
            return std::exp(cplx(-0.5 * sigma, f.mu * dx + f.nu * dp));
        },
        "gaussian-closed");
    return res;
}

}  // namespace tomrep::transitions
