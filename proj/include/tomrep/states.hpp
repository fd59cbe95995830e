// states.hpp
// Conventional-representation states: oscillator eigenfunctions, coherent
// states, generic Gaussian packets exp(-A x^2 + B x + C), and the vacuum of
// an oscillator with time-dependent frequency. Units hbar = m = 1, omega(0)=1.

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tomrep/errors.hpp"
#include "tomrep/special_math.hpp"

namespace tomrep::states {

using math::cplx;

// psi_n(x) = pi^{-1/4} H_n(x) e^{-x^2/2} / sqrt(2^n n!), via the
// orthonormal-scaled recurrence so large n never overflows.
inline double fock_psi(int n, double x) {
    if (n < 0 || n > 100)
        throw range_error("fock_psi: n must be in [0, 100], got " + std::to_string(n));
    return math::pi_quarter_inv * math::hermite_scaled(n, x) * std::exp(-0.5 * x * x);
}

// ---------------------------------------------------------------------------
// Gaussian packets
// ---------------------------------------------------------------------------

// psi(x) = exp(-A x^2 + B x + C), Re A > 0. Re C fixes the norm, Im C is a
// global phase.
struct GaussianState {
    cplx A{0.5, 0.0};
    cplx B{0.0, 0.0};
    cplx C{0.0, 0.0};
};

inline cplx gaussian_psi(const GaussianState& g, double x) {
    return std::exp((-g.A * x + g.B) * x + g.C);
}

// Adjusts Re C so that the norm integral is exactly 1; Im C is untouched.
inline GaussianState normalize(GaussianState g) {
    const double a = g.A.real();
    if (!(a > 0.0))
        throw non_normalizable("gaussian normalize: Re A must be positive, got " +
                               std::to_string(a));
    const double b = g.B.real();
    const double re_c = -0.25 * std::log(math::pi / (2.0 * a)) - b * b / (4.0 * a);
    g.C = cplx(re_c, g.C.imag());
    return g;
}

// Normalized packet with zero phase offset.
inline GaussianState gaussian_packet(cplx A, cplx B) {
    GaussianState g;
    g.A = A;
    g.B = B;
    g.C = cplx(0.0, 0.0);
    return normalize(g);
}

// Coherent state |alpha>: A = 1/2, B = sqrt(2) alpha,
// C = -alpha^2/2 - |alpha|^2/2 - (1/4) ln pi. Carries the conventional
// phase (so it matches the Fock-series expansion, not just up to phase).
inline GaussianState coherent_packet(cplx alpha) {
    GaussianState g;
    g.A = cplx(0.5, 0.0);
    g.B = std::sqrt(2.0) * alpha;
    g.C = -0.5 * alpha * alpha - 0.5 * std::norm(alpha) - cplx(0.25 * std::log(math::pi), 0.0);
    return g;
}

inline cplx coherent_psi(cplx alpha, double x) { return gaussian_psi(coherent_packet(alpha), x); }

struct GaussianStats {
    double mean_x = 0.0;
    double mean_p = 0.0;
    double var_x = 0.0;  // (delta x)^2
    double var_p = 0.0;  // (delta p)^2
    double cov_xp = 0.0; // symmetrized covariance
    double corr = 0.0;   // r = cov / sqrt(var_x var_p)
};

// Closed-form moments of a normalized packet. The identity
// var_x * var_p * (1 - r^2) = 1/4 holds exactly (pure Gaussian).
inline GaussianStats gaussian_stats(const GaussianState& g) {
    const double a = g.A.real();
    if (!(a > 0.0)) throw non_normalizable("gaussian_stats: Re A must be positive");
    GaussianStats s;
    s.mean_x = g.B.real() / (2.0 * a);
    s.mean_p = g.B.imag() - 2.0 * s.mean_x * g.A.imag();
    s.var_x = 1.0 / (4.0 * a);
    s.var_p = std::norm(g.A) / a;
    s.cov_xp = -g.A.imag() / (2.0 * a);
    s.corr = -g.A.imag() / std::abs(g.A);
    return s;
}

// ---------------------------------------------------------------------------
// Parametric oscillator (time-dependent frequency)
// ---------------------------------------------------------------------------

// omega(t) with its interior discontinuities listed, so the integrator can
// split segments exactly at the jumps.
struct FrequencyProfile {
    std::function<double(double)> omega;
    std::vector<double> breakpoints;
    std::string name = "constant";
};

inline FrequencyProfile constant_profile() {
    FrequencyProfile p;
    p.omega = [](double) { return 1.0; };
    p.name = "constant";
    return p;
}

// omega = 1 for t < t_step, omega_after from t_step on.
inline FrequencyProfile step_profile(double t_step, double omega_after) {
    FrequencyProfile p;
    p.omega = [t_step, omega_after](double t) { return t < t_step ? 1.0 : omega_after; };
    p.breakpoints = {t_step};
    p.name = "step:" + std::to_string(t_step) + ":" + std::to_string(omega_after);
    return p;
}

// Grid solution of eps'' + omega^2(t) eps = 0 with eps(0)=1, eps'(0)=i.
// The Wronskian eps' eps* - eps eps'* = 2i is conserved; phase[] is the
// continuously unwrapped argument of eps used to pick the branch of
// eps^{-1/2}.
struct ParametricSolution {
    std::vector<double> times;
    std::vector<cplx> eps;
    std::vector<cplx> epsdot;
    std::vector<double> phase; // unwrapped arg(eps), phase[0] = 0
    FrequencyProfile profile;
    double step = 0.0;

    struct Point {
        cplx eps;
        cplx epsdot;
        double phase;
    };

    // Cubic Hermite interpolation between grid points; derivatives of eps'
    // come from the equation itself (eps'' = -omega^2 eps).
    Point at(double t) const {
        if (times.empty()) throw range_error("ParametricSolution: empty solution");
        const double t0 = times.front(), t1 = times.back();
        if (t < t0 - 1e-12 || t > t1 + 1e-12)
            throw range_error("ParametricSolution: t outside solved range");
        t = std::min(std::max(t, t0), t1);
        auto hi = std::lower_bound(times.begin(), times.end(), t);
        std::size_t k = (hi == times.begin()) ? 0 : std::size_t(hi - times.begin()) - 1;
        if (k + 1 >= times.size()) k = times.size() - 2;
        const double h = times[k + 1] - times[k];
        const double u = (t - times[k]) / h;
        if (u < 1e-14) return {eps[k], epsdot[k], phase[k]};

        auto hermite = [h, u](cplx f0, cplx d0, cplx f1, cplx d1) {
            const double u2 = u * u, u3 = u2 * u;
            return (2 * u3 - 3 * u2 + 1) * f0 + (u3 - 2 * u2 + u) * h * d0 +
                   (-2 * u3 + 3 * u2) * f1 + (u3 - u2) * h * d1;
        };
        const double w0 = profile.omega(times[k]);
        const double w1 = profile.omega(times[k + 1]);
        Point p;
        p.eps = hermite(eps[k], epsdot[k], eps[k + 1], epsdot[k + 1]);
        p.epsdot = hermite(epsdot[k], -w0 * w0 * eps[k], epsdot[k + 1], -w1 * w1 * eps[k + 1]);
        // within one step the phase advance is far below pi, so the
        // relative argument extends the unwrapped branch safely
        p.phase = phase[k] + std::arg(p.eps / eps[k]);
        return p;
    }

    cplx wronskian(std::size_t i) const {
        return epsdot[i] * std::conj(eps[i]) - eps[i] * std::conj(epsdot[i]);
    }
};

inline ParametricSolution epsilon_solve(const FrequencyProfile& profile, double t_end,
                                        double step = 1e-3) {
    if (!(t_end >= 0.0)) throw range_error("epsilon_solve: t_end must be nonnegative");
    if (!profile.omega) throw range_error("epsilon_solve: profile has no omega callable");
    const double w0 = profile.omega(0.0);
    if (std::abs(w0 - 1.0) > 1e-12)
        throw invalid_state("epsilon_solve: profile must have omega(0) = 1, got " +
                            std::to_string(w0));

    // segment ends: interior breakpoints inside (0, t_end), then t_end
    std::vector<double> ends;
    for (double b : profile.breakpoints)
        if (b > 0.0 && b < t_end) ends.push_back(b);
    std::sort(ends.begin(), ends.end());
    ends.push_back(t_end);

    ParametricSolution sol;
    sol.profile = profile;
    sol.step = step;
    sol.times.push_back(0.0);
    sol.eps.push_back(cplx(1.0, 0.0));
    sol.epsdot.push_back(cplx(0.0, 1.0));
    sol.phase.push_back(0.0);

    math::VecXc y(2);
    y[0] = cplx(1.0, 0.0);
    y[1] = cplx(0.0, 1.0);
    double t_cur = 0.0;
    for (double seg_end : ends) {
        if (seg_end <= t_cur) continue;
        // frequency sampled just inside the segment, so RK4 stage points at
        // the right edge cannot pick up the post-jump value
        const double t_lo = t_cur, t_hi = seg_end;
        math::OdeRhs rhs = [&profile, t_lo, t_hi](double t, const math::VecXc& v, math::VecXc& d) {
            const double tc = std::min(std::max(t, t_lo), t_hi);
            const double w = profile.omega(std::min(tc, t_hi - 1e-12 * (1 + std::abs(t_hi))));
            d[0] = v[1];
            d[1] = -w * w * v[0];
        };
        auto seg = math::ode_solve(rhs, y, t_cur, seg_end, step);
        for (std::size_t i = 1; i < seg.times.size(); ++i) {
            sol.times.push_back(seg.times[i]);
            sol.eps.push_back(seg.values[i][0]);
            sol.epsdot.push_back(seg.values[i][1]);
            const std::size_t m = sol.eps.size();
            sol.phase.push_back(sol.phase[m - 2] + std::arg(sol.eps[m - 1] / sol.eps[m - 2]));
        }
        y = seg.values.back();
        t_cur = seg_end;
    }
    return sol;
}

// The evolved vacuum as a Gaussian packet:
// psi_0(x,t) = pi^{-1/4} eps^{-1/2} exp(i eps' x^2 / (2 eps)), i.e.
// A = -i eps'/(2 eps), B = 0, C = -(1/4) ln pi - (1/2) log eps with the
// branch of log eps taken from the unwrapped phase.
inline GaussianState parametric_gaussian(const ParametricSolution& sol, double t) {
    const auto p = sol.at(t);
    const double mod = std::abs(p.eps);
    if (mod < 1e-12) throw singularity_error("parametric_gaussian: |eps| vanished");
    GaussianState g;
    g.A = cplx(0.0, -0.5) * (p.epsdot / p.eps);
    g.B = cplx(0.0, 0.0);
    g.C = cplx(-0.25 * std::log(math::pi) - 0.5 * std::log(mod), -0.5 * p.phase);
    return g;
}

inline cplx parametric_vacuum_psi(const ParametricSolution& sol, double t, double x) {
    return gaussian_psi(parametric_gaussian(sol, t), x);
}

struct ParametricDensity {
    Eigen::MatrixXcd rho;
    double trace_deficit = 0.0; // 1 - sum of kept diagonal elements
};

// Fock-basis density matrix of the evolved vacuum, rho_{nn'} = c_n c_{n'}*
// with c_n = integral of psi_n(x) psi_0(x,t) dx (psi_n real). Rank one,
// Hermitian, trace 1 up to truncation.
inline ParametricDensity parametric_density_matrix(const ParametricSolution& sol, double t,
                                                   int N) {
    if (N < 1 || N > 64) throw range_error("parametric_density_matrix: N must be in [1, 64]");
    const GaussianState g = parametric_gaussian(sol, t);
    Eigen::VectorXcd c(N);
    math::AdaptiveConfig cfg;
    cfg.abs_tol = 1e-12;
    cfg.rel_tol = 1e-11;
    for (int n = 0; n < N; ++n) {
        auto f = [&](double x) { return fock_psi(n, x) * gaussian_psi(g, x); };
        c[n] = math::integrate_line(f, cfg).value;
    }
    ParametricDensity out;
    out.rho = c * c.adjoint();
    out.trace_deficit = 1.0 - out.rho.diagonal().real().sum();
    return out;
}

// ---------------------------------------------------------------------------
// State specification (shared by CLI, tomography, transitions)
// ---------------------------------------------------------------------------

struct StateSpec {
    enum class Kind { fock, coherent, gaussian, parametric_vacuum };
    Kind kind = Kind::fock;
    int n = 0;                     // fock
    cplx alpha{0.0, 0.0};          // coherent
    cplx A{0.5, 0.0}, B{0.0, 0.0}; // gaussian
    FrequencyProfile profile;      // parametric_vacuum
    double t = 0.0;                // parametric_vacuum

    static StateSpec fock(int n) {
        StateSpec s;
        s.kind = Kind::fock;
        s.n = n;
        return s;
    }
    static StateSpec coherent(cplx alpha) {
        StateSpec s;
        s.kind = Kind::coherent;
        s.alpha = alpha;
        return s;
    }
    static StateSpec gaussian(cplx A, cplx B) {
        StateSpec s;
        s.kind = Kind::gaussian;
        s.A = A;
        s.B = B;
        return s;
    }
    static StateSpec parametric_vacuum(FrequencyProfile profile, double t) {
        StateSpec s;
        s.kind = Kind::parametric_vacuum;
        s.profile = std::move(profile);
        s.t = t;
        return s;
    }
};

// Evaluable wavefunction resolved from a StateSpec. Gaussian-family states
// also expose their packet so closed forms can be used downstream.
struct Wavefunction {
    std::function<cplx(double)> psi;
    std::optional<GaussianState> gaussian; // set for non-Fock states
    int fock_n = -1;                       // set (>= 0) for Fock states
};

inline Wavefunction make_wavefunction(const StateSpec& spec) {
    Wavefunction w;
    switch (spec.kind) {
    case StateSpec::Kind::fock: {
        if (spec.n < 0 || spec.n > 100) throw invalid_state("state: fock n out of range");
        const int n = spec.n;
        w.psi = [n](double x) { return cplx(fock_psi(n, x), 0.0); };
        w.fock_n = n;
        break;
    }
    case StateSpec::Kind::coherent: {
        const GaussianState g = coherent_packet(spec.alpha);
        w.psi = [g](double x) { return gaussian_psi(g, x); };
        w.gaussian = g;
        break;
    }
    case StateSpec::Kind::gaussian: {
        const GaussianState g = gaussian_packet(spec.A, spec.B);
        w.psi = [g](double x) { return gaussian_psi(g, x); };
        w.gaussian = g;
        break;
    }
    case StateSpec::Kind::parametric_vacuum: {
        auto sol = epsilon_solve(spec.profile, spec.t);
        const GaussianState g = parametric_gaussian(sol, spec.t);
        w.psi = [g](double x) { return gaussian_psi(g, x); };
        w.gaussian = g;
        break;
    }
    }
    return w;
}

} // namespace tomrep::states
