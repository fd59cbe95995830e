// special_math.hpp
// Shared numerical kernels: Hermite polynomials (plain and scaled),
// Gauss-Hermite rules, adaptive quadrature over the real line, and a
// fixed-step RK4 integrator for complex vector fields.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "tomrep/errors.hpp"

namespace tomrep::math {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline const double sqrt_pi = std::sqrt(pi);
inline const double pi_quarter_inv = 1.0 / std::pow(pi, 0.25); // pi^(-1/4)

// ---------------------------------------------------------------------------
// Hermite polynomials
// ---------------------------------------------------------------------------

// Physicists' Hermite H_n(x) by the three-term recurrence
// H_{k+1} = 2 x H_k - 2 k H_{k-1}. Beyond the plain-double range the
// magnitude is carried in a separate power-of-two exponent (sign and scaled
// mantissa stay in double), and the value is reassembled at the end.
inline double hermite_eval(int n, double x) {
    if (n < 0 || n > 200)
        throw range_error("hermite_eval: n must be in [0, 200], got " + std::to_string(n));
    if (!std::isfinite(x)) throw range_error("hermite_eval: x is not finite");
    if (n == 0) return 1.0;
    if (n == 1) return 2.0 * x;

    double hm = 1.0, h = 2.0 * x; // H_{k-1}, H_k
    long exp2 = 0;                // common power-of-two scale
    for (int k = 1; k < n; ++k) {
        double hp = 2.0 * x * h - 2.0 * k * hm;
        hm = h;
        h = hp;
        const double a = std::abs(h);
        if (a > 1e280) { // rescale both registers, track exponent
            h = std::ldexp(h, -1024);
            hm = std::ldexp(hm, -1024);
            exp2 += 1024;
        }
    }
    const double out = std::ldexp(h, static_cast<int>(std::min<long>(exp2, 40000)));
    if (!std::isfinite(out))
        throw range_error("hermite_eval: H_n(x) overflows double for n=" + std::to_string(n));
    return out;
}

// Orthonormal-scaled Hermite h_n(x) = H_n(x) / sqrt(2^n n!).
// Growth is only e^{x^2/2}-like, so it stays finite for the n, x used here.
inline double hermite_scaled(int n, double x) {
    if (n < 0 || n > 512) throw range_error("hermite_scaled: n out of range");
    double hm = 0.0, h = 1.0;
    for (int k = 0; k < n; ++k) {
        double hp = x * std::sqrt(2.0 / (k + 1)) * h - std::sqrt(double(k) / (k + 1)) * hm;
        hm = h;
        h = hp;
    }
    return h;
}

// Generalized Laguerre L_n^{(a)}(x) by upward recurrence.
inline double laguerre(int n, int a, double x) {
    if (n < 0 || a < 0) throw range_error("laguerre: negative index");
    if (n == 0) return 1.0;
    double lm = 1.0, l = 1.0 + a - x;
    for (int k = 1; k < n; ++k) {
        double lp = ((2.0 * k + 1.0 + a - x) * l - (k + a) * lm) / (k + 1.0);
        lm = l;
        l = lp;
    }
    return l;
}

// ---------------------------------------------------------------------------
// Gauss-Hermite rule (weight e^{-x^2})
// ---------------------------------------------------------------------------

struct QuadratureRule {
    std::vector<double> nodes;   // strictly increasing
    std::vector<double> weights; // positive, sum = sqrt(pi)
    int order = 0;
};

// Nodes from the eigenvalues of the Jacobi tridiagonal matrix, polished by
// Newton on the orthonormal Hermite recurrence; weights from the derivative,
// w = 2 / p'_n(x)^2, which keeps full relative accuracy even for the extreme
// nodes (eigenvector-based weights lose it there). Exact for polynomials up
// to degree 2*order-1 against e^{-x^2}.
inline QuadratureRule gauss_hermite_rule(int order) {
    if (order < 1 || order > 256)
        throw range_error("gauss_hermite_rule: order must be in [1, 256], got " +
                          std::to_string(order));
    const int n = order;
    QuadratureRule rule;
    rule.order = n;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);

    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(std::max(n - 1, 1));
    for (int j = 1; j < n; ++j) sub[j - 1] = std::sqrt(0.5 * j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub.head(std::max(n - 1, 0)), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& seeds = es.eigenvalues(); // ascending

    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = seeds[n - 1 - i]; // work the upper half, mirror the rest
        double pp = 0.0;
        for (int it = 0; it < 16; ++it) {
            // p1 = orthonormal Hermite of degree n at z (weight e^{-x^2})
            double p1 = pi_quarter_inv, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(double(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2; // derivative at a root
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-14 * std::max(1.0, std::abs(z))) break;
        }
        rule.nodes[n - 1 - i] = z;
        rule.nodes[i] = -z;
        const double w = 2.0 / (pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    for (int i = 1; i < n; ++i)
        if (!(rule.nodes[i] > rule.nodes[i - 1]))
            throw accuracy_error("gauss_hermite_rule: nodes not separated", rule.nodes[i], 1.0);
    return rule;
}

// Gauss-Legendre rule on [a, b]: nodes by Newton from the cosine seeds,
// weights 2 / ((1 - z^2) P'_n(z)^2) scaled to the interval.
inline QuadratureRule gauss_legendre_rule(int order, double a, double b) {
    if (order < 1 || order > 1024)
        throw range_error("gauss_legendre_rule: order must be in [1, 1024]");
    if (!(b > a)) throw range_error("gauss_legendre_rule: requires b > a");
    QuadratureRule rule;
    rule.order = order;
    rule.nodes.assign(order, 0.0);
    rule.weights.assign(order, 0.0);
    const int m = (order + 1) / 2;
    const double xm = 0.5 * (b + a), xl = 0.5 * (b - a);
    for (int i = 0; i < m; ++i) {
        double z = std::cos(pi * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 64; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < order; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = order * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        rule.nodes[i] = xm - xl * z;
        rule.nodes[order - 1 - i] = xm + xl * z;
        rule.weights[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
        rule.weights[order - 1 - i] = rule.weights[i];
    }
    return rule;
}

// ---------------------------------------------------------------------------
// Quadrature over the real line
// ---------------------------------------------------------------------------

struct IntegrationResult {
    cplx value{0.0, 0.0};
    double error = 0.0;   // absolute error estimate
    long evaluations = 0;
};

struct AdaptiveConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_intervals = 4000;
    double initial_halfwidth = 8.0; // grown automatically until f is negligible
    double max_halfwidth = 48.0;
};

namespace detail {

// Gauss-Kronrod 7-15 pair on [a, b] for a complex integrand.
template <class F>
inline void gk15(const F& f, double a, double b, cplx& kronrod, double& err, long& evals) {
    static const double xgk[8] = {
        0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
        0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
    static const double wgk[8] = {
        0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
        0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
    static const double wg[4] = {
        0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const cplx fc = f(c);
    cplx resk = wgk[7] * fc;
    cplx resg = wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = h * xgk[j];
        const cplx fsum = f(c - dx) + f(c + dx);
        resk += wgk[j] * fsum;
        if (j % 2 == 1) resg += wg[j / 2] * fsum;
    }
    evals += 15;
    kronrod = resk * h;
    err = std::abs((resk - resg) * h);
}

struct Interval {
    double a, b;
    cplx value;
    double err;
};

} // namespace detail

// Adaptive integral of f over the whole real line. Requires f to decay
// with a Gaussian-type envelope; the integration window is grown until the
// tails are negligible, then refined by bisection, worst interval first.
template <class F>
inline IntegrationResult integrate_line(const F& f, const AdaptiveConfig& cfg = {}) {
    long evals = 0;

    // choose the window [-L, L]
    double scale = 0.0;
    for (double x : {0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 3.0, -3.0}) {
        scale = std::max(scale, std::abs(f(x)));
        ++evals;
    }
    const double tail_tol = std::max(1e-300, 1e-18 * (1.0 + scale));
    double L = cfg.initial_halfwidth;
    while (L < cfg.max_halfwidth) {
        const double t = std::max(std::abs(f(L)), std::abs(f(-L)));
        const double t2 = std::max(std::abs(f(L - 0.7)), std::abs(f(-L + 0.7)));
        evals += 4;
        if (t < tail_tol && t2 < tail_tol) break;
        L += 4.0;
    }

    // initial panels
    std::vector<detail::Interval> heap;
    const int n0 = 8;
    for (int i = 0; i < n0; ++i) {
        const double a = -L + 2.0 * L * i / n0;
        const double b = -L + 2.0 * L * (i + 1) / n0;
        detail::Interval iv{a, b, {}, 0.0};
        detail::gk15(f, a, b, iv.value, iv.err, evals);
        heap.push_back(iv);
    }
    auto cmp = [](const detail::Interval& p, const detail::Interval& q) { return p.err < q.err; };
    std::make_heap(heap.begin(), heap.end(), cmp);

    auto totals = [&heap]() {
        cplx v{0.0, 0.0};
        double e = 0.0;
        for (const auto& iv : heap) {
            v += iv.value;
            e += iv.err;
        }
        return std::pair<cplx, double>{v, e};
    };

    // Running totals are updated incrementally and rebuilt exactly every
    // few thousand splits to bound floating-point drift.
    auto [vsum, esum] = totals();
    int since_rebuild = 0;
    while (static_cast<int>(heap.size()) < cfg.max_intervals) {
        if (esum <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(vsum))) {
            auto [v, e] = totals();
            if (e <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(v)))
                return {v, e, evals};
            vsum = v;
            esum = e;
            continue;
        }
        std::pop_heap(heap.begin(), heap.end(), cmp);
        detail::Interval worst = heap.back();
        heap.pop_back();
        vsum -= worst.value;
        esum -= worst.err;
        const double mid = 0.5 * (worst.a + worst.b);
        for (auto [a, b] : {std::pair{worst.a, mid}, std::pair{mid, worst.b}}) {
            detail::Interval iv{a, b, {}, 0.0};
            detail::gk15(f, a, b, iv.value, iv.err, evals);
            vsum += iv.value;
            esum += iv.err;
            heap.push_back(iv);
            std::push_heap(heap.begin(), heap.end(), cmp);
        }
        esum = std::max(esum, 0.0);
        if (++since_rebuild >= 4096) {
            std::tie(vsum, esum) = totals();
            since_rebuild = 0;
        }
    }
    auto [v, e] = totals();
    if (e <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(v))) return {v, e, evals};
    throw accuracy_error("integrate_line: tolerance not reached at max refinement", v, e);
}

// Integral of f over the real line with a fixed Gauss-Hermite rule:
// sum_i w_i e^{x_i^2} f(x_i). Exact when f = e^{-x^2} * polynomial.
template <class F>
inline cplx integrate_line(const F& f, const QuadratureRule& rule) {
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = rule.nodes[i];
        acc += rule.weights[i] * std::exp(x * x) * f(x);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Fixed-step RK4 for complex vector fields
// ---------------------------------------------------------------------------

using VecXc = Eigen::VectorXcd;
using OdeRhs = std::function<void(double t, const VecXc& y, VecXc& dydt)>;

struct OdeSolution {
    std::vector<double> times;  // times[0] == t_begin, last == t_end
    std::vector<VecXc> values;  // one state per recorded time
    double step = 0.0;

    const VecXc& final_state() const { return values.back(); }
};

// Classical 4th-order Runge-Kutta with a fixed step (the last step is
// shortened to land exactly on t_end). record_stride > 1 keeps every
// stride-th state plus the final one.
inline OdeSolution ode_solve(const OdeRhs& rhs, VecXc y0, double t_begin, double t_end,
                             double step, int record_stride = 1) {
    if (!(step > 0.0)) throw range_error("ode_solve: step must be positive");
    if (t_end < t_begin) throw range_error("ode_solve: t_end < t_begin");
    if (record_stride < 1) record_stride = 1;

    OdeSolution sol;
    sol.step = step;
    sol.times.push_back(t_begin);
    sol.values.push_back(y0);

    const auto dim = y0.size();
    VecXc k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    double t = t_begin;
    long istep = 0;
    VecXc y = std::move(y0);

    while (t < t_end - 1e-15 * std::max(1.0, std::abs(t_end))) {
        const double h = std::min(step, t_end - t);
        rhs(t, y, k1);
        tmp = y + (0.5 * h) * k1;
        rhs(t + 0.5 * h, tmp, k2);
        tmp = y + (0.5 * h) * k2;
        rhs(t + 0.5 * h, tmp, k3);
        tmp = y + h * k3;
        rhs(t + h, tmp, k4);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        ++istep;

        if (!y.allFinite())
            throw divergence_error("ode_solve: state became non-finite", sol.times.back());

        const bool last = !(t < t_end - 1e-15 * std::max(1.0, std::abs(t_end)));
        if (last || istep % record_stride == 0) {
            sol.times.push_back(t);
            sol.values.push_back(y);
        }
    }
    return sol;
}

// Log of n! via lgamma; shared by the closed-form coin/overlap formulas.
inline double log_factorial(int n) { return std::lgamma(double(n) + 1.0); }

} // namespace tomrep::math
