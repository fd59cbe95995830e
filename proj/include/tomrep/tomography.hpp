#pragma once

// Symplectic tomograms w(X | mu, nu): forward maps from wavefunctions and
// density matrices, optical-frame closed forms, Weyl kernel elements, and the
// inverse map back to a Fock-basis density matrix.
//
// Conventions:
//   frame (mu, nu) labels the quadrature X = mu*q + nu*p, s = hypot(mu, nu);
//   Gaussian tomograms are parameterized by mean and VARIANCE (not std dev);
//   displacement amplitude of a frame is beta = (nu - i*mu) / sqrt(2), and
//   e^{-i mu q - i nu p} = D(beta).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "runtime.hpp"
#include "special_math.hpp"
#include "states.hpp"

namespace tomrep::tomography {

using cplx = std::complex<double>;

// Frames with |nu| below this use the Fourier-free |psi(X/mu)|^2/|mu| branch.
inline constexpr double nu_min = 1e-8;

struct ReferenceFrame {
    double mu = 0.0;
    double nu = 0.0;

    double s() const { return std::hypot(mu, nu); }
    double theta() const { return std::atan2(nu, mu); }
};

inline void validate_frame(const ReferenceFrame& f) {
    if (!std::isfinite(f.mu) || !std::isfinite(f.nu))
        throw invalid_frame("frame parameters must be finite");
    if (f.mu == 0.0 && f.nu == 0.0)
        throw invalid_frame("frame (mu, nu) = (0, 0) labels no quadrature");
}

// Negative tomogram values above this magnitude indicate a broken input or a
// quadrature failure rather than roundoff.
inline constexpr double negativity_floor = -1e-12;

namespace detail {

inline double clip_tomogram_value(double v, std::atomic<long>* clips) {
    if (v >= 0.0) return v;
    if (v < negativity_floor)
        throw accuracy_error("tomogram value negative beyond roundoff floor",
                             v, -v);
    if (clips) clips->fetch_add(1, std::memory_order_relaxed);
    return 0.0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Closed-form tomograms
// ---------------------------------------------------------------------------

// Fock state |n>: w(X | mu, nu) = psi_n(X/s)^2 / s with s = hypot(mu, nu).
inline double fock_tomogram(int n, double X, const ReferenceFrame& f) {
    validate_frame(f);
    const double s = f.s();
    const double amp = states::fock_psi(n, X / s);
    return amp * amp / s;
}

// Mean and variance of the quadrature mu*q + nu*p in a Gaussian state.
struct GaussianTomogramParams {
    double mean = 0.0;
    double variance = 0.0;
};

inline GaussianTomogramParams gaussian_tomogram_params(
    const states::GaussianState& g, const ReferenceFrame& f) {
    validate_frame(f);
    const states::GaussianStats st = states::gaussian_stats(g);
    GaussianTomogramParams p;
    p.mean = f.mu * st.mean_x + f.nu * st.mean_p;
    p.variance = f.mu * f.mu * st.var_x + 2.0 * f.mu * f.nu * st.cov_xp +
                 f.nu * f.nu * st.var_p;
    if (!(p.variance > 0.0))
        throw invalid_frame("quadrature variance must be positive");
    return p;
}

inline double gaussian_tomogram_density(const GaussianTomogramParams& p,
                                        double X) {
    const double d = X - p.mean;
    return std::exp(-d * d / (2.0 * p.variance)) /
           std::sqrt(2.0 * math::pi * p.variance);
}

// ---------------------------------------------------------------------------
// Forward map from a wavefunction (fractional-Fourier magnitude squared)
// ---------------------------------------------------------------------------

inline math::AdaptiveConfig tomogram_quadrature_defaults() {
    math::AdaptiveConfig cfg;
    cfg.abs_tol = 1e-10;
    cfg.rel_tol = 1e-9;
    cfg.max_intervals = 6000;
    cfg.initial_halfwidth = 10.0;
    cfg.max_halfwidth = 64.0;
    return cfg;
}

// w(X | mu, nu) = |integral psi(y) exp(i mu y^2 / (2 nu) - i X y / nu) dy|^2
//                 / (2 pi |nu|),
// falling back to |psi(X/mu)|^2 / |mu| when |nu| < nu_min.
inline double tomogram_from_psi(
    const std::function<cplx(double)>& psi, double X, const ReferenceFrame& f,
    const math::AdaptiveConfig& cfg = tomogram_quadrature_defaults()) {
    validate_frame(f);
    if (std::abs(f.nu) < nu_min) {
        const double y = X / f.mu;
        return std::norm(psi(y)) / std::abs(f.mu);
    }
    const double half_mu_over_nu = 0.5 * f.mu / f.nu;
    const double inv_nu = 1.0 / f.nu;
    auto integrand = [&](double y) {
        const double phase = half_mu_over_nu * y * y - X * y * inv_nu;
        return psi(y) * std::exp(cplx(0.0, phase));
    };
    // The chirp needs roughly one interval per pi of accumulated phase over
    // the window; frames with |nu| far below |mu| exhaust any budget and end
    // in accuracy_error, which is the documented failure mode between the
    // exact-limit branch and quadrature-feasible frames.
    math::AdaptiveConfig local = cfg;
    const double W = cfg.initial_halfwidth + 4.0;
    const double phase_span =
        std::abs(half_mu_over_nu) * W * W + std::abs(X * inv_nu) * W;
    const double tiles = phase_span / math::pi;
    local.max_intervals = static_cast<int>(std::min(
        500000.0, std::max<double>(cfg.max_intervals, 8.0 * tiles + 256.0)));
    const math::IntegrationResult r = math::integrate_line(integrand, local);
    const double w = std::norm(r.value) / (2.0 * math::pi * std::abs(f.nu));
    return detail::clip_tomogram_value(w, nullptr);
}

// ---------------------------------------------------------------------------
// Weyl (displacement) kernel elements
// ---------------------------------------------------------------------------

// Displacement amplitude of a frame: e^{-i mu q - i nu p} = D(beta).
inline cplx frame_displacement(const ReferenceFrame& f) {
    return cplx(f.nu, -f.mu) / std::sqrt(2.0);
}

// <n|D(beta)|n'> via the associated-Laguerre closed form, log-scaled to keep
// the factorial ratio and the power of |beta| from overflowing separately.
inline cplx displacement_element(int n, int np, cplx beta) {
    if (n < 0 || np < 0 || n > 64 || np > 64)
        throw range_error("displacement_element: indices must be in [0, 64]");
    const double b2 = std::norm(beta);
    const int lo = std::min(n, np), hi = std::max(n, np);
    const int d = hi - lo;
    const double lag = math::laguerre(lo, d, b2);
    if (d == 0) return std::exp(-0.5 * b2) * lag;
    // m >= k branch uses beta^(m-k); m < k uses (-conj(beta))^(k-m).
    const cplx base = (n >= np) ? beta : -std::conj(beta);
    if (base == cplx(0.0, 0.0)) return 0.0;
    const double logmag = 0.5 * (math::log_factorial(lo) -
                                 math::log_factorial(hi)) +
                          d * std::log(std::abs(base)) - 0.5 * b2;
    const cplx phase = std::polar(1.0, d * std::arg(base));
    return std::exp(logmag) * phase * lag;
}

// Kernel element <n| e^{iX} e^{-i mu q - i nu p} |n'> of the inverse map.
inline cplx weyl_element(int n, int np, double X, const ReferenceFrame& f) {
    return std::polar(1.0, X) * displacement_element(n, np, frame_displacement(f));
}

// Same element by direct quadrature,
//   e^{iX} e^{i mu nu / 2} integral psi_n(x) e^{-i mu x} psi_n'(x - nu) dx,
// kept as an independent cross-check of the closed form.
inline cplx weyl_element_quadrature(
    int n, int np, double X, const ReferenceFrame& f,
    const math::AdaptiveConfig& cfg = tomogram_quadrature_defaults()) {
    if (n < 0 || np < 0 || n > 64 || np > 64)
        throw range_error("weyl_element_quadrature: indices must be in [0, 64]");
    auto integrand = [&](double x) {
        return states::fock_psi(n, x) * states::fock_psi(np, x - f.nu) *
               std::exp(cplx(0.0, -f.mu * x));
    };
    const math::IntegrationResult r = math::integrate_line(integrand, cfg);
    return std::polar(1.0, X + 0.5 * f.mu * f.nu) * r.value;
}

// Full K x K displacement matrix D_{lm} = <l|D(beta)|m>.
inline Eigen::MatrixXcd displacement_matrix(int K, cplx beta) {
    Eigen::MatrixXcd D(K, K);
    for (int l = 0; l < K; ++l)
        for (int m = 0; m < K; ++m) D(l, m) = displacement_element(l, m, beta);
    return D;
}

// Second moments of the underlying state; they size the reconstruction and
// overlap quadratures (decay rate and drift of the characteristic function).
struct PhaseSpaceMoments {
    double mean_x = 0.0;
    double mean_p = 0.0;
    double var_x = 0.5;
    double var_p = 0.5;
    double cov_xp = 0.0;

    double quadrature_variance(const ReferenceFrame& f) const {
        return f.mu * f.mu * var_x + 2.0 * f.mu * f.nu * cov_xp +
               f.nu * f.nu * var_p;
    }
    double quadrature_mean(const ReferenceFrame& f) const {
        return f.mu * mean_x + f.nu * mean_p;
    }
    // Smallest / largest quadrature variance over all frame angles at s = 1.
    double min_variance_rate() const {
        const double tr = var_x + var_p;
        const double det = var_x * var_p - cov_xp * cov_xp;
        return 0.5 * (tr - std::sqrt(std::max(tr * tr - 4.0 * det, 0.0)));
    }
    double max_variance_rate() const {
        const double tr = var_x + var_p;
        const double det = var_x * var_p - cov_xp * cov_xp;
        return 0.5 * (tr + std::sqrt(std::max(tr * tr - 4.0 * det, 0.0)));
    }
    double drift_rate() const { return std::hypot(mean_x, mean_p); }
};

namespace detail {

inline PhaseSpaceMoments moments_of_gaussian(const states::GaussianState& g) {
    const states::GaussianStats st = states::gaussian_stats(g);
    return {st.mean_x, st.mean_p, st.var_x, st.var_p, st.cov_xp};
}

inline PhaseSpaceMoments moments_of_fock(int n) {
    return {0.0, 0.0, n + 0.5, n + 0.5, 0.0};
}

inline PhaseSpaceMoments moments_of_density(const Eigen::MatrixXcd& rho) {
    const int K = static_cast<int>(rho.rows());
    Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(K, K);
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(K, K);
    for (int m = 0; m + 1 < K; ++m) {
        const double c = std::sqrt(0.5 * (m + 1));
        q(m, m + 1) = c;
        q(m + 1, m) = c;
        p(m, m + 1) = cplx(0.0, c);
        p(m + 1, m) = cplx(0.0, -c);
    }
    auto expval = [&](const Eigen::MatrixXcd& op) {
        return (rho * op).trace().real();
    };
    PhaseSpaceMoments mom;
    mom.mean_x = expval(q);
    mom.mean_p = expval(p);
    mom.var_x = expval(q * q) - mom.mean_x * mom.mean_x;
    mom.var_p = expval(p * p) - mom.mean_p * mom.mean_p;
    mom.cov_xp = 0.5 * expval(q * p + p * q) - mom.mean_x * mom.mean_p;
    // Truncation can push the top-row variances slightly negative.
    mom.var_x = std::max(mom.var_x, 0.25);
    mom.var_p = std::max(mom.var_p, 0.25);
    return mom;
}

inline PhaseSpaceMoments moments_of_psi(
    const std::function<cplx(double)>& psi) {
    math::AdaptiveConfig cfg;
    cfg.abs_tol = 1e-9;
    cfg.rel_tol = 1e-8;
    const double step = 1e-5;
    auto dpsi = [&](double x) {
        return (psi(x + step) - psi(x - step)) / (2.0 * step);
    };
    auto real_integral = [&](auto&& fn) {
        return math::integrate_line(fn, cfg).value.real();
    };
    PhaseSpaceMoments mom;
    mom.mean_x = real_integral([&](double x) -> cplx {
        return cplx(x * std::norm(psi(x)), 0.0);
    });
    const double x2 = real_integral(
        [&](double x) -> cplx { return cplx(x * x * std::norm(psi(x)), 0.0); });
    mom.var_x = x2 - mom.mean_x * mom.mean_x;
    mom.mean_p = math::integrate_line(
                     [&](double x) -> cplx { return std::conj(psi(x)) * dpsi(x); },
                     cfg)
                     .value.imag();
    const double p2 = real_integral(
        [&](double x) -> cplx { return cplx(std::norm(dpsi(x)), 0.0); });
    mom.var_p = p2 - mom.mean_p * mom.mean_p;
    const double xp = math::integrate_line(
                          [&](double x) -> cplx {
                              return x * std::conj(psi(x)) * dpsi(x);
                          },
                          cfg)
                          .value.imag();
    mom.cov_xp = xp - mom.mean_x * mom.mean_p;
    mom.var_x = std::max(mom.var_x, 0.25);
    mom.var_p = std::max(mom.var_p, 0.25);
    return mom;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Density-matrix validation and forward map
// ---------------------------------------------------------------------------

inline void validate_density(const Eigen::MatrixXcd& rho) {
    if (rho.rows() != rho.cols() || rho.rows() < 1)
        throw invalid_state("density matrix must be square and non-empty");
    if (rho.rows() > 64)
        throw range_error("density matrix truncation must be at most 64");
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-10)
        throw invalid_state("density matrix is not Hermitian within 1e-10");
    const double tr = rho.trace().real();
    // Truncated expansions of normalized states sit slightly below unit trace.
    if (tr < 1.0 - 1e-3 || tr > 1.0 + 1e-6)
        throw invalid_state("density matrix trace must be 1 up to truncation loss");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho,
                                                       Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw invalid_state("density matrix has a negative eigenvalue");
}

namespace detail {

// Shared Gauss-Hermite rule for the X-side quadratures.
inline const math::QuadratureRule& x_rule(int order = 96) {
    static const math::QuadratureRule r96 = math::gauss_hermite_rule(96);
    if (order == 96) return r96;
    static thread_local math::QuadratureRule custom;
    if (custom.order != order) custom = math::gauss_hermite_rule(order);
    return custom;
}

// X-quadrature order matched to a Fock-space truncation: the tomogram of a
// K x K density matrix is a degree-2(K-1) polynomial on the Gaussian
// envelope, and the characteristic integral adds the e^{isX} oscillation.
inline int density_x_order(int K) {
    const int order = std::max(96, 2 * K + 64);
    return order + order % 2;
}

// Evaluate w at many X for one frame. The homodyne rotation diagonalizes in
// the number basis, mu q + nu p = s e^{i theta n} q e^{-i theta n}, giving
// the closed form
//   w(X | f) = (1/s) v^dag rho v,   v_n = e^{i n theta} psi_n(X/s),
// exact for any truncation and nonnegative whenever rho is PSD.
inline std::vector<double> density_row(const Eigen::MatrixXcd& rho,
                                       const std::vector<double>& Xs,
                                       const ReferenceFrame& f,
                                       std::atomic<long>* clips) {
    const double s = f.s();
    const double theta = f.theta();
    const int K = static_cast<int>(rho.rows());
    static const double psi0_norm = std::pow(math::pi, -0.25);
    std::vector<cplx> dph(K);  // e^{i d theta} for the level gap d = n' - n
    for (int d = 0; d < K; ++d) dph[d] = std::polar(1.0, d * theta);
    std::vector<double> ra(K), rb(K);
    for (int n = 0; n < K; ++n) {
        ra[n] = std::sqrt(2.0 / (n + 1));
        rb[n] = std::sqrt(double(n) / (n + 1));
    }
    std::vector<double> psi(K);
    std::vector<double> out(Xs.size());
    for (std::size_t i = 0; i < Xs.size(); ++i) {
        const double y = Xs[i] / s;
        double hm = 0.0;
        double h = psi0_norm * std::exp(-0.5 * y * y);
        for (int n = 0; n < K; ++n) {
            psi[n] = h;
            const double hp = ra[n] * y * h - rb[n] * hm;
            hm = h;
            h = hp;
        }
        double acc = 0.0;
        for (int n = 0; n < K; ++n) {
            acc += rho(n, n).real() * psi[n] * psi[n];
            for (int np = n + 1; np < K; ++np)
                acc += 2.0 * psi[n] * psi[np] * (rho(n, np) * dph[np - n]).real();
        }
        out[i] = clip_tomogram_value(acc / s, clips);
    }
    return out;
}

}  // namespace detail

// w(X | mu, nu) for a Fock-basis density matrix.
inline double tomogram_from_density(const Eigen::MatrixXcd& rho, double X,
                                    const ReferenceFrame& f) {
    validate_frame(f);
    validate_density(rho);
    return detail::density_row(rho, {X}, f, nullptr)[0];
}

// ---------------------------------------------------------------------------
// Sampled tomogram grids (for reconstruction from file data)
// ---------------------------------------------------------------------------

struct TomogramGrid {
    struct FrameData {
        double mu = 0.0;
        double nu = 0.0;
        std::vector<double> X;  // strictly ascending
        std::vector<double> w;
    };
    std::vector<FrameData> frames;
};

inline void validate_grid(const TomogramGrid& g) {
    if (g.frames.empty()) throw invalid_state("tomogram grid has no frames");
    for (const auto& fr : g.frames) {
        validate_frame({fr.mu, fr.nu});
        if (fr.X.size() != fr.w.size() || fr.X.size() < 2)
            throw invalid_state("tomogram grid frame needs >= 2 samples");
        for (std::size_t i = 0; i + 1 < fr.X.size(); ++i)
            if (!(fr.X[i] < fr.X[i + 1]))
                throw invalid_state("tomogram grid X values must be ascending");
        for (double v : fr.w)
            if (!(v >= negativity_floor))
                throw invalid_state("tomogram grid has a negative sample");
    }
}

// ---------------------------------------------------------------------------
// Tomogram objects
// ---------------------------------------------------------------------------

// A tomogram with a uniform evaluation interface over five backends:
// Gaussian closed form, Fock closed form, density matrix, raw wavefunction,
// and sampled grid. Values are clipped at zero when within the roundoff
// floor; deeper negativity throws.
class SymplecticTomogram {
  public:
    enum class Backend { gaussian, fock, density, psi, grid };
    using PsiFn = std::function<cplx(double)>;

    static SymplecticTomogram from_gaussian(const states::GaussianState& g) {
        SymplecticTomogram t(Backend::gaussian);
        t.gaussian_ = states::normalize(g);
        t.moments_ = detail::moments_of_gaussian(*t.gaussian_);
        return t;
    }

    static SymplecticTomogram from_fock(int n) {
        if (n < 0 || n > 100)
            throw range_error("fock tomogram: n must be in [0, 100]");
        SymplecticTomogram t(Backend::fock);
        t.fock_n_ = n;
        t.moments_ = detail::moments_of_fock(n);
        return t;
    }

    static SymplecticTomogram from_density(Eigen::MatrixXcd rho) {
        validate_density(rho);
        SymplecticTomogram t(Backend::density);
        t.moments_ = detail::moments_of_density(rho);
        t.x_order_ = detail::density_x_order(static_cast<int>(rho.rows()));
        t.rho_ = std::make_shared<const Eigen::MatrixXcd>(std::move(rho));
        return t;
    }

    static SymplecticTomogram from_psi(PsiFn psi) {
        if (!psi) throw invalid_state("tomogram: null wavefunction");
        SymplecticTomogram t(Backend::psi);
        t.moments_ = detail::moments_of_psi(psi);
        t.psi_ = std::move(psi);
        return t;
    }

    static SymplecticTomogram from_grid(TomogramGrid grid) {
        validate_grid(grid);
        SymplecticTomogram t(Backend::grid);
        t.grid_ = std::make_shared<const TomogramGrid>(std::move(grid));
        for (const auto& fr : t.grid_->frames)
            t.grid_thetas_.push_back(std::atan2(fr.nu, fr.mu));
        // Sampled data carries no moment information; keep oscillator-scale
        // defaults so quadrature sizing stays conservative.
        t.moments_ = PhaseSpaceMoments{};
        return t;
    }

    static SymplecticTomogram from_spec(const states::StateSpec& spec) {
        const states::Wavefunction wf = states::make_wavefunction(spec);
        if (wf.fock_n >= 0) return from_fock(wf.fock_n);
        if (wf.gaussian) return from_gaussian(*wf.gaussian);
        return from_psi(wf.psi);
    }

    Backend backend() const { return backend_; }
    const PhaseSpaceMoments& moments() const { return moments_; }
    long negative_clips() const {
        return clips_->load(std::memory_order_relaxed);
    }

    // Top Fock component the state carries (estimated from the variances
    // when unknown); the inverse map widens its radial window by this much.
    int source_degree() const {
        switch (backend_) {
            case Backend::fock:
                return fock_n_;
            case Backend::density:
                return static_cast<int>(rho_->rows()) - 1;
            case Backend::gaussian:
                return 0;
            default:
                return static_cast<int>(
                    std::ceil(2.0 * (moments_.max_variance_rate() - 0.5)));
        }
    }

    double operator()(double X, const ReferenceFrame& f) const {
        validate_frame(f);
        switch (backend_) {
            case Backend::gaussian:
                return gaussian_tomogram_density(
                    gaussian_tomogram_params(*gaussian_, f), X);
            case Backend::fock:
                return fock_tomogram(fock_n_, X, f);
            case Backend::density:
                return detail::density_row(*rho_, {X}, f, clips_.get())[0];
            case Backend::psi:
                return tomogram_from_psi(psi_, X, f);
            case Backend::grid:
                return grid_value(X, f);
        }
        throw invalid_state("tomogram: unknown backend");
    }

    std::vector<double> row(const std::vector<double>& Xs,
                            const ReferenceFrame& f) const {
        validate_frame(f);
        if (backend_ == Backend::density)
            return detail::density_row(*rho_, Xs, f, clips_.get());
        if (backend_ == Backend::grid) {
            const GridLookup g = resolve_grid_frame(f);
            std::vector<double> out(Xs.size());
            for (std::size_t i = 0; i < Xs.size(); ++i)
                out[i] = grid_interp(g, Xs[i]);
            return out;
        }
        std::vector<double> out(Xs.size());
        for (std::size_t i = 0; i < Xs.size(); ++i) out[i] = (*this)(Xs[i], f);
        return out;
    }

    // phi(mu, nu) = integral w(X | mu, nu) e^{iX} dX. Closed forms where the
    // backend admits one, Gauss-Hermite over X = s*u otherwise.
    cplx characteristic(const ReferenceFrame& f) const {
        validate_frame(f);
        const double s = f.s();
        switch (backend_) {
            case Backend::gaussian: {
                const GaussianTomogramParams p =
                    gaussian_tomogram_params(*gaussian_, f);
                return std::exp(cplx(-0.5 * p.variance, p.mean));
            }
            case Backend::fock:
                return std::exp(-0.25 * s * s) *
                       math::laguerre(fock_n_, 0, 0.5 * s * s);
            default: {
                const math::QuadratureRule& rule = detail::x_rule(
                    backend_ == Backend::density ? x_order_ : 96);
                std::vector<double> Xs(rule.order);
                for (int j = 0; j < rule.order; ++j) Xs[j] = s * rule.nodes[j];
                const std::vector<double> wv = row(Xs, f);
                cplx acc = 0.0;
                for (int j = 0; j < rule.order; ++j) {
                    const double u = rule.nodes[j];
                    acc += rule.weights[j] * std::exp(u * u) * wv[j] * s *
                           std::polar(1.0, s * u);
                }
                return acc;
            }
        }
    }

    // |integral of w over X - 1|, the per-frame normalization residual,
    // using the same scaled Gauss-Hermite grid as characteristic().
    double normalization_residual(const ReferenceFrame& f) const {
        validate_frame(f);
        const double s = f.s();
        const math::QuadratureRule& rule =
            detail::x_rule(backend_ == Backend::density ? x_order_ : 96);
        std::vector<double> Xs(rule.order);
        for (int j = 0; j < rule.order; ++j) Xs[j] = s * rule.nodes[j];
        const std::vector<double> wv = row(Xs, f);
        double acc = 0.0;
        for (int j = 0; j < rule.order; ++j) {
            const double u = rule.nodes[j];
            acc += rule.weights[j] * std::exp(u * u) * wv[j] * s;
        }
        return std::abs(acc - 1.0);
    }

  private:
    explicit SymplecticTomogram(Backend b) : backend_(b) {}

    struct GridLookup {
        const TomogramGrid::FrameData* frame;
        bool flip;
        double scale;  // query s over grid-frame s
    };

    // Nearest-angle lookup; the scaling law
    // w(X | k*mu, k*nu) = w(X/k | mu, nu) / |k| maps the query onto the
    // chosen frame, with k < 0 mirroring X.
    GridLookup resolve_grid_frame(const ReferenceFrame& f) const {
        const double tq = f.theta();
        GridLookup best{nullptr, false, 1.0};
        double best_dist = 0.0;
        for (std::size_t i = 0; i < grid_->frames.size(); ++i) {
            const double tg = grid_thetas_[i];
            for (int flip = 0; flip < 2; ++flip) {
                const double t = flip ? tg + math::pi : tg;
                const double d =
                    std::abs(std::remainder(tq - t, 2.0 * math::pi));
                if (!best.frame || d < best_dist) {
                    best.frame = &grid_->frames[i];
                    best.flip = flip != 0;
                    best_dist = d;
                }
            }
        }
        best.scale = f.s() / std::hypot(best.frame->mu, best.frame->nu);
        return best;
    }

    double grid_interp(const GridLookup& g, double X) const {
        const double Xg = (g.flip ? -X : X) / g.scale;
        const auto& xs = g.frame->X;
        if (Xg <= xs.front() || Xg >= xs.back()) return 0.0;
        const auto it = std::upper_bound(xs.begin(), xs.end(), Xg);
        const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
        const std::size_t lo = hi - 1;
        const double t = (Xg - xs[lo]) / (xs[hi] - xs[lo]);
        const double wv = (1.0 - t) * g.frame->w[lo] + t * g.frame->w[hi];
        return detail::clip_tomogram_value(wv / g.scale, clips_.get());
    }

    double grid_value(double X, const ReferenceFrame& f) const {
        return grid_interp(resolve_grid_frame(f), X);
    }

    Backend backend_;
    std::optional<states::GaussianState> gaussian_;
    int fock_n_ = 0;
    int x_order_ = 96;
    std::shared_ptr<const Eigen::MatrixXcd> rho_;
    PsiFn psi_;
    std::shared_ptr<const TomogramGrid> grid_;
    std::vector<double> grid_thetas_;
    PhaseSpaceMoments moments_;
    std::shared_ptr<std::atomic<long>> clips_ =
        std::make_shared<std::atomic<long>>(0);
};

// ---------------------------------------------------------------------------
// Inverse map: density matrix from a tomogram
// ---------------------------------------------------------------------------

struct ReconstructionConfig {
    // Zeros mean "size from the tomogram's moments".
    double s_max = 0.0;
    int radial_order = 0;
    int theta_points = 0;
    int x_order = 0;
};

struct ReconstructionResult {
    Eigen::MatrixXcd rho;
    double trace_residual = 0.0;
    double hermiticity_residual = 0.0;
    long negative_clips = 0;
};

namespace detail {

struct PolarPlan {
    double s_max;
    int radial;
    int theta;
};

// Radius covers both a Gaussian characteristic tail e^{-sigma_min s^2 / 2}
// and the slowly-damped oscillatory region of number-state characteristics,
// which extends to the turning radius sqrt(8 sigma_max) before dropping.
inline PolarPlan plan_polar(double min_rate, double max_rate, double drift,
                            double log_tail, double s_floor, double s_cap) {
    PolarPlan plan;
    min_rate = std::max(min_rate, 1e-3);
    const double s_gauss = std::sqrt(2.0 * log_tail / min_rate);
    const double s_turn = std::sqrt(8.0 * std::max(max_rate, 0.5)) + 3.0;
    plan.s_max = std::clamp(std::max(s_gauss, s_turn), s_floor, s_cap);
    plan.radial = std::max(96, static_cast<int>(std::ceil(14.0 * plan.s_max)));
    int T = static_cast<int>(
        std::max(64.0, std::ceil(1.4 * drift * plan.s_max + 48.0)));
    T += T % 2;
    plan.theta = T;
    return plan;
}

inline PolarPlan plan_polar(const PhaseSpaceMoments& mom, double log_tail,
                            double s_floor, double s_cap) {
    return plan_polar(mom.min_variance_rate(), mom.max_variance_rate(),
                      mom.drift_rate(), log_tail, s_floor, s_cap);
}

}  // namespace detail

// rho_{n n'} = (1/2pi) integral phi(mu, nu) <n|D(beta)|n'> dmu dnu with
// phi computed from tomogram values (never from a backend shortcut), on a
// polar Gauss-Legendre x trapezoid grid. Deterministic under TOMREP_THREADS.
inline ReconstructionResult density_from_tomogram(
    const SymplecticTomogram& w, int N,
    const ReconstructionConfig& cfg = {}) {
    if (N < 1 || N > 48)
        throw range_error("reconstruction: N must be in [1, 48]");

    // The integrand phi * D_{nn'} carries a polynomial of degree up to
    // N + source_degree on an envelope e^{-r x} in x = s^2/2, where r sums
    // the characteristic decay rates of the tomogram and the kernel. Solve
    // r x - m ln x = 25 for the radius that pushes the tail under ~1e-11.
    const PhaseSpaceMoments& mom = w.moments();
    const double r_env = std::min(mom.min_variance_rate(), 0.5) + 0.5;
    const int m = N + w.source_degree();
    double x_cut = (25.0 + m * 4.0) / r_env;
    for (int it = 0; it < 60; ++it)
        x_cut = (25.0 + m * std::log(x_cut)) / r_env;
    const double s_poly = std::sqrt(2.0 * x_cut);

    detail::PolarPlan plan = detail::plan_polar(w.moments(), 46.0, 8.0, 30.0);
    plan.s_max = std::clamp(std::max(plan.s_max, s_poly), 8.0, 30.0);
    plan.radial = std::max(96, static_cast<int>(std::ceil(14.0 * plan.s_max)));
    plan.theta = std::max(
        plan.theta, static_cast<int>(std::ceil(
                        1.4 * mom.drift_rate() * plan.s_max + 48.0)));
    if (cfg.s_max > 0.0) plan.s_max = cfg.s_max;
    if (cfg.radial_order > 0) plan.radial = cfg.radial_order;
    if (cfg.theta_points > 0) plan.theta = cfg.theta_points;
    plan.theta = std::max(plan.theta, 2 * N + 16);
    plan.theta += plan.theta % 2;

    const math::QuadratureRule radial =
        math::gauss_legendre_rule(plan.radial, 0.0, plan.s_max);
    int x_order = cfg.x_order;
    if (x_order <= 0) {
        // The X integrand stacks the tomogram's polynomial (degree
        // 2*source_degree) and the e^{isu} oscillation on the Gaussian
        // envelope. A Gauss-Hermite rule of order n holds e^{iku} below
        // ~1e-12 for k < 1.3 sqrt(2(n - 8 - deg)) (measured), so invert
        // that at the largest radius plus the drift shift.
        const double k_need = plan.s_max + 2.0 * mom.drift_rate();
        const double need = 2.0 * w.source_degree() + 24.0 +
                            0.5 * (k_need / 1.3) * (k_need / 1.3);
        x_order = std::clamp(static_cast<int>(std::ceil(need)), 96, 256);
        x_order += x_order % 2;
    }
    const math::QuadratureRule& xr = detail::x_rule(x_order);
    std::vector<double> cw(xr.order);
    for (int j = 0; j < xr.order; ++j)
        cw[j] = xr.weights[j] * std::exp(xr.nodes[j] * xr.nodes[j]);

    const long clips_before = w.negative_clips();
    const int T = plan.theta;
    const std::size_t total = static_cast<std::size_t>(plan.radial) * T;
    // Chunk count is fixed so the reduction order (and hence every bit of
    // the result) is independent of TOMREP_THREADS.
    const std::size_t n_chunks = 32;
    std::vector<Eigen::MatrixXcd> partial(n_chunks,
                                          Eigen::MatrixXcd::Zero(N, N));
    rt::for_chunks(total, n_chunks, [&](std::size_t chunk, std::size_t lo,
                                        std::size_t hi) {
        Eigen::MatrixXcd& acc = partial[chunk];
        std::vector<double> Xs(xr.order);
        for (std::size_t idx = lo; idx < hi; ++idx) {
            const int r = static_cast<int>(idx / T);
            const int t = static_cast<int>(idx % T);
            const double s = radial.nodes[r];
            const double theta = 2.0 * math::pi * t / T;
            const ReferenceFrame f{s * std::cos(theta), s * std::sin(theta)};
            for (int j = 0; j < xr.order; ++j) Xs[j] = s * xr.nodes[j];
            const std::vector<double> wv = w.row(Xs, f);
            cplx phi = 0.0;
            for (int j = 0; j < xr.order; ++j)
                phi += cw[j] * wv[j] * s * std::polar(1.0, s * xr.nodes[j]);
            // Jacobian s ds dtheta and the 1/2pi prefactor fold into s/T.
            const cplx weight = phi * (radial.weights[r] * s / T);
            const Eigen::MatrixXcd D =
                displacement_matrix(N, frame_displacement(f));
            acc += weight * D;
        }
    });

    ReconstructionResult res;
    res.rho = Eigen::MatrixXcd::Zero(N, N);
    for (const auto& m : partial) res.rho += m;
    res.trace_residual = std::abs(res.rho.trace().real() - 1.0) +
                         std::abs(res.rho.trace().imag());
    res.hermiticity_residual =
        (res.rho - res.rho.adjoint()).cwiseAbs().maxCoeff();
    res.negative_clips = w.negative_clips() - clips_before;
    return res;
}

}  // namespace tomrep::tomography
