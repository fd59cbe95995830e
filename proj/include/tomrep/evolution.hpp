// evolution.hpp
// Time evolution in the coin-probability representation: the von Neumann
// kinetic equation on Fock-basis density matrices, the induced affine flow
// dPi/dt = M Pi + gamma on the coin coordinate chart, closed-form coherent
// coin trajectories, stationary spectra, and the two-point relative entropy.

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tomrep/coin_rep.hpp"
#include "tomrep/errors.hpp"
#include "tomrep/special_math.hpp"

namespace tomrep::evolution {

using math::cplx;

// ---------------------------------------------------------------------------
// Hamiltonians
// ---------------------------------------------------------------------------

// Harmonic oscillator in the number basis: H_jj = j + 1/2.
inline Eigen::MatrixXcd oscillator_hamiltonian(int N) {
    if (N < 1 || N > 256)
        throw range_error("oscillator_hamiltonian: N must be in [1, 256]");
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(N, N);
    for (int j = 0; j < N; ++j) H(j, j) = j + 0.5;
    return H;
}

// Two-level splitting H = diag(1/2, -1/2).
inline Eigen::MatrixXcd qubit_hamiltonian() {
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(2, 2);
    H(0, 0) = 0.5;
    H(1, 1) = -0.5;
    return H;
}

inline void validate_hamiltonian(const Eigen::MatrixXcd& H) {
    if (H.rows() < 1 || H.rows() != H.cols())
        throw invalid_state("hamiltonian must be a nonempty square matrix");
    if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw invalid_state("hamiltonian is not Hermitian within 1e-12");
}

// ---------------------------------------------------------------------------
// Coin coordinate chart
// ---------------------------------------------------------------------------
// Pi = (p3^(0,0), .., p3^(N-2,N-2), then p1^(n,n'), p2^(n,n') pairs in
// lexicographic (n, n') order). The last diagonal is eliminated by
// normalization, so the chart is an affine bijection between trace-one
// Hermitian matrices and R^{N^2 - 1}.

inline int chart_dim(int N) { return N * N - 1; }

inline Eigen::VectorXd chart_from_density(const Eigen::MatrixXcd& rho) {
    const int N = static_cast<int>(rho.rows());
    if (N < 1 || rho.cols() != N)
        throw invalid_state("chart_from_density: matrix not square");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
        throw invalid_state("chart_from_density: matrix is not Hermitian");
    Eigen::VectorXd pi(chart_dim(N));
    for (int n = 0; n + 1 < N; ++n) pi[n] = rho(n, n).real();
    const int base = N - 1;
    for (int n = 0; n < N; ++n)
        for (int np = n + 1; np < N; ++np) {
            const auto k = coins::CoinProbabilities::off_index(n, np, N);
            pi[base + 2 * k] = 0.5 + rho(n, np).real();
            pi[base + 2 * k + 1] = 0.5 - rho(n, np).imag();
        }
    return pi;
}

// Exact affine inverse; positivity of the result is not checked here.
inline Eigen::MatrixXcd density_from_chart(const Eigen::VectorXd& pi, int N) {
    if (N < 1) throw range_error("density_from_chart: N must be positive");
    if (pi.size() != chart_dim(N))
        throw invalid_state("density_from_chart: chart has wrong length");
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(N, N);
    double head = 0.0;
    for (int n = 0; n + 1 < N; ++n) {
        rho(n, n) = pi[n];
        head += pi[n];
    }
    rho(N - 1, N - 1) = 1.0 - head;
    const int base = N - 1;
    for (int n = 0; n < N; ++n)
        for (int np = n + 1; np < N; ++np) {
            const auto k = coins::CoinProbabilities::off_index(n, np, N);
            const cplx e(pi[base + 2 * k] - 0.5, -(pi[base + 2 * k + 1] - 0.5));
            rho(n, np) = e;
            rho(np, n) = std::conj(e);
        }
    return rho;
}

// Chart image of a Hermitian trace-free rate X = drho/dt: differentiation
// drops the affine offsets, leaving diagonals and (Re, -Im) pairs.
inline Eigen::VectorXd chart_rate(const Eigen::MatrixXcd& X) {
    const int N = static_cast<int>(X.rows());
    Eigen::VectorXd r(chart_dim(N));
    for (int n = 0; n + 1 < N; ++n) r[n] = X(n, n).real();
    const int base = N - 1;
    for (int n = 0; n < N; ++n)
        for (int np = n + 1; np < N; ++np) {
            const auto k = coins::CoinProbabilities::off_index(n, np, N);
            r[base + 2 * k] = X(n, np).real();
            r[base + 2 * k + 1] = -X(n, np).imag();
        }
    return r;
}

// ---------------------------------------------------------------------------
// Kinetic (von Neumann) evolution
// ---------------------------------------------------------------------------

struct DensityTrajectory {
    std::vector<double> times;
    std::vector<Eigen::MatrixXcd> states;  // one per time
};

namespace detail {

inline void validate_initial_density(const Eigen::MatrixXcd& rho) {
    const int N = static_cast<int>(rho.rows());
    if (N < 1 || rho.cols() != N)
        throw invalid_state("kinetic_evolve: density matrix not square");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw invalid_state("kinetic_evolve: density matrix is not Hermitian");
    const cplx tr = rho.trace();
    // Truncated expansions of normalized states sit slightly below unit trace.
    if (tr.real() < 1.0 - 1e-3 || tr.real() > 1.0 + 1e-6 ||
        std::abs(tr.imag()) > 1e-10)
        throw invalid_state("kinetic_evolve: trace must be 1 up to truncation loss");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho,
                                                       Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw invalid_state("kinetic_evolve: density matrix has a negative eigenvalue");
}

inline std::vector<double> sample_times(std::pair<double, double> t_span,
                                        int n_samples) {
    if (!(t_span.second >= t_span.first))
        throw range_error("evolution: time span must be nondecreasing");
    if (n_samples < 2) throw range_error("evolution: need at least 2 samples");
    std::vector<double> t(n_samples);
    for (int i = 0; i < n_samples; ++i)
        t[i] = t_span.first +
               (t_span.second - t_span.first) * i / (n_samples - 1);
    return t;
}

}  // namespace detail

// Integrates i drho/dt = H rho - rho H with fixed-step 4th-order stepping
// (the partial step at each sample boundary is shortened). No trace
// renormalization is applied: trace drift stays visible as a convergence
// diagnostic. H is held constant over the span.
inline DensityTrajectory kinetic_evolve(const Eigen::MatrixXcd& rho0,
                                        const Eigen::MatrixXcd& H,
                                        std::pair<double, double> t_span,
                                        double step = 1e-3,
                                        int n_samples = 2) {
    validate_hamiltonian(H);
    detail::validate_initial_density(rho0);
    if (H.rows() != rho0.rows())
        throw invalid_state("kinetic_evolve: H and rho0 dimensions differ");
    const int N = static_cast<int>(rho0.rows());

    DensityTrajectory out;
    out.times = detail::sample_times(t_span, n_samples);
    out.states.reserve(out.times.size());
    out.states.push_back(rho0);

    const math::OdeRhs rhs = [&H, N](double, const math::VecXc& y,
                                     math::VecXc& dydt) {
        const Eigen::Map<const Eigen::MatrixXcd> r(y.data(), N, N);
        Eigen::Map<Eigen::MatrixXcd> d(dydt.data(), N, N);
        d = cplx(0.0, -1.0) * (H * r - r * H);
    };

    math::VecXc y = Eigen::Map<const math::VecXc>(rho0.data(), N * N);
    for (std::size_t i = 1; i < out.times.size(); ++i) {
        if (out.times[i] > out.times[i - 1]) {
            y = math::ode_solve(rhs, std::move(y), out.times[i - 1],
                                out.times[i], step,
                                std::numeric_limits<int>::max())
                    .final_state();
        }
        out.states.emplace_back(Eigen::Map<const Eigen::MatrixXcd>(y.data(), N, N));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Affine flow on the chart
// ---------------------------------------------------------------------------

struct ProbabilityVectorSystem {
    int N = 0;
    Eigen::MatrixXd M;
    Eigen::VectorXd gamma;
};

// dPi/dt = M Pi + gamma. Both the chart and the commutator are affine maps,
// so probing F(c) = chart_rate(-i [H, density_from_chart(c)]) at zero and at
// the basis vectors recovers M and gamma exactly.
inline ProbabilityVectorSystem affine_system(const Eigen::MatrixXcd& H) {
    validate_hamiltonian(H);
    const int N = static_cast<int>(H.rows());
    const int dim = chart_dim(N);
    const auto probe = [&H, N](const Eigen::VectorXd& c) {
        const Eigen::MatrixXcd rho = density_from_chart(c, N);
        return chart_rate(cplx(0.0, -1.0) * (H * rho - rho * H));
    };
    ProbabilityVectorSystem sys;
    sys.N = N;
    sys.gamma = probe(Eigen::VectorXd::Zero(dim));
    sys.M.resize(dim, dim);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    for (int j = 0; j < dim; ++j) {
        e[j] = 1.0;
        sys.M.col(j) = probe(e) - sys.gamma;
        e[j] = 0.0;
    }
    return sys;
}

struct ChartTrajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
};

// Same stepper and step policy as kinetic_evolve, applied to the affine
// system directly; dual-path comparisons are step-for-step equivalent.
inline ChartTrajectory affine_evolve(const ProbabilityVectorSystem& sys,
                                     const Eigen::VectorXd& pi0,
                                     std::pair<double, double> t_span,
                                     double step = 1e-3, int n_samples = 2) {
    const int dim = chart_dim(sys.N);
    if (sys.M.rows() != dim || sys.M.cols() != dim || sys.gamma.size() != dim)
        throw invalid_state("affine_evolve: system dimensions are inconsistent");
    if (pi0.size() != dim)
        throw invalid_state("affine_evolve: chart has wrong length");

    ChartTrajectory out;
    out.times = detail::sample_times(t_span, n_samples);
    out.states.reserve(out.times.size());
    out.states.push_back(pi0);

    // Real affine flow run through the complex ODE kernel; imaginary parts
    // stay exactly zero.
    const math::OdeRhs rhs = [&sys](double, const math::VecXc& y,
                                    math::VecXc& dydt) {
        dydt = (sys.M * y.real() + sys.gamma).cast<cplx>();
    };

    math::VecXc y = pi0.cast<cplx>();
    for (std::size_t i = 1; i < out.times.size(); ++i) {
        if (out.times[i] > out.times[i - 1]) {
            y = math::ode_solve(rhs, std::move(y), out.times[i - 1],
                                out.times[i], step,
                                std::numeric_limits<int>::max())
                    .final_state();
        }
        out.states.push_back(y.real());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stationary spectra
// ---------------------------------------------------------------------------

struct StationaryState {
    double energy = 0.0;
    Eigen::VectorXd pi;
};

// Eigen-decomposes H and maps each eigenprojector to its chart vector, a
// fixed point of the affine flow. Sorted by ascending energy.
inline std::vector<StationaryState> stationary_spectrum(
    const Eigen::MatrixXcd& H) {
    validate_hamiltonian(H);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    std::vector<StationaryState> out;
    out.reserve(H.rows());
    for (int k = 0; k < H.rows(); ++k) {
        const Eigen::VectorXcd v = es.eigenvectors().col(k);
        out.push_back({es.eigenvalues()[k],
                       chart_from_density(v * v.adjoint())});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coherent coin trajectories
// ---------------------------------------------------------------------------

// Coins of |alpha e^{-it}>: coherent states stay coherent under the
// oscillator Hamiltonian, so the (n, n') pair carries
//   e^{-|a|^2} |a|^{n+n'} e^{i(phi_a - t)(n - n')} / sqrt(n! n'!)
// and the diagonal weight p3 is an integral of motion.
inline coins::CoinTriple coherent_coin_trajectory(cplx alpha, int n, int np,
                                                  double t) {
    if (n > np)
        throw range_error("coherent_coin_trajectory: requires n <= n'");
    return coins::coherent_coin_closed_form(
        alpha * std::exp(cplx(0.0, -t)), n, np);
}

// ---------------------------------------------------------------------------
// Relative entropy
// ---------------------------------------------------------------------------

// Two-point Kullback-Leibler divergence
//   D(p || q) = p ln(p/q) + (1-p) ln((1-p)/(1-q)) >= 0,
// with the 0 ln 0 = 0 convention. q in {0, 1} with p != q signals infinite
// divergence by returning +inf.
inline double relative_entropy(double p, double q) {
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
        throw range_error("relative_entropy: arguments must lie in [0, 1]");
    const auto term = [](double a, double b) {
        if (a == 0.0) return 0.0;
        if (b == 0.0) return std::numeric_limits<double>::infinity();
        return a * std::log(a / b);
    };
    return term(p, q) + term(1.0 - p, 1.0 - q);
}

}  // namespace tomrep::evolution
