// coin_rep.hpp
// Coin (dichotomic-variable) representation of Fock-basis density matrices.
// Every matrix element is encoded in two-outcome probabilities: diagonals
// are p3^(n,n) directly, and each off-diagonal pair (n < n') is carried by
// (p1, p2) with <n|rho|n'> = (p1 - 1/2) - i (p2 - 1/2). The same convention
// as the qubit module, applied per element.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tomrep/errors.hpp"
#include "tomrep/qubit.hpp"
#include "tomrep/special_math.hpp"

namespace tomrep::coins {

using math::cplx;

struct CoinProbabilities {
    int N = 0;
    std::vector<double> diag;   // p3^(n,n), n = 0..N-1
    std::vector<double> p1, p2; // off-diagonal pairs in lexicographic (n, n') order

    static std::size_t pair_count(int N) { return std::size_t(N) * (N - 1) / 2; }

    // index of the (n, n') pair, n < n'
    static std::size_t off_index(int n, int np, int N) {
        return std::size_t(n) * (2 * N - n - 1) / 2 + std::size_t(np - n - 1);
    }

    double p1_at(int n, int np) const { return p1[off_index(n, np, N)]; }
    double p2_at(int n, int np) const { return p2[off_index(n, np, N)]; }

    static CoinProbabilities zeros(int N) {
        CoinProbabilities c;
        c.N = N;
        c.diag.assign(std::size_t(N), 0.0);
        c.p1.assign(pair_count(N), 0.5);
        c.p2.assign(pair_count(N), 0.5);
        return c;
    }
};

// off-diagonal element from its coin pair and back
inline cplx element_from_pair(double p1, double p2) { return cplx(p1 - 0.5, -(p2 - 0.5)); }

inline void pair_from_element(cplx e, double& p1, double& p2) {
    p1 = 0.5 + e.real();
    p2 = 0.5 - e.imag();
}

inline CoinProbabilities coins_from_density(const Eigen::MatrixXcd& rho, double tol = 1e-9) {
    const int N = int(rho.rows());
    if (N < 1 || rho.cols() != N) throw invalid_state("coins_from_density: matrix not square");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw invalid_state("coins_from_density: matrix is not Hermitian");
    auto c = CoinProbabilities::zeros(N);
    for (int n = 0; n < N; ++n) {
        c.diag[n] = rho(n, n).real();
        if (c.diag[n] < -tol || c.diag[n] > 1.0 + tol)
            throw representation_overflow("coins_from_density: diagonal element " +
                                          std::to_string(c.diag[n]) + " outside [0, 1]");
    }
    for (int n = 0; n < N; ++n)
        for (int np = n + 1; np < N; ++np) {
            double p1, p2;
            pair_from_element(rho(n, np), p1, p2);
            for (double v : {p1, p2})
                if (v < -tol || v > 1.0 + tol)
                    throw representation_overflow(
                        "coins_from_density: off-diagonal coin probability " +
                        std::to_string(v) + " outside [0, 1] at (" + std::to_string(n) + "," +
                        std::to_string(np) + ")");
            const auto k = CoinProbabilities::off_index(n, np, N);
            c.p1[k] = p1;
            c.p2[k] = p2;
        }
    return c;
}

// exact algebraic inverse of coins_from_density; positivity is not checked
// here (see sylvester_check)
inline Eigen::MatrixXcd density_from_coins(const CoinProbabilities& c) {
    const int N = c.N;
    if (N < 1 || int(c.diag.size()) != N || c.p1.size() != CoinProbabilities::pair_count(N) ||
        c.p2.size() != c.p1.size())
        throw invalid_state("density_from_coins: inconsistent field sizes");
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(N, N);
    for (int n = 0; n < N; ++n) rho(n, n) = c.diag[n];
    for (int n = 0; n < N; ++n)
        for (int np = n + 1; np < N; ++np) {
            const auto k = CoinProbabilities::off_index(n, np, N);
            rho(n, np) = element_from_pair(c.p1[k], c.p2[k]);
            rho(np, n) = std::conj(rho(n, np));
        }
    return rho;
}

struct SylvesterResult {
    bool positive = true;
    int first_failing_minor = 0; // 1-based order of the first negative minor
};

// Leading principal minors with a tolerance band around zero. Generic
// (nondegenerate) matrices get the exact positive-semidefinite verdict;
// minors inside the band count as nonnegative.
inline SylvesterResult sylvester_check(const Eigen::MatrixXcd& rho, double tol = 1e-10) {
    const int N = int(rho.rows());
    if (rho.cols() != N) throw invalid_state("sylvester_check: matrix not square");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw invalid_state("sylvester_check: matrix is not Hermitian");
    for (int k = 1; k <= N; ++k) {
        const cplx det = rho.topLeftCorner(k, k).determinant();
        if (det.real() < -tol) return {false, k};
    }
    return {true, 0};
}

// Poisson tail bound for the coherent diagonal weight above the cutoff:
// sum_{n >= N} e^{-|a|^2} |a|^{2n} / n!  <=  first term * geometric factor.
inline double coherent_tail_bound(cplx alpha, int N) {
    const double lam = std::norm(alpha);
    if (lam == 0.0) return 0.0;
    const double log_first = -lam + N * std::log(lam) - math::log_factorial(N);
    const double ratio = lam / (N + 1.0);
    const double geo = ratio < 1.0 ? 1.0 / (1.0 - ratio) : std::numeric_limits<double>::infinity();
    return std::exp(log_first) * geo;
}

// <n|alpha><alpha|n'> = e^{-|a|^2} a^n (a*)^{n'} / sqrt(n! n'!), via logs
inline cplx coherent_element(cplx alpha, int n, int np) {
    if (n < 0 || np < 0) throw range_error("coherent_element: negative index");
    if (alpha == cplx(0.0, 0.0)) return (n == 0 && np == 0) ? 1.0 : 0.0;
    const double lam = std::norm(alpha);
    const double phi = std::arg(alpha);
    const double logmod = -lam + 0.5 * ((n + np) * std::log(lam) - math::log_factorial(n) -
                                        math::log_factorial(np));
    return std::polar(std::exp(logmod), phi * (n - np));
}

struct CoinTriple {
    double p1 = 0.5, p2 = 0.5, p3 = 0.0;
    bool diagonal = false; // true: p3 is the payload; false: (p1, p2) is
};

// Closed-form coins of the coherent state |alpha| for one index pair n <= n'.
inline CoinTriple coherent_coin_closed_form(cplx alpha, int n, int np) {
    if (n > np) throw range_error("coherent_coin_closed_form: requires n <= n'");
    CoinTriple t;
    const cplx e = coherent_element(alpha, n, np);
    if (n == np) {
        t.diagonal = true;
        t.p3 = e.real();
    } else {
        t.diagonal = false;
        pair_from_element(e, t.p1, t.p2);
    }
    return t;
}

// Full coin set of a coherent state at truncation N (default desk scale).
inline CoinProbabilities coherent_coins(cplx alpha, int N = 32) {
    auto c = CoinProbabilities::zeros(N);
    for (int n = 0; n < N; ++n) c.diag[n] = coherent_element(alpha, n, n).real();
    for (int n = 0; n < N; ++n)
        for (int np = n + 1; np < N; ++np) {
            const auto k = CoinProbabilities::off_index(n, np, N);
            pair_from_element(coherent_element(alpha, n, np), c.p1[k], c.p2[k]);
        }
    return c;
}

// ---------------------------------------------------------------------------
// Qubit Bayes map: three dichotomic distributions as one joint table
// ---------------------------------------------------------------------------

// W(j, k), j in {1, 2} (outcome), k in {1, 2, 3} (which coin), each cell
// p_k/3 or (1-p_k)/3; the marginal over j is uniform 1/3.
struct JointCoinDistribution {
    double W[2][3] = {{0, 0, 0}, {0, 0, 0}};

    double sum() const {
        double s = 0.0;
        for (const auto& row : W)
            for (double v : row) s += v;
        return s;
    }
    double marginal(int k) const { return W[0][k] + W[1][k]; }
    // W(j|k) = W(j,k) / P(k)
    double conditional(int j, int k) const { return W[j][k] / marginal(k); }
};

inline JointCoinDistribution qubit_to_joint(const qubit::Probabilities& p) {
    qubit::validate_probs(p);
    JointCoinDistribution d;
    const double ps[3] = {p.p1, p.p2, p.p3};
    for (int k = 0; k < 3; ++k) {
        d.W[0][k] = ps[k] / 3.0;
        d.W[1][k] = (1.0 - ps[k]) / 3.0;
    }
    return d;
}

inline qubit::Probabilities joint_to_qubit(const JointCoinDistribution& d) {
    qubit::Probabilities p;
    p.p1 = d.conditional(0, 0);
    p.p2 = d.conditional(0, 1);
    p.p3 = d.conditional(0, 2);
    return p;
}

} // namespace tomrep::coins
