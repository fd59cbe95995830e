#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "tomrep/coin_rep.hpp"
#include "tomrep/states.hpp"

using namespace tomrep;
using math::cplx;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::MatrixXcd random_density(std::mt19937& rng, int N) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd G(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) G(i, j) = cplx(g(rng), g(rng));
    Eigen::MatrixXcd rho = G.adjoint() * G;
    return rho / rho.trace().real();
}

Eigen::MatrixXcd coherent_projector(cplx alpha, int N) {
    Eigen::VectorXcd c(N);
    for (int n = 0; n < N; ++n)
        c[n] = std::exp(-0.5 * std::norm(alpha)) * std::pow(alpha, n) /
               std::sqrt(std::tgamma(n + 1.0));
    return c * c.adjoint();
}

} // namespace

TEST_CASE("off-diagonal pair layout", "[coin_rep]") {
    using C = coins::CoinProbabilities;
    REQUIRE(C::pair_count(4) == 6);
    int expect = 0;
    for (int n = 0; n < 4; ++n)
        for (int np = n + 1; np < 4; ++np) REQUIRE(C::off_index(n, np, 4) == std::size_t(expect++));
}

TEST_CASE("coins of a Fock projector", "[coin_rep]") {
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(5, 5);
    rho(2, 2) = 1.0;
    const auto c = coins::coins_from_density(rho);
    for (int n = 0; n < 5; ++n) REQUIRE(c.diag[n] == (n == 2 ? 1.0 : 0.0));
    for (double v : c.p1) REQUIRE(v == 0.5);
    for (double v : c.p2) REQUIRE(v == 0.5);
}

TEST_CASE("coins of a coherent state", "[coin_rep]") {
    const auto c = coins::coins_from_density(coherent_projector(cplx(1, 0), 12));
    const double e1 = std::exp(-1.0);
    REQUIRE_THAT(c.diag[0], WithinAbs(e1, 1e-12));
    REQUIRE_THAT(c.diag[1], WithinAbs(e1, 1e-12));
    REQUIRE_THAT(c.diag[2], WithinAbs(e1 / 2, 1e-12));
    REQUIRE_THAT(c.p1_at(0, 1), WithinAbs(0.5 + e1, 1e-12));
    REQUIRE_THAT(c.p2_at(0, 1), WithinAbs(0.5, 1e-12));
}

TEST_CASE("coins/density roundtrip and qubit consistency", "[coin_rep]") {
    std::mt19937 rng(1871);
    for (int N : {2, 3, 5, 8}) {
        for (int k = 0; k < 25; ++k) {
            const auto rho = random_density(rng, N);
            const auto back = coins::density_from_coins(coins::coins_from_density(rho));
            REQUIRE((back - rho).cwiseAbs().maxCoeff() < 1e-15);
        }
    }
    // N = 2 agrees with the qubit-module parametrization
    const qubit::Probabilities p{0.7, 0.4, 0.6};
    const auto rho2 = qubit::density_from_probs(p);
    const auto c2 = coins::coins_from_density(rho2);
    REQUIRE_THAT(c2.diag[0], WithinAbs(p.p3, 1e-15));
    REQUIRE_THAT(c2.p1_at(0, 1), WithinAbs(p.p1, 1e-15));
    REQUIRE_THAT(c2.p2_at(0, 1), WithinAbs(p.p2, 1e-15));
}

TEST_CASE("coin probabilities of physical states stay in range", "[coin_rep]") {
    std::mt19937 rng(404);
    for (int N : {2, 4, 8, 16}) {
        for (int k = 0; k < 10; ++k) {
            const auto c = coins::coins_from_density(random_density(rng, N));
            for (double v : c.diag) REQUIRE((v >= 0.0 && v <= 1.0));
            for (double v : c.p1) REQUIRE((v >= 0.0 && v <= 1.0));
            for (double v : c.p2) REQUIRE((v >= 0.0 && v <= 1.0));
        }
    }
    // unphysical off-diagonal magnitude triggers the overflow error
    Eigen::MatrixXcd bad(2, 2);
    bad << 0.5, 0.9, 0.9, 0.5;
    REQUIRE_THROWS_AS(coins::coins_from_density(bad), tomrep::representation_overflow);
}

TEST_CASE("sylvester_check", "[coin_rep]") {
    REQUIRE(coins::sylvester_check(Eigen::MatrixXcd::Identity(4, 4) / 4.0).positive);

    Eigen::MatrixXcd neg = Eigen::MatrixXcd::Zero(2, 2);
    neg(0, 0) = 1.0 / 0.9;
    neg(1, 1) = -0.1 / 0.9;
    const auto v = coins::sylvester_check(neg);
    REQUIRE_FALSE(v.positive);
    REQUIRE(v.first_failing_minor == 2);

    std::mt19937 rng(2024);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const int N = 2 + int(rng() % 7);
        Eigen::MatrixXcd H(N, N);
        for (int i = 0; i < N; ++i) {
            H(i, i) = g(rng);
            for (int j = i + 1; j < N; ++j) {
                H(i, j) = cplx(g(rng), g(rng));
                H(j, i) = std::conj(H(i, j));
            }
        }
        // occasionally shift to make positive cases common too
        if (k % 3 == 0) H += (3.0 + std::abs(g(rng))) * Eigen::MatrixXcd::Identity(N, N);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
        const bool oracle = es.eigenvalues().minCoeff() >= 0.0;
        REQUIRE(coins::sylvester_check(H).positive == oracle);
    }
}

TEST_CASE("coherent coin closed form", "[coin_rep]") {
    // alpha = 0: vacuum
    const auto v = coins::coherent_coin_closed_form(cplx(0, 0), 0, 0);
    REQUIRE(v.diagonal);
    REQUIRE(v.p3 == 1.0);
    const auto voff = coins::coherent_coin_closed_form(cplx(0, 0), 0, 3);
    REQUIRE((voff.p1 == 0.5 && voff.p2 == 0.5));

    const double e1 = std::exp(-1.0);
    REQUIRE_THAT(coins::coherent_coin_closed_form(cplx(1, 0), 1, 1).p3, WithinAbs(e1, 1e-15));

    // alpha = i, pair (0,1): element is -i e^{-1}
    const auto t = coins::coherent_coin_closed_form(cplx(0, 1), 0, 1);
    REQUIRE_THAT(t.p1, WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(t.p2, WithinAbs(0.5 + e1, 1e-15));

    REQUIRE_THROWS_AS(coins::coherent_coin_closed_form(cplx(1, 0), 2, 1), tomrep::range_error);

    // closed form vs the truncated projector
    for (cplx alpha : {cplx(1, 0), cplx(0.4, -0.9)}) {
        const auto closed = coins::coherent_coins(alpha, 12);
        const auto quad = coins::coins_from_density(coherent_projector(alpha, 12));
        double dmax = 0.0;
        for (int n = 0; n < 12; ++n) dmax = std::max(dmax, std::abs(closed.diag[n] - quad.diag[n]));
        for (std::size_t k = 0; k < closed.p1.size(); ++k) {
            dmax = std::max(dmax, std::abs(closed.p1[k] - quad.p1[k]));
            dmax = std::max(dmax, std::abs(closed.p2[k] - quad.p2[k]));
        }
        REQUIRE(dmax < 1e-6);
    }
}

TEST_CASE("coherent diagonal tail bound", "[coin_rep]") {
    for (cplx alpha : {cplx(2, 0), cplx(1.2, -1.0), cplx(0.5, 0.5)}) {
        for (int N : {8, 16, 32}) {
            const auto c = coins::coherent_coins(alpha, N);
            double sum = 0.0;
            for (double d : c.diag) sum += d;
            const double residual = 1.0 - sum;
            // slack 1e-14 absorbs the roundoff of the diagonal summation
            REQUIRE(residual <= coins::coherent_tail_bound(alpha, N) + 1e-14);
            REQUIRE(residual >= -1e-14);
        }
    }
}

TEST_CASE("qubit joint distribution", "[coin_rep]") {
    const auto even = coins::qubit_to_joint({0.5, 0.5, 0.5});
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 3; ++k) REQUIRE_THAT(even.W[j][k], WithinAbs(1.0 / 6, 1e-15));

    const auto px = coins::qubit_to_joint({1.0, 0.5, 0.5});
    REQUIRE_THAT(px.W[0][0], WithinAbs(1.0 / 3, 1e-15));
    REQUIRE_THAT(px.W[1][0], WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(px.W[0][1], WithinAbs(1.0 / 6, 1e-15));
    REQUIRE_THAT(px.sum(), WithinAbs(1.0, 1e-12));
    for (int k = 0; k < 3; ++k) REQUIRE_THAT(px.marginal(k), WithinAbs(1.0 / 3, 1e-12));

    std::mt19937 rng(8080);
    std::uniform_real_distribution<double> u(-0.28, 0.28);
    for (int k = 0; k < 100; ++k) {
        const qubit::Probabilities p{0.5 + u(rng), 0.5 + u(rng), 0.5 + u(rng)};
        const auto joint = coins::qubit_to_joint(p);
        const auto back = coins::joint_to_qubit(joint);
        REQUIRE_THAT(back.p1, WithinAbs(p.p1, 1e-14));
        REQUIRE_THAT(back.p2, WithinAbs(p.p2, 1e-14));
        REQUIRE_THAT(back.p3, WithinAbs(p.p3, 1e-14));
        // conditionals reproduce the dichotomic pairs
        REQUIRE_THAT(joint.conditional(1, 0), WithinAbs(1.0 - p.p1, 1e-14));
        REQUIRE_THAT(joint.conditional(1, 2), WithinAbs(1.0 - p.p3, 1e-14));
    }
}
