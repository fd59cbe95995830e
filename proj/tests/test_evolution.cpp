#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tomrep/coin_rep.hpp"
#include "tomrep/errors.hpp"
#include "tomrep/evolution.hpp"

using namespace tomrep;
using evolution::affine_evolve;
using evolution::affine_system;
using evolution::chart_from_density;
using evolution::density_from_chart;
using evolution::kinetic_evolve;
using math::cplx;

namespace {

// Projected coherent state, trace-normalized to absorb the truncation loss.
Eigen::MatrixXcd coherent_projection(cplx alpha, int N) {
    Eigen::MatrixXcd rho = coins::density_from_coins(coins::coherent_coins(alpha, N));
    return rho / rho.trace().real();
}

// Fixed non-diagonal Hermitian test Hamiltonian.
Eigen::MatrixXcd mixing_hamiltonian() {
    Eigen::MatrixXcd H(3, 3);
    H << cplx(1.0, 0.0), cplx(0.3, -0.2), cplx(0.0, 0.1),
         cplx(0.3, 0.2), cplx(0.5, 0.0), cplx(-0.25, 0.0),
         cplx(0.0, -0.1), cplx(-0.25, 0.0), cplx(2.0, 0.0);
    return H;
}

std::vector<double> sorted_eigenvalues(const Eigen::MatrixXcd& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    std::vector<double> ev(es.eigenvalues().data(),
                           es.eigenvalues().data() + es.eigenvalues().size());
    return ev;
}

} // namespace

TEST_CASE("hamiltonian builders", "[evolution]") {
    const Eigen::MatrixXcd H = evolution::oscillator_hamiltonian(4);
    for (int j = 0; j < 4; ++j) {
        CHECK(H(j, j) == cplx(j + 0.5, 0.0));
        for (int k = 0; k < 4; ++k)
            if (k != j) CHECK(H(j, k) == cplx(0.0, 0.0));
    }
    const Eigen::MatrixXcd Hq = evolution::qubit_hamiltonian();
    CHECK(Hq(0, 0) == cplx(0.5, 0.0));
    CHECK(Hq(1, 1) == cplx(-0.5, 0.0));

    CHECK_THROWS_AS(evolution::oscillator_hamiltonian(0), range_error);
    Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(2, 2);
    bad(0, 1) = cplx(0.0, 1.0); // not Hermitian
    CHECK_THROWS_AS(evolution::validate_hamiltonian(bad), invalid_state);
}

TEST_CASE("coin coordinate chart", "[evolution]") {
    SECTION("ordering matches the coin pair layout") {
        Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(3, 3);
        rho(0, 0) = 0.5;
        rho(1, 1) = 0.3;
        rho(2, 2) = 0.2;
        rho(0, 1) = cplx(0.10, -0.04);
        rho(1, 0) = std::conj(rho(0, 1));
        rho(0, 2) = cplx(-0.07, 0.02);
        rho(2, 0) = std::conj(rho(0, 2));
        rho(1, 2) = cplx(0.01, 0.11);
        rho(2, 1) = std::conj(rho(1, 2));

        const Eigen::VectorXd pi = chart_from_density(rho);
        REQUIRE(pi.size() == 8);
        CHECK(pi[0] == Catch::Approx(0.5));
        CHECK(pi[1] == Catch::Approx(0.3));
        CHECK(pi[2] == Catch::Approx(0.5 + 0.10)); // p1(0,1)
        CHECK(pi[3] == Catch::Approx(0.5 + 0.04)); // p2(0,1) = 1/2 - Im
        CHECK(pi[4] == Catch::Approx(0.5 - 0.07)); // p1(0,2)
        CHECK(pi[5] == Catch::Approx(0.5 - 0.02)); // p2(0,2)
        CHECK(pi[6] == Catch::Approx(0.5 + 0.01)); // p1(1,2)
        CHECK(pi[7] == Catch::Approx(0.5 - 0.11)); // p2(1,2)

        const Eigen::MatrixXcd back = density_from_chart(pi, 3);
        CHECK((back - rho).cwiseAbs().maxCoeff() < 1e-15);
    }

    SECTION("the last diagonal is recovered from normalization") {
        Eigen::VectorXd pi = Eigen::VectorXd::Zero(evolution::chart_dim(2));
        pi[0] = 0.7;        // p3(0,0)
        pi[1] = 0.5;        // p1(0,1)
        pi[2] = 0.5;        // p2(0,1)
        const Eigen::MatrixXcd rho = density_from_chart(pi, 2);
        CHECK(rho(1, 1).real() == Catch::Approx(0.3));
        CHECK(std::abs(rho.trace() - cplx(1.0, 0.0)) < 1e-15);
    }

    SECTION("shape errors") {
        CHECK_THROWS_AS(density_from_chart(Eigen::VectorXd::Zero(4), 2),
                        invalid_state);
        CHECK_THROWS_AS(chart_from_density(Eigen::MatrixXcd::Ones(2, 3)),
                        invalid_state);
    }
}

TEST_CASE("kinetic evolution basics", "[evolution]") {
    SECTION("diagonal states are stationary under diagonal H") {
        Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(3, 3);
        rho0(0, 0) = 0.5;
        rho0(1, 1) = 0.3;
        rho0(2, 2) = 0.2;
        const auto traj = kinetic_evolve(rho0, evolution::oscillator_hamiltonian(3),
                                         {0.0, 1.7});
        REQUIRE(traj.states.size() == 2);
        CHECK((traj.states.back() - rho0).cwiseAbs().maxCoeff() < 1e-12);
    }

    SECTION("qubit off-diagonal rotates at unit rate") {
        // coins (p1, p2, p3) = (1, 1/2, 1/2) is the projector onto
        // (|0> + |1>)/sqrt(2); a quarter period later they are (1/2, 1, 1/2).
        Eigen::MatrixXcd rho0(2, 2);
        rho0 << 0.5, 0.5, 0.5, 0.5;
        const auto traj = kinetic_evolve(rho0, evolution::qubit_hamiltonian(),
                                         {0.0, math::pi / 2.0});
        const Eigen::MatrixXcd& rf = traj.states.back();
        const auto c = coins::coins_from_density(rf);
        CHECK(c.p1_at(0, 1) == Catch::Approx(0.5).margin(1e-9));
        CHECK(c.p2_at(0, 1) == Catch::Approx(1.0).margin(1e-9));
        CHECK(c.diag[0] == Catch::Approx(0.5).margin(1e-12));
        CHECK((rf - rf.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(rf.trace() - cplx(1.0, 0.0)) < 1e-12);
    }

    SECTION("unitary flow preserves trace, purity, and spectrum") {
        const Eigen::MatrixXcd H = mixing_hamiltonian();
        Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(3, 3);
        rho0(0, 0) = 0.6;
        rho0(1, 1) = 0.25;
        rho0(2, 2) = 0.15;
        rho0(0, 2) = cplx(0.18, 0.05);
        rho0(2, 0) = std::conj(rho0(0, 2));
        const auto ev0 = sorted_eigenvalues(rho0);

        const auto traj = kinetic_evolve(rho0, H, {0.0, 10.0});
        const Eigen::MatrixXcd& rf = traj.states.back();
        CHECK(std::abs(rf.trace().real() - 1.0) < 1e-8);
        CHECK(std::abs((rf * rf).trace().real() -
                       (rho0 * rho0).trace().real()) < 1e-7);
        const auto evf = sorted_eigenvalues(rf);
        for (std::size_t i = 0; i < ev0.size(); ++i)
            CHECK(evf[i] == Catch::Approx(ev0[i]).margin(1e-7));
    }

    SECTION("input validation") {
        Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(2, 2);
        rho0(0, 0) = 1.0;
        CHECK_THROWS_AS(kinetic_evolve(rho0, evolution::oscillator_hamiltonian(3),
                                       {0.0, 1.0}),
                        invalid_state);
        CHECK_THROWS_AS(kinetic_evolve(rho0, evolution::qubit_hamiltonian(),
                                       {1.0, 0.0}),
                        range_error);
        Eigen::MatrixXcd unnorm = 2.0 * rho0;
        CHECK_THROWS_AS(kinetic_evolve(unnorm, evolution::qubit_hamiltonian(),
                                       {0.0, 1.0}),
                        invalid_state);
    }
}

TEST_CASE("coherent state under the oscillator", "[evolution]") {
    const int N = 24;
    const Eigen::MatrixXcd rho0 = coherent_projection(1.0, N);
    const auto traj = kinetic_evolve(rho0, evolution::oscillator_hamiltonian(N),
                                     {0.0, 2.0 * math::pi}, 1e-3, 9);

    // Harmonic evolution is 2pi-periodic.
    CHECK((traj.states.back() - rho0).cwiseAbs().maxCoeff() < 1e-6);

    // Closed-form coin trajectories track the kinetic integration, and the
    // diagonal weights are integrals of motion.
    const std::pair<int, int> pairs[] = {{0, 0}, {0, 1}, {1, 2}};
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto c = coins::coins_from_density(traj.states[i]);
        for (const auto& [n, np] : pairs) {
            const auto closed =
                evolution::coherent_coin_trajectory(1.0, n, np, traj.times[i]);
            if (n == np) {
                CHECK(c.diag[n] == Catch::Approx(closed.p3).margin(1e-6));
                CHECK(closed.p3 ==
                      Catch::Approx(evolution::coherent_coin_trajectory(1.0, n, np, 0.0).p3)
                          .margin(1e-13));
            } else {
                CHECK(c.p1_at(n, np) == Catch::Approx(closed.p1).margin(1e-6));
                CHECK(c.p2_at(n, np) == Catch::Approx(closed.p2).margin(1e-6));
            }
        }
    }
}

TEST_CASE("coherent coin trajectory closed form", "[evolution]") {
    const double em1 = std::exp(-1.0);

    SECTION("static coins at t = 0") {
        const auto c = evolution::coherent_coin_trajectory(1.0, 0, 1, 0.0);
        CHECK(c.p1 == Catch::Approx(0.5 + em1).margin(1e-15));
        CHECK(c.p2 == Catch::Approx(0.5).margin(1e-15));
    }

    SECTION("quarter period rotates the off-diagonal to +i e^{-1}") {
        // rho_{01}(t) picks up e^{+it} under H = diag(n + 1/2), so at
        // t = pi/2 the element is i e^{-1}: p1 = 1/2, p2 = 1/2 - e^{-1}.
        // (Verified against the kinetic integration in the trajectory test.)
        const auto c = evolution::coherent_coin_trajectory(1.0, 0, 1, math::pi / 2.0);
        CHECK(c.p1 == Catch::Approx(0.5).margin(1e-14));
        CHECK(c.p2 == Catch::Approx(0.5 - em1).margin(1e-14));
    }

    SECTION("larger alpha against the kinetic oracle") {
        const cplx alpha(1.2, -0.9); // |alpha| = 1.5
        const int N = 24;
        const auto traj = kinetic_evolve(coherent_projection(alpha, N),
                                         evolution::oscillator_hamiltonian(N),
                                         {0.0, 1.3});
        const auto c = coins::coins_from_density(traj.states.back());
        const auto c25 = evolution::coherent_coin_trajectory(alpha, 2, 5, 1.3);
        const auto c44 = evolution::coherent_coin_trajectory(alpha, 4, 4, 1.3);
        CHECK(c.p1_at(2, 5) == Catch::Approx(c25.p1).margin(1e-6));
        CHECK(c.p2_at(2, 5) == Catch::Approx(c25.p2).margin(1e-6));
        CHECK(c.diag[4] == Catch::Approx(c44.p3).margin(1e-6));
    }

    SECTION("index order is enforced") {
        CHECK_THROWS_AS(evolution::coherent_coin_trajectory(1.0, 2, 1, 0.0),
                        range_error);
    }
}

TEST_CASE("affine chart flow", "[evolution]") {
    SECTION("zero Hamiltonian gives the zero system") {
        const auto sys = affine_system(Eigen::MatrixXcd::Zero(2, 2));
        CHECK(sys.M.cwiseAbs().maxCoeff() < 1e-15);
        CHECK(sys.gamma.cwiseAbs().maxCoeff() < 1e-15);
    }

    SECTION("qubit system rotates (p1, p2) and freezes p3") {
        const auto sys = affine_system(evolution::qubit_hamiltonian());
        REQUIRE(sys.M.rows() == 3);
        // chart = (p3, p1, p2): dp3 = 0, dp1 = 1/2 - p2, dp2 = p1 - 1/2.
        Eigen::MatrixXd M_expect(3, 3);
        M_expect << 0, 0, 0, 0, 0, -1, 0, 1, 0;
        Eigen::VectorXd g_expect(3);
        g_expect << 0.0, 0.5, -0.5;
        CHECK((sys.M - M_expect).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((sys.gamma - g_expect).cwiseAbs().maxCoeff() < 1e-14);
    }

    SECTION("dual-path agreement for the oscillator") {
        const int N = 4;
        const Eigen::MatrixXcd H = evolution::oscillator_hamiltonian(N);
        const Eigen::MatrixXcd rho0 = coherent_projection(0.9, N);
        const auto kin = kinetic_evolve(rho0, H, {0.0, 5.0}, 1e-3, 6);
        const auto sys = affine_system(H);
        const auto aff = affine_evolve(sys, chart_from_density(rho0),
                                       {0.0, 5.0}, 1e-3, 6);
        REQUIRE(kin.times.size() == aff.times.size());
        for (std::size_t i = 0; i < kin.times.size(); ++i) {
            const Eigen::VectorXd from_kin = chart_from_density(kin.states[i]);
            CHECK((from_kin - aff.states[i]).cwiseAbs().maxCoeff() < 1e-7);
        }
    }

    SECTION("dual-path agreement for a mixing Hamiltonian") {
        const Eigen::MatrixXcd H = mixing_hamiltonian();
        Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(3, 3);
        rho0(0, 0) = 0.4;
        rho0(1, 1) = 0.35;
        rho0(2, 2) = 0.25;
        rho0(1, 2) = cplx(-0.05, 0.12);
        rho0(2, 1) = std::conj(rho0(1, 2));
        const auto kin = kinetic_evolve(rho0, H, {0.0, 3.0}, 1e-3, 4);
        const auto aff = affine_evolve(affine_system(H), chart_from_density(rho0),
                                       {0.0, 3.0}, 1e-3, 4);
        for (std::size_t i = 0; i < kin.times.size(); ++i)
            CHECK((chart_from_density(kin.states[i]) - aff.states[i])
                      .cwiseAbs()
                      .maxCoeff() < 1e-7);
    }
}

TEST_CASE("stationary spectra", "[evolution]") {
    SECTION("oscillator energies are n + 1/2") {
        const auto spec =
            evolution::stationary_spectrum(evolution::oscillator_hamiltonian(8));
        REQUIRE(spec.size() == 8);
        for (int k = 0; k < 8; ++k) {
            CHECK(spec[k].energy == Catch::Approx(k + 0.5).margin(1e-12));
            // The k-th stationary chart is the coin image of |k><k|.
            const Eigen::MatrixXcd rho = density_from_chart(spec[k].pi, 8);
            for (int j = 0; j < 8; ++j)
                CHECK(rho(j, j).real() ==
                      Catch::Approx(j == k ? 1.0 : 0.0).margin(1e-12));
        }
    }

    SECTION("qubit energies are +-1/2, ascending") {
        const auto spec = evolution::stationary_spectrum(evolution::qubit_hamiltonian());
        REQUIRE(spec.size() == 2);
        CHECK(spec[0].energy == Catch::Approx(-0.5).margin(1e-14));
        CHECK(spec[1].energy == Catch::Approx(0.5).margin(1e-14));
    }

    SECTION("stationarity under the affine flow and the kinetic equation") {
        const Eigen::MatrixXcd H = mixing_hamiltonian();
        const auto sys = affine_system(H);
        const auto spec = evolution::stationary_spectrum(H);
        double energy_sum = 0.0;
        for (const auto& st : spec) {
            energy_sum += st.energy;
            CHECK((sys.M * st.pi + sys.gamma).cwiseAbs().maxCoeff() <= 1e-10);
            const Eigen::MatrixXcd rho = density_from_chart(st.pi, 3);
            const auto traj = kinetic_evolve(rho, H, {0.0, 2.0});
            CHECK((traj.states.back() - rho).cwiseAbs().maxCoeff() < 1e-8);
        }
        CHECK(energy_sum == Catch::Approx(H.trace().real()).margin(1e-12));
    }
}

TEST_CASE("relative entropy", "[evolution]") {
    using evolution::relative_entropy;

    SECTION("pinned values") {
        CHECK(relative_entropy(0.3, 0.3) == 0.0);
        // 0.9 ln 1.8 + 0.1 ln 0.2
        CHECK(relative_entropy(0.9, 0.5) ==
              Catch::Approx(0.36806420716849707).margin(1e-14));
        CHECK(relative_entropy(0.0, 0.3) ==
              Catch::Approx(-std::log(0.7)).margin(1e-15));
    }

    SECTION("boundary conventions") {
        CHECK(std::isinf(relative_entropy(0.5, 0.0)));
        CHECK(std::isinf(relative_entropy(0.5, 1.0)));
        CHECK(relative_entropy(0.0, 0.0) == 0.0);
        CHECK(relative_entropy(1.0, 1.0) == 0.0);
        CHECK_THROWS_AS(relative_entropy(-0.1, 0.5), range_error);
        CHECK_THROWS_AS(relative_entropy(0.5, 1.2), range_error);
    }

    SECTION("nonnegative, zero only on the diagonal") {
        for (double p = 0.05; p < 1.0; p += 0.09)
            for (double q = 0.05; q < 1.0; q += 0.09) {
                const double d = relative_entropy(p, q);
                CHECK(d >= 0.0);
                if (std::abs(p - q) > 1e-12) CHECK(d > 0.0);
            }
    }

    SECTION("entropic inequality along the coherent trajectory") {
        for (int i = 0; i < 100; ++i) {
            const double t = 2.0 * math::pi * i / 99.0;
            const auto c = evolution::coherent_coin_trajectory(1.0, 0, 1, t);
            REQUIRE(c.p1 > 0.0);
            REQUIRE(c.p1 < 1.0);
            REQUIRE(c.p2 > 0.0);
            REQUIRE(c.p2 < 1.0);
            CHECK(relative_entropy(c.p1, c.p2) >= -1e-12);
        }
    }
}
