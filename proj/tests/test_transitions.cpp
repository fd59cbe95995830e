#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "tomrep/errors.hpp"
#include "tomrep/states.hpp"
#include "tomrep/tomography.hpp"
#include "tomrep/transitions.hpp"

using namespace tomrep;
using math::cplx;
using states::StateSpec;
using tomography::SymplecticTomogram;
using transitions::born_probability;
using transitions::gaussian_transition;
using transitions::tomographic_transition;

TEST_CASE("born rule probabilities", "[transitions]") {
    SECTION("identical states give unit probability") {
        const auto spec = StateSpec::coherent(cplx(0.5, 0.5));
        const auto r = born_probability(spec, spec);
        CHECK(r.probability == Catch::Approx(1.0).margin(1e-10));
        CHECK(r.method == "born");
        const auto rf = born_probability(StateSpec::fock(2), StateSpec::fock(2));
        CHECK(rf.probability == Catch::Approx(1.0).margin(1e-10));
    }

    SECTION("orthogonal number states") {
        const auto r = born_probability(StateSpec::fock(0), StateSpec::fock(1));
        CHECK(r.probability == Catch::Approx(0.0).margin(1e-10));
    }

    SECTION("vacuum against a coherent state") {
        const auto r = born_probability(StateSpec::fock(0), StateSpec::coherent(1.0));
        CHECK(r.probability == Catch::Approx(std::exp(-1.0)).margin(1e-8));
        // |<n|alpha>|^2 = e^{-|a|^2} |a|^{2n} / n!
        const auto r1 = born_probability(StateSpec::fock(1), StateSpec::coherent(1.0));
        CHECK(r1.probability == Catch::Approx(std::exp(-1.0)).margin(1e-8));
    }

    SECTION("squeezed against vacuum, closed form") {
        const auto r = born_probability(StateSpec::gaussian(1.0, 0.0),
                                        StateSpec::gaussian(0.5, 0.0));
        CHECK(r.probability ==
              Catch::Approx(2.0 * std::sqrt(2.0) / 3.0).margin(1e-12));
        CHECK(r.est_error < 1e-12);
    }

    SECTION("displaced coherent pair") {
        const cplx a1(1.0, 0.0), a2(0.5, 0.5);
        const auto r = born_probability(StateSpec::coherent(a1), StateSpec::coherent(a2));
        CHECK(r.probability ==
              Catch::Approx(std::exp(-std::norm(a1 - a2))).margin(1e-12));
    }

    SECTION("symmetry") {
        const auto a = StateSpec::fock(3);
        const auto b = StateSpec::gaussian(cplx(0.7, 0.4), cplx(-0.5, 0.0));
        CHECK(born_probability(a, b).probability ==
              Catch::Approx(born_probability(b, a).probability).margin(1e-12));
    }
}

TEST_CASE("tomographic transition integral", "[transitions]") {
    SECTION("pinned probes") {
        const auto vac = SymplecticTomogram::from_fock(0);
        const auto r00 = tomographic_transition(vac, vac);
        CHECK(r00.probability == Catch::Approx(1.0).margin(1e-5));
        CHECK(r00.method == "tomographic");
        CHECK(r00.est_error < 1e-6);

        const auto coh = SymplecticTomogram::from_spec(StateSpec::coherent(1.0));
        const auto r0a = tomographic_transition(vac, coh);
        CHECK(r0a.probability == Catch::Approx(std::exp(-1.0)).margin(1e-4));

        const auto f1 = SymplecticTomogram::from_fock(1);
        CHECK(tomographic_transition(vac, f1).probability ==
              Catch::Approx(0.0).margin(1e-4));
        CHECK(tomographic_transition(f1, f1).probability ==
              Catch::Approx(1.0).margin(1e-4));
    }

    SECTION("coherent pair matches the displacement overlap") {
        const cplx a1(1.0, 0.0), a2(0.5, 0.5);
        const auto w1 = SymplecticTomogram::from_spec(StateSpec::coherent(a1));
        const auto w2 = SymplecticTomogram::from_spec(StateSpec::coherent(a2));
        const auto r = tomographic_transition(w1, w2);
        CHECK(r.probability ==
              Catch::Approx(std::exp(-std::norm(a1 - a2))).margin(1e-4));
        // Exchange symmetry is exact on the shared polar grid.
        CHECK(tomographic_transition(w2, w1).probability ==
              Catch::Approx(r.probability).margin(1e-8));
    }

    SECTION("integrand decays with a positive Gaussian rate") {
        const auto w1 = SymplecticTomogram::from_spec(StateSpec::gaussian(1.0, 0.0));
        const auto w2 = SymplecticTomogram::from_spec(StateSpec::gaussian(0.5, 0.0));
        const auto mag = [&](double s) {
            const tomography::ReferenceFrame f{s, 0.0};
            const tomography::ReferenceFrame g{-s, 0.0};
            return std::abs(w1.characteristic(f) * w2.characteristic(g));
        };
        const double c_est = (std::log(mag(3.0)) - std::log(mag(6.0))) / 27.0;
        CHECK(c_est > 0.0);
        CHECK(mag(8.0) < std::exp(-c_est * 64.0) * 1.01);
    }
}

TEST_CASE("closed gaussian transition", "[transitions]") {
    const states::GaussianState vac = states::gaussian_packet(0.5, 0.0);

    SECTION("pinned probes") {
        const auto r = gaussian_transition(vac, vac);
        CHECK(r.probability == Catch::Approx(1.0).margin(1e-6));
        CHECK(r.method == "gaussian-closed");

        const auto ra = gaussian_transition(vac, states::coherent_packet(1.0));
        CHECK(ra.probability == Catch::Approx(std::exp(-1.0)).margin(1e-6));

        const auto rs = gaussian_transition(states::gaussian_packet(1.0, 0.0), vac);
        CHECK(rs.probability ==
              Catch::Approx(2.0 * std::sqrt(2.0) / 3.0).margin(1e-6));
    }

    SECTION("symmetry") {
        const states::GaussianState g1 = states::gaussian_packet(cplx(1.5, -0.6), cplx(0.2, 0.7));
        const auto r12 = gaussian_transition(g1, vac);
        const auto r21 = gaussian_transition(vac, g1);
        CHECK(r12.probability == Catch::Approx(r21.probability).margin(1e-8));
    }

    SECTION("non-normalizable input is rejected") {
        states::GaussianState bad = vac;
        bad.A = cplx(-0.2, 0.3);
        CHECK_THROWS(gaussian_transition(bad, vac));
    }
}

TEST_CASE("cross-method agreement battery", "[transitions]") {
    std::vector<StateSpec> battery = {
        StateSpec::fock(0),
        StateSpec::fock(1),
        StateSpec::fock(2),
        StateSpec::fock(3),
        StateSpec::fock(4),
        StateSpec::coherent(1.0),
        StateSpec::coherent(cplx(-0.8, 0.0)),
        StateSpec::coherent(cplx(0.5, 0.5)),
        StateSpec::coherent(cplx(0.9, -1.2)),
        StateSpec::gaussian(0.3, 0.0),
        StateSpec::gaussian(1.0, 0.0),
        StateSpec::gaussian(cplx(2.0, 0.0), cplx(0.3, 0.0)),
        StateSpec::gaussian(cplx(0.7, 0.4), cplx(-0.5, 0.0)),
        StateSpec::gaussian(cplx(1.5, -0.6), cplx(0.2, 0.7)),
    };

    for (std::size_t i = 0; i < battery.size(); ++i) {
        for (std::size_t j = i; j < battery.size(); ++j) {
            CAPTURE(i, j);
            const auto born = born_probability(battery[i], battery[j]);
            const auto w1 = SymplecticTomogram::from_spec(battery[i]);
            const auto w2 = SymplecticTomogram::from_spec(battery[j]);
            const auto tomo = tomographic_transition(w1, w2);
            CHECK(std::abs(tomo.probability - born.probability) <= 1e-4);
            CHECK(tomo.est_error <= 1e-4);

            const auto g1 = states::make_wavefunction(battery[i]).gaussian;
            const auto g2 = states::make_wavefunction(battery[j]).gaussian;
            if (g1 && g2) {
                const auto cls = gaussian_transition(*g1, *g2);
                CHECK(std::abs(cls.probability - born.probability) <= 1e-6);
            }
        }
    }
}
