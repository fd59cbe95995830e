// tomrep: command-line surface over the probability-representation library.
// Subcommands: tomogram, reconstruct, evolve, spectrum, transition, qubit.
// Exit codes: 0 success, 2 usage/parse error, 3 numeric-quality failure.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "tomrep/coin_rep.hpp"
#include "tomrep/errors.hpp"
#include "tomrep/evolution.hpp"
#include "tomrep/io.hpp"
#include "tomrep/qubit.hpp"
#include "tomrep/states.hpp"
#include "tomrep/tomography.hpp"
#include "tomrep/transitions.hpp"

namespace {

using cplx = std::complex<double>;
namespace io = tomrep::io;

// Output goes to the -o path, or to stdout when none is given.
struct Sink {
    std::ofstream file;
    std::ostream* os = &std::cout;
    bool to_stdout = true;
};

Sink open_sink(const std::string& path) {
    Sink s;
    if (path.empty()) return s;
    s.file.open(path);
    if (!s.file)
        throw tomrep::invalid_state("cannot open output file '" + path + "'");
    s.os = &s.file;
    s.to_stdout = false;
    return s;
}

// ---------------------------------------------------------------------------
// tomogram
// ---------------------------------------------------------------------------

struct TomogramArgs {
    std::string state;
    std::string frames = "circle:8";
    std::string range = "-5:5:101";
    std::string out;
};

void run_tomogram(const TomogramArgs& a) {
    const tomrep::states::StateSpec spec = io::parse_state_spec(a.state);
    const auto frames = io::parse_frames(a.frames);
    const std::vector<double> Xs = io::parse_range(a.range);
    const auto w = tomrep::tomography::SymplecticTomogram::from_spec(spec);

    Sink sink = open_sink(a.out);
    io::write_tomogram_csv(*sink.os, w, frames, Xs);
    if (!sink.to_stdout) sink.file.flush();

    // Residual report; kept off the CSV stream when that stream is stdout.
    std::ostream& rep = sink.to_stdout ? std::cerr : std::cout;
    for (const auto& f : frames) {
        char line[128];
        std::snprintf(line, sizeof line, "frame mu=%.17g nu=%.17g residual=%.3e\n",
                      f.mu, f.nu, w.normalization_residual(f));
        rep << line;
    }
}

// ---------------------------------------------------------------------------
// reconstruct
// ---------------------------------------------------------------------------

struct ReconstructArgs {
    std::string state;
    std::string grid;
    int N = 0;
    double tol = 1e-6;
    std::string out;
};

void run_reconstruct(const ReconstructArgs& a) {
    if (a.state.empty() == a.grid.empty())
        throw tomrep::invalid_state(
            "reconstruct: give exactly one source, --state or --grid");
    if (a.N < 2 || a.N > 48)
        throw tomrep::invalid_state("reconstruct: --N must be in [2, 48]");
    if (!(a.tol > 0.0))
        throw tomrep::invalid_state("reconstruct: --tol must be positive");

    tomrep::tomography::SymplecticTomogram w = [&] {
        if (!a.state.empty())
            return tomrep::tomography::SymplecticTomogram::from_spec(
                io::parse_state_spec(a.state));
        std::ifstream in(a.grid);
        if (!in)
            throw tomrep::invalid_state("cannot open grid file '" + a.grid + "'");
        return tomrep::tomography::SymplecticTomogram::from_grid(
            io::read_tomogram_csv(in));
    }();

    const auto res = tomrep::tomography::density_from_tomogram(w, a.N);
    const auto coins = tomrep::coins::coins_from_density(
        res.rho, std::max(a.tol, 1e-9));

    Sink sink = open_sink(a.out);
    *sink.os << io::reconstruction_to_json_text(res, coins) << '\n';
    if (!sink.to_stdout) sink.file.flush();

    if (res.trace_residual > a.tol || res.hermiticity_residual > a.tol)
        throw tomrep::accuracy_error(
            "reconstruct: residuals exceed tolerance (trace " +
                io::format_double(res.trace_residual) + ", hermiticity " +
                io::format_double(res.hermiticity_residual) + ")",
            cplx(res.trace_residual, 0.0), res.hermiticity_residual);
}

// ---------------------------------------------------------------------------
// evolve
// ---------------------------------------------------------------------------

struct EvolveArgs {
    std::string state;
    std::string hamiltonian = "oscillator";
    int N = 0;
    std::string trange;
    std::string out;
};

Eigen::MatrixXcd initial_density(const tomrep::states::StateSpec& spec, int N) {
    using Kind = tomrep::states::StateSpec::Kind;
    if (spec.kind == Kind::fock) {
        if (spec.n >= N)
            throw tomrep::invalid_state(
                "evolve: fock level must be below the truncation N");
        Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(N, N);
        rho(spec.n, spec.n) = 1.0;
        return rho;
    }
    if (spec.kind == Kind::coherent) {
        // Truncated coherent projector, renormalized to unit trace.
        Eigen::MatrixXcd rho = tomrep::coins::density_from_coins(
            tomrep::coins::coherent_coins(spec.alpha, N));
        rho /= rho.trace().real();
        return rho;
    }
    throw tomrep::invalid_state(
        "evolve: initial state must be fock or coherent");
}

void run_evolve(const EvolveArgs& a) {
    if (a.N < 2 || a.N > 64)
        throw tomrep::invalid_state("evolve: --N must be in [2, 64]");
    const tomrep::states::StateSpec spec = io::parse_state_spec(a.state);
    const std::vector<double> ts = io::parse_range(a.trange);

    Eigen::MatrixXcd H;
    if (a.hamiltonian == "oscillator") {
        H = tomrep::evolution::oscillator_hamiltonian(a.N);
    } else if (a.hamiltonian == "qubit") {
        if (a.N != 2)
            throw tomrep::invalid_state("evolve: the qubit hamiltonian needs N=2");
        H = tomrep::evolution::qubit_hamiltonian();
    } else {
        throw tomrep::invalid_state(
            "evolve: --hamiltonian must be oscillator or qubit");
    }

    const Eigen::MatrixXcd rho0 = initial_density(spec, a.N);
    const auto sys = tomrep::evolution::affine_system(H);
    const auto traj = tomrep::evolution::affine_evolve(
        sys, tomrep::evolution::chart_from_density(rho0),
        {ts.front(), ts.back()}, 1e-3, static_cast<int>(ts.size()));

    Sink sink = open_sink(a.out);
    io::write_trajectory_csv(*sink.os, traj, a.N);
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

struct SpectrumArgs {
    bool oscillator = false;
    bool qubit = false;
    int N = 4;
    std::string out;
};

void run_spectrum(const SpectrumArgs& a) {
    if (a.oscillator == a.qubit)
        throw tomrep::invalid_state(
            "spectrum: give exactly one of --oscillator or --qubit");
    Eigen::MatrixXcd H;
    if (a.oscillator) {
        if (a.N < 2 || a.N > 64)
            throw tomrep::invalid_state("spectrum: --N must be in [2, 64]");
        H = tomrep::evolution::oscillator_hamiltonian(a.N);
    } else {
        H = tomrep::evolution::qubit_hamiltonian();
    }
    const auto spec = tomrep::evolution::stationary_spectrum(H);
    Sink sink = open_sink(a.out);
    *sink.os << io::spectrum_to_json_text(spec) << '\n';
}

// ---------------------------------------------------------------------------
// transition
// ---------------------------------------------------------------------------

struct TransitionArgs {
    std::string a;
    std::string b;
    std::string methods = "born,tomographic";
    double tol = 1e-3;
    std::string out;
};

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t next = text.find(',', pos);
        parts.push_back(text.substr(
            pos, next == std::string::npos ? std::string::npos : next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return parts;
}

void run_transition(const TransitionArgs& a) {
    if (!(a.tol > 0.0))
        throw tomrep::invalid_state("transition: --tol must be positive");
    const auto sa = io::parse_state_spec(a.a);
    const auto sb = io::parse_state_spec(a.b);

    std::vector<std::pair<std::string, tomrep::transitions::TransitionResult>>
        results;
    for (const std::string& m : split_list(a.methods)) {
        if (m == "born") {
            results.emplace_back(m, tomrep::transitions::born_probability(sa, sb));
        } else if (m == "tomographic") {
            results.emplace_back(
                m, tomrep::transitions::tomographic_transition(
                       tomrep::tomography::SymplecticTomogram::from_spec(sa),
                       tomrep::tomography::SymplecticTomogram::from_spec(sb)));
        } else if (m == "gaussian") {
            const auto wa = tomrep::states::make_wavefunction(sa);
            const auto wb = tomrep::states::make_wavefunction(sb);
            if (!wa.gaussian || !wb.gaussian)
                throw tomrep::invalid_state(
                    "transition: the gaussian method needs Gaussian states on both sides");
            results.emplace_back(m, tomrep::transitions::gaussian_transition(
                                        *wa.gaussian, *wb.gaussian));
        } else {
            throw tomrep::invalid_state("transition: unknown method '" + m + "'");
        }
    }
    if (results.empty())
        throw tomrep::invalid_state("transition: no methods requested");

    double worst = 0.0;
    std::string json = "{\"methods\":{";
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (i) json += ',';
        json += '"' + results[i].first + "\":{\"probability\":" +
                io::format_double(results[i].second.probability) +
                ",\"est_error\":" +
                io::format_double(results[i].second.est_error) + '}';
    }
    json += "},\"deltas\":[";
    bool first = true;
    for (std::size_t i = 0; i < results.size(); ++i)
        for (std::size_t j = i + 1; j < results.size(); ++j) {
            const double d = std::abs(results[i].second.probability -
                                      results[j].second.probability);
            worst = std::max(worst, d);
            if (!first) json += ',';
            first = false;
            json += "{\"a\":\"" + results[i].first + "\",\"b\":\"" +
                    results[j].first + "\",\"delta\":" + io::format_double(d) +
                    '}';
        }
    json += "],\"tolerance\":" + io::format_double(a.tol) +
            ",\"conventions\":\"" + io::conventions_note() + "\"}";

    Sink sink = open_sink(a.out);
    *sink.os << json << '\n';
    if (!sink.to_stdout) sink.file.flush();

    if (worst > a.tol)
        throw tomrep::accuracy_error(
            "transition: cross-method delta " + io::format_double(worst) +
                " exceeds tolerance " + io::format_double(a.tol),
            cplx(worst, 0.0), worst);
}

// ---------------------------------------------------------------------------
// qubit
// ---------------------------------------------------------------------------

struct QubitArgs {
    std::string probs;
    std::string out;
};

void run_qubit(const QubitArgs& a) {
    const tomrep::qubit::Probabilities p = io::parse_probs(a.probs);
    const Eigen::Matrix2cd rho = tomrep::qubit::density_from_probs(p);
    const auto bloch = tomrep::qubit::bloch_from_probs(p);
    const auto cls = tomrep::qubit::classify_state(p);

    std::string json = "{\"probs\":[" + io::format_double(p.p1) + ',' +
                       io::format_double(p.p2) + ',' +
                       io::format_double(p.p3) + ']';
    json += ",\"rho\":" + io::density_to_json_text(rho);
    json += ",\"bloch\":[" + io::format_double(bloch.x) + ',' +
            io::format_double(bloch.y) + ',' + io::format_double(bloch.z) + ']';
    json += ",\"s\":" + io::format_double(cls.s);
    json += ",\"class\":\"";
    json += cls.cls == tomrep::qubit::StateClass::pure_surface ? "pure_surface"
                                                               : "interior";
    json += '"';
    try {
        const auto ang = tomrep::qubit::angles_from_probs(p);
        json += ",\"angles\":{\"theta\":" + io::format_double(ang.theta) +
                ",\"phi\":" + io::format_double(ang.phi) + '}';
    } catch (const tomrep::undefined_angle&) {
        json += ",\"angles\":null";
    }
    json += ",\"conventions\":\"";
    json += io::conventions_note();
    json += "\"}";

    Sink sink = open_sink(a.out);
    *sink.os << json << '\n';
}

int dispatch(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "tomrep: quantum states as probability distributions -- tomograms, "
        "coin representations, evolution, spectra, transitions"};
    app.require_subcommand(1);

    TomogramArgs targs;
    auto* tomogram = app.add_subcommand(
        "tomogram", "Evaluate w(X|mu,nu) on a frame grid, write CSV");
    tomogram->add_option("--state", targs.state, "State spec JSON")->required();
    tomogram->add_option("--frames", targs.frames,
                         "circle:<k> or <mu>,<nu> (default circle:8)");
    tomogram->add_option("--X", targs.range,
                         "<lo>:<hi>:<count> X grid (default -5:5:101)");
    tomogram->add_option("-o,--output", targs.out, "Output CSV path (default stdout)");

    ReconstructArgs rargs;
    auto* reconstruct = app.add_subcommand(
        "reconstruct", "Density matrix and coins from a tomogram");
    reconstruct->add_option("--state", rargs.state, "Analytic source: state spec JSON");
    reconstruct->add_option("--grid", rargs.grid, "Sampled source: tomogram CSV path");
    reconstruct->add_option("--N", rargs.N, "Fock truncation (>= 2)")->required();
    reconstruct->add_option("--tol", rargs.tol,
                            "Residual tolerance (default 1e-6)");
    reconstruct->add_option("-o,--output", rargs.out, "Output JSON path (default stdout)");

    EvolveArgs eargs;
    auto* evolve = app.add_subcommand(
        "evolve", "Integrate the coin-chart flow dPi/dt = M Pi + gamma");
    evolve->add_option("--state", eargs.state,
                       "Initial state spec JSON (fock or coherent)")->required();
    evolve->add_option("--hamiltonian", eargs.hamiltonian,
                       "oscillator or qubit (default oscillator)");
    evolve->add_option("--N", eargs.N, "Fock truncation (>= 2)")->required();
    evolve->add_option("--t", eargs.trange, "<t0>:<t1>:<samples>")->required();
    evolve->add_option("-o,--output", eargs.out, "Output CSV path (default stdout)");

    SpectrumArgs sargs;
    auto* spectrum = app.add_subcommand(
        "spectrum", "Stationary chart vectors and energies");
    spectrum->add_flag("--oscillator", sargs.oscillator, "Number-basis oscillator");
    spectrum->add_flag("--qubit", sargs.qubit, "Two-level system");
    spectrum->add_option("--N", sargs.N, "Oscillator truncation (default 4)");
    spectrum->add_option("-o,--output", sargs.out, "Output JSON path (default stdout)");

    TransitionArgs xargs;
    auto* transition = app.add_subcommand(
        "transition", "Transition probability between two states");
    transition->add_option("--a", xargs.a, "First state spec JSON")->required();
    transition->add_option("--b", xargs.b, "Second state spec JSON")->required();
    transition->add_option("--methods", xargs.methods,
                           "Comma list of born,tomographic,gaussian");
    transition->add_option("--tol", xargs.tol,
                           "Cross-method agreement tolerance (default 1e-3)");
    transition->add_option("-o,--output", xargs.out, "Output JSON path (default stdout)");

    QubitArgs qargs;
    auto* qubit = app.add_subcommand(
        "qubit", "Qubit state from three coin probabilities");
    qubit->add_option("--probs", qargs.probs, "<p1>,<p2>,<p3>")->required();
    qubit->add_option("-o,--output", qargs.out, "Output JSON path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (tomogram->parsed()) return dispatch([&] { run_tomogram(targs); });
    if (reconstruct->parsed()) return dispatch([&] { run_reconstruct(rargs); });
    if (evolve->parsed()) return dispatch([&] { run_evolve(eargs); });
    if (spectrum->parsed()) return dispatch([&] { run_spectrum(sargs); });
    if (transition->parsed()) return dispatch([&] { run_transition(xargs); });
    if (qubit->parsed()) return dispatch([&] { run_qubit(qargs); });
    return 2;
}
