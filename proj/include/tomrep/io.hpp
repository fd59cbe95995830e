#pragma once
// Serialization and text parsing for the public file formats: state
// specification JSON, frame-grid and X-range shorthands, coin-distribution
// JSON, tomogram CSV, chart-trajectory CSV, spectrum JSON, and the
// reconstruction report. All floating-point output is written with 17
// significant digits so identical runs produce byte-identical files.

#include <cctype>
#include <complex>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tomrep/coin_rep.hpp"
#include "tomrep/errors.hpp"
#include "tomrep/evolution.hpp"
#include "tomrep/states.hpp"
#include "tomrep/tomography.hpp"

namespace tomrep::io {

using json = nlohmann::json;
using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    if (!std::isfinite(v))
        throw singularity_error("serialization: non-finite value");
    if (v == 0.0) return "0";  // merge the signed zeros
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void append_pair(std::string& out, const cplx& z) {
    out += '[';
    out += format_double(z.real());
    out += ',';
    out += format_double(z.imag());
    out += ']';
}

inline void append_array(std::string& out, const std::vector<double>& v) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
    out += ']';
}

inline void append_array(std::string& out, const Eigen::VectorXd& v) {
    out += '[';
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
    out += ']';
}

}  // namespace detail

// Statement of conventions carried by every numeric output file.
inline const char* conventions_note() {
    return "sigma denotes a variance; Gaussian exponent -(X-Xbar)^2/(2*sigma)";
}

// ---------------------------------------------------------------------------
// State specification JSON
// ---------------------------------------------------------------------------

namespace detail {

inline cplx complex_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() ||
        !j[1].is_number())
        throw invalid_state(std::string(what) + " must be a [re, im] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

// "constant" or "step:<t_step>:<omega_after>".
inline states::FrequencyProfile parse_profile(const std::string& text) {
    if (text == "constant") return states::constant_profile();
    if (text.rfind("step:", 0) == 0) {
        const std::string rest = text.substr(5);
        const std::size_t sep = rest.find(':');
        if (sep == std::string::npos)
            throw invalid_state("profile: expected step:<t>:<omega>");
        std::size_t used1 = 0, used2 = 0;
        double t_step = 0.0, omega = 0.0;
        try {
            t_step = std::stod(rest.substr(0, sep), &used1);
            omega = std::stod(rest.substr(sep + 1), &used2);
        } catch (const std::exception&) {
            throw invalid_state("profile: expected step:<t>:<omega>");
        }
        if (used1 != sep || used2 != rest.size() - sep - 1)
            throw invalid_state("profile: expected step:<t>:<omega>");
        if (!(t_step > 0.0) || !(omega > 0.0))
            throw invalid_state("profile: step time and frequency must be positive");
        return states::step_profile(t_step, omega);
    }
    throw invalid_state("profile: unknown shape '" + text + "'");
}

inline states::StateSpec state_spec_from_json(const json& j) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw invalid_state("state spec: expected an object with a \"type\"");
    const std::string type = j["type"].get<std::string>();
    if (type == "fock") {
        if (!j.contains("n") || !j["n"].is_number_integer())
            throw invalid_state("state spec: fock needs an integer \"n\"");
        return states::StateSpec::fock(j["n"].get<int>());
    }
    if (type == "coherent") {
        if (!j.contains("alpha"))
            throw invalid_state("state spec: coherent needs \"alpha\"");
        return states::StateSpec::coherent(
            detail::complex_from_json(j["alpha"], "alpha"));
    }
    if (type == "gaussian") {
        if (!j.contains("A") || !j.contains("B"))
            throw invalid_state("state spec: gaussian needs \"A\" and \"B\"");
        return states::StateSpec::gaussian(
            detail::complex_from_json(j["A"], "A"),
            detail::complex_from_json(j["B"], "B"));
    }
    if (type == "parametric_vacuum") {
        if (!j.contains("profile") || !j["profile"].is_string() ||
            !j.contains("t") || !j["t"].is_number())
            throw invalid_state(
                "state spec: parametric_vacuum needs a \"profile\" string and a time \"t\"");
        return states::StateSpec::parametric_vacuum(
            parse_profile(j["profile"].get<std::string>()),
            j["t"].get<double>());
    }
    throw invalid_state("state spec: unknown type '" + type + "'");
}

inline states::StateSpec parse_state_spec(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw invalid_state(std::string("state spec: ") + e.what());
    }
    return state_spec_from_json(j);
}

// ---------------------------------------------------------------------------
// Frame and range shorthands
// ---------------------------------------------------------------------------

// "circle:k" -> k frames (cos 2pi j/k, sin 2pi j/k); "mu,nu" -> one frame.
inline std::vector<tomography::ReferenceFrame> parse_frames(
    const std::string& text) {
    std::vector<tomography::ReferenceFrame> frames;
    if (text.rfind("circle:", 0) == 0) {
        int k = 0;
        try {
            std::size_t used = 0;
            k = std::stoi(text.substr(7), &used);
            if (used != text.size() - 7) k = 0;
        } catch (const std::exception&) {
            k = 0;
        }
        if (k < 1 || k > 4096)
            throw invalid_state("frames: circle:<k> needs k in [1, 4096]");
        for (int jf = 0; jf < k; ++jf) {
            const double t = 2.0 * math::pi * jf / k;
            frames.push_back({std::cos(t), std::sin(t)});
        }
        return frames;
    }
    const std::size_t sep = text.find(',');
    if (sep == std::string::npos)
        throw invalid_state("frames: expected circle:<k> or <mu>,<nu>");
    try {
        std::size_t used1 = 0, used2 = 0;
        const double mu = std::stod(text.substr(0, sep), &used1);
        const double nu = std::stod(text.substr(sep + 1), &used2);
        if (used1 != sep || used2 != text.size() - sep - 1)
            throw invalid_state("frames: expected circle:<k> or <mu>,<nu>");
        frames.push_back({mu, nu});
    } catch (const invalid_state&) {
        throw;
    } catch (const std::exception&) {
        throw invalid_state("frames: expected circle:<k> or <mu>,<nu>");
    }
    tomography::validate_frame(frames.back());
    return frames;
}

// "<lo>:<hi>:<count>" -> inclusive uniform grid, count >= 2.
inline std::vector<double> parse_range(const std::string& text) {
    const std::size_t s1 = text.find(':');
    const std::size_t s2 = s1 == std::string::npos ? std::string::npos
                                                   : text.find(':', s1 + 1);
    if (s1 == std::string::npos || s2 == std::string::npos)
        throw invalid_state("range: expected <lo>:<hi>:<count>");
    double lo = 0.0, hi = 0.0;
    long count = 0;
    try {
        std::size_t u1 = 0, u2 = 0, u3 = 0;
        lo = std::stod(text.substr(0, s1), &u1);
        hi = std::stod(text.substr(s1 + 1, s2 - s1 - 1), &u2);
        count = std::stol(text.substr(s2 + 1), &u3);
        if (u1 != s1 || u2 != s2 - s1 - 1 || u3 != text.size() - s2 - 1)
            throw invalid_state("range: expected <lo>:<hi>:<count>");
    } catch (const invalid_state&) {
        throw;
    } catch (const std::exception&) {
        throw invalid_state("range: expected <lo>:<hi>:<count>");
    }
    if (count < 2 || count > 1000000)
        throw invalid_state("range: count must be in [2, 1000000]");
    if (!(lo < hi)) throw invalid_state("range: need lo < hi");
    std::vector<double> xs(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i)
        xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
    return xs;
}

// "p1,p2,p3" -> qubit coin probabilities.
inline qubit::Probabilities parse_probs(const std::string& text) {
    const std::size_t s1 = text.find(',');
    const std::size_t s2 = s1 == std::string::npos ? std::string::npos
                                                   : text.find(',', s1 + 1);
    if (s1 == std::string::npos || s2 == std::string::npos)
        throw invalid_state("probs: expected <p1>,<p2>,<p3>");
    try {
        std::size_t u1 = 0, u2 = 0, u3 = 0;
        const double p1 = std::stod(text.substr(0, s1), &u1);
        const double p2 = std::stod(text.substr(s1 + 1, s2 - s1 - 1), &u2);
        const double p3 = std::stod(text.substr(s2 + 1), &u3);
        if (u1 != s1 || u2 != s2 - s1 - 1 || u3 != text.size() - s2 - 1)
            throw invalid_state("probs: expected <p1>,<p2>,<p3>");
        return {p1, p2, p3};
    } catch (const invalid_state&) {
        throw;
    } catch (const std::exception&) {
        throw invalid_state("probs: expected <p1>,<p2>,<p3>");
    }
}

// ---------------------------------------------------------------------------
// Coin distribution JSON
// ---------------------------------------------------------------------------

inline std::string coins_to_json_text(const coins::CoinProbabilities& c) {
    std::string out = "{\"N\":" + std::to_string(c.N) + ",\"diag\":";
    detail::append_array(out, c.diag);
    out += ",\"off\":[";
    bool first = true;
    for (int n = 0; n < c.N; ++n) {
        for (int np = n + 1; np < c.N; ++np) {
            if (!first) out += ',';
            first = false;
            out += "{\"n\":" + std::to_string(n) +
                   ",\"np\":" + std::to_string(np) +
                   ",\"p1\":" + format_double(c.p1_at(n, np)) +
                   ",\"p2\":" + format_double(c.p2_at(n, np)) + '}';
        }
    }
    out += "]}";
    return out;
}

inline coins::CoinProbabilities coins_from_json(const json& j) {
    if (!j.is_object() || !j.contains("N") || !j.contains("diag") ||
        !j.contains("off"))
        throw invalid_state("coins: expected {N, diag, off}");
    coins::CoinProbabilities c = coins::CoinProbabilities::zeros(
        j["N"].get<int>());
    const auto& diag = j["diag"];
    if (!diag.is_array() || static_cast<int>(diag.size()) != c.N)
        throw invalid_state("coins: diag must have N entries");
    for (int n = 0; n < c.N; ++n)
        c.diag[static_cast<std::size_t>(n)] = diag[n].get<double>();
    for (const auto& e : j["off"]) {
        const int n = e.at("n").get<int>();
        const int np = e.at("np").get<int>();
        if (n < 0 || np <= n || np >= c.N)
            throw invalid_state("coins: off entry indices out of range");
        const std::size_t k = coins::CoinProbabilities::off_index(n, np, c.N);
        c.p1[k] = e.at("p1").get<double>();
        c.p2[k] = e.at("p2").get<double>();
    }
    return c;
}

// ---------------------------------------------------------------------------
// Tomogram CSV
// ---------------------------------------------------------------------------

// Rows are frame-major: all X for the first frame, then the next frame.
inline void write_tomogram_csv(
    std::ostream& os, const tomography::SymplecticTomogram& w,
    const std::vector<tomography::ReferenceFrame>& frames,
    const std::vector<double>& Xs) {
    os << "# symplectic tomogram w(X|mu,nu); " << conventions_note() << '\n';
    os << "X,mu,nu,w\n";
    for (const auto& f : frames) {
        const std::vector<double> row = w.row(Xs, f);
        for (std::size_t i = 0; i < Xs.size(); ++i)
            os << format_double(Xs[i]) << ',' << format_double(f.mu) << ','
               << format_double(f.nu) << ',' << format_double(row[i]) << '\n';
    }
}

// Reads the format written above; consecutive rows sharing (mu, nu) form one
// frame. Comment lines (#) and the header row are skipped.
inline tomography::TomogramGrid read_tomogram_csv(std::istream& is) {
    tomography::TomogramGrid grid;
    std::string line;
    long lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("X,", 0) == 0) continue;
        double vals[4];
        std::size_t pos = 0;
        bool ok = true;
        for (int k = 0; k < 4; ++k) {
            std::size_t used = 0;
            const std::size_t next = line.find(',', pos);
            const std::string tok = line.substr(
                pos, next == std::string::npos ? std::string::npos : next - pos);
            try {
                vals[k] = std::stod(tok, &used);
            } catch (const std::exception&) {
                ok = false;
                break;
            }
            if (used != tok.size() || (k < 3) != (next != std::string::npos)) {
                ok = false;
                break;
            }
            pos = next + 1;
        }
        if (!ok)
            throw invalid_state("tomogram csv: bad row at line " +
                                std::to_string(lineno));
        if (grid.frames.empty() || grid.frames.back().mu != vals[1] ||
            grid.frames.back().nu != vals[2]) {
            grid.frames.push_back({vals[1], vals[2], {}, {}});
        }
        grid.frames.back().X.push_back(vals[0]);
        grid.frames.back().w.push_back(vals[3]);
    }
    tomography::validate_grid(grid);
    return grid;
}

// ---------------------------------------------------------------------------
// Chart trajectory CSV
// ---------------------------------------------------------------------------

// Column names follow the chart layout: the first N-1 columns are the
// diagonal coins p3_n, then each level pair (n, np) contributes p1_n_np and
// p2_n_np in lexicographic order.
inline std::vector<std::string> chart_column_names(int N) {
    std::vector<std::string> names;
    for (int n = 0; n + 1 < N; ++n) names.push_back("p3_" + std::to_string(n));
    for (int n = 0; n < N; ++n)
        for (int np = n + 1; np < N; ++np) {
            const std::string tag = std::to_string(n) + "_" + std::to_string(np);
            names.push_back("p1_" + tag);
            names.push_back("p2_" + tag);
        }
    return names;
}

inline void write_trajectory_csv(std::ostream& os,
                                 const evolution::ChartTrajectory& traj,
                                 int N) {
    os << "# coin chart trajectory; " << conventions_note() << '\n';
    os << "t";
    for (const auto& name : chart_column_names(N)) os << ',' << name;
    os << '\n';
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        os << format_double(traj.times[k]);
        const Eigen::VectorXd& c = traj.states[k];
        for (Eigen::Index i = 0; i < c.size(); ++i)
            os << ',' << format_double(c[i]);
        os << '\n';
    }
}

// ---------------------------------------------------------------------------
// Spectrum and reconstruction JSON
// ---------------------------------------------------------------------------

inline std::string spectrum_to_json_text(
    const std::vector<evolution::StationaryState>& spec) {
    std::string out = "[";
    for (std::size_t k = 0; k < spec.size(); ++k) {
        if (k) out += ',';
        out += "{\"energy\":" + format_double(spec[k].energy) + ",\"pi\":";
        detail::append_array(out, spec[k].pi);
        out += '}';
    }
    out += ']';
    return out;
}

inline std::string density_to_json_text(const Eigen::MatrixXcd& rho) {
    std::string out = "[";
    for (Eigen::Index r = 0; r < rho.rows(); ++r) {
        if (r) out += ',';
        out += '[';
        for (Eigen::Index c = 0; c < rho.cols(); ++c) {
            if (c) out += ',';
            detail::append_pair(out, rho(r, c));
        }
        out += ']';
    }
    out += ']';
    return out;
}

inline std::string reconstruction_to_json_text(
    const tomography::ReconstructionResult& res,
    const coins::CoinProbabilities& c) {
    std::string out = "{\"N\":" + std::to_string(res.rho.rows());
    out += ",\"rho\":" + density_to_json_text(res.rho);
    out += ",\"coins\":" + coins_to_json_text(c);
    out += ",\"residuals\":{\"trace\":" + format_double(res.trace_residual) +
           ",\"hermiticity\":" + format_double(res.hermiticity_residual) + '}';
    out += ",\"conventions\":\"" + std::string(conventions_note()) + "\"}";
    return out;
}

}  // namespace tomrep::io
