// Copyright 2026 The qmean Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qmean/circuit.hpp"
#include "qmean/errors.hpp"
#include "qmean/estimation.hpp"
#include "qmean/function_spec.hpp"
#include "qmean/numerics.hpp"
#include "qmean/sampler.hpp"
#include "qmean/scenarios.hpp"

// JSON and file formats. Matrices are {"dim": n, "re": [[...]], "im": [[...]]}
// with "im" optional; FunctionSpec is {"family": ..., "beta": ..., "g_coeffs": [...]}
// plus "grid"/"values" for tabulated functions.
namespace qmean::io {

using Json = nlohmann::json;

// --- helpers ------------------------------------------------------------------

inline std::string line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

/// Parses JSON text; syntax errors become ConfigError with line and column.
inline Json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(source + ": malformed JSON at " + line_column(text, e.byte) + ": " + e.what());
    }
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline Json read_json_file(const std::filesystem::path& path) {
    return parse_json_text(read_text_file(path), path.string());
}

inline const Json& require(const Json& j, const std::string& key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) {
        throw ConfigError(where + ": missing key '" + key + "'");
    }
    return j.at(key);
}

template <typename T>
T get_as(const Json& j, const std::string& where) {
    try {
        return j.get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

template <typename T>
T value_or(const Json& j, const std::string& key, T fallback, const std::string& where) {
    if (!j.contains(key)) {
        return fallback;
    }
    return get_as<T>(j.at(key), where + "." + key);
}

/// A number, or the string "auto" (returned as nullopt).
inline std::optional<double> auto_or_number(const Json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) {
        return std::nullopt;
    }
    const Json& v = j.at(key);
    if (v.is_string()) {
        if (v.get<std::string>() == "auto") {
            return std::nullopt;
        }
        throw ConfigError(where + "." + key + ": expected a number or \"auto\"");
    }
    return get_as<double>(v, where + "." + key);
}

// --- matrices -----------------------------------------------------------------

inline Json matrix_to_json(const ComplexMatrix& m) {
    Json re = Json::array();
    Json im = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json rr = Json::array();
        Json ir = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            rr.push_back(m(i, k).real());
            ir.push_back(m(i, k).imag());
        }
        re.push_back(rr);
        im.push_back(ir);
    }
    return Json{{"dim", m.rows()}, {"re", re}, {"im", im}};
}

inline ComplexMatrix matrix_from_json(const Json& j, const std::string& where) {
    auto re = get_as<std::vector<std::vector<double>>>(require(j, "re", where), where + ".re");
    std::vector<std::vector<double>> im;
    if (j.contains("im")) {
        im = get_as<std::vector<std::vector<double>>>(j.at("im"), where + ".im");
    }
    const std::size_t n = re.size();
    if (j.contains("dim") && get_as<std::size_t>(j.at("dim"), where + ".dim") != n) {
        throw ConfigError(where + ": 'dim' does not match the number of rows");
    }
    if (!im.empty() && im.size() != n) {
        throw ConfigError(where + ": 're' and 'im' have different row counts");
    }
    ComplexMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        if (re[r].size() != n || (!im.empty() && im[r].size() != n)) {
            throw ConfigError(where + ": row " + std::to_string(r) + " has the wrong length");
        }
        for (std::size_t c = 0; c < n; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                Complex(re[r][c], im.empty() ? 0.0 : im[r][c]);
        }
    }
    return m;
}

/// A matrix given inline or as a path (relative to base_dir) to a matrix file.
inline ComplexMatrix matrix_from_json_or_path(const Json& j, const std::filesystem::path& base_dir,
                                              const std::string& where) {
    if (j.is_string()) {
        std::filesystem::path p = j.get<std::string>();
        if (p.is_relative()) {
            p = base_dir / p;
        }
        return matrix_from_json(read_json_file(p), p.string());
    }
    return matrix_from_json(j, where);
}

// --- FunctionSpec -------------------------------------------------------------

inline Json function_spec_to_json(const FunctionSpec& f) {
    Json j{{"family", std::string(family_name(f.family()))}};
    switch (f.family()) {
        case FunctionFamily::Identity:
            break;
        case FunctionFamily::Exponential:
            j["beta"] = f.beta();
            break;
        case FunctionFamily::WeightedExponential:
            j["beta"] = f.beta();
            j["g_coeffs"] = f.g_coeffs();
            break;
        case FunctionFamily::Tabulated:
            j["grid"] = f.grid();
            j["values"] = f.values();
            break;
    }
    return j;
}

/// Without "family", "g_coeffs" alone reads as a polynomial and "value" as a
/// constant.
inline FunctionSpec function_spec_from_json(const Json& j, const std::string& where) {
    if (!j.is_object()) {
        throw ConfigError(where + ": function spec must be an object");
    }
    try {
        std::string family;
        if (j.contains("family")) {
            family = get_as<std::string>(j.at("family"), where + ".family");
        } else if (j.contains("g_coeffs")) {
            family = "weighted_exponential";
        } else if (j.contains("value")) {
            return FunctionSpec::constant(get_as<double>(j.at("value"), where + ".value"));
        } else {
            throw ConfigError(where + ": missing key 'family'");
        }
        double beta = value_or<double>(j, "beta", 0.0, where);
        if (family == "identity") {
            return FunctionSpec::identity();
        }
        if (family == "exponential") {
            return FunctionSpec::exponential(beta);
        }
        if (family == "weighted_exponential" || family == "polynomial") {
            auto coeffs = get_as<std::vector<double>>(require(j, "g_coeffs", where), where + ".g_coeffs");
            return FunctionSpec::weighted_exponential(coeffs, beta);
        }
        if (family == "tabulated") {
            auto grid = get_as<std::vector<double>>(require(j, "grid", where), where + ".grid");
            auto values = get_as<std::vector<double>>(require(j, "values", where), where + ".values");
            return FunctionSpec::tabulated(grid, values);
        }
        if (family == "constant") {
            return FunctionSpec::constant(get_as<double>(require(j, "value", where), where + ".value"));
        }
        throw ConfigError(where + ": unknown function family '" + family + "'");
    } catch (const DomainError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

// --- states, samples, chains --------------------------------------------------

inline Json state_to_json(const StateVector& s) {
    Json re = Json::array();
    Json im = Json::array();
    for (Eigen::Index i = 0; i < s.amplitudes().size(); ++i) {
        re.push_back(s.amplitudes()(i).real());
        im.push_back(s.amplitudes()(i).imag());
    }
    return Json{{"n_probe", s.n_probe()}, {"n_main", s.n_main()}, {"re", re}, {"im", im}};
}

inline StateVector state_from_json(const Json& j, const std::string& where = "state") {
    int n_probe = get_as<int>(require(j, "n_probe", where), where + ".n_probe");
    int n_main = get_as<int>(require(j, "n_main", where), where + ".n_main");
    auto re = get_as<std::vector<double>>(require(j, "re", where), where + ".re");
    auto im = get_as<std::vector<double>>(require(j, "im", where), where + ".im");
    if (re.size() != im.size()) {
        throw ConfigError(where + ": 're' and 'im' differ in length");
    }
    ComplexVector amps(static_cast<Eigen::Index>(re.size()));
    for (std::size_t i = 0; i < re.size(); ++i) {
        amps(static_cast<Eigen::Index>(i)) = Complex(re[i], im[i]);
    }
    try {
        return StateVector(n_probe, n_main, std::move(amps));
    } catch (const DomainError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

/// {"registers": [...], "total": N, "counts": {"j,x,b": n, ...}}.
inline Json distribution_to_json(const EmpiricalDistribution& d) {
    Json counts = Json::object();
    for (const auto& [key, c] : d.counts()) {
        std::string k;
        for (std::size_t i = 0; i < key.size(); ++i) {
            k += (i ? "," : "") + std::to_string(key[i]);
        }
        counts[k] = c;
    }
    return Json{{"registers", d.marginal().names()}, {"total", d.total()}, {"counts", counts}};
}

inline Json chain_to_json(const MarkovChain& chain) {
    Json rows = Json::array();
    for (Eigen::Index x = 0; x < chain.transition().rows(); ++x) {
        Json row = Json::array();
        for (Eigen::Index y = 0; y < chain.transition().cols(); ++y) row.push_back(chain.transition()(x, y));
        rows.push_back(row);
    }
    Json j{{"dim", chain.dim()}, {"transition", rows}};
    if (chain.stationary()) {
        j["stationary"] = std::vector<double>(chain.stationary()->data(),
                                              chain.stationary()->data() + chain.stationary()->size());
    }
    return j;
}

inline MarkovChain chain_from_json(const Json& j, const std::string& where) {
    auto rows = get_as<std::vector<std::vector<double>>>(require(j, "transition", where), where + ".transition");
    const std::size_t n = rows.size();
    RealMatrix p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        if (rows[r].size() != n) {
            throw ConfigError(where + ": transition row " + std::to_string(r) + " has the wrong length");
        }
        for (std::size_t c = 0; c < n; ++c) {
            p(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    std::optional<RealVector> pi;
    if (j.contains("stationary")) {
        auto v = get_as<std::vector<double>>(j.at("stationary"), where + ".stationary");
        pi = Eigen::Map<RealVector>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    try {
        return MarkovChain(std::move(p), std::move(pi));
    } catch (const DomainError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

inline Proposal proposal_from_string(const std::string& s, const std::string& where) {
    if (s == "uniform") return Proposal::Uniform;
    if (s == "single_bit_flip" || s == "single-bit-flip" || s == "bit_flip") return Proposal::SingleBitFlip;
    throw ConfigError(where + ": unknown proposal '" + s + "'");
}

inline std::string proposal_name(Proposal p) { return p == Proposal::Uniform ? "uniform" : "single_bit_flip"; }

inline Json report_to_json(const EstimateReport& r) {
    Json diag = Json::object();
    for (const auto& [k, v] : r.diagnostics) {
        diag[k] = v;
    }
    return Json{{"point_estimate", r.point_estimate},
                {"standard_error", r.standard_error},
                {"n_sam", r.n_sam},
                {"mode", mu_mode_name(r.mode)},
                {"diagnostics", diag}};
}

// --- scenario configs ---------------------------------------------------------

inline ChainConfig chain_config_from_json(const Json& j, const std::string& where) {
    ChainConfig c;
    c.proposal = proposal_from_string(value_or<std::string>(j, "proposal", "single_bit_flip", where), where + ".proposal");
    c.burn_in = value_or<std::size_t>(j, "burn_in", 1000, where);
    c.thinning = value_or<std::size_t>(j, "thinning", 1, where);
    c.seed = value_or<std::uint64_t>(j, "seed", 0, where);
    c.initial_state = value_or<std::size_t>(j, "initial_state", 0, where);
    if (c.thinning < 1) {
        throw ConfigError(where + ".thinning: must be >= 1");
    }
    return c;
}

inline CircuitSettings circuit_settings_from_json(const Json& j, const std::string& where) {
    CircuitSettings s;
    s.n_probe = value_or<int>(j, "n_probe", 4, where);
    s.dt = auto_or_number(j, "dt", where);
    s.gamma = auto_or_number(j, "gamma", where);
    return s;
}

/// Scenario config: kind, beta, n_probe, dt, gamma, n_sam, seed, proposal,
/// burn_in, thinning, mode, and the matrices rho / H / observable inline or by
/// file path.
inline ScenarioSpec scenario_from_json(const Json& j, const std::filesystem::path& base_dir,
                                       const std::string& where = "config") {
    if (!j.is_object()) {
        throw ConfigError(where + ": scenario config must be a JSON object");
    }
    try {
        ScenarioSpec spec;
        std::string kind = get_as<std::string>(require(j, "kind", where), where + ".kind");
        if (kind == "A" || kind == "a") {
            spec.kind = ScenarioKind::A;
        } else if (kind == "B" || kind == "b") {
            spec.kind = ScenarioKind::B;
        } else if (kind == "C" || kind == "c") {
            spec.kind = ScenarioKind::C;
        } else {
            throw ConfigError(where + ".kind: expected \"A\", \"B\" or \"C\"");
        }
        spec.beta = value_or<double>(j, "beta", 0.0, where);
        spec.n_sam = value_or<std::size_t>(j, "n_sam", 10000, where);
        spec.circuit = circuit_settings_from_json(j, where);
        spec.chain = chain_config_from_json(j, where);
        std::string mode = value_or<std::string>(j, "mode", "exact", where);
        if (mode == "exact" || mode == "exact-mu") {
            spec.mode = MuMode::Exact;
        } else if (mode == "circuit" || mode == "circuit-mu") {
            spec.mode = MuMode::Circuit;
        } else {
            throw ConfigError(where + ".mode: expected \"exact\" or \"circuit\"");
        }
        const char* system_key = spec.kind == ScenarioKind::A ? "rho" : "H";
        spec.system = HermitianOperator(
            matrix_from_json_or_path(require(j, system_key, where), base_dir, where + "." + system_key));
        if (j.contains("observable")) {
            const Json& o = j.at("observable");
            auto eig = get_as<std::vector<double>>(require(o, "eigenvalues", where + ".observable"),
                                                   where + ".observable.eigenvalues");
            RealVector values = Eigen::Map<RealVector>(eig.data(), static_cast<Eigen::Index>(eig.size()));
            UnitaryOperator u = o.contains("basis_changer")
                                    ? UnitaryOperator(matrix_from_json_or_path(o.at("basis_changer"), base_dir,
                                                                               where + ".observable.basis_changer"))
                                    : UnitaryOperator::identity(eig.size());
            spec.observable = SpectralDecomposition{values, u};
        }
        if (j.contains("g")) {
            spec.g = function_spec_from_json(j.at("g"), where + ".g");
        }
        spec.validate();
        return spec;
    } catch (const DomainError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

// --- run manifest -------------------------------------------------------------

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
    std::string command;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string output_path;
    std::string timestamp;
    std::string tool_version = kToolVersion;
};

inline Json manifest_to_json(const RunManifest& m) {
    return Json{{"command", m.command},         {"config_path", m.config_path}, {"seed", m.seed},
                {"output_path", m.output_path}, {"timestamp", m.timestamp},     {"tool_version", m.tool_version}};
}

}  // namespace qmean::io
