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


// Command-line front end: diag, mean, partition, walk-gap, compile-mux.

#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qmean/circuit.hpp"
#include "qmean/errors.hpp"
#include "qmean/estimation.hpp"
#include "qmean/fixtures.hpp"
#include "qmean/gates.hpp"
#include "qmean/io.hpp"
#include "qmean/numerics.hpp"
#include "qmean/sampler.hpp"
#include "qmean/scenarios.hpp"

namespace fs = std::filesystem;
using qmean::io::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDomain = 3;
constexpr int kExitSampler = 4;

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    std::optional<std::string> mode;
    std::optional<std::size_t> n_sam;
    std::string angles;
};

std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

qmean::io::RunManifest make_manifest(const std::string& command, const Options& opt, std::uint64_t seed) {
    qmean::io::RunManifest m;
    m.command = command;
    m.config_path = opt.config_path;
    m.seed = seed;
    m.output_path = opt.out_path.empty() ? "-" : opt.out_path;
    m.timestamp = utc_timestamp();
    return m;
}

void emit(const Options& opt, const std::string& text) {
    if (opt.out_path.empty() || opt.out_path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(opt.out_path, std::ios::binary);
    if (!out) {
        throw qmean::ConfigError("cannot write " + opt.out_path);
    }
    out << text;
}

void write_side_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw qmean::ConfigError("cannot write " + path);
    }
    out << text;
}

Json load_config(const Options& opt) {
    if (opt.config_path.empty()) {
        throw qmean::ConfigError("--config is required");
    }
    return qmean::io::read_json_file(opt.config_path);
}

fs::path config_dir(const Options& opt) { return fs::path(opt.config_path).parent_path(); }

std::uint64_t resolve_seed(const Options& opt, const Json& cfg) {
    if (opt.seed) return *opt.seed;
    return qmean::io::value_or<std::uint64_t>(cfg, "seed", 0, "config");
}

bool shots_mode(const Options& opt, const Json& cfg) {
    std::string mode = opt.mode ? *opt.mode : qmean::io::value_or<std::string>(cfg, "mode", "exact", "config");
    if (mode == "exact" || mode == "exact-mu") return false;
    if (mode == "shots" || mode == "circuit" || mode == "circuit-mu") return true;
    throw qmean::ConfigError("mode must be 'exact' or 'shots', got '" + mode + "'");
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// --- diag ---------------------------------------------------------------------

int run_diag(const Options& opt) {
    Json cfg = load_config(opt);
    const fs::path dir = config_dir(opt);
    const std::string where = "config";
    qmean::HermitianOperator a(qmean::io::matrix_from_json_or_path(qmean::io::require(cfg, "A", where), dir, "config.A"));
    qmean::UnitaryOperator v = cfg.contains("V")
                                   ? qmean::UnitaryOperator(qmean::io::matrix_from_json_or_path(cfg.at("V"), dir, "config.V"))
                                   : qmean::UnitaryOperator::identity(a.dim());
    qmean::FunctionSpec f = qmean::io::function_spec_from_json(qmean::io::require(cfg, "f", where), "config.f");
    auto x0 = qmean::io::value_or<std::size_t>(cfg, "x0", 0, where);
    std::size_t n_sam = opt.n_sam ? *opt.n_sam : qmean::io::value_or<std::size_t>(cfg, "n_sam", 10000, where);
    std::uint64_t seed = resolve_seed(opt, cfg);
    bool shots = shots_mode(opt, cfg);
    if (v.dim() != a.dim()) {
        throw qmean::ConfigError("config.V: dimension does not match A");
    }
    if (x0 >= a.dim()) {
        throw qmean::ConfigError("config.x0: out of range");
    }
    if (n_sam < 1) {
        throw qmean::ConfigError("n_sam must be >= 1");
    }

    qmean::DiagonalElementProblem problem{a, v, f, 0.0};
    qmean::CircuitConfig config = qmean::resolve_circuit(qmean::io::circuit_settings_from_json(cfg, where), problem);
    qmean::SpectralDecomposition sd = qmean::eigendecompose(a);

    double exact = qmean::exact_diag_element(a, v, f, x0);
    qmean::StateVector psi4 = qmean::run_estimation_circuit(a, v, x0, config);
    double pb0 = qmean::ancilla_zero_probability(psi4);
    double circuit = qmean::estimate_diag_element(pb0, config.gamma);

    // Distance of each populated eigenvalue from the nearest probe grid point.
    double max_offset = 0.0;
    for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k) {
        double weight = std::norm((sd.basis_changer.matrix().adjoint() * v.matrix())(k, static_cast<Eigen::Index>(x0)));
        if (weight < 1e-14) continue;
        double coord = qmean::grid_coordinate(sd.eigenvalues(k), config);
        max_offset = std::max(max_offset, std::abs(coord - std::round(coord)));
    }

    Json report;
    report["manifest"] = qmean::io::manifest_to_json(make_manifest("diag", opt, seed));
    report["x0"] = x0;
    report["f"] = qmean::io::function_spec_to_json(f);
    report["n_probe"] = config.n_probe;
    report["dt"] = config.dt;
    report["gamma"] = config.gamma;
    report["mode"] = shots ? "shots" : "exact";
    report["exact"] = exact;
    report["circuit"] = circuit;
    report["circuit_error"] = std::abs(circuit - exact);
    report["ancilla_zero_probability"] = pb0;
    report["leakage"] = Json{{"max_grid_offset", max_offset}, {"on_grid", max_offset < 1e-9}};

    double point = circuit;
    double se = 0.0;
    if (shots) {
        std::vector<qmean::SampleRecord> samples = qmean::sample_measurements(psi4, n_sam, seed);
        double p_hat = qmean::empirical_ancilla_zero(samples);
        point = qmean::estimate_diag_element(p_hat, config.gamma);
        se = qmean::binomial_standard_error(p_hat, n_sam) / config.gamma;
        report["shots"] = Json{{"ancilla_zero_frequency", p_hat}, {"estimate", point}, {"standard_error", se},
                               {"n_sam", n_sam}};
        if (cfg.contains("samples_out")) {
            std::ostringstream csv;
            qmean::write_samples_csv(csv, samples);
            write_side_file(qmean::io::get_as<std::string>(cfg.at("samples_out"), "config.samples_out"), csv.str());
        }
        if (cfg.contains("distribution_out")) {
            auto dist = qmean::empirical_distribution(samples, qmean::Marginal::main_ancilla());
            write_side_file(qmean::io::get_as<std::string>(cfg.at("distribution_out"), "config.distribution_out"),
                            dump(qmean::io::distribution_to_json(dist)));
        }
    }
    if (cfg.contains("state_out")) {
        write_side_file(qmean::io::get_as<std::string>(cfg.at("state_out"), "config.state_out"),
                        dump(qmean::io::state_to_json(psi4)));
    }
    report["point_estimate"] = point;
    report["standard_error"] = se;
    emit(opt, dump(report));
    return kExitOk;
}

// --- mean / partition -----------------------------------------------------------

qmean::ScenarioSpec load_scenario(const Options& opt, const Json& cfg) {
    qmean::ScenarioSpec spec = qmean::io::scenario_from_json(cfg, config_dir(opt));
    spec.chain.seed = resolve_seed(opt, cfg);
    if (opt.n_sam) spec.n_sam = *opt.n_sam;
    spec.mode = shots_mode(opt, cfg) ? qmean::MuMode::Circuit : qmean::MuMode::Exact;
    spec.validate();
    return spec;
}

Json scenario_header(const std::string& command, const Options& opt, const qmean::ScenarioSpec& spec) {
    Json j;
    j["manifest"] = qmean::io::manifest_to_json(make_manifest(command, opt, spec.chain.seed));
    const char* kinds[] = {"A", "B", "C"};
    j["kind"] = kinds[static_cast<int>(spec.kind)];
    j["proposal"] = qmean::io::proposal_name(spec.chain.proposal);
    j["burn_in"] = spec.chain.burn_in;
    j["thinning"] = spec.chain.thinning;
    return j;
}

void maybe_write_trajectory(const Json& cfg, const std::vector<std::size_t>& trajectory) {
    if (!cfg.contains("trajectory_out")) return;
    std::ostringstream csv;
    qmean::write_trajectory_csv(csv, trajectory);
    write_side_file(qmean::io::get_as<std::string>(cfg.at("trajectory_out"), "config.trajectory_out"), csv.str());
}

// Oracle values are only computed when the dense linear algebra is cheap.
constexpr std::size_t kOracleDimension = 64;

int run_mean(const Options& opt) {
    Json cfg = load_config(opt);
    qmean::ScenarioSpec spec = load_scenario(opt, cfg);
    if (spec.kind == qmean::ScenarioKind::C) {
        throw qmean::ConfigError("mean needs a scenario of kind A or B; use partition for kind C");
    }
    std::vector<std::size_t> trajectory;
    qmean::EstimateReport r = qmean::run_scenario_mean(spec, &trajectory);
    Json report = scenario_header("mean", opt, spec);
    report["estimate"] = qmean::io::report_to_json(r);
    if (spec.system.dim() <= kOracleDimension) {
        report["exact"] = qmean::exact_scenario_value(spec);
    }
    maybe_write_trajectory(cfg, trajectory);
    emit(opt, dump(report));
    return kExitOk;
}

bool has_negative_coefficient(const qmean::FunctionSpec& g) {
    if (g.family() != qmean::FunctionFamily::WeightedExponential) return false;
    for (double c : g.g_coeffs()) {
        if (c < 0.0) return true;
    }
    return false;
}

int run_partition(const Options& opt) {
    Json cfg = load_config(opt);
    qmean::ScenarioSpec spec = load_scenario(opt, cfg);
    if (spec.kind != qmean::ScenarioKind::C) {
        throw qmean::ConfigError("partition needs a scenario of kind C");
    }
    Json report = scenario_header("partition", opt, spec);
    std::vector<std::size_t> trajectory;
    qmean::EstimateReport zg = has_negative_coefficient(*spec.g) ? qmean::signed_partition(spec)
                                                                 : qmean::run_scenario_partition(spec, &trajectory);
    report["estimate"] = qmean::io::report_to_json(zg);
    if (spec.system.dim() <= kOracleDimension) {
        report["exact"] = qmean::exact_scenario_value(spec);
    }
    if (qmean::io::value_or<bool>(cfg, "trace_ratio", true, "config")) {
        qmean::ScenarioSpec unit = spec;
        unit.g = qmean::FunctionSpec::polynomial({1.0});
        unit.chain.seed = spec.chain.seed + 1;
        qmean::EstimateReport z1 = qmean::run_scenario_partition(unit);
        report["z1"] = qmean::io::report_to_json(z1);
        report["trace_ratio"] = qmean::io::report_to_json(qmean::trace_ratio(zg, z1));
        if (spec.system.dim() <= kOracleDimension) {
            double exact_z1 = qmean::exact_scenario_value(unit);
            report["exact_z1"] = exact_z1;
            report["exact_trace_ratio"] = report["exact"].get<double>() / exact_z1;
        }
    }
    if (!trajectory.empty()) {
        maybe_write_trajectory(cfg, trajectory);
    }
    emit(opt, dump(report));
    return kExitOk;
}

// --- walk-gap -------------------------------------------------------------------

std::vector<qmean::MarkovChain> walk_chains(const Json& cfg, std::uint64_t seed) {
    std::vector<qmean::MarkovChain> chains;
    if (cfg.contains("chains")) {
        const Json& list = cfg.at("chains");
        for (std::size_t i = 0; i < list.size(); ++i) {
            chains.push_back(qmean::io::chain_from_json(list.at(i), "config.chains[" + std::to_string(i) + "]"));
        }
    }
    if (cfg.contains("boltzmann")) {
        const Json& b = cfg.at("boltzmann");
        const std::string where = "config.boltzmann";
        auto energies = qmean::io::get_as<std::vector<double>>(qmean::io::require(b, "energies", where), where + ".energies");
        auto betas = qmean::io::get_as<std::vector<double>>(qmean::io::require(b, "betas", where), where + ".betas");
        qmean::Proposal proposal = qmean::io::proposal_from_string(
            qmean::io::value_or<std::string>(b, "proposal", "uniform", where), where + ".proposal");
        for (double beta : betas) {
            std::vector<double> weights;
            for (double e : energies) weights.push_back(std::exp(-beta * e));
            try {
                chains.push_back(qmean::build_metropolis_matrix(weights, proposal));
            } catch (const qmean::DomainError& e) {
                throw qmean::ConfigError(where + ": " + e.what());
            }
        }
    }
    if (cfg.contains("random")) {
        const Json& r = cfg.at("random");
        const std::string where = "config.random";
        auto count = qmean::io::value_or<std::size_t>(r, "count", 10, where);
        auto min_dim = qmean::io::value_or<std::size_t>(r, "min_dim", 2, where);
        auto max_dim = qmean::io::value_or<std::size_t>(r, "max_dim", 16, where);
        if (min_dim < 2 || max_dim < min_dim) {
            throw qmean::ConfigError(where + ": need 2 <= min_dim <= max_dim");
        }
        qmean::Rng rng(seed);
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t n = min_dim + qmean::uniform_index(rng, max_dim - min_dim + 1);
            chains.push_back(qmean::fixtures::random_weighted_graph_chain(n, rng));
        }
    }
    if (chains.empty()) {
        throw qmean::ConfigError("walk-gap config needs 'chains', 'boltzmann' or 'random'");
    }
    return chains;
}

int run_walk_gap(const Options& opt) {
    Json cfg = load_config(opt);
    std::uint64_t seed = resolve_seed(opt, cfg);
    std::vector<qmean::MarkovChain> chains = walk_chains(cfg, seed);
    std::vector<qmean::GapSweepRow> rows;
    for (const auto& chain : chains) {
        rows.push_back(qmean::gap_sweep_row(chain));
    }
    std::ostringstream out;
    out << "# manifest " << qmean::io::manifest_to_json(make_manifest("walk-gap", opt, seed)).dump() << "\n";
    qmean::write_gap_sweep_csv(out, rows);
    emit(opt, out.str());
    return kExitOk;
}

// --- compile-mux ----------------------------------------------------------------

std::vector<double> parse_angle_list(const std::string& text) {
    std::vector<double> angles;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            double v = std::stod(item, &used);
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
            angles.push_back(v);
        } catch (const std::exception&) {
            throw qmean::ConfigError("--angles: cannot parse '" + item + "' as a number");
        }
    }
    return angles;
}

std::vector<double> mux_angles(const Options& opt) {
    if (!opt.angles.empty()) {
        return parse_angle_list(opt.angles);
    }
    Json cfg = load_config(opt);
    if (cfg.contains("angles")) {
        return qmean::io::get_as<std::vector<double>>(cfg.at("angles"), "config.angles");
    }
    // Otherwise the tomography multiplexor of a circuit config.
    qmean::CircuitConfig config;
    config.n_probe = qmean::io::get_as<int>(qmean::io::require(cfg, "n_probe", "config"), "config.n_probe");
    config.f = qmean::io::function_spec_from_json(qmean::io::require(cfg, "f", "config"), "config.f");
    auto dt = qmean::io::auto_or_number(cfg, "dt", "config");
    if (!dt) {
        throw qmean::ConfigError("config.dt: compile-mux needs an explicit dt");
    }
    config.dt = *dt;
    auto gamma = qmean::io::auto_or_number(cfg, "gamma", "config");
    config.gamma = gamma ? *gamma : qmean::choose_gamma(config.f, config.dt, config.n_probe);
    return qmean::multiplexor_angles(config);
}

int run_compile_mux(const Options& opt) {
    std::vector<double> angles = mux_angles(opt);
    if (angles.empty() || !qmean::is_power_of_two(angles.size())) {
        throw qmean::ConfigError("multiplexor needs a power-of-two number of angles, got " +
                                 std::to_string(angles.size()));
    }
    qmean::GateSequence seq = qmean::expand_multiplexor(angles);
    double deviation = qmean::max_abs_diff(qmean::sequence_unitary(seq), qmean::multiplexor_matrix(angles));
    std::ostringstream out;
    out << "# manifest " << qmean::io::manifest_to_json(make_manifest("compile-mux", opt, opt.seed.value_or(0))).dump()
        << "\n";
    out << "# qubits " << seq.n_qubits << " rotations " << seq.rotation_count() << " cnots " << seq.cnot_count()
        << "\n";
    std::ostringstream dev;
    dev.precision(3);
    dev << std::scientific << deviation;
    out << "# max_unitary_deviation " << dev.str() << "\n";
    qmean::write_gate_text(out, seq);
    emit(opt, out.str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum-assisted Monte Carlo estimators"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&opt](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON config file");
        sub->add_option("--seed", opt.seed, "Random seed (default 0)");
        sub->add_option("--out", opt.out_path, "Output file (default stdout)");
        sub->add_option("--mode", opt.mode, "exact or shots (default exact)")
            ->check(CLI::IsMember({"exact", "shots"}));
        sub->add_option("--n-sam", opt.n_sam, "Number of samples");
    };

    auto* diag = app.add_subcommand("diag", "Estimate one diagonal element <x0|V^dag f(A) V|x0>");
    auto* mean = app.add_subcommand("mean", "Estimate tr(Omega rho) for scenario A or B");
    auto* partition = app.add_subcommand("partition", "Estimate the weighted partition function (scenario C)");
    auto* walk = app.add_subcommand("walk-gap", "Spectral and phase gaps of quantum walks");
    auto* mux = app.add_subcommand("compile-mux", "Compile a uniformly controlled rotation into RY and CNOT");
    for (auto* sub : {diag, mean, partition, walk, mux}) add_common(sub);
    mux->add_option("--angles", opt.angles, "Comma-separated rotation angles");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*diag) return run_diag(opt);
        if (*mean) return run_mean(opt);
        if (*partition) return run_partition(opt);
        if (*walk) return run_walk_gap(opt);
        if (*mux) return run_compile_mux(opt);
    } catch (const qmean::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const qmean::SamplerError& e) {
        std::cerr << "sampler error: " << e.what() << "\n";
        return kExitSampler;
    } catch (const qmean::DomainError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
    return kExitConfig;
}
