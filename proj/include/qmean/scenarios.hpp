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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmean/circuit.hpp"
#include "qmean/errors.hpp"
#include "qmean/estimation.hpp"
#include "qmean/function_spec.hpp"
#include "qmean/numerics.hpp"
#include "qmean/sampler.hpp"

namespace qmean {

enum class ScenarioKind {
    A,  // tr(Omega rho), rho given explicitly
    B,  // tr(Omega rho), rho = e^{-beta H} / Z
    C,  // Z_g = tr{g(H) e^{-beta H}}
};

enum class MuMode {
    Exact,    // mu(x) from the linear-algebra oracle
    Circuit,  // mu(x) = P_b(0) / gamma of the simulated circuit
};

inline std::string mu_mode_name(MuMode mode) { return mode == MuMode::Exact ? "exact-mu" : "circuit-mu"; }

/// Circuit parameters of a scenario; unset dt / gamma are chosen automatically.
struct CircuitSettings {
    int n_probe = 4;
    std::optional<double> dt;
    std::optional<double> gamma;
};

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::B;
    std::optional<SpectralDecomposition> observable;  // (Omega_x, U_Omega); kinds A and B
    HermitianOperator system = HermitianOperator::diagonal({0.0, 0.0});  // rho for A, H for B and C
    double beta = 0.0;
    std::optional<FunctionSpec> g;  // kind C
    CircuitSettings circuit;
    ChainConfig chain;
    std::size_t n_sam = 10000;
    MuMode mode = MuMode::Exact;

    void validate() const {
        if (n_sam < 1) {
            throw ConfigError("n_sam must be >= 1");
        }
        if (!std::isfinite(beta) || beta < 0.0) {
            throw ConfigError("beta must be finite and >= 0");
        }
        if (kind != ScenarioKind::C) {
            if (!observable) {
                throw ConfigError("scenarios A and B need an observable (eigenvalues and basis changer)");
            }
            if (observable->basis_changer.dim() != system.dim() ||
                static_cast<std::size_t>(observable->eigenvalues.size()) != system.dim()) {
                throw ConfigError("observable dimension does not match the system");
            }
        }
        if (kind == ScenarioKind::A) {
            validate_density_matrix(system);
        }
        if (kind == ScenarioKind::C && !g) {
            throw ConfigError("scenario C needs a function g");
        }
    }
};

/// Result of one estimator run. standard_error >= 0.
struct EstimateReport {
    double point_estimate = 0.0;
    double standard_error = 0.0;
    std::size_t n_sam = 0;
    MuMode mode = MuMode::Exact;
    std::map<std::string, double> diagnostics;
};

/// gamma = 1 / max_j f(2 pi j / (dt N_j)), so that every c_j lies in [0, 1].
inline double choose_gamma(const FunctionSpec& f, double dt, int n_probe) {
    if (!std::isfinite(dt) || dt <= 0.0 || n_probe < 1) {
        throw DomainError("choose_gamma: need dt > 0 and n_probe >= 1");
    }
    CircuitConfig probe_grid{n_probe, dt, 1.0, f};
    double peak = 0.0;
    for (std::size_t j = 0; j < probe_grid.probe_dim(); ++j) {
        peak = std::max(peak, f.evaluate_checked(probe_grid.grid_point(j)));
    }
    if (!(peak > 0.0)) {
        throw DomainError("choose_gamma: f vanishes on every grid point");
    }
    return 1.0 / peak;
}

/// dt = 2 pi (N_j - 1) / (N_j a_max): the largest eigenvalue reads out as
/// probe value N_j - 1.
inline double choose_dt(double a_max, int n_probe) {
    if (!std::isfinite(a_max) || a_max <= 0.0) {
        throw DomainError("choose_dt: eigenvalue bound must be > 0");
    }
    if (n_probe < 1) {
        throw DomainError("choose_dt: n_probe must be >= 1");
    }
    double nj = std::ldexp(1.0, n_probe);
    return 2.0 * std::numbers::pi * (nj - 1.0) / (nj * a_max);
}

/// H + shift * 1 with shift = -lambda_min when lambda_min < 0, else 0.
inline std::pair<HermitianOperator, double> shift_nonnegative(const HermitianOperator& h) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
    double lowest = solver.eigenvalues().minCoeff();
    if (lowest >= 0.0) {
        return {h, 0.0};
    }
    double shift = -lowest;
    auto n = static_cast<Eigen::Index>(h.dim());
    return {HermitianOperator(h.matrix() + shift * ComplexMatrix::Identity(n, n)), shift};
}

/// Polynomial g with its own exponential weight folded into f = g e^{-beta xi}.
inline FunctionSpec boltzmann_weighted(const FunctionSpec& g, double beta) {
    switch (g.family()) {
        case FunctionFamily::Identity:
            return FunctionSpec::weighted_exponential({0.0, 1.0}, beta);
        case FunctionFamily::Exponential:
            return FunctionSpec::weighted_exponential({1.0}, beta + g.beta());
        case FunctionFamily::WeightedExponential:
            return FunctionSpec::weighted_exponential(g.g_coeffs(), beta + g.beta());
        case FunctionFamily::Tabulated:
            break;
    }
    throw ConfigError("scenario C needs g as identity, exponential or polynomial (weighted_exponential)");
}

/// The diagonal-element problem (A, V, f) a scenario reduces to, with the
/// spectral shift applied to H for kinds B and C.
struct DiagonalElementProblem {
    HermitianOperator a;
    UnitaryOperator v;
    FunctionSpec f;
    double shift = 0.0;
};

inline DiagonalElementProblem reduce_scenario(const ScenarioSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case ScenarioKind::A:
            return {spec.system, spec.observable->basis_changer, FunctionSpec::identity(), 0.0};
        case ScenarioKind::B: {
            auto [shifted, shift] = shift_nonnegative(spec.system);
            return {shifted, spec.observable->basis_changer, FunctionSpec::exponential(spec.beta), shift};
        }
        case ScenarioKind::C: {
            auto [shifted, shift] = shift_nonnegative(spec.system);
            return {shifted, UnitaryOperator::identity(spec.system.dim()), boltzmann_weighted(*spec.g, spec.beta),
                    shift};
        }
    }
    throw ConfigError("unknown scenario kind");
}

/// Fills in automatic dt and gamma for a diagonal-element problem.
inline CircuitConfig resolve_circuit(const CircuitSettings& settings, const DiagonalElementProblem& problem) {
    CircuitConfig config;
    config.n_probe = settings.n_probe;
    config.f = problem.f;
    if (settings.dt) {
        config.dt = *settings.dt;
    } else {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(problem.a.matrix(), Eigen::EigenvaluesOnly);
        double a_max = solver.eigenvalues().maxCoeff();
        // A zero operator reads out as j = 0 for any dt.
        config.dt = a_max > 1e-12 ? choose_dt(a_max, settings.n_probe) : 1.0;
    }
    config.gamma = settings.gamma ? *settings.gamma : choose_gamma(config.f, config.dt, config.n_probe);
    config.validate();
    return config;
}

/// Memoized mu(x) for one scenario; every x is evaluated at most once.
class MuEvaluator {
   public:
    explicit MuEvaluator(const ScenarioSpec& spec) : problem_(reduce_scenario(spec)), mode_(spec.mode) {
        cache_.assign(problem_.a.dim(), std::nullopt);
        if (mode_ == MuMode::Circuit) {
            config_ = resolve_circuit(spec.circuit, problem_);
        }
    }

    double operator()(std::size_t x) {
        if (x >= cache_.size()) {
            throw DomainError("mu_of_x: basis index out of range");
        }
        if (!cache_[x]) {
            cache_[x] = evaluate(x);
        }
        return *cache_[x];
    }

    std::size_t dim() const { return cache_.size(); }
    const DiagonalElementProblem& problem() const { return problem_; }
    const std::optional<CircuitConfig>& circuit() const { return config_; }

    std::size_t zero_count() const {
        return static_cast<std::size_t>(std::count_if(cache_.begin(), cache_.end(),
                                                      [](const auto& v) { return v && *v == 0.0; }));
    }

   private:
    double evaluate(std::size_t x) const {
        if (mode_ == MuMode::Exact) {
            return exact_diag_element(problem_.a, problem_.v, problem_.f, x);
        }
        StateVector psi4 = run_estimation_circuit(problem_.a, problem_.v, x, *config_);
        return estimate_diag_element(ancilla_zero_probability(psi4), config_->gamma);
    }

    DiagonalElementProblem problem_;
    MuMode mode_;
    std::optional<CircuitConfig> config_;
    std::vector<std::optional<double>> cache_;
};

inline double mu_of_x(const ScenarioSpec& spec, std::size_t x, MuMode mode) {
    ScenarioSpec copy = spec;
    copy.mode = mode;
    return MuEvaluator(copy)(x);
}

namespace detail {

inline RatioOracle ratio_oracle(MuEvaluator& mu) {
    return [&mu](std::size_t from, std::size_t to) {
        double a = mu(from);
        double b = mu(to);
        if (a == 0.0) {
            return b == 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::numeric_limits<double>::infinity();
        }
        return b / a;
    };
}

inline MetropolisRun sample_scenario(const ScenarioSpec& spec, MuEvaluator& mu) {
    ChainConfig chain = spec.chain;
    chain.n_steps = spec.n_sam;
    try {
        return metropolis_run(ratio_oracle(mu), mu.dim(), chain);
    } catch (const DomainError& e) {
        throw SamplerError(e.what());
    }
}

struct MeanAndError {
    double mean = 0.0;
    double standard_error = 0.0;
};

inline MeanAndError mean_and_error(const std::vector<double>& values) {
    const auto n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    double var = values.size() > 1 ? ss / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n)};
}

// Standard error from 20 batch means; tolerant of chain autocorrelation.
inline double batch_means_error(const std::vector<double>& values) {
    constexpr std::size_t batches = 20;
    if (values.size() < 2 * batches) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const std::size_t len = values.size() / batches;
    std::vector<double> means(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
        for (std::size_t i = 0; i < len; ++i) means[b] += values[b * len + i];
        means[b] /= static_cast<double>(len);
    }
    return mean_and_error(means).standard_error;
}

inline void common_diagnostics(EstimateReport& report, const MetropolisRun& run, MuEvaluator& mu, Proposal proposal) {
    std::vector<bool> seen(mu.dim(), false);
    std::size_t visited = 0;
    for (std::size_t x : run.samples) {
        if (!seen[x]) {
            seen[x] = true;
            ++visited;
        }
    }
    report.diagnostics["acceptance_rate"] = run.acceptance_rate();
    report.diagnostics["visited_states"] = static_cast<double>(visited);
    report.diagnostics["coverage"] = static_cast<double>(visited) / static_cast<double>(mu.dim());
    report.diagnostics["shift"] = mu.problem().shift;
    if (mu.circuit()) {
        report.diagnostics["dt"] = mu.circuit()->dt;
        report.diagnostics["gamma"] = mu.circuit()->gamma;
        report.diagnostics["n_probe"] = mu.circuit()->n_probe;
    }
    // At desk scale also report delta of the Metropolis chain that was run.
    if (mu.dim() <= 64) {
        std::vector<double> weights(mu.dim());
        for (std::size_t x = 0; x < mu.dim(); ++x) weights[x] = mu(x);
        report.diagnostics["delta"] = spectral_gap(build_metropolis_matrix(weights, proposal));
    }
    report.diagnostics["zero_mu_states"] = static_cast<double>(mu.zero_count());
}

}  // namespace detail

/// tr(Omega rho) ~ (1/N_sam) sum_s Omega_{x_s} with x_s sampled from mu.
inline EstimateReport run_scenario_mean(const ScenarioSpec& spec, std::vector<std::size_t>* trajectory = nullptr) {
    if (spec.kind == ScenarioKind::C) {
        throw ConfigError("run_scenario_mean needs a scenario of kind A or B");
    }
    MuEvaluator mu(spec);
    MetropolisRun run = detail::sample_scenario(spec, mu);
    if (trajectory) {
        *trajectory = run.samples;
    }
    std::vector<double> values;
    values.reserve(run.samples.size());
    for (std::size_t x : run.samples) {
        values.push_back(spec.observable->eigenvalues(static_cast<Eigen::Index>(x)));
    }
    auto [mean, se] = detail::mean_and_error(values);
    EstimateReport report{mean, se, spec.n_sam, spec.mode, {}};
    detail::common_diagnostics(report, run, mu, spec.chain.proposal);
    report.diagnostics["batch_means_standard_error"] = detail::batch_means_error(values);
    return report;
}

/// Z_g ~ (1/N_sam) sum_s mu(x_s) / P_x(x_s), P_x the empirical frequency of
/// the sampled states. The standard error is the sample standard deviation of
/// the summands over sqrt(N_sam).
inline EstimateReport run_scenario_partition(const ScenarioSpec& spec, std::vector<std::size_t>* trajectory = nullptr) {
    if (spec.kind != ScenarioKind::C) {
        throw ConfigError("run_scenario_partition needs a scenario of kind C");
    }
    MuEvaluator mu(spec);
    MetropolisRun run = detail::sample_scenario(spec, mu);
    if (trajectory) {
        *trajectory = run.samples;
    }
    std::vector<std::size_t> counts(mu.dim(), 0);
    for (std::size_t x : run.samples) {
        ++counts[x];
    }
    const auto n = static_cast<double>(run.samples.size());
    std::vector<double> terms;
    terms.reserve(run.samples.size());
    for (std::size_t x : run.samples) {
        double frequency = static_cast<double>(counts[x]) / n;
        terms.push_back(mu(x) / frequency);
    }
    auto [mean, se] = detail::mean_and_error(terms);
    EstimateReport report{mean, se, spec.n_sam, spec.mode, {}};
    detail::common_diagnostics(report, run, mu, spec.chain.proposal);
    return report;
}

/// Z_g / Z_1 ~ tr{g(H) rho}, with first-order error propagation.
inline EstimateReport trace_ratio(const EstimateReport& zg, const EstimateReport& z1) {
    if (!(z1.point_estimate > 0.0)) {
        throw DomainError("trace_ratio: Z_1 estimate must be > 0");
    }
    double r = zg.point_estimate / z1.point_estimate;
    double a = zg.standard_error / z1.point_estimate;
    double b = zg.point_estimate * z1.standard_error / (z1.point_estimate * z1.point_estimate);
    EstimateReport out{r, std::sqrt(a * a + b * b), std::min(zg.n_sam, z1.n_sam), zg.mode, {}};
    out.diagnostics["numerator"] = zg.point_estimate;
    out.diagnostics["denominator"] = z1.point_estimate;
    return out;
}

/// Splits a polynomial into parts that are nonnegative on R>=0: positive
/// coefficients go to g+, negated negative ones to g-.
inline std::pair<std::vector<double>, std::vector<double>> split_signed_polynomial(const std::vector<double>& coeffs) {
    std::vector<double> plus(coeffs.size(), 0.0);
    std::vector<double> minus(coeffs.size(), 0.0);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        (coeffs[k] >= 0.0 ? plus[k] : minus[k]) = std::abs(coeffs[k]);
    }
    return {plus, minus};
}

/// Z_g = Z_{g+} - Z_{g-} for a signed polynomial g; the two parts run as
/// separate scenario C estimates. An identically zero part is skipped.
inline EstimateReport signed_partition(const ScenarioSpec& spec) {
    if (spec.kind != ScenarioKind::C || !spec.g || spec.g->family() != FunctionFamily::WeightedExponential) {
        throw ConfigError("signed_partition needs scenario C with a polynomial g");
    }
    auto [plus, minus] = split_signed_polynomial(spec.g->g_coeffs());
    auto all_zero = [](const std::vector<double>& c) {
        return std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
    };
    auto run_part = [&](const std::vector<double>& coeffs) {
        ScenarioSpec part = spec;
        part.g = FunctionSpec::weighted_exponential(coeffs, spec.g->beta());
        return run_scenario_partition(part);
    };
    EstimateReport out;
    out.n_sam = spec.n_sam;
    out.mode = spec.mode;
    if (!all_zero(plus)) {
        EstimateReport p = run_part(plus);
        out.point_estimate += p.point_estimate;
        out.standard_error += p.standard_error * p.standard_error;
        out.diagnostics["z_plus"] = p.point_estimate;
    }
    if (!all_zero(minus)) {
        EstimateReport m = run_part(minus);
        out.point_estimate -= m.point_estimate;
        out.standard_error += m.standard_error * m.standard_error;
        out.diagnostics["z_minus"] = m.point_estimate;
    }
    out.standard_error = std::sqrt(out.standard_error);
    return out;
}

/// Observable Omega = U_Omega diag(Omega_x) U_Omega^dagger.
inline HermitianOperator observable_matrix(const SpectralDecomposition& observable) {
    return HermitianOperator(observable.recompose());
}

/// Exact value the scenario estimates: tr(Omega rho) for A and B, Z_g of the
/// shifted Hamiltonian for C.
inline double exact_scenario_value(const ScenarioSpec& spec) {
    DiagonalElementProblem problem = reduce_scenario(spec);
    switch (spec.kind) {
        case ScenarioKind::A:
            return exact_mean(observable_matrix(*spec.observable), spec.system);
        case ScenarioKind::B: {
            HermitianOperator weights = function_of_hermitian(problem.a, FunctionSpec::exponential(spec.beta));
            double z = weights.matrix().trace().real();
            return exact_mean(observable_matrix(*spec.observable), HermitianOperator(weights.matrix() / z));
        }
        case ScenarioKind::C:
            return exact_partition(problem.a, spec.beta, *spec.g);
    }
    throw ConfigError("unknown scenario kind");
}

}  // namespace qmean
