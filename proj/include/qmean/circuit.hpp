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

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "qmean/errors.hpp"
#include "qmean/function_spec.hpp"
#include "qmean/gates.hpp"
#include "qmean/numerics.hpp"

namespace qmean {

/// Amplitudes over probe (x) main (x) ancilla.
///
/// Global index = j * 2^(n_main + 1) + x * 2 + b: probe value j most
/// significant, ancilla bit b least significant. As qubits, the ancilla is
/// qubit 0, main bit m is qubit 1 + m and probe bit k is qubit 1 + n_main + k.
class StateVector {
   public:
    static constexpr int kMaxQubits = 24;

    /// Checks the register widths, the amplitude count and unit norm (1e-10).
    StateVector(int n_probe, int n_main, ComplexVector amplitudes)
        : n_probe_(n_probe), n_main_(n_main), amps_(std::move(amplitudes)) {
        check_widths(n_probe_, n_main_);
        if (static_cast<std::size_t>(amps_.size()) != size(n_probe_, n_main_)) {
            throw DomainError("state vector needs " + std::to_string(size(n_probe_, n_main_)) + " amplitudes, got " +
                              std::to_string(amps_.size()));
        }
        double norm2 = amps_.squaredNorm();
        if (!(std::abs(norm2 - 1.0) <= 1e-10)) {
            throw DomainError("state vector is not normalized: sum |amplitude|^2 = " + std::to_string(norm2));
        }
    }

    int n_probe() const { return n_probe_; }
    int n_main() const { return n_main_; }
    std::size_t probe_dim() const { return std::size_t{1} << n_probe_; }
    std::size_t main_dim() const { return std::size_t{1} << n_main_; }
    std::size_t block_size() const { return main_dim() * 2; }
    std::size_t n_qubits() const { return static_cast<std::size_t>(n_probe_ + n_main_ + 1); }

    std::size_t index(std::size_t j, std::size_t x, int b) const {
        return j * block_size() + x * 2 + static_cast<std::size_t>(b);
    }
    Complex amplitude(std::size_t j, std::size_t x, int b) const {
        return amps_(static_cast<Eigen::Index>(index(j, x, b)));
    }
    const ComplexVector& amplitudes() const { return amps_; }
    double norm_squared() const { return amps_.squaredNorm(); }

    static std::size_t size(int n_probe, int n_main) {
        return std::size_t{1} << static_cast<std::size_t>(n_probe + n_main + 1);
    }

    static void check_widths(int n_probe, int n_main) {
        if (n_probe < 1 || n_main < 1 || n_probe + n_main + 1 > kMaxQubits) {
            throw DomainError("register widths must satisfy n_probe >= 1, n_main >= 1, total <= " +
                              std::to_string(kMaxQubits) + " qubits");
        }
    }

   private:
    int n_probe_;
    int n_main_;
    ComplexVector amps_;
};

/// Parameters of the phase-estimation + tomography circuit.
struct CircuitConfig {
    int n_probe = 1;
    double dt = 1.0;
    double gamma = 1.0;
    FunctionSpec f = FunctionSpec::identity();

    std::size_t probe_dim() const { return std::size_t{1} << n_probe; }

    /// xi_j = 2 pi j / (dt N_j): the eigenvalue read out as probe value j.
    double grid_point(std::size_t j) const {
        return 2.0 * std::numbers::pi * static_cast<double>(j) / (dt * static_cast<double>(probe_dim()));
    }

    /// gamma f(xi_j) for every probe value; checks each lies in [0, 1].
    std::vector<double> scaled_values() const {
        if (n_probe < 1 || n_probe > StateVector::kMaxQubits - 2) {
            throw ConfigError("n_probe must be between 1 and " + std::to_string(StateVector::kMaxQubits - 2));
        }
        if (!std::isfinite(dt) || dt <= 0.0) {
            throw ConfigError("dt must be finite and > 0");
        }
        if (!std::isfinite(gamma) || gamma <= 0.0) {
            throw ConfigError("gamma must be finite and > 0, got " + std::to_string(gamma));
        }
        std::vector<double> out(probe_dim());
        for (std::size_t j = 0; j < out.size(); ++j) {
            double v = gamma * f.evaluate_checked(grid_point(j));
            if (v > 1.0 + 1e-12) {
                throw ConfigError("gamma * f(xi_" + std::to_string(j) + ") = " + std::to_string(v) +
                                  " exceeds 1; lower gamma");
            }
            out[j] = std::min(v, 1.0);
        }
        return out;
    }

    void validate() const { (void)scaled_values(); }
};

/// Ancilla rotation angles theta_j with R_y(theta_j) = [[c_j, -s_j], [s_j, c_j]],
/// c_j = sqrt(gamma f(xi_j)), s_j = sqrt(1 - c_j^2).
inline std::vector<double> multiplexor_angles(const CircuitConfig& config) {
    std::vector<double> values = config.scaled_values();
    std::vector<double> angles(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) {
        double c = std::sqrt(values[j]);
        double s = std::sqrt(1.0 - c * c);
        angles[j] = 2.0 * std::atan2(s, c);
    }
    return angles;
}

/// Psi_1 = (uniform probe superposition) (x) V|x0> (x) |0>.
inline StateVector prepare_psi1(std::size_t x0, const UnitaryOperator& v, const CircuitConfig& config) {
    if (!is_power_of_two(v.dim()) || v.dim() < 2) {
        throw DomainError("prepare_psi1: V dimension must be a power of two >= 2");
    }
    if (x0 >= v.dim()) {
        throw DomainError("prepare_psi1: x0 = " + std::to_string(x0) + " out of range");
    }
    const int n_main = exact_log2(v.dim());
    StateVector::check_widths(config.n_probe, n_main);
    const std::size_t nj = config.probe_dim();
    const std::size_t block = v.dim() * 2;
    ComplexVector amps = ComplexVector::Zero(static_cast<Eigen::Index>(nj * block));
    const double norm = 1.0 / std::sqrt(static_cast<double>(nj));
    for (std::size_t j = 0; j < nj; ++j) {
        for (std::size_t x = 0; x < v.dim(); ++x) {
            amps(static_cast<Eigen::Index>(j * block + x * 2)) =
                norm * v(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x0));
        }
    }
    return StateVector(config.n_probe, n_main, std::move(amps));
}

namespace detail {

using RowMajorComplex = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// View of probe block j as a main_dim x 2 matrix (rows x, columns b).
inline Eigen::Map<RowMajorComplex> block_view(ComplexVector& amps, std::size_t j, std::size_t main_dim) {
    return Eigen::Map<RowMajorComplex>(amps.data() + j * main_dim * 2, static_cast<Eigen::Index>(main_dim), 2);
}

inline void check_operator_fits(const StateVector& state, std::size_t dim, const char* what) {
    if (dim != state.main_dim()) {
        throw DomainError(std::string(what) + ": operator dimension " + std::to_string(dim) +
                          " does not match the main register (" + std::to_string(state.main_dim()) + ")");
    }
}

}  // namespace detail

/// Gamma box: sum_j |j><j| (x) U_PE^j with U_PE = e^{i A dt}, applied exactly
/// per probe branch from the spectral decomposition of A.
inline StateVector apply_gamma_box(const StateVector& state, const SpectralDecomposition& a_spectrum,
                                   const CircuitConfig& config) {
    detail::check_operator_fits(state, a_spectrum.basis_changer.dim(), "apply_gamma_box");
    detail::require_nonnegative_spectrum(a_spectrum.eigenvalues, "apply_gamma_box");
    if (config.n_probe != state.n_probe()) {
        throw DomainError("apply_gamma_box: config n_probe does not match the state");
    }
    ComplexVector amps = state.amplitudes();
    const ComplexMatrix& u = a_spectrum.basis_changer.matrix();
    const std::size_t main_dim = state.main_dim();
    for (std::size_t j = 0; j < state.probe_dim(); ++j) {
        ComplexVector phases(static_cast<Eigen::Index>(main_dim));
        for (std::size_t x = 0; x < main_dim; ++x) {
            phases(static_cast<Eigen::Index>(x)) =
                std::polar(1.0, a_spectrum.eigenvalues(static_cast<Eigen::Index>(x)) * config.dt * static_cast<double>(j));
        }
        auto view = detail::block_view(amps, j, main_dim);
        detail::RowMajorComplex in_eigenbasis = u.adjoint() * view;
        view = u * (phases.asDiagonal() * in_eigenbasis);
    }
    return StateVector(state.n_probe(), state.n_main(), std::move(amps));
}

inline StateVector apply_gamma_box(const StateVector& state, const HermitianOperator& a, const CircuitConfig& config) {
    return apply_gamma_box(state, eigendecompose(a), config);
}

/// Gamma box as the ladder of controlled U_PE^(2^k) gates, probe bit k
/// controlling the 2^k-th power. Same operator as apply_gamma_box.
inline StateVector apply_gamma_box_ladder(const StateVector& state, const HermitianOperator& a,
                                          const CircuitConfig& config) {
    detail::check_operator_fits(state, a.dim(), "apply_gamma_box_ladder");
    SpectralDecomposition sd = eigendecompose(a);
    detail::require_nonnegative_spectrum(sd.eigenvalues, "apply_gamma_box_ladder");
    ComplexVector amps = state.amplitudes();
    for (int k = 0; k < state.n_probe(); ++k) {
        const double power = std::ldexp(1.0, k);
        UnitaryOperator u = unitary_exp(sd, config.dt * power);
        for (std::size_t j = 0; j < state.probe_dim(); ++j) {
            if (((j >> k) & 1U) == 0) {
                continue;
            }
            auto view = detail::block_view(amps, j, state.main_dim());
            view = (u.matrix() * view).eval();
        }
    }
    return StateVector(state.n_probe(), state.n_main(), std::move(amps));
}

/// <y|U_FT|x> = e^{2 pi i x y / N} / sqrt(N). The exponent is reduced mod N
/// before the trig call so large registers keep full precision.
inline ComplexMatrix dft_matrix(std::size_t n) {
    auto dim = static_cast<Eigen::Index>(n);
    ComplexMatrix f(dim, dim);
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
            double angle = 2.0 * std::numbers::pi * static_cast<double>((x * y) % n) / static_cast<double>(n);
            f(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) = std::polar(norm, angle);
        }
    }
    return f;
}

namespace detail {

inline StateVector apply_probe_operator(const StateVector& state, const ComplexMatrix& op) {
    ComplexVector amps = state.amplitudes();
    Eigen::Map<RowMajorComplex> view(amps.data(), static_cast<Eigen::Index>(state.probe_dim()),
                                     static_cast<Eigen::Index>(state.block_size()));
    view = (op * view).eval();
    return StateVector(state.n_probe(), state.n_main(), std::move(amps));
}

}  // namespace detail

/// U_FT on the probe register.
inline StateVector apply_dft(const StateVector& state) {
    return detail::apply_probe_operator(state, dft_matrix(state.probe_dim()));
}

/// U_FT^dagger on the probe register (the Psi_2 -> Psi_3 step).
inline StateVector apply_inverse_dft(const StateVector& state) {
    return detail::apply_probe_operator(state, dft_matrix(state.probe_dim()).adjoint());
}

/// sum_j |j><j| (x) R_j on probe and ancilla; the main register is untouched.
inline StateVector apply_tomography_multiplexor(const StateVector& state, const CircuitConfig& config) {
    if (config.n_probe != state.n_probe()) {
        throw DomainError("apply_tomography_multiplexor: config n_probe does not match the state");
    }
    std::vector<double> values = config.scaled_values();
    ComplexVector amps = state.amplitudes();
    for (std::size_t j = 0; j < state.probe_dim(); ++j) {
        const double c = std::sqrt(values[j]);
        const double s = std::sqrt(1.0 - c * c);
        for (std::size_t x = 0; x < state.main_dim(); ++x) {
            auto i0 = static_cast<Eigen::Index>(state.index(j, x, 0));
            Complex a0 = amps(i0);
            Complex a1 = amps(i0 + 1);
            amps(i0) = c * a0 - s * a1;
            amps(i0 + 1) = s * a0 + c * a1;
        }
    }
    return StateVector(state.n_probe(), state.n_main(), std::move(amps));
}

/// The compiled multiplexor placed on the full register: target the ancilla
/// (qubit 0), control bit k on probe qubit 1 + n_main + k.
inline GateSequence tomography_gate_sequence(const CircuitConfig& config, int n_main) {
    GateSequence local = expand_multiplexor(multiplexor_angles(config));
    std::vector<int> map(static_cast<std::size_t>(local.n_qubits));
    map[0] = 0;
    for (int k = 0; k < config.n_probe; ++k) {
        map[static_cast<std::size_t>(k + 1)] = 1 + n_main + k;
    }
    return remap_qubits(local, map, config.n_probe + n_main + 1);
}

/// Psi_4: prepare_psi1 -> apply_gamma_box -> apply_inverse_dft ->
/// apply_tomography_multiplexor.
inline StateVector run_estimation_circuit(const HermitianOperator& a, const UnitaryOperator& v, std::size_t x0,
                                      const CircuitConfig& config) {
    if (a.dim() != v.dim()) {
        throw DomainError("run_estimation_circuit: A and V dimensions differ");
    }
    config.validate();
    StateVector psi = prepare_psi1(x0, v, config);
    psi = apply_gamma_box(psi, a, config);
    psi = apply_inverse_dft(psi);
    return apply_tomography_multiplexor(psi, config);
}

/// <x| U_FT^dagger |k> for the plane wave |k> = N^{-1/2} sum_y e^{i k y} |y>:
///
///   (1/N) e^{i d (N - 1)/2} sin(d N / 2) / sin(d / 2),   d = k - 2 pi x / N,
///
/// equal to 1 wherever d is a multiple of 2 pi.
inline Complex leakage_amplitude(double k, std::size_t x, std::size_t n) {
    if (n == 0 || x >= n) {
        throw DomainError("leakage_amplitude: need 0 <= x < N");
    }
    const double nd = static_cast<double>(n);
    const double d = k - 2.0 * std::numbers::pi * static_cast<double>(x) / nd;
    const double denom = std::sin(0.5 * d);
    if (std::abs(denom) < 1e-9) {
        // Near the removable singularity sum the geometric series directly.
        Complex acc = 0.0;
        for (std::size_t y = 0; y < n; ++y) {
            acc += std::polar(1.0, d * static_cast<double>(y));
        }
        return acc / nd;
    }
    return std::polar(std::sin(0.5 * d * nd) / (nd * denom), 0.5 * d * (nd - 1.0));
}

/// Probability of reading probe value j for an eigenvalue a: |<j|U_FT^dagger|k = a dt>|^2.
inline std::vector<double> probe_readout_distribution(double eigenvalue, const CircuitConfig& config) {
    std::vector<double> p(config.probe_dim());
    for (std::size_t j = 0; j < p.size(); ++j) {
        p[j] = std::norm(leakage_amplitude(eigenvalue * config.dt, j, p.size()));
    }
    return p;
}

/// Continuous probe coordinate a dt N_j / (2 pi); an integer for on-grid eigenvalues.
inline double grid_coordinate(double eigenvalue, const CircuitConfig& config) {
    return eigenvalue * config.dt * static_cast<double>(config.probe_dim()) / (2.0 * std::numbers::pi);
}

}  // namespace qmean
