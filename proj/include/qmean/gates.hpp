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

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qmean/errors.hpp"
#include "qmean/numerics.hpp"

namespace qmean {

enum class GateKind { RY, CNOT };

/// One elementary gate. Qubit q addresses bit q of the basis index.
struct Gate {
    GateKind kind = GateKind::RY;
    int target = 0;
    int control = -1;    // CNOT only
    double angle = 0.0;  // RY only, radians

    static Gate ry(int target, double angle) { return Gate{GateKind::RY, target, -1, angle}; }
    static Gate cnot(int control, int target) { return Gate{GateKind::CNOT, target, control, 0.0}; }
};

/// Gates in application order: gates[0] acts first.
struct GateSequence {
    int n_qubits = 0;
    std::vector<Gate> gates;

    std::size_t rotation_count() const {
        std::size_t n = 0;
        for (const Gate& g : gates) {
            n += g.kind == GateKind::RY ? 1 : 0;
        }
        return n;
    }
    std::size_t cnot_count() const { return gates.size() - rotation_count(); }
};

/// R_y(theta) = [[cos(theta/2), -sin(theta/2)], [sin(theta/2), cos(theta/2)]].
inline Eigen::Matrix2cd ry_matrix(double theta) {
    Eigen::Matrix2cd m;
    double c = std::cos(0.5 * theta);
    double s = std::sin(0.5 * theta);
    m << c, -s, s, c;
    return m;
}

/// Applies one gate in place to a vector over n qubits.
inline void apply_gate(Eigen::Ref<ComplexVector> amps, const Gate& gate) {
    const std::size_t size = static_cast<std::size_t>(amps.size());
    const std::size_t tmask = std::size_t{1} << gate.target;
    if (gate.kind == GateKind::RY) {
        double c = std::cos(0.5 * gate.angle);
        double s = std::sin(0.5 * gate.angle);
        for (std::size_t i = 0; i < size; ++i) {
            if ((i & tmask) != 0) {
                continue;
            }
            auto i0 = static_cast<Eigen::Index>(i);
            auto i1 = static_cast<Eigen::Index>(i | tmask);
            Complex a0 = amps(i0);
            Complex a1 = amps(i1);
            amps(i0) = c * a0 - s * a1;
            amps(i1) = s * a0 + c * a1;
        }
    } else {
        const std::size_t cmask = std::size_t{1} << gate.control;
        for (std::size_t i = 0; i < size; ++i) {
            if ((i & cmask) != 0 && (i & tmask) == 0) {
                std::swap(amps(static_cast<Eigen::Index>(i)), amps(static_cast<Eigen::Index>(i | tmask)));
            }
        }
    }
}

inline void validate_sequence(const GateSequence& seq) {
    if (seq.n_qubits < 1 || seq.n_qubits > 24) {
        throw DomainError("gate sequence must act on 1..24 qubits");
    }
    for (const Gate& g : seq.gates) {
        bool bad_target = g.target < 0 || g.target >= seq.n_qubits;
        bool bad_control = g.kind == GateKind::CNOT &&
                           (g.control < 0 || g.control >= seq.n_qubits || g.control == g.target);
        if (bad_target || bad_control) {
            throw DomainError("gate addresses a qubit outside the declared register");
        }
    }
}

inline void apply_gate_sequence(Eigen::Ref<ComplexVector> amps, const GateSequence& seq) {
    validate_sequence(seq);
    if (static_cast<std::size_t>(amps.size()) != (std::size_t{1} << seq.n_qubits)) {
        throw DomainError("gate sequence register size does not match the state");
    }
    for (const Gate& g : seq.gates) {
        apply_gate(amps, g);
    }
}

/// Dense unitary of the whole sequence (2^n x 2^n).
inline ComplexMatrix sequence_unitary(const GateSequence& seq) {
    validate_sequence(seq);
    auto dim = static_cast<Eigen::Index>(std::size_t{1} << seq.n_qubits);
    ComplexMatrix u = ComplexMatrix::Identity(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
        ComplexVector col = u.col(c);
        apply_gate_sequence(col, seq);
        u.col(c) = col;
    }
    return u;
}

/// Moves the sequence onto a larger register: local qubit q becomes
/// qubit_map[q].
inline GateSequence remap_qubits(const GateSequence& seq, const std::vector<int>& qubit_map, int n_qubits) {
    if (qubit_map.size() != static_cast<std::size_t>(seq.n_qubits)) {
        throw DomainError("remap_qubits: map size must equal the sequence width");
    }
    GateSequence out{n_qubits, {}};
    out.gates.reserve(seq.gates.size());
    for (Gate g : seq.gates) {
        g.target = qubit_map[static_cast<std::size_t>(g.target)];
        if (g.kind == GateKind::CNOT) {
            g.control = qubit_map[static_cast<std::size_t>(g.control)];
        }
        out.gates.push_back(g);
    }
    validate_sequence(out);
    return out;
}

/// The block multiplexor sum_j |j><j| (x) R_y(theta_j), with the rotated
/// qubit least significant: index = j * 2 + b.
inline ComplexMatrix multiplexor_matrix(const std::vector<double>& angles) {
    auto n = static_cast<Eigen::Index>(angles.size());
    ComplexMatrix m = ComplexMatrix::Zero(2 * n, 2 * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        m.block<2, 2>(2 * j, 2 * j) = ry_matrix(angles[static_cast<std::size_t>(j)]);
    }
    return m;
}

/// Compiles sum_j |j><j| (x) R_y(theta_j) into N rotations and N CNOTs
/// (one rotation and no CNOT for N = 1).
///
/// Uses the Gray-code uniformly controlled rotation: rotation i has angle
/// alpha_i = (1/N) sum_j (-1)^{popcount(j & g_i)} theta_j with g_i = i ^ (i >> 1),
/// and is followed by a CNOT from the control bit in which g_i and g_{i+1}
/// differ (cyclically). The target is qubit 0; bit q of j is carried by
/// qubit q + 1.
inline GateSequence expand_multiplexor(const std::vector<double>& angles) {
    const std::size_t n = angles.size();
    if (!is_power_of_two(n)) {
        throw DomainError("expand_multiplexor: angle count " + std::to_string(n) + " is not a power of two");
    }
    for (double a : angles) {
        if (!std::isfinite(a)) {
            throw DomainError("expand_multiplexor: non-finite angle");
        }
    }
    const int k = exact_log2(n);
    GateSequence seq{k + 1, {}};
    if (n == 1) {
        seq.gates.push_back(Gate::ry(0, angles[0]));
        return seq;
    }
    seq.gates.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t gray = i ^ (i >> 1);
        double alpha = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            alpha += (std::popcount(j & gray) % 2 == 0 ? 1.0 : -1.0) * angles[j];
        }
        alpha /= static_cast<double>(n);
        seq.gates.push_back(Gate::ry(0, alpha));
        const std::size_t next_gray = ((i + 1) % n) ^ (((i + 1) % n) >> 1);
        const int flipped = std::countr_zero(gray ^ next_gray);
        seq.gates.push_back(Gate::cnot(flipped + 1, 0));
    }
    return seq;
}

// --- line-oriented text format -------------------------------------------------
//
//   RY <target> <angle_radians>
//   CNOT <control> <target>
//
// one gate per line, application order. Lines starting with '#' are comments.

inline void write_gate_text(std::ostream& out, const GateSequence& seq) {
    auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    for (const Gate& g : seq.gates) {
        if (g.kind == GateKind::RY) {
            out << "RY " << g.target << ' ' << g.angle << '\n';
        } else {
            out << "CNOT " << g.control << ' ' << g.target << '\n';
        }
    }
    out.precision(old_precision);
}

inline std::string to_gate_text(const GateSequence& seq) {
    std::ostringstream out;
    write_gate_text(out, seq);
    return out.str();
}

/// Parses the gate text format. The register width is the highest qubit index
/// seen plus one, unless n_qubits > 0 is given.
inline GateSequence parse_gate_text(std::istream& in, int n_qubits = 0) {
    GateSequence seq;
    std::string line;
    int line_no = 0;
    int widest = -1;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string op;
        if (!(ls >> op) || op[0] == '#') {
            continue;
        }
        Gate g;
        bool ok = false;
        if (op == "RY") {
            g.kind = GateKind::RY;
            ok = static_cast<bool>(ls >> g.target >> g.angle);
        } else if (op == "CNOT") {
            g.kind = GateKind::CNOT;
            ok = static_cast<bool>(ls >> g.control >> g.target);
        }
        std::string rest;
        if (!ok || (ls >> rest)) {
            throw ConfigError("gate text line " + std::to_string(line_no) + ": cannot parse '" + line + "'");
        }
        widest = std::max({widest, g.target, g.control});
        seq.gates.push_back(g);
    }
    seq.n_qubits = n_qubits > 0 ? n_qubits : widest + 1;
    validate_sequence(seq);
    return seq;
}

}  // namespace qmean
