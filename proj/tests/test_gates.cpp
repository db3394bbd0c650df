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


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "qmean/gates.hpp"
#include "qmean/rng.hpp"

namespace {

using qmean::ComplexMatrix;
using qmean::Gate;
using qmean::GateSequence;

std::vector<double> random_angles(std::size_t n, qmean::Rng& rng) {
    std::vector<double> a(n);
    for (double& v : a) v = (2.0 * qmean::uniform01(rng) - 1.0) * std::numbers::pi;
    return a;
}

// Dense product of the gate matrices built by the Kronecker oracle.
ComplexMatrix oracle_unitary(const GateSequence& seq) {
    const Eigen::Index dim = Eigen::Index{1} << seq.n_qubits;
    ComplexMatrix u = ComplexMatrix::Identity(dim, dim);
    for (const Gate& g : seq.gates) {
        ComplexMatrix m = g.kind == qmean::GateKind::RY
                              ? oracle::one_qubit_gate(ComplexMatrix(oracle::ry(g.angle)), g.target, seq.n_qubits)
                              : oracle::cnot_gate(g.control, g.target, seq.n_qubits);
        u = m * u;
    }
    return u;
}

TEST(GateTest, RyMatrixMatchesOracle) {
    for (double t : {0.0, 0.3, -1.2, std::numbers::pi}) {
        EXPECT_LT(qmean::max_abs_diff(qmean::ry_matrix(t), ComplexMatrix(oracle::ry(t))), 1e-15);
    }
}

TEST(GateTest, SequenceUnitaryMatchesKroneckerOracle) {
    qmean::Rng rng(12);
    GateSequence seq{3, {Gate::ry(0, 0.4), Gate::cnot(2, 0), Gate::ry(1, -0.7), Gate::cnot(0, 1), Gate::ry(2, 1.1),
                         Gate::cnot(1, 2)}};
    EXPECT_LT(qmean::max_abs_diff(qmean::sequence_unitary(seq), oracle_unitary(seq)), 1e-14);
}

TEST(GateTest, ValidationRejectsBadQubits) {
    EXPECT_THROW(qmean::validate_sequence(GateSequence{2, {Gate::ry(2, 0.1)}}), qmean::DomainError);
    EXPECT_THROW(qmean::validate_sequence(GateSequence{2, {Gate::cnot(1, 1)}}), qmean::DomainError);
    EXPECT_THROW(qmean::validate_sequence(GateSequence{0, {}}), qmean::DomainError);
}

TEST(MultiplexorTest, UniformAnglesReduceToSingleRotation) {
    const double theta = 0.83;
    for (std::size_t n : {2u, 4u, 8u}) {
        std::vector<double> angles(n, theta);
        GateSequence seq = qmean::expand_multiplexor(angles);
        std::size_t nonzero = 0;
        for (const Gate& g : seq.gates) {
            if (g.kind == qmean::GateKind::RY && std::abs(g.angle) > 1e-15) ++nonzero;
        }
        EXPECT_EQ(nonzero, 1u);
        ComplexMatrix expected = oracle::kron(ComplexMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)),
                                              ComplexMatrix(oracle::ry(theta)));
        EXPECT_LT(qmean::max_abs_diff(qmean::sequence_unitary(seq), expected), 1e-12);
    }
}

TEST(MultiplexorTest, OneControlTwoRotationsTwoCnots) {
    GateSequence seq = qmean::expand_multiplexor({0.3, -1.1});
    ASSERT_EQ(seq.gates.size(), 4u);
    EXPECT_EQ(seq.rotation_count(), 2u);
    EXPECT_EQ(seq.cnot_count(), 2u);
    EXPECT_NEAR(seq.gates[0].angle, (0.3 + (-1.1)) / 2.0, 1e-15);
    EXPECT_NEAR(seq.gates[2].angle, (0.3 - (-1.1)) / 2.0, 1e-15);
    ComplexMatrix block = oracle::block_multiplexor({0.3, -1.1});
    EXPECT_LT(qmean::max_abs_diff(oracle_unitary(seq), block), 1e-14);
}

TEST(MultiplexorTest, TwoControlsMatchDenseBlockDiagonal) {
    qmean::Rng rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        auto angles = random_angles(4, rng);
        GateSequence seq = qmean::expand_multiplexor(angles);
        ASSERT_EQ(seq.n_qubits, 3);
        EXPECT_LT(qmean::max_abs_diff(oracle_unitary(seq), oracle::block_multiplexor(angles)), 1e-10);
        EXPECT_LT(qmean::max_abs_diff(qmean::multiplexor_matrix(angles), oracle::block_multiplexor(angles)), 1e-15);
    }
}

TEST(MultiplexorTest, GateCountIsTwicePerBranch) {
    qmean::Rng rng(23);
    for (std::size_t n : {1u, 2u, 4u, 8u, 16u, 32u}) {
        GateSequence seq = qmean::expand_multiplexor(random_angles(n, rng));
        EXPECT_LE(seq.gates.size(), 2 * n);
        EXPECT_EQ(seq.rotation_count(), n);
    }
}

TEST(MultiplexorTest, RejectsNonPowerOfTwo) {
    EXPECT_THROW(qmean::expand_multiplexor({0.1, 0.2, 0.3}), qmean::DomainError);
    EXPECT_THROW(qmean::expand_multiplexor({}), qmean::DomainError);
}

TEST(GateTextTest, RoundTripsExactly) {
    qmean::Rng rng(24);
    GateSequence seq = qmean::expand_multiplexor(random_angles(8, rng));
    std::istringstream in(qmean::to_gate_text(seq));
    GateSequence back = qmean::parse_gate_text(in);
    ASSERT_EQ(back.gates.size(), seq.gates.size());
    EXPECT_EQ(back.n_qubits, seq.n_qubits);
    for (std::size_t i = 0; i < seq.gates.size(); ++i) {
        EXPECT_EQ(back.gates[i].kind, seq.gates[i].kind);
        EXPECT_EQ(back.gates[i].target, seq.gates[i].target);
        EXPECT_EQ(back.gates[i].control, seq.gates[i].control);
        EXPECT_EQ(back.gates[i].angle, seq.gates[i].angle);
    }
}

TEST(GateTextTest, SkipsCommentsAndReportsBadLine) {
    std::istringstream ok("# header\nRY 0 0.5\n\nCNOT 1 0\n");
    GateSequence seq = qmean::parse_gate_text(ok);
    EXPECT_EQ(seq.gates.size(), 2u);
    EXPECT_EQ(seq.n_qubits, 2);

    std::istringstream bad("RY 0 0.5\nCNOT 1\n");
    try {
        qmean::parse_gate_text(bad);
        FAIL() << "expected a parse error";
    } catch (const qmean::ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(GateTest, RemapMovesQubits) {
    GateSequence seq{2, {Gate::ry(0, 0.2), Gate::cnot(1, 0)}};
    GateSequence moved = qmean::remap_qubits(seq, {2, 0}, 3);
    EXPECT_EQ(moved.gates[0].target, 2);
    EXPECT_EQ(moved.gates[1].control, 0);
    EXPECT_EQ(moved.gates[1].target, 2);
}

}  // namespace
