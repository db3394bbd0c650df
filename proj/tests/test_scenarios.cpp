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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qmean/fixtures.hpp"
#include "qmean/scenarios.hpp"

namespace {

using qmean::FunctionSpec;
using qmean::HermitianOperator;
using qmean::MuMode;
using qmean::ScenarioKind;
using qmean::ScenarioSpec;
using qmean::SpectralDecomposition;
using qmean::UnitaryOperator;

const double kLn2 = std::log(2.0);

SpectralDecomposition diagonal_observable(const std::vector<double>& values) {
    qmean::RealVector v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
    return {v, UnitaryOperator::identity(values.size())};
}

ScenarioSpec qubit_boltzmann(std::size_t n_sam, std::uint64_t seed) {
    ScenarioSpec spec;
    spec.kind = ScenarioKind::B;
    spec.system = HermitianOperator::diagonal({0.0, 1.0});
    spec.beta = kLn2;
    spec.observable = diagonal_observable({0.0, 1.0});
    spec.n_sam = n_sam;
    spec.chain.seed = seed;
    spec.chain.proposal = qmean::Proposal::SingleBitFlip;
    spec.circuit.n_probe = 3;
    return spec;
}

ScenarioSpec qubit_partition(FunctionSpec g, std::size_t n_sam, std::uint64_t seed) {
    ScenarioSpec spec;
    spec.kind = ScenarioKind::C;
    spec.system = HermitianOperator::diagonal({0.0, 1.0});
    spec.beta = kLn2;
    spec.g = std::move(g);
    spec.n_sam = n_sam;
    spec.chain.seed = seed;
    spec.circuit.n_probe = 3;
    return spec;
}

// Two-qubit Boltzmann instance whose spectrum lies on the grid j / 7 reached
// with n_probe = 3 and automatic dt.
ScenarioSpec on_grid_two_qubit(std::uint64_t seed) {
    qmean::Rng rng(seed);
    ScenarioSpec spec;
    spec.kind = ScenarioKind::B;
    spec.system = qmean::fixtures::operator_with_spectrum({0.0, 2.0 / 7.0, 5.0 / 7.0, 1.0},
                                                          qmean::fixtures::random_unitary(4, rng));
    spec.beta = 1.3;
    std::vector<double> omega(4);
    for (double& w : omega) w = 2.0 * qmean::uniform01(rng) - 1.0;
    spec.observable = SpectralDecomposition{diagonal_observable(omega).eigenvalues, qmean::fixtures::random_unitary(4, rng)};
    spec.n_sam = 100000;
    spec.chain.seed = seed;
    spec.chain.proposal = qmean::Proposal::SingleBitFlip;
    spec.circuit.n_probe = 3;
    return spec;
}

TEST(ChooseGammaTest, IdentityOnFourPointGrid) {
    EXPECT_NEAR(qmean::choose_gamma(FunctionSpec::identity(), 1.0, 2), 0.2122065907891938, 1e-15);
}

TEST(ChooseGammaTest, DecreasingExponentialPeaksAtZero) {
    EXPECT_DOUBLE_EQ(qmean::choose_gamma(FunctionSpec::exponential(0.7), 0.3, 4), 1.0);
}

TEST(ChooseGammaTest, WeightedExponentialGridMaximum) {
    EXPECT_NEAR(qmean::choose_gamma(FunctionSpec::weighted_exponential({0.0, 1.0}, 1.0), 1.0, 2), 3.062445015249561,
                1e-13);
}

TEST(ChooseGammaTest, VanishingFunctionIsRejected) {
    EXPECT_THROW(qmean::choose_gamma(FunctionSpec::constant(0.0), 1.0, 2), qmean::DomainError);
}

TEST(ChooseDtTest, QuarterTurnLandsOnLastIndex) {
    double dt = qmean::choose_dt(std::numbers::pi, 1);
    EXPECT_NEAR(dt, 1.0, 1e-15);
    qmean::CircuitConfig config{1, dt, 1.0, FunctionSpec::identity()};
    EXPECT_NEAR(qmean::grid_coordinate(std::numbers::pi, config), 1.0, 1e-14);
}

TEST(ChooseDtTest, InverselyProportionalToBound) {
    EXPECT_NEAR(qmean::choose_dt(4.0, 3), 0.5 * qmean::choose_dt(2.0, 3), 1e-15);
    EXPECT_THROW(qmean::choose_dt(0.0, 3), qmean::DomainError);
    EXPECT_THROW(qmean::choose_dt(-1.0, 3), qmean::DomainError);
}

TEST(ChooseDtTest, LargestIndexStaysInRange) {
    qmean::Rng rng(601);
    for (int trial = 0; trial < 100; ++trial) {
        double a_max = std::exp(8.0 * qmean::uniform01(rng) - 4.0);
        int n_probe = 1 + static_cast<int>(qmean::uniform_index(rng, 8));
        double dt = qmean::choose_dt(a_max, n_probe);
        double nj = std::ldexp(1.0, n_probe);
        EXPECT_LT(a_max * dt * nj / (2.0 * std::numbers::pi), nj - 1.0 + 1e-12);
    }
}

TEST(ShiftTest, NonnegativeSpectrumIsUnchanged) {
    auto [h, shift] = qmean::shift_nonnegative(HermitianOperator::diagonal({0.0, 1.0}));
    EXPECT_EQ(shift, 0.0);
    EXPECT_EQ(h.matrix(), HermitianOperator::diagonal({0.0, 1.0}).matrix());
}

TEST(ShiftTest, PauliZ) {
    auto [h, shift] = qmean::shift_nonnegative(HermitianOperator::diagonal({1.0, -1.0}));
    EXPECT_NEAR(shift, 1.0, 1e-15);
    EXPECT_LT(qmean::max_abs_diff(h.matrix(), HermitianOperator::diagonal({2.0, 0.0}).matrix()), 1e-15);
}

TEST(ShiftTest, BoltzmannProbabilitiesInvariant) {
    qmean::Rng rng(602);
    for (int trial = 0; trial < 10; ++trial) {
        auto h = qmean::fixtures::random_hermitian(8, rng, 2.0);
        auto [shifted, shift] = qmean::shift_nonnegative(h);
        Eigen::SelfAdjointEigenSolver<qmean::ComplexMatrix> es(shifted.matrix(), Eigen::EigenvaluesOnly);
        EXPECT_NEAR(es.eigenvalues().minCoeff(), 0.0, 1e-12);
        const double beta = 0.8;
        qmean::ComplexMatrix a = oracle::taylor_exp(-beta * h.matrix(), 60);
        qmean::ComplexMatrix b = oracle::taylor_exp(-beta * shifted.matrix(), 60);
        EXPECT_LT(qmean::max_abs_diff(b, std::exp(-beta * shift) * a), 1e-10 * a.cwiseAbs().maxCoeff());
        EXPECT_LT(qmean::max_abs_diff(a / a.trace().real(), b / b.trace().real()), 1e-10);
    }
}

TEST(MuOfXTest, ExplicitDensityMatrix) {
    ScenarioSpec spec;
    spec.kind = ScenarioKind::A;
    spec.system = HermitianOperator::diagonal({2.0 / 3.0, 1.0 / 3.0});
    spec.observable = diagonal_observable({0.0, 1.0});
    EXPECT_NEAR(qmean::mu_of_x(spec, 0, MuMode::Exact), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(qmean::mu_of_x(spec, 1, MuMode::Exact), 1.0 / 3.0, 1e-15);
}

TEST(MuOfXTest, QubitBoltzmannWeights) {
    auto spec = qubit_boltzmann(10, 0);
    EXPECT_NEAR(qmean::mu_of_x(spec, 0, MuMode::Exact), 1.0, 1e-15);
    EXPECT_NEAR(qmean::mu_of_x(spec, 1, MuMode::Exact), 0.5, 1e-15);
}

TEST(MuOfXTest, CircuitAgreesWithExactOnGrid) {
    std::vector<ScenarioSpec> specs{qubit_boltzmann(10, 0), qubit_partition(FunctionSpec::identity(), 10, 0),
                                    on_grid_two_qubit(603), on_grid_two_qubit(604)};
    ScenarioSpec density;
    density.kind = ScenarioKind::A;
    density.system = HermitianOperator::diagonal({0.75, 0.25});
    density.observable = diagonal_observable({1.0, -1.0});
    density.circuit.n_probe = 2;
    density.circuit.dt = 2.0 * std::numbers::pi;  // grid j / 4 holds both eigenvalues
    specs.push_back(density);
    for (const auto& spec : specs) {
        for (std::size_t x = 0; x < spec.system.dim(); ++x) {
            EXPECT_NEAR(qmean::mu_of_x(spec, x, MuMode::Circuit), qmean::mu_of_x(spec, x, MuMode::Exact), 1e-8);
        }
    }
}

TEST(MuOfXTest, CircuitModeGivesIdenticalEstimatesOnGrid) {
    auto exact = on_grid_two_qubit(605);
    exact.n_sam = 5000;
    auto circuit = exact;
    circuit.mode = MuMode::Circuit;
    std::vector<std::size_t> ta;
    std::vector<std::size_t> tb;
    auto a = qmean::run_scenario_mean(exact, &ta);
    auto b = qmean::run_scenario_mean(circuit, &tb);
    EXPECT_EQ(ta, tb);
    EXPECT_NEAR(a.point_estimate, b.point_estimate, 1e-12);
}

TEST(ScenarioMeanTest, IdentityObservableIsExactlyOne) {
    auto spec = on_grid_two_qubit(606);
    spec.observable = SpectralDecomposition{qmean::RealVector::Ones(4), spec.observable->basis_changer};
    spec.n_sam = 2000;
    auto report = qmean::run_scenario_mean(spec);
    EXPECT_EQ(report.point_estimate, 1.0);
    EXPECT_EQ(report.standard_error, 0.0);
}

TEST(ScenarioMeanTest, QubitFixtureWithinThreeErrors) {
    auto spec = qubit_boltzmann(100000, 11);
    EXPECT_NEAR(qmean::exact_scenario_value(spec), 1.0 / 3.0, 1e-15);
    auto report = qmean::run_scenario_mean(spec);
    EXPECT_GT(report.standard_error, 0.0);
    EXPECT_NEAR(report.point_estimate, 1.0 / 3.0, 3.0 * report.diagnostics.at("batch_means_standard_error"));
}

TEST(ScenarioMeanTest, TwoQubitInstanceWithinThreeSigma) {
    for (std::uint64_t seed : {607u, 608u, 609u}) {
        auto spec = on_grid_two_qubit(seed);
        HermitianOperator omega(spec.observable->recompose());
        HermitianOperator weights(oracle::taylor_exp(-spec.beta * spec.system.matrix(), 60));
        double expected = oracle::trace_product(omega.matrix(), weights.matrix()) /
                          weights.matrix().trace().real();
        EXPECT_NEAR(qmean::exact_scenario_value(spec), expected, 1e-12);
        auto report = qmean::run_scenario_mean(spec);
        EXPECT_NEAR(report.point_estimate, expected, 3.0 * report.diagnostics.at("batch_means_standard_error"))
            << "seed " << seed;
    }
}

TEST(ScenarioMeanTest, RejectsPartitionKind) {
    EXPECT_THROW(qmean::run_scenario_mean(qubit_partition(FunctionSpec::identity(), 10, 0)), qmean::ConfigError);
}

TEST(ScenarioMeanTest, ShiftInvariance) {
    auto spec = on_grid_two_qubit(610);
    spec.n_sam = 20000;
    auto base = qmean::run_scenario_mean(spec);
    for (double c : {-3.0, 0.5, 7.25}) {
        auto moved = spec;
        moved.system = HermitianOperator(spec.system.matrix() + c * qmean::ComplexMatrix::Identity(4, 4));
        EXPECT_NEAR(qmean::run_scenario_mean(moved).point_estimate, base.point_estimate, 1e-10);
    }
}

TEST(ScenarioPartitionTest, FlatTargetCountsStates) {
    ScenarioSpec spec;
    spec.kind = ScenarioKind::C;
    spec.system = HermitianOperator::diagonal({0.0, 0.0});
    spec.beta = 0.0;
    spec.g = FunctionSpec::polynomial({1.0});
    spec.n_sam = 1000;
    spec.chain.proposal = qmean::Proposal::Uniform;
    auto report = qmean::run_scenario_partition(spec);
    EXPECT_NEAR(report.point_estimate, 2.0, 1e-12);
}

TEST(ScenarioPartitionTest, QubitPartitionFunction) {
    auto spec = qubit_partition(FunctionSpec::polynomial({1.0}), 100000, 12);
    EXPECT_NEAR(qmean::exact_scenario_value(spec), 1.5, 1e-15);
    EXPECT_NEAR(qmean::run_scenario_partition(spec).point_estimate, 1.5, 0.05 * 1.5);
}

TEST(ScenarioPartitionTest, ConsistentOnFourStates) {
    qmean::Rng rng(611);
    ScenarioSpec spec;
    spec.kind = ScenarioKind::C;
    spec.system = qmean::fixtures::random_hermitian(4, rng);
    spec.beta = 1.0;
    spec.g = FunctionSpec::polynomial({1.0, 0.5});
    spec.n_sam = 1000000;
    spec.chain.proposal = qmean::Proposal::Uniform;
    spec.chain.seed = 611;
    auto [shifted, shift] = qmean::shift_nonnegative(spec.system);
    double expected = oracle::partition_loop(shifted.matrix(), spec.beta, [](double e) { return 1.0 + 0.5 * e; });
    auto report = qmean::run_scenario_partition(spec);
    EXPECT_EQ(report.diagnostics.at("visited_states"), 4.0);
    EXPECT_NEAR(report.point_estimate, expected, 0.01 * expected);
}

TEST(ScenarioPartitionTest, ScalingTargetKeepsTrajectory) {
    auto a = qubit_partition(FunctionSpec::polynomial({1.0}), 5000, 13);
    auto b = qubit_partition(FunctionSpec::polynomial({3.7}), 5000, 13);
    std::vector<std::size_t> ta;
    std::vector<std::size_t> tb;
    auto ra = qmean::run_scenario_partition(a, &ta);
    auto rb = qmean::run_scenario_partition(b, &tb);
    EXPECT_EQ(ta, tb);
    EXPECT_NEAR(rb.point_estimate, 3.7 * ra.point_estimate, 1e-12);
}

TEST(TraceRatioTest, EqualInputsGiveOne) {
    qmean::EstimateReport z{1.5, 0.01, 100, MuMode::Exact, {}};
    auto r = qmean::trace_ratio(z, z);
    EXPECT_DOUBLE_EQ(r.point_estimate, 1.0);
    EXPECT_NEAR(r.standard_error, std::sqrt(2.0) * 0.01 / 1.5, 1e-15);
}

TEST(TraceRatioTest, QubitEnergyExpectation) {
    auto zg = qmean::run_scenario_partition(qubit_partition(FunctionSpec::identity(), 100000, 14));
    auto z1 = qmean::run_scenario_partition(qubit_partition(FunctionSpec::polynomial({1.0}), 100000, 15));
    auto r = qmean::trace_ratio(zg, z1);
    EXPECT_NEAR(r.point_estimate, 1.0 / 3.0, 3.0 * r.standard_error + 1e-12);
}

TEST(TraceRatioTest, NonpositiveDenominatorIsRejected) {
    qmean::EstimateReport z{0.0, 0.0, 1, MuMode::Exact, {}};
    EXPECT_THROW(qmean::trace_ratio(z, z), qmean::DomainError);
}

TEST(SignedPartitionTest, ShiftedEnergyMinusOne) {
    auto spec = qubit_partition(FunctionSpec::polynomial({-1.0, 1.0}), 100000, 16);
    auto report = qmean::signed_partition(spec);
    EXPECT_NEAR(report.point_estimate, -1.0, 1e-12);
    EXPECT_NEAR(report.diagnostics.at("z_plus"), 0.5, 1e-12);
    EXPECT_NEAR(report.diagnostics.at("z_minus"), 1.5, 1e-12);
}

TEST(SignedPartitionTest, PositivePartOnlyMatchesPlainRun) {
    auto spec = qubit_partition(FunctionSpec::polynomial({1.0, 2.0}), 20000, 17);
    auto signed_report = qmean::signed_partition(spec);
    auto plain = qmean::run_scenario_partition(spec);
    EXPECT_DOUBLE_EQ(signed_report.point_estimate, plain.point_estimate);
    EXPECT_EQ(signed_report.diagnostics.count("z_minus"), 0u);
}

TEST(SignedPartitionTest, MixedSignsMatchSignedOracle) {
    qmean::Rng rng(612);
    ScenarioSpec spec;
    spec.kind = ScenarioKind::C;
    spec.system = qmean::fixtures::random_hermitian(4, rng);
    spec.beta = 0.5;
    std::vector<double> coeffs{0.7, -1.2, 0.4};
    spec.g = FunctionSpec::polynomial(coeffs);
    spec.n_sam = 100000;
    spec.chain.proposal = qmean::Proposal::Uniform;
    spec.chain.seed = 612;
    auto [shifted, shift] = qmean::shift_nonnegative(spec.system);
    double expected = oracle::partition_loop(shifted.matrix(), spec.beta,
                                             [](double e) { return 0.7 - 1.2 * e + 0.4 * e * e; });
    auto report = qmean::signed_partition(spec);
    EXPECT_NEAR(report.point_estimate, expected, 3.0 * report.standard_error + 1e-10);
}

}  // namespace
