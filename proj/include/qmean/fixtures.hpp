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
#include <vector>

#include "qmean/circuit.hpp"
#include "qmean/numerics.hpp"
#include "qmean/rng.hpp"
#include "qmean/sampler.hpp"

// Seeded random instances for tests, benchmarks and CLI demos.
namespace qmean::fixtures {

inline ComplexMatrix ginibre(std::size_t dim, Rng& rng) {
    auto n = static_cast<Eigen::Index>(dim);
    ComplexMatrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double re = standard_normal(rng);
            double im = standard_normal(rng);
            g(i, j) = Complex(re, im) / std::numbers::sqrt2;
        }
    }
    return g;
}

/// Haar-random unitary (QR of a Ginibre matrix with the R-diagonal phases
/// folded back in).
inline UnitaryOperator random_unitary(std::size_t dim, Rng& rng) {
    Eigen::HouseholderQR<ComplexMatrix> qr(ginibre(dim, rng));
    ComplexMatrix q = qr.householderQ();
    ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < q.cols(); ++i) {
        Complex d = r(i, i);
        q.col(i) *= std::abs(d) > 0.0 ? d / std::abs(d) : Complex(1.0);
    }
    return UnitaryOperator(q);
}

/// (G + G^dagger) / 2 for Ginibre G, scaled by `scale`.
inline HermitianOperator random_hermitian(std::size_t dim, Rng& rng, double scale = 1.0) {
    ComplexMatrix g = ginibre(dim, rng);
    return HermitianOperator(scale * 0.5 * (g + g.adjoint()));
}

/// U diag(eigenvalues) U^dagger.
inline HermitianOperator operator_with_spectrum(const std::vector<double>& eigenvalues, const UnitaryOperator& u) {
    RealVector d(static_cast<Eigen::Index>(eigenvalues.size()));
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
        d(static_cast<Eigen::Index>(i)) = eigenvalues[i];
    }
    return HermitianOperator(u.matrix() * d.cast<Complex>().asDiagonal() * u.matrix().adjoint());
}

/// Operator whose eigenvalues are the grid points xi_j = 2 pi j / (dt N_j)
/// for the given probe indices, so phase estimation reads them exactly.
inline HermitianOperator on_grid_operator(const std::vector<std::size_t>& probe_indices, const CircuitConfig& config,
                                          const UnitaryOperator& u) {
    std::vector<double> eigenvalues;
    eigenvalues.reserve(probe_indices.size());
    for (std::size_t j : probe_indices) {
        eigenvalues.push_back(config.grid_point(j));
    }
    return operator_with_spectrum(eigenvalues, u);
}

/// Random probe indices in [0, N_j).
inline std::vector<std::size_t> random_grid_indices(std::size_t count, std::size_t probe_dim, Rng& rng) {
    std::vector<std::size_t> out(count);
    for (auto& j : out) {
        j = uniform_index(rng, probe_dim);
    }
    return out;
}

/// Random density matrix W W^dagger / tr(W W^dagger).
inline HermitianOperator random_density_matrix(std::size_t dim, Rng& rng) {
    ComplexMatrix w = ginibre(dim, rng);
    ComplexMatrix rho = w * w.adjoint();
    rho /= rho.trace().real();
    return HermitianOperator(rho);
}

/// Random strictly positive weights in [floor, 1 + floor).
inline std::vector<double> random_weights(std::size_t n, Rng& rng, double floor = 0.05) {
    std::vector<double> mu(n);
    for (double& m : mu) {
        m = floor + uniform01(rng);
    }
    return mu;
}

/// Random reversible chain: a random walk on a complete graph with symmetric
/// random edge weights, P_xy = w_xy / sum_y w_xy, reversible with respect to
/// pi_x proportional to the row sums.
inline MarkovChain random_weighted_graph_chain(std::size_t n, Rng& rng) {
    auto dim = static_cast<Eigen::Index>(n);
    RealMatrix w(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            double v = 0.05 + uniform01(rng);
            w(i, j) = v;
            w(j, i) = v;
        }
    }
    RealVector rows = w.rowwise().sum();
    RealMatrix p = rows.cwiseInverse().asDiagonal() * w;
    RealVector pi = rows / rows.sum();
    // Re-normalize rows exactly; the division can leave 1 ulp of drift.
    for (Eigen::Index i = 0; i < dim; ++i) {
        p.row(i) /= p.row(i).sum();
    }
    return MarkovChain(p, pi);
}

}  // namespace qmean::fixtures
