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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "qmean/errors.hpp"
#include "qmean/function_spec.hpp"

namespace qmean {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kUnitaryTolerance = 1e-10;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// log2 of a power of two.
inline int exact_log2(std::size_t n) {
    int k = 0;
    while ((std::size_t{1} << k) < n) {
        ++k;
    }
    return k;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DomainError("max_abs_diff: shape mismatch");
    }
    return (a - b).cwiseAbs().maxCoeff();
}

/// Dense Hermitian matrix on a register of n >= 1 qubits.
///
/// Construction checks entries[i][j] == conj(entries[j][i]) up to
/// 1e-12 * max(1, max|entry|) and then stores the exactly symmetrized matrix.
class HermitianOperator {
   public:
    explicit HermitianOperator(ComplexMatrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols()) {
            throw DomainError("Hermitian operator must be square, got " + std::to_string(m_.rows()) + "x" +
                              std::to_string(m_.cols()));
        }
        auto dim = static_cast<std::size_t>(m_.rows());
        if (dim < 2 || !is_power_of_two(dim)) {
            throw DomainError("Hermitian operator dimension must be a power of two >= 2, got " +
                              std::to_string(dim));
        }
        double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
        if (!m_.allFinite()) {
            throw DomainError("Hermitian operator has non-finite entries");
        }
        Eigen::Index wi = 0;
        Eigen::Index wj = 0;
        double worst = (m_ - m_.adjoint()).cwiseAbs().maxCoeff(&wi, &wj);
        if (worst > kHermitianTolerance * scale) {
            throw DomainError("symmetry violation: |A(" + std::to_string(wi) + "," + std::to_string(wj) + ") - conj(A(" +
                              std::to_string(wj) + "," + std::to_string(wi) + "))| = " + std::to_string(worst));
        }
        m_ = (0.5 * (m_ + m_.adjoint())).eval();
    }

    static HermitianOperator from_real(const RealMatrix& m) { return HermitianOperator(m.cast<Complex>()); }

    static HermitianOperator diagonal(const std::vector<double>& d) {
        ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
        for (std::size_t i = 0; i < d.size(); ++i) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
        }
        return HermitianOperator(std::move(m));
    }

    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    const ComplexMatrix& matrix() const { return m_; }
    Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

   private:
    ComplexMatrix m_;
};

/// Dense unitary matrix. Construction checks max|U^dagger U - 1| <= 1e-10.
class UnitaryOperator {
   public:
    explicit UnitaryOperator(ComplexMatrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || m_.rows() == 0) {
            throw DomainError("unitary operator must be square and non-empty");
        }
        double dev = unitarity_deviation(m_);
        if (!(dev <= kUnitaryTolerance)) {
            throw DomainError("unitarity violation: max|U^dagger U - 1| = " + std::to_string(dev));
        }
    }

    static UnitaryOperator identity(std::size_t dim) {
        auto n = static_cast<Eigen::Index>(dim);
        return UnitaryOperator(ComplexMatrix::Identity(n, n));
    }

    static double unitarity_deviation(const ComplexMatrix& m) {
        return (m.adjoint() * m - ComplexMatrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
    }

    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    const ComplexMatrix& matrix() const { return m_; }
    UnitaryOperator adjoint() const { return UnitaryOperator(m_.adjoint()); }
    Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

   private:
    ComplexMatrix m_;
};

/// Eigenvalues (ascending) and the basis changer whose columns are the
/// matching eigenvectors, so that source = U diag(eigenvalues) U^dagger.
struct SpectralDecomposition {
    RealVector eigenvalues;
    UnitaryOperator basis_changer;

    ComplexMatrix recompose() const {
        const ComplexMatrix& u = basis_changer.matrix();
        return u * eigenvalues.cast<Complex>().asDiagonal() * u.adjoint();
    }

    ComplexMatrix recompose_with(const std::vector<Complex>& values) const {
        const ComplexMatrix& u = basis_changer.matrix();
        ComplexVector d(static_cast<Eigen::Index>(values.size()));
        for (std::size_t i = 0; i < values.size(); ++i) {
            d(static_cast<Eigen::Index>(i)) = values[i];
        }
        return u * d.asDiagonal() * u.adjoint();
    }
};

namespace detail {

// Makes the first entry with magnitude above threshold real positive.
inline void normalize_phase(Eigen::Ref<ComplexVector> v) {
    double threshold = 1e-9 * std::max(1e-300, v.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > threshold) {
            v *= std::conj(v(i)) / std::abs(v(i));
            v(i) = std::abs(v(i));
            return;
        }
    }
}

// Canonical orthonormal basis of the span of `block`: Gram-Schmidt over the
// columns of the projector onto the span, taken in basis order. The result
// depends only on the subspace, not on which eigenvectors the solver picked,
// and comes out ordered by the position of each vector's first nonzero entry.
inline ComplexMatrix canonical_basis(const ComplexMatrix& block) {
    const Eigen::Index dim = block.rows();
    const Eigen::Index rank = block.cols();
    ComplexMatrix projector = block * block.adjoint();
    ComplexMatrix basis(dim, rank);
    Eigen::Index found = 0;
    for (Eigen::Index k = 0; k < dim && found < rank; ++k) {
        ComplexVector r = projector.col(k);
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index q = 0; q < found; ++q) {
                r -= basis.col(q) * basis.col(q).dot(r);
            }
        }
        double norm = r.norm();
        if (norm > 1e-3) {
            basis.col(found++) = r / norm;
        }
    }
    // Residual fill for badly conditioned clusters.
    for (Eigen::Index k = 0; k < rank && found < rank; ++k) {
        ComplexVector r = block.col(k);
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index q = 0; q < found; ++q) {
                r -= basis.col(q) * basis.col(q).dot(r);
            }
        }
        double norm = r.norm();
        if (norm > 1e-8) {
            basis.col(found++) = r / norm;
        }
    }
    return basis;
}

}  // namespace detail

/// Spectral decomposition of a Hermitian operator.
///
/// Eigenvalues come out ascending. Each eigenvector's first nonzero entry is
/// real positive. Degenerate eigenvalues (within 1e-9 relative) share a
/// canonical basis of their eigenspace, ordered by descending lexicographic
/// order of the normalized components; for the identity this is the standard
/// basis.
inline SpectralDecomposition eigendecompose(const HermitianOperator& op) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(op.matrix());
    if (solver.info() != Eigen::Success) {
        throw DomainError("eigendecompose: eigensolver did not converge");
    }
    RealVector values = solver.eigenvalues();
    ComplexMatrix vectors = solver.eigenvectors();
    const Eigen::Index n = values.size();
    double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    double cluster_tol = 1e-9 * scale;

    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index end = start + 1;
        while (end < n && values(end) - values(end - 1) <= cluster_tol) {
            ++end;
        }
        Eigen::Index size = end - start;
        if (size > 1) {
            double mean = values.segment(start, size).mean();
            values.segment(start, size).setConstant(mean);
            vectors.middleCols(start, size) = detail::canonical_basis(vectors.middleCols(start, size));
        }
        for (Eigen::Index c = start; c < end; ++c) {
            detail::normalize_phase(vectors.col(c));
        }
        start = end;
    }
    return SpectralDecomposition{std::move(values), UnitaryOperator(std::move(vectors))};
}

namespace detail {

// Smallest eigenvalue may sit a rounding error below zero; anything further
// below is a genuine domain violation.
inline void require_nonnegative_spectrum(const RealVector& values, const char* what) {
    double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    double lowest = values.minCoeff();
    if (lowest < -1e-10 * scale) {
        throw DomainError(std::string(what) + ": operator has negative eigenvalue " + std::to_string(lowest) +
                          " but the function is defined on R>=0");
    }
}

inline double clamp_nonnegative(double v) { return v < 0.0 ? 0.0 : v; }

}  // namespace detail

/// f(A) = U_A diag(f(A_x)) U_A^dagger for f: R>=0 -> R>=0.
inline HermitianOperator function_of_hermitian(const HermitianOperator& op, const FunctionSpec& f) {
    SpectralDecomposition sd = eigendecompose(op);
    detail::require_nonnegative_spectrum(sd.eigenvalues, "function_of_hermitian");
    std::vector<Complex> fv(static_cast<std::size_t>(sd.eigenvalues.size()));
    for (std::size_t i = 0; i < fv.size(); ++i) {
        fv[i] = f.evaluate_checked(detail::clamp_nonnegative(sd.eigenvalues(static_cast<Eigen::Index>(i))));
    }
    return HermitianOperator(sd.recompose_with(fv));
}

/// e^{i A t}, computed through the spectral decomposition.
inline UnitaryOperator unitary_exp(const SpectralDecomposition& sd, double t) {
    if (!std::isfinite(t)) {
        throw DomainError("unitary_exp: time must be finite");
    }
    std::vector<Complex> phases(static_cast<std::size_t>(sd.eigenvalues.size()));
    for (std::size_t i = 0; i < phases.size(); ++i) {
        phases[i] = std::polar(1.0, sd.eigenvalues(static_cast<Eigen::Index>(i)) * t);
    }
    return UnitaryOperator(sd.recompose_with(phases));
}

inline UnitaryOperator unitary_exp(const HermitianOperator& op, double t) { return unitary_exp(eigendecompose(op), t); }

/// mu(x0) = <x0| V^dagger f(A) V |x0>, evaluated as
/// sum_x f(A_x) |<A_x| V |x0>|^2.
inline double exact_diag_element(const HermitianOperator& a, const UnitaryOperator& v, const FunctionSpec& f,
                                 std::size_t x0) {
    if (v.dim() != a.dim()) {
        throw DomainError("exact_diag_element: V has dimension " + std::to_string(v.dim()) + " but A has " +
                          std::to_string(a.dim()));
    }
    if (x0 >= a.dim()) {
        throw DomainError("exact_diag_element: basis index " + std::to_string(x0) + " out of range [0, " +
                          std::to_string(a.dim()) + ")");
    }
    SpectralDecomposition sd = eigendecompose(a);
    detail::require_nonnegative_spectrum(sd.eigenvalues, "exact_diag_element");
    ComplexVector overlaps = sd.basis_changer.matrix().adjoint() * v.matrix().col(static_cast<Eigen::Index>(x0));
    double mu = 0.0;
    for (Eigen::Index x = 0; x < overlaps.size(); ++x) {
        mu += f.evaluate_checked(detail::clamp_nonnegative(sd.eigenvalues(x))) * std::norm(overlaps(x));
    }
    return mu;
}

/// Checks that rho is a density matrix: trace 1 and positive semidefinite,
/// both to 1e-10.
inline void validate_density_matrix(const HermitianOperator& rho) {
    Complex tr = rho.matrix().trace();
    if (std::abs(tr - Complex(1.0, 0.0)) > 1e-10) {
        throw DomainError("density matrix must have trace 1, got " + std::to_string(tr.real()));
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho.matrix(), Eigen::EigenvaluesOnly);
    double lowest = solver.eigenvalues().minCoeff();
    if (lowest < -1e-10) {
        throw DomainError("density matrix must be positive semidefinite, smallest eigenvalue " +
                          std::to_string(lowest));
    }
}

/// tr(Omega rho).
inline double exact_mean(const HermitianOperator& omega, const HermitianOperator& rho) {
    if (omega.dim() != rho.dim()) {
        throw DomainError("exact_mean: dimension mismatch");
    }
    validate_density_matrix(rho);
    return (omega.matrix() * rho.matrix()).trace().real();
}

/// Z_g = tr{g(H) e^{-beta H}} = sum_x g(E_x) e^{-beta E_x}.
///
/// g is evaluated without the sign restriction, so this is also the oracle
/// for signed g.
inline double exact_partition(const HermitianOperator& h, double beta, const FunctionSpec& g) {
    if (!std::isfinite(beta) || beta < 0.0) {
        throw DomainError("exact_partition: beta must be finite and >= 0");
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
    double z = 0.0;
    for (Eigen::Index x = 0; x < solver.eigenvalues().size(); ++x) {
        double e = solver.eigenvalues()(x);
        z += g(e) * std::exp(-beta * e);
    }
    return z;
}

}  // namespace qmean
