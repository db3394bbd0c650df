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
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "qmean/errors.hpp"
#include "qmean/numerics.hpp"
#include "qmean/rng.hpp"

namespace qmean {

enum class Proposal {
    Uniform,        // q(x, y) = 1/N for every y, including y = x
    SingleBitFlip,  // q(x, y) = 1/n_b for y at Hamming distance 1
};

struct ChainConfig {
    Proposal proposal = Proposal::SingleBitFlip;
    std::size_t burn_in = 1000;
    std::size_t thinning = 1;
    std::size_t n_steps = 1;  // retained samples
    std::uint64_t seed = 0;
    std::size_t initial_state = 0;
};

/// Row-stochastic transition matrix P[x][y], optionally with its stationary
/// distribution. When the stationary distribution is given the chain must be
/// reversible with respect to it.
class MarkovChain {
   public:
    explicit MarkovChain(RealMatrix transition, std::optional<RealVector> stationary = std::nullopt)
        : p_(std::move(transition)), pi_(std::move(stationary)) {
        if (p_.rows() != p_.cols() || p_.rows() < 1) {
            throw DomainError("transition matrix must be square and non-empty");
        }
        if (!p_.allFinite() || p_.minCoeff() < 0.0) {
            throw DomainError("transition matrix entries must be finite and >= 0");
        }
        for (Eigen::Index x = 0; x < p_.rows(); ++x) {
            double row = p_.row(x).sum();
            if (std::abs(row - 1.0) > 1e-12) {
                throw DomainError("transition matrix row " + std::to_string(x) + " sums to " + std::to_string(row));
            }
        }
        if (pi_) {
            if (pi_->size() != p_.rows() || pi_->minCoeff() < 0.0 || std::abs(pi_->sum() - 1.0) > 1e-10) {
                throw DomainError("stationary distribution must be a probability vector of matching size");
            }
            double fixed_point = (pi_->transpose() * p_ - pi_->transpose()).cwiseAbs().maxCoeff();
            if (fixed_point > 1e-10) {
                throw DomainError("stationary distribution is not invariant: max|pi P - pi| = " +
                                  std::to_string(fixed_point));
            }
            double db = balance_defect(p_, *pi_);
            if (db > 1e-10) {
                throw DomainError("detailed balance fails: max|pi_x P_xy - pi_y P_yx| = " + std::to_string(db));
            }
        }
    }

    std::size_t dim() const { return static_cast<std::size_t>(p_.rows()); }
    const RealMatrix& transition() const { return p_; }
    const std::optional<RealVector>& stationary() const { return pi_; }

    /// max |pi_x P_xy - pi_y P_yx|.
    static double balance_defect(const RealMatrix& p, const RealVector& pi) {
        RealMatrix flow = pi.asDiagonal() * p;
        return (flow - flow.transpose()).cwiseAbs().maxCoeff();
    }

   private:
    RealMatrix p_;
    std::optional<RealVector> pi_;
};

/// The chain's stationary distribution: the stored one if present, uniform
/// for symmetric P, otherwise the left eigenvector for the eigenvalue nearest 1.
inline RealVector stationary_distribution(const MarkovChain& chain) {
    if (chain.stationary()) {
        return *chain.stationary();
    }
    const RealMatrix& p = chain.transition();
    const auto n = p.rows();
    if ((p - p.transpose()).cwiseAbs().maxCoeff() <= 1e-12) {
        return RealVector::Constant(n, 1.0 / static_cast<double>(n));
    }
    Eigen::EigenSolver<RealMatrix> solver(p.transpose());
    Eigen::Index best = 0;
    solver.eigenvalues().unaryExpr([](const Complex& z) { return std::abs(z - 1.0); }).minCoeff(&best);
    RealVector v = solver.eigenvectors().col(best).real();
    v /= v.sum();
    return v.cwiseMax(0.0) / v.cwiseMax(0.0).sum();
}

inline bool is_reversible(const MarkovChain& chain, double tol = 1e-10) {
    RealVector pi = stationary_distribution(chain);
    double fixed_point = (pi.transpose() * chain.transition() - pi.transpose()).cwiseAbs().maxCoeff();
    return fixed_point <= tol && MarkovChain::balance_defect(chain.transition(), pi) <= tol;
}

namespace detail {

inline void require_reversible(const MarkovChain& chain, const char* what) {
    if (!is_reversible(chain)) {
        throw DomainError(std::string(what) + ": non-reversible chains are unsupported");
    }
}

inline void check_proposal(Proposal proposal, std::size_t dim) {
    if (proposal == Proposal::SingleBitFlip && (dim < 2 || !is_power_of_two(dim))) {
        throw DomainError("single-bit-flip proposal needs a power-of-two state count >= 2");
    }
}

inline std::size_t propose(Proposal proposal, std::size_t x, std::size_t dim, Rng& rng) {
    if (proposal == Proposal::Uniform) {
        return uniform_index(rng, dim);
    }
    auto bit = uniform_index(rng, static_cast<std::size_t>(exact_log2(dim)));
    return x ^ (std::size_t{1} << bit);
}

}  // namespace detail

/// Ratio oracle: target(from, to) = mu(to) / mu(from). Infinite when mu(from)
/// is zero and mu(to) is not; NaN when both are zero.
using RatioOracle = std::function<double(std::size_t, std::size_t)>;

inline RatioOracle ratio_oracle_from_weights(std::vector<double> mu) {
    return [mu = std::move(mu)](std::size_t from, std::size_t to) {
        if (mu[from] == 0.0) {
            return mu[to] == 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::numeric_limits<double>::infinity();
        }
        return mu[to] / mu[from];
    };
}

struct MetropolisRun {
    std::vector<std::size_t> samples;
    std::size_t proposed = 0;
    std::size_t accepted = 0;

    double acceptance_rate() const {
        return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
    }
};

/// Metropolis-Hastings driven only by probability ratios.
///
/// Runs burn_in + n_steps * thinning transitions and keeps the state after
/// every thinning-th transition past burn-in. Each transition draws the
/// proposal and then one uniform, so the random stream, and with it the
/// trajectory, depends on the target only through the ratios it returns.
inline MetropolisRun metropolis_run(const RatioOracle& target_ratio, std::size_t dim, const ChainConfig& config) {
    if (dim < 1) {
        throw DomainError("metropolis_sample: dim must be >= 1");
    }
    if (config.n_steps < 1 || config.thinning < 1) {
        throw DomainError("metropolis_sample: n_steps and thinning must be >= 1");
    }
    if (config.initial_state >= dim) {
        throw DomainError("metropolis_sample: initial state out of range");
    }
    detail::check_proposal(config.proposal, dim);

    // A chain sitting on a zero-measure state that sees only 0/0 ratios for
    // this many consecutive proposals is treated as an all-zero target.
    const std::size_t zero_budget = std::max<std::size_t>(1000, 20 * dim);

    Rng rng(config.seed);
    MetropolisRun run;
    run.samples.reserve(config.n_steps);
    std::size_t x = config.initial_state;
    std::size_t zero_streak = 0;
    const std::size_t total = config.burn_in + config.n_steps * config.thinning;
    for (std::size_t step = 1; step <= total; ++step) {
        std::size_t y = detail::propose(config.proposal, x, dim, rng);
        double u = uniform01(rng);
        ++run.proposed;
        if (y == x) {
            ++run.accepted;
        } else {
            double r = target_ratio(x, y);
            if (std::isnan(r)) {
                if (++zero_streak > zero_budget) {
                    throw SamplerError("metropolis_sample: no move accepted from a zero-measure state after " +
                                       std::to_string(zero_budget) + " proposals; target is identically zero");
                }
            } else {
                if (r < 0.0) {
                    throw SamplerError("metropolis_sample: ratio oracle returned a negative value");
                }
                zero_streak = 0;
                if (u < r) {
                    x = y;
                    ++run.accepted;
                }
            }
        }
        if (step > config.burn_in && (step - config.burn_in) % config.thinning == 0) {
            run.samples.push_back(x);
        }
    }
    return run;
}

inline std::vector<std::size_t> metropolis_sample(const RatioOracle& target_ratio, std::size_t dim,
                                                  const ChainConfig& config) {
    return metropolis_run(target_ratio, dim, config).samples;
}

/// Explicit Metropolis matrix P_xy = q(x, y) min(1, mu_y / mu_x) for y != x,
/// with the rejected mass on the diagonal. Moves out of zero-weight states are
/// always accepted.
inline MarkovChain build_metropolis_matrix(const std::vector<double>& mu, Proposal proposal) {
    const std::size_t n = mu.size();
    if (n < 1) {
        throw DomainError("build_metropolis_matrix: empty target");
    }
    double total = 0.0;
    for (double m : mu) {
        if (!std::isfinite(m) || m < 0.0) {
            throw DomainError("build_metropolis_matrix: target weights must be finite and >= 0");
        }
        total += m;
    }
    if (total <= 0.0) {
        throw DomainError("build_metropolis_matrix: target weights are all zero");
    }
    detail::check_proposal(proposal, n);
    const auto dim = static_cast<Eigen::Index>(n);
    RealMatrix p = RealMatrix::Zero(dim, dim);
    const double q_uniform = 1.0 / static_cast<double>(n);
    const double q_flip = proposal == Proposal::SingleBitFlip ? 1.0 / exact_log2(n) : 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        double off = 0.0;
        for (std::size_t y = 0; y < n; ++y) {
            if (y == x) {
                continue;
            }
            double q = 0.0;
            if (proposal == Proposal::Uniform) {
                q = q_uniform;
            } else if (std::popcount(x ^ y) == 1) {
                q = q_flip;
            }
            if (q == 0.0) {
                continue;
            }
            double accept = mu[x] == 0.0 ? 1.0 : std::min(1.0, mu[y] / mu[x]);
            double v = q * accept;
            p(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = v;
            off += v;
        }
        p(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) = 1.0 - off;
    }
    RealVector pi(dim);
    for (std::size_t x = 0; x < n; ++x) {
        pi(static_cast<Eigen::Index>(x)) = mu[x] / total;
    }
    return MarkovChain(std::move(p), std::move(pi));
}

/// Eigenvalues of a reversible chain, descending. Uses the symmetrized matrix
/// D^{1/2} P D^{-1/2} when the stationary distribution is strictly positive.
inline RealVector chain_eigenvalues(const MarkovChain& chain) {
    detail::require_reversible(chain, "chain_eigenvalues");
    RealVector pi = stationary_distribution(chain);
    const RealMatrix& p = chain.transition();
    RealVector values;
    if (pi.minCoeff() > 1e-300) {
        RealVector s = pi.cwiseSqrt();
        RealMatrix sym = s.asDiagonal() * p * s.cwiseInverse().asDiagonal();
        sym = (0.5 * (sym + sym.transpose())).eval();
        Eigen::SelfAdjointEigenSolver<RealMatrix> solver(sym, Eigen::EigenvaluesOnly);
        values = solver.eigenvalues();
    } else {
        Eigen::EigenSolver<RealMatrix> solver(p, false);
        values = solver.eigenvalues().real();
    }
    std::sort(values.data(), values.data() + values.size(), std::greater<>());
    return values;
}

/// delta = |lambda_1| - |lambda_2|, the distance between the two largest
/// eigenvalue magnitudes. Zero for a one-state chain.
inline double spectral_gap(const MarkovChain& chain) {
    RealVector values = chain_eigenvalues(chain);
    if (values.size() < 2) {
        return 0.0;
    }
    std::vector<double> mags(static_cast<std::size_t>(values.size()));
    for (std::size_t i = 0; i < mags.size(); ++i) {
        mags[i] = std::abs(values(static_cast<Eigen::Index>(i)));
    }
    std::sort(mags.begin(), mags.end(), std::greater<>());
    return mags[0] - mags[1];
}

inline constexpr std::size_t kMaxWalkDimension = std::size_t{1} << 16;

namespace detail {

inline void check_walk_dimension(std::size_t n) {
    if (n * n > kMaxWalkDimension) {
        throw DomainError("szegedy_walk_operator: walk dimension " + std::to_string(n * n) + " exceeds 2^16");
    }
}

// Isometry A = sum_x |x>|p_x><x| with |p_x> = sum_y sqrt(P_xy) |y>; the pair
// (x, y) sits at index x * N + y.
inline ComplexMatrix walk_isometry(const MarkovChain& chain) {
    const auto n = static_cast<Eigen::Index>(chain.dim());
    ComplexMatrix a = ComplexMatrix::Zero(n * n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
        for (Eigen::Index y = 0; y < n; ++y) {
            a(x * n + y, x) = std::sqrt(chain.transition()(x, y));
        }
    }
    return a;
}

inline ComplexMatrix swap_registers(const ComplexMatrix& m, Eigen::Index n) {
    ComplexMatrix out(m.rows(), m.cols());
    for (Eigen::Index x = 0; x < n; ++x) {
        for (Eigen::Index y = 0; y < n; ++y) {
            out.row(y * n + x) = m.row(x * n + y);
        }
    }
    return out;
}

}  // namespace detail

/// Szegedy walk W = S (2 A A^dagger - 1) on C^N (x) C^N, S the register swap.
///
/// On the span of {|x>|p_x>} and {|p_y>|y>} its eigenphases are
/// +-arccos(lambda_i) over the chain eigenvalues lambda_i. Its square is the
/// product of the reflections about those two spans.
inline UnitaryOperator szegedy_walk_operator(const MarkovChain& chain) {
    detail::require_reversible(chain, "szegedy_walk_operator");
    detail::check_walk_dimension(chain.dim());
    const auto n = static_cast<Eigen::Index>(chain.dim());
    ComplexMatrix a = detail::walk_isometry(chain);
    ComplexMatrix reflect = 2.0 * a * a.adjoint() - ComplexMatrix::Identity(n * n, n * n);
    return UnitaryOperator(detail::swap_registers(reflect, n));
}

/// Reflection product (2 B B^dagger - 1)(2 A A^dagger - 1) with B = S A.
/// Equals the square of szegedy_walk_operator.
inline UnitaryOperator szegedy_reflection_product(const MarkovChain& chain) {
    detail::require_reversible(chain, "szegedy_reflection_product");
    detail::check_walk_dimension(chain.dim());
    const auto n = static_cast<Eigen::Index>(chain.dim());
    ComplexMatrix a = detail::walk_isometry(chain);
    ComplexMatrix b = detail::swap_registers(a, n);
    ComplexMatrix id = ComplexMatrix::Identity(n * n, n * n);
    return UnitaryOperator((2.0 * b * b.adjoint() - id) * (2.0 * a * a.adjoint() - id));
}

/// Orthonormal basis of span{A, S A}, the walk's invariant subspace.
inline ComplexMatrix walk_invariant_subspace(const MarkovChain& chain) {
    const auto n = static_cast<Eigen::Index>(chain.dim());
    ComplexMatrix a = detail::walk_isometry(chain);
    ComplexMatrix both(n * n, 2 * n);
    both << a, detail::swap_registers(a, n);
    Eigen::JacobiSVD<ComplexMatrix> svd(both, Eigen::ComputeThinU);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
        rank += svd.singularValues()(i) > 1e-7 ? 1 : 0;
    }
    return svd.matrixU().leftCols(rank);
}

/// Eigenphases in (-pi, pi] of the walk restricted to its invariant subspace,
/// ascending.
inline std::vector<double> walk_eigenphases(const UnitaryOperator& walk, const MarkovChain& chain) {
    if (walk.dim() != chain.dim() * chain.dim()) {
        throw DomainError("walk_eigenphases: walk does not act on the chain's doubled space");
    }
    ComplexMatrix q = walk_invariant_subspace(chain);
    ComplexMatrix restricted = q.adjoint() * walk.matrix() * q;
    double leak = (walk.matrix() * q - q * restricted).cwiseAbs().maxCoeff();
    if (leak > 1e-8) {
        throw DomainError("walk_eigenphases: subspace is not invariant under the walk (defect " +
                          std::to_string(leak) + ")");
    }
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(restricted, false);
    std::vector<double> phases;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        phases.push_back(std::arg(solver.eigenvalues()(i)));
    }
    std::sort(phases.begin(), phases.end());
    return phases;
}

/// The phases the walk should show for chain eigenvalues `lambdas`:
/// +-arccos(lambda) for |lambda| < 1, a single 0 for lambda = 1 and a single
/// pi for lambda = -1. Ascending.
inline std::vector<double> expected_walk_phases(const RealVector& lambdas, double unit_tol = 1e-12) {
    std::vector<double> out;
    for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
        double l = std::clamp(lambdas(i), -1.0, 1.0);
        if (l >= 1.0 - unit_tol) {
            out.push_back(0.0);
        } else if (l <= -1.0 + unit_tol) {
            out.push_back(std::numbers::pi);
        } else {
            double t = std::acos(l);
            out.push_back(t);
            out.push_back(-t);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Smallest nonzero |eigenphase| of the walk on its invariant subspace.
/// Throws when every phase vanishes or the smallest nonzero one is too small
/// to separate from zero.
inline double phase_gap(const UnitaryOperator& walk, const MarkovChain& chain) {
    constexpr double zero_tol = 1e-9;
    constexpr double resolve_tol = 1e-6;
    double best = std::numeric_limits<double>::infinity();
    for (double p : walk_eigenphases(walk, chain)) {
        double m = std::abs(p);
        if (m > zero_tol) {
            best = std::min(best, m);
        }
    }
    if (!std::isfinite(best)) {
        throw DomainError("phase_gap: all walk eigenphases vanish (chain does not mix)");
    }
    if (best < resolve_tol) {
        throw DomainError("phase_gap: numerically degenerate spectrum, smallest nonzero phase " + std::to_string(best));
    }
    return best;
}

/// One line of a gap sweep: delta, phase gap and Delta / sqrt(2 delta).
struct GapSweepRow {
    double delta = std::numeric_limits<double>::quiet_NaN();
    double phase_gap = std::numeric_limits<double>::quiet_NaN();
    double ratio = std::numeric_limits<double>::quiet_NaN();
    bool flagged = false;
    std::string note;
};

inline GapSweepRow gap_sweep_row(const MarkovChain& chain) {
    GapSweepRow row;
    try {
        row.delta = spectral_gap(chain);
        UnitaryOperator walk = szegedy_walk_operator(chain);
        row.phase_gap = phase_gap(walk, chain);
        row.ratio = row.phase_gap / std::sqrt(2.0 * row.delta);
    } catch (const DomainError& e) {
        row.flagged = true;
        row.note = e.what();
    }
    return row;
}

/// CSV with header `delta,phase_gap,ratio`; flagged rows carry nan values and
/// a trailing comment line naming the reason.
inline void write_gap_sweep_csv(std::ostream& out, const std::vector<GapSweepRow>& rows) {
    auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    out << "delta,phase_gap,ratio\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << rows[i].delta << ',' << rows[i].phase_gap << ',' << rows[i].ratio << '\n';
        if (rows[i].flagged) {
            out << "# row " << (i + 1) << " flagged: " << rows[i].note << '\n';
        }
    }
    out.precision(old_precision);
}

/// CSV with header `step,x`; steps count retained samples from 1.
inline void write_trajectory_csv(std::ostream& out, const std::vector<std::size_t>& samples) {
    out << "step,x\n";
    for (std::size_t s = 0; s < samples.size(); ++s) {
        out << (s + 1) << ',' << samples[s] << '\n';
    }
}

}  // namespace qmean
