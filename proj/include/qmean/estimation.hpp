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
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "qmean/circuit.hpp"
#include "qmean/errors.hpp"
#include "qmean/rng.hpp"

namespace qmean {

/// One measurement of all three registers of Psi_4.
struct SampleRecord {
    std::size_t probe = 0;
    std::size_t main = 0;
    int ancilla = 0;

    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

/// Which registers an empirical distribution keeps.
struct Marginal {
    bool probe = false;
    bool main = false;
    bool ancilla = false;

    static constexpr Marginal ancilla_only() { return {false, false, true}; }
    static constexpr Marginal main_ancilla() { return {false, true, true}; }
    static constexpr Marginal main_only() { return {false, true, false}; }
    static constexpr Marginal all() { return {true, true, true}; }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        if (probe) out.emplace_back("probe");
        if (main) out.emplace_back("main");
        if (ancilla) out.emplace_back("ancilla");
        return out;
    }
};

/// Counts of outcome tuples; the tuple holds the kept registers in the order
/// probe, main, ancilla.
class EmpiricalDistribution {
   public:
    using Key = std::vector<std::size_t>;

    EmpiricalDistribution(Marginal marginal, std::map<Key, std::uint64_t> counts) : marginal_(marginal), counts_(std::move(counts)) {
        for (const auto& [key, c] : counts_) {
            total_ += c;
        }
    }

    Marginal marginal() const { return marginal_; }
    const std::map<Key, std::uint64_t>& counts() const { return counts_; }
    std::uint64_t total() const { return total_; }

    std::uint64_t count(const Key& key) const {
        auto it = counts_.find(key);
        return it == counts_.end() ? 0 : it->second;
    }

    double frequency(const Key& key) const {
        return total_ == 0 ? 0.0 : static_cast<double>(count(key)) / static_cast<double>(total_);
    }

    /// Sums over registers not kept by `target`, which must be a subset.
    EmpiricalDistribution marginalize(Marginal target) const {
        if ((target.probe && !marginal_.probe) || (target.main && !marginal_.main) ||
            (target.ancilla && !marginal_.ancilla)) {
            throw DomainError("marginalize: target keeps a register this distribution does not have");
        }
        std::map<Key, std::uint64_t> out;
        for (const auto& [key, c] : counts_) {
            Key reduced;
            std::size_t pos = 0;
            auto take = [&](bool have, bool keep) {
                if (have) {
                    if (keep) reduced.push_back(key[pos]);
                    ++pos;
                }
            };
            take(marginal_.probe, target.probe);
            take(marginal_.main, target.main);
            take(marginal_.ancilla, target.ancilla);
            out[reduced] += c;
        }
        return EmpiricalDistribution(target, std::move(out));
    }

   private:
    Marginal marginal_;
    std::map<Key, std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

/// Exact P_b(0) = sum over (j, x) of |<j, x, 0|Psi_4>|^2.
inline double ancilla_zero_probability(const StateVector& psi4) {
    const ComplexVector& amps = psi4.amplitudes();
    double p = 0.0;
    for (Eigen::Index i = 0; i < amps.size(); i += 2) {
        p += std::norm(amps(i));
    }
    return std::clamp(p, 0.0, 1.0);
}

/// n_sam i.i.d. measurements of all registers, by inverse CDF over the
/// cumulative |amplitude|^2 in index order.
inline std::vector<SampleRecord> sample_measurements(const StateVector& psi4, std::size_t n_sam, std::uint64_t seed) {
    if (n_sam < 1) {
        throw DomainError("sample_measurements: n_sam must be >= 1");
    }
    const ComplexVector& amps = psi4.amplitudes();
    std::vector<double> cdf(static_cast<std::size_t>(amps.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < cdf.size(); ++i) {
        acc += std::norm(amps(static_cast<Eigen::Index>(i)));
        cdf[i] = acc;
    }
    Rng rng(seed);
    std::vector<SampleRecord> out;
    out.reserve(n_sam);
    const std::size_t block = psi4.block_size();
    for (std::size_t s = 0; s < n_sam; ++s) {
        double u = uniform01(rng) * acc;
        auto idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        idx = std::min(idx, cdf.size() - 1);
        // Skip zero-probability slots a rounding tie might land on.
        while (idx > 0 && cdf[idx] == cdf[idx - 1]) {
            --idx;
        }
        out.push_back(SampleRecord{idx / block, (idx % block) / 2, static_cast<int>(idx % 2)});
    }
    return out;
}

inline EmpiricalDistribution empirical_distribution(const std::vector<SampleRecord>& samples, Marginal marginal) {
    if (samples.empty()) {
        throw DomainError("empirical_distribution: no samples");
    }
    std::map<EmpiricalDistribution::Key, std::uint64_t> counts;
    for (const SampleRecord& r : samples) {
        EmpiricalDistribution::Key key;
        if (marginal.probe) key.push_back(r.probe);
        if (marginal.main) key.push_back(r.main);
        if (marginal.ancilla) key.push_back(static_cast<std::size_t>(r.ancilla));
        ++counts[key];
    }
    return EmpiricalDistribution(marginal, std::move(counts));
}

/// Empirical P_b(0) straight from the ancilla outcomes.
inline double empirical_ancilla_zero(const std::vector<SampleRecord>& samples) {
    if (samples.empty()) {
        throw DomainError("empirical_ancilla_zero: no samples");
    }
    std::size_t zeros = 0;
    for (const SampleRecord& r : samples) {
        zeros += r.ancilla == 0 ? 1 : 0;
    }
    return static_cast<double>(zeros) / static_cast<double>(samples.size());
}

/// mu estimate P_b(0) / gamma.
inline double estimate_diag_element(double pb0, double gamma) {
    if (!(gamma > 0.0)) {
        throw DomainError("estimate_diag_element: gamma must be > 0");
    }
    if (!(pb0 >= 0.0 && pb0 <= 1.0)) {
        throw DomainError("estimate_diag_element: probability must lie in [0, 1]");
    }
    return pb0 / gamma;
}

/// sqrt(p (1 - p) / n), the standard error of an empirical frequency.
inline double binomial_standard_error(double p, std::size_t n) {
    if (n == 0) {
        throw DomainError("binomial_standard_error: n must be >= 1");
    }
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

/// CSV with header `s,probe,main,ancilla`; s counts from 1.
inline void write_samples_csv(std::ostream& out, const std::vector<SampleRecord>& samples) {
    out << "s,probe,main,ancilla\n";
    for (std::size_t s = 0; s < samples.size(); ++s) {
        out << (s + 1) << ',' << samples[s].probe << ',' << samples[s].main << ',' << samples[s].ancilla << '\n';
    }
}

}  // namespace qmean
