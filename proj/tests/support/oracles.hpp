#pragma once

// Reference implementations written from the definitions, independent of the
// library code paths they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <vector>

#include "monna/aggregation.hpp"
#include "monna/param_vector.hpp"

namespace monna::testing {

/// Sort every received vector by (squared distance to self, sender), keep
/// the first |received| - f, then sum self and the kept vectors by ascending
/// sender and divide by the count.
inline std::vector<double> nna_oracle(const std::vector<double>& self,
                                      const std::vector<PeerVector>& received, std::size_t f) {
    const std::size_t d = self.size();
    std::vector<std::tuple<double, std::size_t, std::size_t>> ranked;
    for (std::size_t i = 0; i < received.size(); ++i) {
        double dist = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            const double diff = self[c] - received[i].value[c];
            dist += diff * diff;
        }
        ranked.emplace_back(dist, received[i].sender, i);
    }
    std::sort(ranked.begin(), ranked.end());
    ranked.resize(received.size() - f);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return std::get<1>(a) < std::get<1>(b);
    });
    std::vector<double> sum = self;
    for (const auto& r : ranked) {
        for (std::size_t c = 0; c < d; ++c) sum[c] += received[std::get<2>(r)].value[c];
    }
    for (auto& x : sum) x /= static_cast<double>(ranked.size() + 1);
    return sum;
}

/// Γ(v) by the definition (1/N) Σ‖vᵢ - v̄‖², in long double.
inline double drift_oracle(const std::vector<ParamVector>& vs) {
    if (vs.size() <= 1) return 0.0;
    const std::size_t d = vs.front().dim();
    long double total = 0.0L;
    for (std::size_t c = 0; c < d; ++c) {
        long double mean = 0.0L;
        for (const auto& v : vs) mean += v[c];
        mean /= static_cast<long double>(vs.size());
        for (const auto& v : vs) total += (v[c] - mean) * (v[c] - mean);
    }
    return static_cast<double>(total / static_cast<long double>(vs.size()));
}

/// Step-size constants of the convergence theorem, transcribed term by term.
/// `c2_coeff` is the multiplier of c₁ inside c₂ (2 for n ≥ 11f, 3 for n > 5f)
/// and `c3_factor` the leading factor of c₃ (6 and 7).
struct TheoremConstants {
    double c0, c1, c2, c3, c4, gamma, beta;
};

inline TheoremConstants theorem_constants(double alpha, double lambda, double L, double T,
                                          double sigma, double n, double f, double gap,
                                          double c2_coeff, double c3_factor) {
    TheoremConstants k{};
    k.c0 = 12.0 * gap;
    k.c1 = 18.0 * alpha * (1.0 + alpha) / ((1.0 - alpha) * (1.0 - alpha));
    k.c2 = 72.0 * L *
           (3.0 / (n - f) + c2_coeff * k.c1 + (9.0 * lambda / 2.0) * (2.0 * k.c1 + 3.0));
    k.c3 = c3_factor * (6.0 * k.c1 + (9.0 * lambda / 2.0) * (4.0 * k.c1 + 9.0));
    k.c4 = 9.0 * n * k.c0 * k.c1 / k.c2;
    const double inf = std::numeric_limits<double>::infinity();
    const double t1 = 1.0 / (12.0 * L);
    const double t2 = k.c1 > 0.0 ? (1.0 / L) * std::sqrt(2.0 / (3.0 * k.c1)) : inf;
    const double t3 = sigma > 0.0 ? std::sqrt(k.c0 / (k.c2 * L * T * sigma * sigma)) : inf;
    k.gamma = std::min({t1, t2, t3});
    k.beta = std::sqrt(1.0 - 12.0 * k.gamma * L);
    return k;
}

}  // namespace monna::testing
