#pragma once

// Hand-rolled generators for property tests. Every generator takes the Rng
// by reference so a test case is reproducible from its seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "monna/aggregation.hpp"
#include "monna/param_vector.hpp"
#include "monna/rng.hpp"

namespace monna::testing {

inline std::size_t uniform_size(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline ParamVector gaussian_vec(Rng& rng, std::size_t dim, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    ParamVector v(dim);
    for (auto& x : v) x = normal(rng);
    return v;
}

/// Small integer coordinates; makes exact distance ties and duplicates common.
inline ParamVector lattice_vec(Rng& rng, std::size_t dim, int radius = 2) {
    std::uniform_int_distribution<int> coord(-radius, radius);
    ParamVector v(dim);
    for (auto& x : v) x = coord(rng);
    return v;
}

/// Mix of shapes: isotropic, lattice (ties), duplicates of earlier vectors,
/// and far outliers.
inline std::vector<ParamVector> mixed_cloud(Rng& rng, std::size_t count, std::size_t dim) {
    std::vector<ParamVector> out;
    const std::size_t shape = uniform_size(rng, 0, 3);
    for (std::size_t i = 0; i < count; ++i) {
        switch (shape) {
            case 0: out.push_back(gaussian_vec(rng, dim)); break;
            case 1: out.push_back(lattice_vec(rng, dim)); break;
            case 2:
                if (!out.empty() && uniform_size(rng, 0, 2) == 0) {
                    out.push_back(out[uniform_size(rng, 0, out.size() - 1)]);
                } else {
                    out.push_back(lattice_vec(rng, dim, 1));
                }
                break;
            default: {
                ParamVector v = gaussian_vec(rng, dim);
                if (uniform_size(rng, 0, 4) == 0) v *= 1e3;
                out.push_back(std::move(v));
            }
        }
    }
    return out;
}

inline std::vector<PeerVector> as_peers(const std::vector<ParamVector>& vectors,
                                        const std::vector<NodeId>& ids) {
    std::vector<PeerVector> peers;
    for (std::size_t i = 0; i < vectors.size(); ++i) peers.push_back({ids[i], vectors[i]});
    return peers;
}

/// Distinct sender ids in random order, none equal to `exclude`.
inline std::vector<NodeId> shuffled_ids(Rng& rng, std::size_t count, NodeId exclude) {
    std::vector<NodeId> ids;
    for (NodeId id = 0; ids.size() < count; ++id) {
        if (id != exclude) ids.push_back(id);
    }
    std::shuffle(ids.begin(), ids.end(), rng);
    return ids;
}

inline double max_abs_diff(const ParamVector& a, const ParamVector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace monna::testing
