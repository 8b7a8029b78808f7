#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "monna/param_vector.hpp"

namespace monna {

/// A vector together with the id of the node that sent it. Sender ids break
/// distance ties in NNA and fix the summation order, so results do not depend
/// on the storage order of the received list.
struct PeerVector {
    NodeId sender;
    ParamVector value;
};

enum class RuleKind { NNA, Mean, CWTM, GM };

struct AggregationRule {
    RuleKind kind = RuleKind::NNA;
    std::size_t f = 0;  // tolerated faults; also the CWTM trimming parameter
};

std::string_view to_string(RuleKind kind) noexcept;
RuleKind parse_rule_kind(std::string_view text);

struct WeiszfeldOptions {
    double tolerance = 1e-10;
    std::size_t max_iterations = 1000;
    double anchor_epsilon = 1e-12;
};

/**
 * Nearest neighbor averaging.
 *
 * Keeps `self_vec` plus the |received| - f received vectors closest to it in
 * Euclidean distance and returns their average. With |received| = n - f - 1
 * this averages n - 2f vectors. Distance ties go to the smaller sender id.
 * The kept vectors are summed as: self first, then by ascending sender id.
 *
 * Throws DimensionError on shape mismatch or non-finite input and
 * InsufficientInputError when |received| < f.
 */
ParamVector nna(const ParamVector& self_vec, std::span<const PeerVector> received, std::size_t f);

/// Same as above with sender id = position in `received`.
ParamVector nna(const ParamVector& self_vec, std::span<const ParamVector> received, std::size_t f);

/// Average of self and all received vectors (self first, then ascending sender).
ParamVector mean_aggregate(const ParamVector& self_vec, std::span<const PeerVector> received);

/// Coordinate-wise trimmed mean over self + received, dropping the f largest
/// and f smallest values of every coordinate.
ParamVector coordinate_trimmed_mean(std::span<const ParamVector> inputs, std::size_t f);

/// Geometric median by Weiszfeld iteration started from the arithmetic mean.
/// Distances below `anchor_epsilon` are clamped so iterates landing on an
/// input point stay finite. Throws ConvergenceError (carrying the last
/// iterate) after `max_iterations` without meeting `tolerance`.
ParamVector geometric_median(std::span<const ParamVector> inputs,
                             const WeiszfeldOptions& options = {});

/// Uniform dispatch over the supported rules.
ParamVector aggregate(const AggregationRule& rule, const ParamVector& self_vec,
                      std::span<const PeerVector> received,
                      const WeiszfeldOptions& gm_options = {});

}  // namespace monna
