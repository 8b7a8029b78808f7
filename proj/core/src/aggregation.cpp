#include "monna/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "monna/errors.hpp"

namespace monna {

namespace {

void validate_inputs(const ParamVector& self_vec, std::span<const PeerVector> received) {
    if (self_vec.empty()) throw DimensionError("aggregation: empty self vector");
    if (!self_vec.all_finite()) throw DimensionError("aggregation: non-finite self vector");
    for (const auto& peer : received) {
        require_dim(peer.value, self_vec.dim(), "aggregation input");
        if (!peer.value.all_finite()) {
            throw DimensionError("aggregation: non-finite vector from sender " +
                                 std::to_string(peer.sender));
        }
    }
}

// self + received[indices...] in ascending sender order, divided by the count.
ParamVector canonical_average(const ParamVector& self_vec, std::span<const PeerVector> received,
                              std::vector<std::size_t> indices) {
    std::sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
        return received[a].sender < received[b].sender;
    });
    ParamVector acc = self_vec;
    for (std::size_t idx : indices) acc += received[idx].value;
    acc /= static_cast<double>(indices.size() + 1);
    return acc;
}

std::vector<PeerVector> with_positions(std::span<const ParamVector> received) {
    std::vector<PeerVector> peers;
    peers.reserve(received.size());
    for (std::size_t i = 0; i < received.size(); ++i) peers.push_back({i, received[i]});
    return peers;
}

}  // namespace

std::string_view to_string(RuleKind kind) noexcept {
    switch (kind) {
        case RuleKind::NNA: return "nna";
        case RuleKind::Mean: return "mean";
        case RuleKind::CWTM: return "cwtm";
        case RuleKind::GM: return "gm";
    }
    return "unknown";
}

RuleKind parse_rule_kind(std::string_view text) {
    for (auto kind : {RuleKind::NNA, RuleKind::Mean, RuleKind::CWTM, RuleKind::GM}) {
        if (text == to_string(kind)) return kind;
    }
    throw ConfigError("", "unknown aggregation rule '" + std::string(text) +
                              "' (expected nna, mean, cwtm or gm)");
}

ParamVector nna(const ParamVector& self_vec, std::span<const PeerVector> received, std::size_t f) {
    validate_inputs(self_vec, received);
    if (received.size() < f) {
        throw InsufficientInputError("nna: received " + std::to_string(received.size()) +
                                     " vectors, need at least f = " + std::to_string(f));
    }
    const std::size_t keep = received.size() - f;

    std::vector<double> dist(received.size());
    for (std::size_t i = 0; i < received.size(); ++i) {
        dist[i] = squared_distance(self_vec, received[i].value);
    }
    std::vector<std::size_t> order(received.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (keep < received.size()) {
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep),
                          order.end(), [&](std::size_t a, std::size_t b) {
                              if (dist[a] != dist[b]) return dist[a] < dist[b];
                              return received[a].sender < received[b].sender;
                          });
        order.resize(keep);
    }
    return canonical_average(self_vec, received, std::move(order));
}

ParamVector nna(const ParamVector& self_vec, std::span<const ParamVector> received, std::size_t f) {
    const auto peers = with_positions(received);
    return nna(self_vec, peers, f);
}

ParamVector mean_aggregate(const ParamVector& self_vec, std::span<const PeerVector> received) {
    validate_inputs(self_vec, received);
    std::vector<std::size_t> all(received.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return canonical_average(self_vec, received, std::move(all));
}

ParamVector coordinate_trimmed_mean(std::span<const ParamVector> inputs, std::size_t f) {
    if (inputs.empty()) throw DimensionError("cwtm: no inputs");
    const std::size_t dim = inputs.front().dim();
    require_dim(inputs, dim, "cwtm input");
    if (inputs.size() <= 2 * f) {
        throw InsufficientInputError("cwtm: " + std::to_string(inputs.size()) +
                                     " inputs cannot be trimmed by f = " + std::to_string(f) +
                                     " on each side");
    }
    ParamVector out(dim);
    std::vector<double> column(inputs.size());
    const std::size_t kept = inputs.size() - 2 * f;
    for (std::size_t c = 0; c < dim; ++c) {
        for (std::size_t i = 0; i < inputs.size(); ++i) column[i] = inputs[i][c];
        std::sort(column.begin(), column.end());
        double acc = 0.0;
        for (std::size_t i = f; i < f + kept; ++i) acc += column[i];
        out[c] = acc / static_cast<double>(kept);
    }
    return out;
}

ParamVector geometric_median(std::span<const ParamVector> inputs, const WeiszfeldOptions& options) {
    if (inputs.empty()) throw DimensionError("gm: no inputs");
    const std::size_t dim = inputs.front().dim();
    require_dim(inputs, dim, "gm input");

    ParamVector current = mean_of(inputs);
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        ParamVector next(dim);
        double weight_sum = 0.0;
        for (const auto& point : inputs) {
            const double w = 1.0 / std::max(std::sqrt(squared_distance(point, current)),
                                            options.anchor_epsilon);
            next.axpy(w, point);
            weight_sum += w;
        }
        next /= weight_sum;
        const double step = std::sqrt(squared_distance(next, current));
        current = std::move(next);
        if (step <= options.tolerance * std::max(1.0, norm(current))) return current;
    }
    throw ConvergenceError("gm: Weiszfeld did not converge within " +
                               std::to_string(options.max_iterations) + " iterations",
                           current);
}

ParamVector aggregate(const AggregationRule& rule, const ParamVector& self_vec,
                      std::span<const PeerVector> received, const WeiszfeldOptions& gm_options) {
    switch (rule.kind) {
        case RuleKind::NNA: return nna(self_vec, received, rule.f);
        case RuleKind::Mean: return mean_aggregate(self_vec, received);
        case RuleKind::CWTM:
        case RuleKind::GM: {
            validate_inputs(self_vec, received);
            std::vector<std::size_t> order(received.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return received[a].sender < received[b].sender;
            });
            std::vector<ParamVector> all;
            all.reserve(received.size() + 1);
            all.push_back(self_vec);
            for (std::size_t idx : order) all.push_back(received[idx].value);
            return rule.kind == RuleKind::CWTM ? coordinate_trimmed_mean(all, rule.f)
                                               : geometric_median(all, gm_options);
        }
    }
    throw Error("aggregate: unknown rule");
}

}  // namespace monna
