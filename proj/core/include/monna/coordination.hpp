#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "monna/aggregation.hpp"
#include "monna/network.hpp"
#include "monna/node.hpp"

namespace monna {

/// What the faulty nodes put on the wire in one round. Faulty node j has id
/// n - f + j. `broadcast[j]` is sent to everyone (nullopt = silent). When
/// `per_receiver` is non-empty, `per_receiver[j][r]` is what faulty node j
/// sends to correct node r instead (equivocation); SEB, when enabled, decides
/// what actually gets accepted.
struct FaultyTraffic {
    std::vector<std::optional<ParamVector>> broadcast;
    std::vector<std::vector<std::optional<ParamVector>>> per_receiver;
};

/// Called once per round with the correct nodes' current vectors (read-only).
using FaultyPolicy =
    std::function<FaultyTraffic(std::size_t round, std::span<const ParamVector> correct_vectors)>;

/// Faulty nodes stay silent.
FaultyTraffic silent_traffic(std::size_t f);

struct CoordinationConfig {
    std::size_t n = 0;
    std::size_t f = 0;
    std::size_t rounds = 1;
    AggregationRule rule{RuleKind::NNA, 0};
    DeliveryPolicy policy = DeliveryPolicy::FaultyFirst;
    bool seb = true;
    const SignatureScheme* signatures = nullptr;  // required when seb is on
    std::uint64_t iteration = 0;
    WeiszfeldOptions gm;
};

struct CoordinationStats {
    std::size_t messages = 0;
    std::size_t seb_instances = 0;
    std::size_t seb_stalls = 0;     // correct receivers that accepted nothing from a sender
    std::size_t gm_fallbacks = 0;   // GM hit its iteration cap; last iterate used
};

/**
 * Runs the K rounds of the coordination phase on the correct nodes'
 * x_current vectors. Correct node r has id r and draws its delivery sample
 * from delivery_rngs[r].
 */
void run_coordination_phase(const CoordinationConfig& config, std::vector<CorrectNodeState>& states,
                            const FaultyPolicy& faulty, std::span<Rng> delivery_rngs,
                            CoordinationStats* stats = nullptr);

/// Same on bare vectors z (one per correct node); returns the outputs y.
std::vector<ParamVector> run_coordination_phase(const CoordinationConfig& config,
                                                std::span<const ParamVector> inputs,
                                                const FaultyPolicy& faulty,
                                                std::span<Rng> delivery_rngs,
                                                CoordinationStats* stats = nullptr);

}  // namespace monna
