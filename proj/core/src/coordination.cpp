#include "monna/coordination.hpp"

#include <memory>
#include <string>

#include "monna/errors.hpp"

namespace monna {

FaultyTraffic silent_traffic(std::size_t f) {
    FaultyTraffic traffic;
    traffic.broadcast.assign(f, std::nullopt);
    return traffic;
}

namespace {

// What each correct receiver accepted from each sender this round.
// accepted[r] is the inbox of correct node r.
std::vector<std::vector<InboxEntry>> exchange(const CoordinationConfig& cfg, std::size_t round,
                                              std::span<const ParamVector> correct_vectors,
                                              const FaultyTraffic& traffic,
                                              CoordinationStats* stats) {
    const std::size_t n = cfg.n;
    const std::size_t num_correct = n - cfg.f;
    std::vector<std::vector<InboxEntry>> inbox(num_correct);
    for (auto& box : inbox) box.reserve(n - 1);

    const auto mask_storage = std::make_unique<bool[]>(n);
    const std::span<const bool> faulty_mask(mask_storage.get(), n);
    for (std::size_t j = num_correct; j < n; ++j) mask_storage[j] = true;

    auto deliver_seb = [&](NodeId sender, const ParamVector& payload, const SebAdversary& adv) {
        const MessageId id{sender, cfg.iteration, static_cast<std::uint32_t>(round)};
        const SebOutcome out =
            seb_broadcast(sender, id, payload, n, cfg.f, faulty_mask, *cfg.signatures, adv);
        if (stats) {
            stats->messages += out.message_count;
            ++stats->seb_instances;
        }
        for (std::size_t r = 0; r < num_correct; ++r) {
            if (r == sender) continue;
            if (out.accepted[r]) {
                inbox[r].push_back({sender, *out.accepted[r], faulty_mask[sender]});
            } else if (stats) {
                ++stats->seb_stalls;
            }
        }
    };

    // Faulty echoers withhold signatures from correct senders and sign
    // anything a faulty sender shows.
    SebAdversary honest_sender_adv;
    SebAdversary faulty_sender_adv;
    for (std::size_t j = num_correct; j < n; ++j) {
        honest_sender_adv.echo[j] = EchoPolicy::Refuse;
        faulty_sender_adv.echo[j] = EchoPolicy::SignAll;
    }

    for (std::size_t s = 0; s < num_correct; ++s) {
        if (cfg.seb) {
            deliver_seb(s, correct_vectors[s], honest_sender_adv);
        } else {
            for (std::size_t r = 0; r < num_correct; ++r) {
                if (r != s) inbox[r].push_back({s, correct_vectors[s], false});
            }
            if (stats) stats->messages += n - 1;
        }
    }

    for (std::size_t j = 0; j < cfg.f; ++j) {
        const NodeId sender = num_correct + j;
        const bool equivocating = !traffic.per_receiver.empty();
        if (!equivocating && !traffic.broadcast[j]) continue;  // silent
        if (cfg.seb) {
            SebAdversary adv = faulty_sender_adv;
            for (std::size_t r = 0; r < num_correct; ++r) {
                const auto& v = equivocating ? traffic.per_receiver[j][r] : traffic.broadcast[j];
                if (v) adv.sends[r] = {*v};
            }
            if (adv.sends.empty()) continue;
            deliver_seb(sender, adv.sends.begin()->second.front(), adv);
        } else {
            for (std::size_t r = 0; r < num_correct; ++r) {
                const auto& v = equivocating ? traffic.per_receiver[j][r] : traffic.broadcast[j];
                if (v) {
                    inbox[r].push_back({sender, *v, true});
                    if (stats) ++stats->messages;
                }
            }
        }
    }
    return inbox;
}

void check_traffic_shape(const CoordinationConfig& cfg, const FaultyTraffic& traffic) {
    if (traffic.per_receiver.empty()) {
        if (traffic.broadcast.size() != cfg.f) {
            throw DimensionError("faulty traffic: expected " + std::to_string(cfg.f) +
                                 " broadcast slots, got " + std::to_string(traffic.broadcast.size()));
        }
        return;
    }
    if (traffic.per_receiver.size() != cfg.f) {
        throw DimensionError("faulty traffic: per-receiver table must have f rows");
    }
    for (const auto& row : traffic.per_receiver) {
        if (row.size() != cfg.n - cfg.f) {
            throw DimensionError("faulty traffic: per-receiver row must have n - f entries");
        }
    }
}

}  // namespace

void run_coordination_phase(const CoordinationConfig& cfg, std::vector<CorrectNodeState>& states,
                            const FaultyPolicy& faulty, std::span<Rng> delivery_rngs,
                            CoordinationStats* stats) {
    if (cfg.n <= cfg.f) throw ConfigError("system.f", "need n > f");
    const std::size_t num_correct = cfg.n - cfg.f;
    if (states.size() != num_correct || delivery_rngs.size() != num_correct) {
        throw DimensionError("coordination: expected " + std::to_string(num_correct) +
                             " correct nodes and delivery streams");
    }
    if (cfg.seb && cfg.signatures == nullptr) {
        throw ConfigError("network.signatures", "SEB enabled without a signature scheme");
    }

    std::vector<ParamVector> current(num_correct);
    for (std::size_t k = 1; k <= cfg.rounds; ++k) {
        for (std::size_t r = 0; r < num_correct; ++r) current[r] = states[r].x_current;
        const FaultyTraffic traffic = faulty ? faulty(k, current) : silent_traffic(cfg.f);
        check_traffic_shape(cfg, traffic);
        const auto inbox = exchange(cfg, k, current, traffic, stats);
        for (std::size_t r = 0; r < num_correct; ++r) {
            const auto received =
                collect_round(r, inbox[r], cfg.n, cfg.f, cfg.policy, delivery_rngs[r]);
            try {
                states[r] = coordination_round(std::move(states[r]), received, cfg.n, cfg.rule);
            } catch (const ConvergenceError& e) {
                states[r].x_current = e.last_iterate();
                if (stats) ++stats->gm_fallbacks;
            }
        }
    }
}

std::vector<ParamVector> run_coordination_phase(const CoordinationConfig& cfg,
                                                std::span<const ParamVector> inputs,
                                                const FaultyPolicy& faulty,
                                                std::span<Rng> delivery_rngs,
                                                CoordinationStats* stats) {
    std::vector<CorrectNodeState> states;
    states.reserve(inputs.size());
    for (std::size_t r = 0; r < inputs.size(); ++r) {
        CorrectNodeState s;
        s.id = r;
        s.theta = inputs[r];
        s.x_current = inputs[r];
        states.push_back(std::move(s));
    }
    run_coordination_phase(cfg, states, faulty, delivery_rngs, stats);
    std::vector<ParamVector> outputs;
    outputs.reserve(states.size());
    for (auto& s : states) outputs.push_back(std::move(s.x_current));
    return outputs;
}

}  // namespace monna
