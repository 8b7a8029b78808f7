#include "monna/network.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstring>
#include <deque>
#include <numeric>
#include <set>
#include <string>

#include "monna/errors.hpp"

namespace monna {

namespace {

std::vector<unsigned char> encode(const MessageId& id, const ParamVector& payload) {
    std::vector<unsigned char> bytes(sizeof(std::uint64_t) * 2 + sizeof(std::uint32_t) +
                                     payload.dim() * sizeof(double));
    unsigned char* out = bytes.data();
    const std::uint64_t sender = id.sender;
    std::memcpy(out, &sender, sizeof sender);
    out += sizeof sender;
    std::memcpy(out, &id.iteration, sizeof id.iteration);
    out += sizeof id.iteration;
    std::memcpy(out, &id.round, sizeof id.round);
    out += sizeof id.round;
    if (!payload.empty()) std::memcpy(out, payload.raw().data(), payload.dim() * sizeof(double));
    return bytes;
}

struct SendEvent {
    NodeId to;
    std::size_t payload_index;
    Signature sender_signature;
};

struct EchoEvent {
    NodeId from;
    std::size_t payload_index;
    Signature signature;
};

struct FinalEvent {
    NodeId to;
    std::size_t payload_index;
    std::map<NodeId, Signature> certificate;
};

}  // namespace

KeyedTagScheme::KeyedTagScheme(std::size_t num_nodes, std::uint64_t seed) : keys_(num_nodes) {
    if (sodium_init() < 0) throw Error("libsodium initialisation failed");
    static_assert(crypto_shorthash_KEYBYTES == 16);
    static_assert(crypto_shorthash_BYTES == sizeof(Signature));
    for (std::size_t i = 0; i < num_nodes; ++i) {
        const std::uint64_t lo = derive_seed(seed, StreamKind::SigningKeys, 2 * i);
        const std::uint64_t hi = derive_seed(seed, StreamKind::SigningKeys, 2 * i + 1);
        std::memcpy(keys_[i].data(), &lo, 8);
        std::memcpy(keys_[i].data() + 8, &hi, 8);
    }
}

Signature KeyedTagScheme::sign(NodeId signer, const MessageId& id,
                               const ParamVector& payload) const {
    if (signer >= keys_.size()) throw Error("sign: unknown signer " + std::to_string(signer));
    const auto bytes = encode(id, payload);
    Signature tag = 0;
    crypto_shorthash(reinterpret_cast<unsigned char*>(&tag), bytes.data(), bytes.size(),
                     keys_[signer].data());
    return tag;
}

bool KeyedTagScheme::verify(NodeId signer, const MessageId& id, const ParamVector& payload,
                            Signature signature) const {
    return signer < keys_.size() && sign(signer, id, payload) == signature;
}

std::unique_ptr<SignatureScheme> make_signature_scheme(std::string_view name,
                                                       std::size_t num_nodes, std::uint64_t seed) {
    if (name == "keyed") return std::make_unique<KeyedTagScheme>(num_nodes, seed);
    if (name == "null") return std::make_unique<NullSignatureScheme>();
    throw ConfigError("network.signatures",
                      "unknown signature scheme '" + std::string(name) + "' (keyed or null)");
}

std::size_t seb_threshold(std::size_t n, std::size_t f) { return (n + f) / 2; }

std::size_t stated_seb_threshold(std::size_t n, std::size_t f) {
    const std::size_t half_up = (n + f + 1) / 2;
    return half_up == 0 ? 0 : half_up - 1;
}

SebOutcome seb_broadcast(NodeId sender, const MessageId& id, const ParamVector& payload,
                         std::size_t n, std::size_t f, std::span<const bool> faulty,
                         const SignatureScheme& scheme, const SebAdversary& adversary,
                         std::size_t threshold_override) {
    if (sender >= n || faulty.size() != n) {
        throw DimensionError("seb_broadcast: sender or fault mask does not match n = " +
                             std::to_string(n));
    }
    const bool sender_faulty = faulty[sender];
    const std::size_t threshold =
        threshold_override > 0 ? threshold_override : seb_threshold(n, f);
    const MessageId msg_id{sender, id.iteration, id.round};

    SebOutcome outcome;
    outcome.accepted.resize(n);

    // Distinct payloads the sender shows, in order of first appearance.
    std::vector<ParamVector> payloads;
    auto payload_index = [&](const ParamVector& v) {
        for (std::size_t i = 0; i < payloads.size(); ++i) {
            if (payloads[i] == v) return i;
        }
        payloads.push_back(v);
        return payloads.size() - 1;
    };

    // SEND
    std::deque<SendEvent> sends;
    if (!sender_faulty) {
        const std::size_t idx = payload_index(payload);
        const Signature sig = scheme.sign(sender, msg_id, payload);
        for (NodeId j = 0; j < n; ++j) {
            if (j != sender) sends.push_back({j, idx, sig});
        }
    } else {
        for (const auto& [to, list] : adversary.sends) {
            if (to >= n || to == sender) continue;
            for (const auto& v : list) {
                const std::size_t idx = payload_index(v);
                sends.push_back({to, idx, scheme.sign(sender, msg_id, v)});
            }
        }
    }
    outcome.message_count += sends.size();
    outcome.sender_states.resize(payloads.size());
    for (auto& state : outcome.sender_states) state.threshold = threshold;

    // ECHO
    std::deque<EchoEvent> echoes;
    std::vector<bool> echoed(n, false);
    for (const auto& ev : sends) {
        const ParamVector& shown = payloads[ev.payload_index];
        if (!scheme.verify(sender, msg_id, shown, ev.sender_signature)) continue;
        EchoPolicy policy = EchoPolicy::Follow;
        if (faulty[ev.to]) {
            const auto it = adversary.echo.find(ev.to);
            if (it != adversary.echo.end()) policy = it->second;
        }
        if (policy == EchoPolicy::Refuse) continue;
        if (policy == EchoPolicy::Follow) {
            if (echoed[ev.to]) continue;
            echoed[ev.to] = true;
        }
        echoes.push_back({ev.to, ev.payload_index, scheme.sign(ev.to, msg_id, shown)});
    }
    // Faulty echoers that sign everything also sign payloads they were never sent.
    if (sender_faulty) {
        for (const auto& [node, policy] : adversary.echo) {
            if (policy != EchoPolicy::SignAll || node >= n || node == sender || !faulty[node]) {
                continue;
            }
            for (std::size_t p = 0; p < payloads.size(); ++p) {
                const bool already = std::any_of(echoes.begin(), echoes.end(), [&](const EchoEvent& e) {
                    return e.from == node && e.payload_index == p;
                });
                if (!already) echoes.push_back({node, p, scheme.sign(node, msg_id, payloads[p])});
            }
        }
    }
    outcome.message_count += echoes.size();

    // FINAL
    std::deque<FinalEvent> finals;
    for (const auto& ev : echoes) {
        auto& state = outcome.sender_states[ev.payload_index];
        if (state.phase == SebPhase::Final) continue;
        if (!scheme.verify(ev.from, msg_id, payloads[ev.payload_index], ev.signature)) continue;
        state.phase = SebPhase::Echo;
        state.collected_signatures[ev.from] = ev.signature;
        if (state.collected_signatures.size() >= threshold && !sender_faulty) {
            state.phase = SebPhase::Final;
            for (NodeId j = 0; j < n; ++j) {
                if (j != sender) finals.push_back({j, ev.payload_index, state.collected_signatures});
            }
        }
    }
    if (sender_faulty) {
        for (std::size_t p = 0; p < payloads.size(); ++p) {
            auto& state = outcome.sender_states[p];
            std::map<NodeId, Signature> certificate = state.collected_signatures;
            if (certificate.size() < threshold) {
                if (!adversary.forge_final) continue;
                // Fill with made-up tags attributed to other nodes.
                for (NodeId j = 0; j < n && certificate.size() < threshold; ++j) {
                    if (j != sender && !certificate.count(j)) {
                        certificate[j] = mix64(0xF0F0ULL + j + 131 * p);
                    }
                }
            } else {
                state.phase = SebPhase::Final;
            }
            const auto targets = adversary.final_targets.find(p);
            if (targets != adversary.final_targets.end()) {
                for (NodeId j : targets->second) {
                    if (j < n && j != sender) finals.push_back({j, p, certificate});
                }
            } else {
                for (NodeId j = 0; j < n; ++j) {
                    if (j != sender) finals.push_back({j, p, certificate});
                }
            }
        }
    }
    outcome.message_count += finals.size();

    // ACCEPT
    for (const auto& ev : finals) {
        if (outcome.accepted[ev.to]) continue;
        const ParamVector& shown = payloads[ev.payload_index];
        std::size_t valid = 0;
        for (const auto& [signer, sig] : ev.certificate) {
            if (signer != sender && signer < n && scheme.verify(signer, msg_id, shown, sig)) ++valid;
        }
        if (valid >= threshold) {
            outcome.accepted[ev.to] = shown;
            if (!sender_faulty) outcome.sender_states[ev.payload_index].phase = SebPhase::Accept;
        }
    }
    return outcome;
}

namespace {

std::string describe(std::size_t n, std::size_t f, const std::string& what) {
    return "n=" + std::to_string(n) + " f=" + std::to_string(f) + ": " + what;
}

void record(SebSuiteReport& report, std::string text) {
    if (report.examples.size() < 8) report.examples.push_back(std::move(text));
}

}  // namespace

SebSuiteReport seb_property_suite(std::size_t max_n, std::size_t max_f, ThresholdFn threshold_fn) {
    SebSuiteReport report;
    const KeyedTagScheme scheme(max_n, 0x5EB);
    const ParamVector v1{1.0, -2.0};
    const ParamVector v2{3.0, 0.5};
    const ParamVector honest{0.25, 4.0};
    constexpr EchoPolicy policies[] = {EchoPolicy::Follow, EchoPolicy::Refuse, EchoPolicy::SignAll};

    for (std::size_t f = 0; f <= max_f; ++f) {
        for (std::size_t n = 3 * f + 1; n <= max_n; ++n) {
            const std::size_t nc = n - f;
            const std::size_t threshold = threshold_fn(n, f);
            const auto mask_storage = std::make_unique<bool[]>(n);
            for (std::size_t j = nc; j < n; ++j) mask_storage[j] = true;
            const std::span<const bool> faulty(mask_storage.get(), n);

            std::size_t policy_combos = 1;
            for (std::size_t j = 0; j < f; ++j) policy_combos *= 3;

            // Validity: every correct sender, every faulty echo behavior.
            for (NodeId sender = 0; sender < nc; ++sender) {
                for (std::size_t code = 0; code < policy_combos; ++code) {
                    SebAdversary adv;
                    std::size_t c = code;
                    for (std::size_t j = nc; j < n; ++j, c /= 3) adv.echo[j] = policies[c % 3];
                    const MessageId id{sender, 1, 1};
                    const SebOutcome out =
                        seb_broadcast(sender, id, honest, n, f, faulty, scheme, adv, threshold);
                    ++report.executions;
                    report.max_messages_per_peer =
                        std::max(report.max_messages_per_peer,
                                 static_cast<double>(out.message_count) / static_cast<double>(n - 1));
                    for (NodeId r = 0; r < nc; ++r) {
                        if (r != sender && (!out.accepted[r] || *out.accepted[r] != honest)) {
                            ++report.validity_failures;
                            record(report, describe(n, f, "correct sender " + std::to_string(sender) +
                                                              " not accepted by node " +
                                                              std::to_string(r)));
                            break;
                        }
                    }
                }
            }
            if (f == 0) continue;

            // Consistency: faulty sender n - f, others faulty with any policy.
            const NodeId sender = nc;
            std::size_t send_combos = 1;
            for (std::size_t r = 0; r < nc; ++r) send_combos *= 5;
            const std::size_t other_combos = policy_combos / 3;
            for (std::size_t sends = 0; sends < send_combos; ++sends) {
                for (std::size_t code = 0; code < other_combos; ++code) {
                    for (int routing = 0; routing < 3; ++routing) {
                        for (bool forge : {false, true}) {
                            SebAdversary adv;
                            std::size_t s = sends;
                            for (NodeId r = 0; r < nc; ++r, s /= 5) {
                                switch (s % 5) {
                                    case 0: break;
                                    case 1: adv.sends[r] = {v1}; break;
                                    case 2: adv.sends[r] = {v2}; break;
                                    case 3: adv.sends[r] = {v1, v2}; break;
                                    default: adv.sends[r] = {v2, v1}; break;
                                }
                            }
                            std::size_t c = code;
                            for (NodeId j = nc + 1; j < n; ++j, c /= 3) adv.echo[j] = policies[c % 3];
                            if (routing > 0) {
                                std::vector<NodeId> first;
                                std::vector<NodeId> second;
                                for (NodeId r = 0; r < nc; ++r) {
                                    const bool left = routing == 1 ? r % 2 == 0 : r < nc / 2;
                                    (left ? first : second).push_back(r);
                                }
                                adv.final_targets[0] = first;
                                adv.final_targets[1] = second;
                            }
                            adv.forge_final = forge;
                            const MessageId id{sender, 1, 1};
                            const SebOutcome out =
                                seb_broadcast(sender, id, v1, n, f, faulty, scheme, adv, threshold);
                            ++report.executions;
                            const ParamVector* seen = nullptr;
                            for (NodeId r = 0; r < nc; ++r) {
                                if (!out.accepted[r]) continue;
                                if (seen && *seen != *out.accepted[r]) {
                                    ++report.consistency_violations;
                                    record(report, describe(n, f, "faulty sender certified two payloads"));
                                    break;
                                }
                                seen = &*out.accepted[r];
                            }
                        }
                    }
                }
            }
        }
    }
    return report;
}

std::string_view to_string(DeliveryPolicy policy) noexcept {
    switch (policy) {
        case DeliveryPolicy::FaultyFirst: return "faulty_first";
        case DeliveryPolicy::Fifo: return "fifo";
        case DeliveryPolicy::SeededShuffle: return "seeded_shuffle";
    }
    return "unknown";
}

DeliveryPolicy parse_delivery_policy(std::string_view text) {
    for (auto p : {DeliveryPolicy::FaultyFirst, DeliveryPolicy::Fifo, DeliveryPolicy::SeededShuffle}) {
        if (text == to_string(p)) return p;
    }
    throw ConfigError("network.schedule", "unknown delivery policy '" + std::string(text) +
                                              "' (faulty_first, fifo or seeded_shuffle)");
}

std::vector<PeerVector> collect_round(NodeId receiver, std::span<const InboxEntry> inbox,
                                      std::size_t n, std::size_t f, DeliveryPolicy policy,
                                      Rng& rng) {
    if (n < f + 1) throw ConfigError("network", "need n > f");
    const std::size_t wanted = n - f - 1;

    std::vector<std::size_t> faulty_idx;
    std::vector<std::size_t> correct_idx;
    for (std::size_t i = 0; i < inbox.size(); ++i) {
        if (inbox[i].sender == receiver) continue;
        (inbox[i].from_faulty ? faulty_idx : correct_idx).push_back(i);
    }
    if (faulty_idx.size() + correct_idx.size() < wanted) {
        throw InsufficientInputError(
            "collect_round: node " + std::to_string(receiver) + " can receive only " +
            std::to_string(faulty_idx.size() + correct_idx.size()) + " of the " +
            std::to_string(wanted) + " messages it waits for");
    }

    std::vector<std::size_t> chosen;
    chosen.reserve(wanted);
    switch (policy) {
        case DeliveryPolicy::FaultyFirst: {
            for (std::size_t i : faulty_idx) {
                if (chosen.size() == wanted) break;
                chosen.push_back(i);
            }
            // Partial Fisher-Yates over the correct senders.
            for (std::size_t k = 0; chosen.size() < wanted; ++k) {
                std::uniform_int_distribution<std::size_t> pick(k, correct_idx.size() - 1);
                std::swap(correct_idx[k], correct_idx[pick(rng)]);
                chosen.push_back(correct_idx[k]);
            }
            break;
        }
        case DeliveryPolicy::Fifo: {
            for (std::size_t i = 0; i < inbox.size() && chosen.size() < wanted; ++i) {
                if (inbox[i].sender != receiver) chosen.push_back(i);
            }
            break;
        }
        case DeliveryPolicy::SeededShuffle: {
            std::vector<std::size_t> all;
            all.reserve(inbox.size());
            for (std::size_t i = 0; i < inbox.size(); ++i) {
                if (inbox[i].sender != receiver) all.push_back(i);
            }
            std::shuffle(all.begin(), all.end(), rng);
            chosen.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(wanted));
            break;
        }
    }

    std::vector<PeerVector> delivered;
    delivered.reserve(chosen.size());
    for (std::size_t i : chosen) delivered.push_back({inbox[i].sender, inbox[i].payload});
    return delivered;
}

}  // namespace monna
