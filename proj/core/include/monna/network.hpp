#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "monna/aggregation.hpp"
#include "monna/param_vector.hpp"
#include "monna/rng.hpp"

namespace monna {

/// Identifier (sender, iteration, round) carried by every broadcast.
struct MessageId {
    NodeId sender = 0;
    std::uint64_t iteration = 0;
    std::uint32_t round = 0;

    auto operator<=>(const MessageId&) const = default;
};

using Signature = std::uint64_t;

struct Message {
    MessageId id;
    ParamVector payload;
    Signature signature = 0;  // by id.sender
};

// ---------------------------------------------------------------------------
// Signatures

class SignatureScheme {
public:
    virtual ~SignatureScheme() = default;
    virtual Signature sign(NodeId signer, const MessageId& id, const ParamVector& payload) const = 0;
    virtual bool verify(NodeId signer, const MessageId& id, const ParamVector& payload,
                        Signature signature) const = 0;
    virtual std::string_view name() const noexcept = 0;
};

/// Keyed 64-bit tags (SipHash-2-4 over identifier and payload bytes) with one
/// secret key per node derived from a seed. The simulated adversary only ever
/// signs with faulty nodes' keys, so it cannot produce a correct node's tag.
class KeyedTagScheme final : public SignatureScheme {
public:
    KeyedTagScheme(std::size_t num_nodes, std::uint64_t seed);
    Signature sign(NodeId signer, const MessageId& id, const ParamVector& payload) const override;
    bool verify(NodeId signer, const MessageId& id, const ParamVector& payload,
                Signature signature) const override;
    std::string_view name() const noexcept override { return "keyed"; }

private:
    std::vector<std::array<unsigned char, 16>> keys_;
};

/// Accepts everything; only for runs where no sender equivocates.
class NullSignatureScheme final : public SignatureScheme {
public:
    Signature sign(NodeId, const MessageId&, const ParamVector&) const override { return 0; }
    bool verify(NodeId, const MessageId&, const ParamVector&, Signature) const override {
        return true;
    }
    std::string_view name() const noexcept override { return "null"; }
};

std::unique_ptr<SignatureScheme> make_signature_scheme(std::string_view name,
                                                       std::size_t num_nodes, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Signed echo broadcast

enum class SebPhase { Send, Echo, Final, Accept };

/// Echo signatures a sender must collect from other nodes before FINAL:
/// floor((n + f) / 2). Two certificates for one identifier then always share
/// a correct signer, and a correct sender reaches it from correct echoers
/// alone whenever n > 3f.
std::size_t seb_threshold(std::size_t n, std::size_t f);

/// ceil((n + f) / 2) - 1, the threshold as usually quoted. It equals
/// seb_threshold when n + f is odd and is one short when n + f is even,
/// which admits equivocation (e.g. n = 5, f = 1).
std::size_t stated_seb_threshold(std::size_t n, std::size_t f);

/// Sender-side progress of one broadcast instance.
struct SebState {
    SebPhase phase = SebPhase::Send;
    std::map<NodeId, Signature> collected_signatures;  // keyed by signer
    std::size_t threshold = 0;
};

enum class EchoPolicy {
    Follow,   // protocol: sign the first validly signed SEND for the identifier
    Refuse,   // never sign
    SignAll,  // faulty: sign every payload the sender shows
};

/// Behavior of the faulty participants in one instance. For a correct
/// sender only `echo` matters.
struct SebAdversary {
    /// Faulty sender only: SEND messages per receiver, in delivery order.
    /// Missing or empty entries mean that receiver gets no SEND.
    std::map<NodeId, std::vector<ParamVector>> sends;
    /// Faulty echoers' policy; nodes not listed follow the protocol.
    std::map<NodeId, EchoPolicy> echo;
    /// Faulty sender only: receivers that get FINAL for each certified payload
    /// (index into the distinct payloads in order of first appearance). An
    /// absent entry means every receiver.
    std::map<std::size_t, std::vector<NodeId>> final_targets;
    /// Faulty sender only: also push FINALs carrying fabricated signatures.
    bool forge_final = false;
};

struct SebOutcome {
    std::vector<std::optional<ParamVector>> accepted;  // per node; sender's own slot empty
    std::size_t message_count = 0;
    std::vector<SebState> sender_states;  // one per distinct payload shown by the sender
};

/**
 * Runs one SEB instance over nodes 0..n-1 (SEND, ECHO, FINAL, ACCEPT).
 * `faulty` flags faulty nodes. A correct sender broadcasts `payload`; a faulty
 * sender follows `adversary.sends`. Signatures are produced and checked
 * through `scheme`; a faulty node can only sign with its own key. Requires
 * n > 3f for its guarantees; a sender short of the threshold stalls and no
 * one accepts.
 */
SebOutcome seb_broadcast(NodeId sender, const MessageId& id, const ParamVector& payload,
                         std::size_t n, std::size_t f, std::span<const bool> faulty,
                         const SignatureScheme& scheme, const SebAdversary& adversary = {},
                         std::size_t threshold = 0);  // 0: seb_threshold(n, f)

using ThresholdFn = std::size_t (*)(std::size_t n, std::size_t f);

struct SebSuiteReport {
    std::size_t executions = 0;
    std::size_t consistency_violations = 0;  // two correct nodes accepted different payloads
    std::size_t validity_failures = 0;       // a correct sender not accepted by some correct node
    double max_messages_per_peer = 0.0;      // correct senders: messages / (n - 1)
    std::vector<std::string> examples;       // first few failing executions, human readable
};

/**
 * Exhaustive SEB check for every 3f < n <= max_n, f <= max_f. Correct
 * senders face every combination of faulty echo policies. Faulty senders
 * show each correct node nothing, v1, v2, v1 then v2, or v2 then v1, with
 * every policy for the other faulty nodes, three FINAL routings and with or
 * without forged certificates.
 */
SebSuiteReport seb_property_suite(std::size_t max_n, std::size_t max_f,
                                  ThresholdFn threshold = &seb_threshold);

// ---------------------------------------------------------------------------
// Delivery

enum class DeliveryPolicy { FaultyFirst, Fifo, SeededShuffle };

std::string_view to_string(DeliveryPolicy policy) noexcept;
DeliveryPolicy parse_delivery_policy(std::string_view text);

struct InboxEntry {
    NodeId sender = 0;
    ParamVector payload;
    bool from_faulty = false;
};

/**
 * First n - f - 1 deliveries at `receiver` (its own message never counts).
 * FaultyFirst: every faulty message in inbox order, then a uniform sample of
 * the correct ones. Fifo: inbox order. SeededShuffle: uniform random order.
 * Throws InsufficientInputError when fewer than n - f - 1 messages exist.
 */
std::vector<PeerVector> collect_round(NodeId receiver, std::span<const InboxEntry> inbox,
                                      std::size_t n, std::size_t f, DeliveryPolicy policy,
                                      Rng& rng);

}  // namespace monna
