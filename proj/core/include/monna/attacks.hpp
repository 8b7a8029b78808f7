#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "monna/aggregation.hpp"
#include "monna/coordination.hpp"
#include "monna/node.hpp"
#include "monna/objectives.hpp"

namespace monna {

enum class AttackKind {
    None,    // faulty nodes stay silent
    FOE,     // fall of empires
    ALIE,    // a little is enough
    SF,      // sign flipping
    LF,      // label flipping
    Custom,
};

std::string_view to_string(AttackKind kind) noexcept;
AttackKind parse_attack_kind(std::string_view text);

/// Read-only snapshot an attack is computed from.
struct AttackView {
    std::span<const ParamVector> correct_vectors;  // what correct nodes broadcast this round
    std::size_t iteration = 0;
    std::size_t round = 0;
};

using CustomAttack = std::function<std::optional<ParamVector>(const AttackView& view)>;

struct AttackSpec {
    AttackKind kind = AttackKind::None;
    std::vector<double> zeta_grid;  // FOE / ALIE candidates; empty means default_zeta_grid()
    CustomAttack custom;            // Custom only

    bool operator==(const AttackSpec& other) const {
        return kind == other.kind && zeta_grid == other.zeta_grid;
    }
};

/// {0.5, 1, 1.5, ..., 5}; contains the sign-flip value 2.
std::vector<double> default_zeta_grid();

/// Per-coordinate population standard deviation across the vectors.
ParamVector coordinate_std(std::span<const ParamVector> vectors);

ParamVector sign_flip_vector(const ParamVector& anchor);                   // -θ̄
ParamVector foe_vector(const ParamVector& anchor, double zeta);            // (1-ζ)θ̄
ParamVector alie_vector(const ParamVector& anchor, const ParamVector& std_dev,
                        double zeta);                                       // θ̄ - ζσ

/// Output of the probe node for a candidate faulty vector.
using ProbeFn = std::function<ParamVector(const ParamVector& candidate)>;

/**
 * Probe used by the grid search: correct node 0 aggregating its own vector,
 * f copies of the candidate and the next n - 2f - 1 correct vectors under
 * `rule` (the delivery the FaultyFirst scheduler produces).
 */
ProbeFn make_probe(const AggregationRule& rule, std::size_t n,
                   std::span<const ParamVector> correct_vectors);

/// argmax over `candidates` of ‖probe(make(ζ)) - anchor‖; ties go to the
/// largest ζ. Throws ConfigError on an empty candidate list.
double grid_search_zeta(std::span<const double> candidates,
                        const std::function<ParamVector(double)>& make_candidate,
                        const ProbeFn& probe, const ParamVector& anchor);

/**
 * Attack vector for one round, anchored at the mean of the correct vectors.
 * LF needs the stateful Attacker; this throws UnsupportedAttackError for it.
 */
std::optional<ParamVector> attack_vector(const AttackSpec& spec, const AttackView& view,
                                         const ProbeFn& probe);

/**
 * Adversary driving all f faulty nodes through a run. Every faulty node sends
 * the same vector. LF keeps one shadow momentum per correct node on the
 * label-flipped objectives (exact gradients) and broadcasts the mean of the
 * resulting half-step models in every round of the iteration.
 */
class Attacker {
public:
    Attacker(AttackSpec spec, std::size_t n, std::size_t f, AggregationRule probe_rule,
             std::span<const LocalObjective> correct_objectives, Schedule schedule);

    /// Called after the local phase of iteration t with the correct states.
    void begin_iteration(std::size_t t, std::span<const CorrectNodeState> states);

    FaultyTraffic traffic(std::size_t round, std::span<const ParamVector> correct_vectors);

    /// ζ chosen in the latest FOE/ALIE round (NaN otherwise).
    double last_zeta() const noexcept { return last_zeta_; }

private:
    AttackSpec spec_;
    std::size_t n_;
    std::size_t f_;
    AggregationRule probe_rule_;
    Schedule schedule_;
    std::vector<LocalObjective> flipped_;
    std::vector<ParamVector> shadow_momentum_;
    ParamVector lf_vector_;
    std::size_t iteration_ = 0;
    double last_zeta_;
};

}  // namespace monna
