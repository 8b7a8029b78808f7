#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "monna/coordination.hpp"
#include "monna/param_vector.hpp"
#include "monna/rng.hpp"

namespace monna {

enum class Regime { ElevenF, FiveF };

std::string_view to_string(Regime regime) noexcept;
Regime parse_regime(std::string_view text);

/// Γ(v) = (1/N) Σ‖vᵢ - v̄‖². Zero for N <= 1.
double drift(std::span<const ParamVector> vectors);

/// Same quantity through (1/2N²) Σᵢ Σⱼ ‖vᵢ - vⱼ‖².
double drift_pairwise(std::span<const ParamVector> vectors);

/// Mixing guarantee Γ(y) <= α Γ(z) and ‖ȳ - z̄‖² <= λ Γ(z).
struct ReductionBound {
    double alpha = 0.0;
    double lambda = 0.0;
};

/// n >= 11f, K rounds: α = (9.88f/(n-f))^K, λ = 9f/(n-f)·min{K, 1/(1-√α)²}.
/// Throws RegimeError when n < 11f, ConfigError when K = 0.
ReductionBound bound_eleven_f(std::size_t n, std::size_t f, std::size_t rounds);

struct FiveFBound {
    ReductionBound bound;
    std::size_t rounds = 0;  // ⌈log(8(n-f)) / (2 log((3+δ)/3))⌉ + 1
    double stated_rounds = 0.0;  // log(8(n-f)) / (2 log((3+δ)/δ)), as usually quoted
};

/// n >= (5+δ)f: α = 2f/(n-f), λ = ((3+δ)/δ)²(8f)²/(n-f).
/// Throws RegimeError when δ <= 0 or n < (5+δ)f.
FiveFBound bound_five_f(std::size_t n, std::size_t f, double delta);

/// Largest δ with n >= (5+δ)f, i.e. n/f - 5 (infinite for f = 0).
double max_five_f_delta(std::size_t n, std::size_t f);

/// Picks the eleven-f regime when n >= 11f and five-f otherwise.
Regime select_regime(std::size_t n, std::size_t f);

/// Empirical mixing of one or more coordination phases.
struct MixingReport {
    double gamma_in = 0.0;    // Γ(z) of the worst trial
    double gamma_out = 0.0;   // Γ(y) of the worst trial
    double alpha_hat = 0.0;   // max over trials of Γ(y)/Γ(z)
    double lambda_hat = 0.0;  // max over trials of ‖ȳ - z̄‖²/Γ(z)
    std::size_t rounds = 0;
    Regime regime = Regime::ElevenF;
    bool violation = false;   // Γ(z) = 0 yet Γ(y) > 0 or ȳ != z̄ in some trial
    std::size_t trials = 0;
};

/// Ratios for one (z, y) pair. 0/0 counts as 0.
MixingReport measure_mixing(std::span<const ParamVector> inputs,
                            std::span<const ParamVector> outputs);

/// Worst-case merge (element-wise max). Associative and commutative.
MixingReport merge(const MixingReport& a, const MixingReport& b);

enum class AuditStrategy {
    CloneCorrect,  // faulty nodes repeat a correct node's current vector
    LargeOutlier,  // far away from the correct cluster
    MidHull,       // just inside the spread of the correct vectors
    Equivocate,    // a different vector per receiver, pulling each away from the rest
};

std::string_view to_string(AuditStrategy strategy) noexcept;

/// Faulty traffic for a strategy, driven by its own copy of `rng`.
FaultyPolicy make_audit_adversary(AuditStrategy strategy, std::size_t f, const Rng& rng);

/// Builds a fresh adversary for a trial from the trial's stream.
using AdversaryFactory = std::function<FaultyPolicy(Rng& rng)>;

/// Draws the correct inputs for one trial.
using InputGenerator = std::function<std::vector<ParamVector>(Rng& rng)>;

/// Runs a coordination phase for a trial; `seed` feeds its delivery streams.
using CoordinationFn = std::function<std::vector<ParamVector>(
    std::span<const ParamVector> inputs, const FaultyPolicy& faulty, std::uint64_t seed)>;

/**
 * Worst case over `trials` independent trials. Trial t uses
 * derive_seed(seed, Audit, t) for inputs, adversary and delivery, so the
 * result is deterministic for a given seed.
 */
MixingReport audit(const CoordinationFn& phase, const InputGenerator& inputs,
                   const AdversaryFactory& adversary, std::size_t trials, std::uint64_t seed);

/// Correct inputs of varied shape (isotropic, two clusters, one straggler)
/// for n - f nodes in `dim` dimensions.
InputGenerator default_audit_inputs(std::size_t num_correct, std::size_t dim);

struct AuditConfig {
    std::size_t n = 0;
    std::size_t f = 0;
    std::size_t dim = 5;
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    Regime regime = Regime::ElevenF;
    std::size_t rounds = 1;  // K used in the eleven-f regime
    double delta = 0.0;      // δ used in the five-f regime; 0 picks the largest admissible
    bool seb = true;
    std::string signatures = "keyed";
    DeliveryPolicy policy = DeliveryPolicy::FaultyFirst;
};

struct AuditResult {
    MixingReport overall;
    std::vector<std::pair<AuditStrategy, MixingReport>> per_strategy;
    ReductionBound bound;
    std::size_t rounds = 0;
    double delta = 0.0;  // five-f only
};

/**
 * NNA reduction audit: runs `trials` trials of K rounds for each applicable
 * strategy (Equivocate only without SEB) and compares against the regime's
 * bound. Throws RegimeError when (n, f) does not satisfy the regime.
 */
AuditResult audit_nna(const AuditConfig& config);

}  // namespace monna
