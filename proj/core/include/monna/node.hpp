#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "monna/aggregation.hpp"
#include "monna/objectives.hpp"
#include "monna/param_vector.hpp"
#include "monna/rng.hpp"

namespace monna {

/// Step size, momentum coefficient, coordination rounds per iteration and
/// iteration count.
struct Schedule {
    double gamma = 0.0;
    double beta = 0.0;
    std::size_t rounds = 1;
    std::size_t iterations = 0;
};

/// Throws ConfigError unless gamma >= 0, 0 <= beta < 1 and rounds >= 1.
void validate(const Schedule& schedule);

struct CorrectNodeState {
    NodeId id = 0;
    ParamVector theta;      // model at the start of the current iteration
    ParamVector momentum;   // zero before the first local phase
    ParamVector x_current;  // coordination vector of the current round

    static CorrectNodeState initial(NodeId id, const ParamVector& theta0);
};

/// m ← βm + (1-β)g, then x ← θ - γm.
CorrectNodeState local_phase(CorrectNodeState state, const ParamVector& grad,
                             const Schedule& schedule);

/// One mixing step. `received` must hold exactly n - f - 1 vectors from other
/// nodes; x is replaced by the rule's aggregate of x and `received`.
CorrectNodeState coordination_round(CorrectNodeState state, std::span<const PeerVector> received,
                                    std::size_t n, const AggregationRule& rule);

/// NNA shorthand for coordination_round.
CorrectNodeState coordination_round(CorrectNodeState state, std::span<const PeerVector> received,
                                    std::size_t n, std::size_t f);

/// θ ← x after the K rounds of an iteration.
CorrectNodeState finalize_iteration(CorrectNodeState state);

/// Constants and step size prescribed by the convergence theorem.
struct TheoreticalSchedule {
    Schedule schedule;
    double alpha = 0.0;
    double lambda = 0.0;
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;
};

/// Drift constant 18α(1+α)/(1-α)².
double drift_constant(double alpha);

/**
 * Schedule for n >= 11f with K = 1:
 *   α = 9.88f/(n-f), λ = 9f/(n-f), c₀ = 12·q0_gap, c₁ = 18α(1+α)/(1-α)²,
 *   c₂ = 72L(3/(n-f) + 2c₁ + (9λ/2)(2c₁+3)), c₃ = 6(6c₁ + (9λ/2)(4c₁+9)),
 *   c₄ = 9n·c₀c₁/c₂,
 *   γ = min{1/(12L), (1/L)√(2/(3c₁)), √(c₀/(c₂LTσ²))}, β = √(1-12γL).
 * Terms with a zero denominator (c₁ = 0 or σ = 0) are +∞ and drop out.
 * q0_gap is Q(θ̄₀) - Q*. Throws RegimeError when n < 11f and ConfigError on
 * non-positive L, T or q0_gap.
 */
TheoreticalSchedule theoretical_schedule(double smoothness, std::size_t iterations, double sigma,
                                         std::size_t n, std::size_t f, double q0_gap);

/**
 * n >= (5+δ)f counterpart: α = 2f/(n-f), λ = ((3+δ)/δ)²(8f)²/(n-f), K from
 * bound_five_f, c₂ uses 3c₁ and c₃ uses the factor 7; γ and β as above.
 */
TheoreticalSchedule theoretical_schedule_five_f(double smoothness, std::size_t iterations,
                                                double sigma, std::size_t n, std::size_t f,
                                                double q0_gap, double delta);

/// Uniformly sampled past iterate (the algorithm's output rule).
ParamVector output_model(std::span<const ParamVector> history, Rng& rng);
std::size_t output_index(std::size_t history_size, Rng& rng);

/// Diagnostic alternative, not the algorithm's output rule: the iterate with
/// the smallest global gradient norm.
std::size_t argmin_gradient_index(std::span<const ParamVector> history,
                                  std::span<const LocalObjective> objectives);

}  // namespace monna
