#include "monna/node.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "monna/errors.hpp"
#include "monna/reduction.hpp"

namespace monna {

void validate(const Schedule& s) {
    if (!(s.gamma >= 0.0) || !std::isfinite(s.gamma)) {
        throw ConfigError("schedule.gamma", "must be a finite value >= 0");
    }
    if (!(s.beta >= 0.0 && s.beta < 1.0)) throw ConfigError("schedule.beta", "must lie in [0, 1)");
    if (s.rounds == 0) throw ConfigError("schedule.K", "need at least one coordination round");
}

CorrectNodeState CorrectNodeState::initial(NodeId id, const ParamVector& theta0) {
    CorrectNodeState s;
    s.id = id;
    s.theta = theta0;
    s.momentum = ParamVector(theta0.dim());
    s.x_current = theta0;
    return s;
}

CorrectNodeState local_phase(CorrectNodeState state, const ParamVector& grad,
                             const Schedule& schedule) {
    require_dim(grad, state.theta.dim(), "local_phase gradient");
    if (state.momentum.dim() != state.theta.dim()) state.momentum = ParamVector(state.theta.dim());
    state.momentum *= schedule.beta;
    state.momentum.axpy(1.0 - schedule.beta, grad);
    state.x_current = state.theta;
    state.x_current.axpy(-schedule.gamma, state.momentum);
    return state;
}

CorrectNodeState coordination_round(CorrectNodeState state, std::span<const PeerVector> received,
                                    std::size_t n, const AggregationRule& rule) {
    if (n < rule.f + 1 || received.size() != n - rule.f - 1) {
        throw DimensionError("coordination_round: expected n - f - 1 = " +
                             std::to_string(n >= rule.f + 1 ? n - rule.f - 1 : 0) +
                             " received vectors, got " + std::to_string(received.size()));
    }
    state.x_current = aggregate(rule, state.x_current, received);
    return state;
}

CorrectNodeState coordination_round(CorrectNodeState state, std::span<const PeerVector> received,
                                    std::size_t n, std::size_t f) {
    return coordination_round(std::move(state), received, n, AggregationRule{RuleKind::NNA, f});
}

CorrectNodeState finalize_iteration(CorrectNodeState state) {
    state.theta = state.x_current;
    return state;
}

double drift_constant(double alpha) {
    const double gap = 1.0 - alpha;
    return 18.0 * alpha * (1.0 + alpha) / (gap * gap);
}

namespace {

void check_schedule_inputs(double smoothness, std::size_t iterations, double sigma,
                           std::size_t n, std::size_t f, double q0_gap) {
    if (!(smoothness > 0.0)) throw ConfigError("objective.L", "must be > 0");
    if (iterations == 0) throw ConfigError("system.T", "must be > 0");
    if (!(sigma >= 0.0)) throw ConfigError("objective.sigma", "must be >= 0");
    if (!(q0_gap > 0.0)) throw ConfigError("objective", "initial optimality gap must be > 0");
    if (n <= f) throw ConfigError("system.f", "need n > f");
}

TheoreticalSchedule finish(double L, std::size_t T, double sigma, std::size_t n, std::size_t f,
                           double q0_gap, double alpha, double lambda, double c2_drift_factor,
                           double c3_factor) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    TheoreticalSchedule out;
    out.alpha = alpha;
    out.lambda = lambda;
    out.c0 = 12.0 * q0_gap;
    out.c1 = drift_constant(alpha);
    const double c1 = out.c1;
    out.c2 = 72.0 * L *
             (3.0 / static_cast<double>(n - f) + c2_drift_factor * c1 +
              (9.0 * lambda / 2.0) * (2.0 * c1 + 3.0));
    out.c3 = c3_factor * (6.0 * c1 + (9.0 * lambda / 2.0) * (4.0 * c1 + 9.0));
    out.c4 = 9.0 * static_cast<double>(n) * out.c0 * c1 / out.c2;

    const double first = 1.0 / (12.0 * L);
    const double second = c1 > 0.0 ? (1.0 / L) * std::sqrt(2.0 / (3.0 * c1)) : inf;
    const double noise = out.c2 * L * static_cast<double>(T) * sigma * sigma;
    const double third = noise > 0.0 ? std::sqrt(out.c0 / noise) : inf;
    out.schedule.gamma = std::min({first, second, third});
    out.schedule.beta = std::sqrt(std::max(0.0, 1.0 - 12.0 * out.schedule.gamma * L));
    out.schedule.iterations = T;
    return out;
}

}  // namespace

TheoreticalSchedule theoretical_schedule(double smoothness, std::size_t iterations, double sigma,
                                         std::size_t n, std::size_t f, double q0_gap) {
    check_schedule_inputs(smoothness, iterations, sigma, n, f, q0_gap);
    const ReductionBound b = bound_eleven_f(n, f, 1);
    TheoreticalSchedule out =
        finish(smoothness, iterations, sigma, n, f, q0_gap, b.alpha, b.lambda, 2.0, 6.0);
    out.schedule.rounds = 1;
    return out;
}

TheoreticalSchedule theoretical_schedule_five_f(double smoothness, std::size_t iterations,
                                                double sigma, std::size_t n, std::size_t f,
                                                double q0_gap, double delta) {
    check_schedule_inputs(smoothness, iterations, sigma, n, f, q0_gap);
    const FiveFBound b = bound_five_f(n, f, delta);
    TheoreticalSchedule out = finish(smoothness, iterations, sigma, n, f, q0_gap, b.bound.alpha,
                                     b.bound.lambda, 3.0, 7.0);
    out.schedule.rounds = b.rounds;
    return out;
}

std::size_t output_index(std::size_t history_size, Rng& rng) {
    if (history_size == 0) throw DimensionError("output_model: empty history");
    return std::uniform_int_distribution<std::size_t>(0, history_size - 1)(rng);
}

ParamVector output_model(std::span<const ParamVector> history, Rng& rng) {
    return history[output_index(history.size(), rng)];
}

std::size_t argmin_gradient_index(std::span<const ParamVector> history,
                                  std::span<const LocalObjective> objectives) {
    if (history.empty()) throw DimensionError("argmin_gradient_index: empty history");
    std::size_t best = 0;
    double best_norm = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < history.size(); ++i) {
        const double g = squared_norm(global_gradient(objectives, history[i]));
        if (g < best_norm) {
            best_norm = g;
            best = i;
        }
    }
    return best;
}

}  // namespace monna
