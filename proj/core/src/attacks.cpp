#include "monna/attacks.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "monna/errors.hpp"

namespace monna {

std::string_view to_string(AttackKind kind) noexcept {
    switch (kind) {
        case AttackKind::None: return "none";
        case AttackKind::FOE: return "foe";
        case AttackKind::ALIE: return "alie";
        case AttackKind::SF: return "sf";
        case AttackKind::LF: return "lf";
        case AttackKind::Custom: return "custom";
    }
    return "unknown";
}

AttackKind parse_attack_kind(std::string_view text) {
    for (auto k : {AttackKind::None, AttackKind::FOE, AttackKind::ALIE, AttackKind::SF,
                   AttackKind::LF, AttackKind::Custom}) {
        if (text == to_string(k)) return k;
    }
    throw ConfigError("attack.kind",
                      "unknown attack '" + std::string(text) + "' (none, foe, alie, sf, lf)");
}

std::vector<double> default_zeta_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i) grid.push_back(0.5 * i);
    return grid;
}

ParamVector coordinate_std(std::span<const ParamVector> vectors) {
    if (vectors.empty()) throw DimensionError("coordinate_std: empty list");
    const ParamVector center = mean_of(vectors);
    ParamVector out(center.dim());
    for (const auto& v : vectors) {
        for (std::size_t c = 0; c < out.dim(); ++c) {
            const double d = v[c] - center[c];
            out[c] += d * d;
        }
    }
    for (auto& x : out) x = std::sqrt(x / static_cast<double>(vectors.size()));
    return out;
}

ParamVector sign_flip_vector(const ParamVector& anchor) { return -1.0 * anchor; }

ParamVector foe_vector(const ParamVector& anchor, double zeta) { return (1.0 - zeta) * anchor; }

ParamVector alie_vector(const ParamVector& anchor, const ParamVector& std_dev, double zeta) {
    ParamVector out = anchor;
    out.axpy(-zeta, std_dev);
    return out;
}

ProbeFn make_probe(const AggregationRule& rule, std::size_t n,
                   std::span<const ParamVector> correct_vectors) {
    const std::size_t f = rule.f;
    if (n <= 2 * f || correct_vectors.size() + f < n) {
        throw DimensionError("make_probe: need n > 2f and n - f correct vectors");
    }
    std::vector<PeerVector> base;
    for (std::size_t i = 1; i + f < n - f; ++i) base.push_back({i, correct_vectors[i]});
    return [rule, n, f, self = correct_vectors[0], base](const ParamVector& candidate) {
        std::vector<PeerVector> received = base;
        for (std::size_t j = 0; j < f; ++j) received.push_back({n - f + j, candidate});
        return aggregate(rule, self, received);
    };
}

double grid_search_zeta(std::span<const double> candidates,
                        const std::function<ParamVector(double)>& make_candidate,
                        const ProbeFn& probe, const ParamVector& anchor) {
    if (candidates.empty()) throw ConfigError("attack.zeta_grid", "must not be empty");
    double best_zeta = candidates.front();
    double best = -1.0;
    for (const double zeta : candidates) {
        const double d = squared_distance(probe(make_candidate(zeta)), anchor);
        if (d > best || (d == best && zeta > best_zeta)) {
            best = d;
            best_zeta = zeta;
        }
    }
    return best_zeta;
}

namespace {

std::optional<ParamVector> searched(const AttackSpec& spec, const ParamVector& anchor,
                                    const std::function<ParamVector(double)>& make,
                                    const ProbeFn& probe, double* zeta_out) {
    const std::vector<double> grid = spec.zeta_grid.empty() ? default_zeta_grid() : spec.zeta_grid;
    const double zeta = probe ? grid_search_zeta(grid, make, probe, anchor) : grid.back();
    if (zeta_out) *zeta_out = zeta;
    return make(zeta);
}

std::optional<ParamVector> stateless_attack(const AttackSpec& spec, const AttackView& view,
                                            const ProbeFn& probe, double* zeta_out) {
    if (spec.kind == AttackKind::None) return std::nullopt;
    if (spec.kind == AttackKind::Custom) {
        if (!spec.custom) throw UnsupportedAttackError("custom attack without a callback");
        return spec.custom(view);
    }
    if (spec.kind == AttackKind::LF) {
        throw UnsupportedAttackError("label flipping needs the objectives; use Attacker");
    }
    const ParamVector anchor = mean_of(view.correct_vectors);
    switch (spec.kind) {
        case AttackKind::SF: return sign_flip_vector(anchor);
        case AttackKind::FOE:
            return searched(spec, anchor, [&](double z) { return foe_vector(anchor, z); }, probe,
                            zeta_out);
        case AttackKind::ALIE: {
            const ParamVector sd = coordinate_std(view.correct_vectors);
            return searched(spec, anchor, [&](double z) { return alie_vector(anchor, sd, z); },
                            probe, zeta_out);
        }
        default: break;
    }
    throw UnsupportedAttackError("unhandled attack kind");
}

}  // namespace

std::optional<ParamVector> attack_vector(const AttackSpec& spec, const AttackView& view,
                                         const ProbeFn& probe) {
    return stateless_attack(spec, view, probe, nullptr);
}

Attacker::Attacker(AttackSpec spec, std::size_t n, std::size_t f, AggregationRule probe_rule,
                   std::span<const LocalObjective> correct_objectives, Schedule schedule)
    : spec_(std::move(spec)),
      n_(n),
      f_(f),
      probe_rule_(probe_rule),
      schedule_(schedule),
      last_zeta_(std::numeric_limits<double>::quiet_NaN()) {
    probe_rule_.f = f;
    if (spec_.kind == AttackKind::LF && f_ > 0) {
        flipped_ = flip_labels(correct_objectives);
        shadow_momentum_.assign(flipped_.size(), ParamVector(flipped_.front().dim()));
    }
    if (spec_.kind == AttackKind::Custom && !spec_.custom) {
        throw UnsupportedAttackError("custom attack without a callback");
    }
}

void Attacker::begin_iteration(std::size_t t, std::span<const CorrectNodeState> states) {
    iteration_ = t;
    if (spec_.kind != AttackKind::LF || f_ == 0) return;
    if (states.size() != flipped_.size()) {
        throw DimensionError("Attacker: state count differs from objective count");
    }
    std::vector<ParamVector> half_steps;
    half_steps.reserve(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        ParamVector& m = shadow_momentum_[i];
        m *= schedule_.beta;
        m.axpy(1.0 - schedule_.beta, true_gradient(flipped_[i], states[i].theta));
        ParamVector x = states[i].theta;
        x.axpy(-schedule_.gamma, m);
        half_steps.push_back(std::move(x));
    }
    lf_vector_ = mean_of(half_steps);
}

FaultyTraffic Attacker::traffic(std::size_t round, std::span<const ParamVector> correct_vectors) {
    FaultyTraffic out;
    if (f_ == 0) return out;
    std::optional<ParamVector> v;
    if (spec_.kind == AttackKind::LF) {
        v = lf_vector_;
    } else {
        const AttackView view{correct_vectors, iteration_, round};
        ProbeFn probe;
        if (spec_.kind == AttackKind::FOE || spec_.kind == AttackKind::ALIE) {
            probe = make_probe(probe_rule_, n_, correct_vectors);
        }
        v = stateless_attack(spec_, view, probe, &last_zeta_);
    }
    out.broadcast.assign(f_, v);
    return out;
}

}  // namespace monna
