#include "monna/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "monna/errors.hpp"

namespace monna {

std::string_view to_string(Regime regime) noexcept {
    return regime == Regime::ElevenF ? "11f" : "5f";
}

Regime parse_regime(std::string_view text) {
    if (text == "11f") return Regime::ElevenF;
    if (text == "5f") return Regime::FiveF;
    throw ConfigError("system.regime", "unknown regime '" + std::string(text) + "' (11f or 5f)");
}

double drift(std::span<const ParamVector> vectors) {
    if (vectors.empty()) throw DimensionError("drift: empty list");
    const ParamVector center = mean_of(vectors);
    double total = 0.0;
    for (const auto& v : vectors) total += squared_distance(v, center);
    return total / static_cast<double>(vectors.size());
}

double drift_pairwise(std::span<const ParamVector> vectors) {
    if (vectors.empty()) throw DimensionError("drift: empty list");
    double total = 0.0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (std::size_t j = i + 1; j < vectors.size(); ++j) {
            total += squared_distance(vectors[i], vectors[j]);
        }
    }
    const double count = static_cast<double>(vectors.size());
    // Each unordered pair appears twice in the double sum.
    return total / (count * count);
}

ReductionBound bound_eleven_f(std::size_t n, std::size_t f, std::size_t rounds) {
    if (rounds == 0) throw ConfigError("system.K", "need at least one coordination round");
    if (n < 11 * f) {
        throw RegimeError("eleven-f bound needs n >= 11f (n = " + std::to_string(n) +
                          ", 11f = " + std::to_string(11 * f) + ")");
    }
    if (f == 0) return {0.0, 0.0};
    const double ratio = static_cast<double>(f) / static_cast<double>(n - f);
    const double alpha = std::pow(9.88 * ratio, static_cast<double>(rounds));
    const double root = 1.0 - std::sqrt(alpha);
    const double lambda = 9.0 * ratio * std::min(static_cast<double>(rounds), 1.0 / (root * root));
    return {alpha, lambda};
}

namespace {

bool in_five_f_regime(std::size_t n, std::size_t f, double delta) {
    const double need = (5.0 + delta) * static_cast<double>(f);
    return static_cast<double>(n) >= need * (1.0 - 1e-12);
}

}  // namespace

FiveFBound bound_five_f(std::size_t n, std::size_t f, double delta) {
    if (!(delta > 0.0)) throw RegimeError("five-f bound needs delta > 0");
    if (!in_five_f_regime(n, f, delta)) {
        throw RegimeError("five-f bound needs n >= (5 + delta) f (n = " + std::to_string(n) +
                          ", (5 + delta) f = " + std::to_string((5.0 + delta) * f) + ")");
    }
    if (n <= f) throw RegimeError("five-f bound needs n > f");
    const double correct = static_cast<double>(n - f);
    const double log_term = std::log(8.0 * correct);

    FiveFBound out;
    out.rounds = static_cast<std::size_t>(
                     std::ceil(log_term / (2.0 * std::log((3.0 + delta) / 3.0)))) + 1;
    out.stated_rounds = log_term / (2.0 * std::log((3.0 + delta) / delta));
    if (f == 0) return out;
    const double fd = static_cast<double>(f);
    const double lead = (3.0 + delta) / delta;
    out.bound.alpha = 2.0 * fd / correct;
    out.bound.lambda = lead * lead * (8.0 * fd) * (8.0 * fd) / correct;
    return out;
}

double max_five_f_delta(std::size_t n, std::size_t f) {
    if (f == 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(n) / static_cast<double>(f) - 5.0;
}

Regime select_regime(std::size_t n, std::size_t f) {
    return n >= 11 * f ? Regime::ElevenF : Regime::FiveF;
}

MixingReport measure_mixing(std::span<const ParamVector> inputs,
                            std::span<const ParamVector> outputs) {
    if (inputs.size() != outputs.size()) {
        throw DimensionError("measure_mixing: inputs and outputs differ in count");
    }
    MixingReport r;
    r.trials = 1;
    r.gamma_in = drift(inputs);
    r.gamma_out = drift(outputs);
    const double shift = squared_distance(mean_of(outputs), mean_of(inputs));
    if (r.gamma_in > 0.0) {
        r.alpha_hat = r.gamma_out / r.gamma_in;
        r.lambda_hat = shift / r.gamma_in;
        return r;
    }
    // Averaging identical vectors can still round; only flag real movement.
    double scale = 1.0;
    for (const auto& z : inputs) scale = std::max(scale, squared_norm(z));
    const double slack = 1e-24 * scale;
    r.violation = r.gamma_out > slack || shift > slack;
    return r;
}

MixingReport merge(const MixingReport& a, const MixingReport& b) {
    if (a.trials == 0) return b;
    if (b.trials == 0) return a;
    MixingReport out = a.alpha_hat >= b.alpha_hat ? a : b;
    out.lambda_hat = std::max(a.lambda_hat, b.lambda_hat);
    out.violation = a.violation || b.violation;
    out.trials = a.trials + b.trials;
    out.rounds = std::max(a.rounds, b.rounds);
    return out;
}

std::string_view to_string(AuditStrategy strategy) noexcept {
    switch (strategy) {
        case AuditStrategy::CloneCorrect: return "clone";
        case AuditStrategy::LargeOutlier: return "outlier";
        case AuditStrategy::MidHull: return "mid_hull";
        case AuditStrategy::Equivocate: return "equivocate";
    }
    return "unknown";
}

namespace {

ParamVector random_direction(std::size_t dim, Rng& rng) {
    std::normal_distribution<double> normal;
    ParamVector v(dim);
    double len = 0.0;
    while (len == 0.0) {
        for (auto& x : v) x = normal(rng);
        len = norm(v);
    }
    v /= len;
    return v;
}

}  // namespace

FaultyPolicy make_audit_adversary(AuditStrategy strategy, std::size_t f, const Rng& rng) {
    return [strategy, f, rng = Rng(rng)](std::size_t, std::span<const ParamVector> xs) mutable {
        FaultyTraffic traffic;
        const ParamVector center = mean_of(xs);
        const double spread = std::sqrt(drift(xs));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        switch (strategy) {
            case AuditStrategy::CloneCorrect: {
                // Half the time the farthest node, otherwise random ones.
                std::size_t far = 0;
                for (std::size_t i = 1; i < xs.size(); ++i) {
                    if (squared_distance(xs[i], center) > squared_distance(xs[far], center)) far = i;
                }
                const bool extreme = unit(rng) < 0.5;
                std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
                for (std::size_t j = 0; j < f; ++j) {
                    traffic.broadcast.emplace_back(xs[extreme ? far : pick(rng)]);
                }
                break;
            }
            case AuditStrategy::LargeOutlier: {
                const double reach = 1e3 * (1.0 + spread + norm(center));
                for (std::size_t j = 0; j < f; ++j) {
                    traffic.broadcast.emplace_back(center + reach * random_direction(center.dim(), rng));
                }
                break;
            }
            case AuditStrategy::MidHull: {
                const ParamVector dir = random_direction(center.dim(), rng);
                const double eps = 2.0 * unit(rng) * spread;
                for (std::size_t j = 0; j < f; ++j) traffic.broadcast.emplace_back(center + eps * dir);
                break;
            }
            case AuditStrategy::Equivocate: {
                traffic.per_receiver.resize(f);
                for (std::size_t j = 0; j < f; ++j) {
                    for (const auto& x : xs) {
                        const double push = unit(rng);
                        traffic.per_receiver[j].emplace_back(x + push * (x - center));
                    }
                }
                break;
            }
        }
        return traffic;
    };
}

MixingReport audit(const CoordinationFn& phase, const InputGenerator& inputs,
                   const AdversaryFactory& adversary, std::size_t trials, std::uint64_t seed) {
    MixingReport worst;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = make_stream(seed, StreamKind::Audit, t);
        const std::vector<ParamVector> z = inputs(rng);
        const FaultyPolicy faulty = adversary(rng);
        const std::vector<ParamVector> y = phase(z, faulty, rng());
        const MixingReport r = measure_mixing(z, y);
        if (!std::isfinite(r.alpha_hat) || !std::isfinite(r.lambda_hat)) {
            throw InvariantViolation("audit: non-finite mixing ratio in trial " + std::to_string(t));
        }
        worst = merge(worst, r);
    }
    return worst;
}

InputGenerator default_audit_inputs(std::size_t num_correct, std::size_t dim) {
    return [num_correct, dim](Rng& rng) {
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double scale = std::exp(6.0 * unit(rng) - 3.0);
        ParamVector offset(dim);
        for (auto& x : offset) x = 10.0 * normal(rng);

        auto gaussian = [&](double s) {
            ParamVector v(dim);
            for (auto& x : v) x = s * normal(rng);
            return v;
        };

        std::vector<ParamVector> z;
        z.reserve(num_correct);
        const auto shape = std::uniform_int_distribution<int>(0, 2)(rng);
        if (shape == 0) {
            for (std::size_t i = 0; i < num_correct; ++i) z.push_back(offset + gaussian(scale));
        } else if (shape == 1) {
            const ParamVector axis = scale * random_direction(dim, rng);
            const std::size_t split = std::uniform_int_distribution<std::size_t>(1, num_correct)(rng);
            for (std::size_t i = 0; i < num_correct; ++i) {
                const double side = i < split ? 1.0 : -1.0;
                z.push_back(offset + side * axis + gaussian(0.1 * scale));
            }
        } else {
            for (std::size_t i = 0; i + 1 < num_correct; ++i) z.push_back(offset + gaussian(scale));
            z.push_back(offset + (5.0 * scale) * random_direction(dim, rng));
        }
        return z;
    };
}

AuditResult audit_nna(const AuditConfig& cfg) {
    if (cfg.n <= cfg.f) throw ConfigError("audit.n", "need n > f");
    if (cfg.seb && cfg.n <= 3 * cfg.f) throw RegimeError("SEB needs n > 3f");

    AuditResult result;
    if (cfg.regime == Regime::ElevenF) {
        result.bound = bound_eleven_f(cfg.n, cfg.f, cfg.rounds);
        result.rounds = cfg.rounds;
    } else {
        result.delta = cfg.delta > 0.0 ? cfg.delta
                                       : (cfg.f == 0 ? 1.0 : max_five_f_delta(cfg.n, cfg.f));
        const FiveFBound b = bound_five_f(cfg.n, cfg.f, result.delta);
        result.bound = b.bound;
        result.rounds = b.rounds;
    }

    std::unique_ptr<SignatureScheme> scheme;
    if (cfg.seb) scheme = make_signature_scheme(cfg.signatures, cfg.n, cfg.seed);

    CoordinationConfig coord;
    coord.n = cfg.n;
    coord.f = cfg.f;
    coord.rounds = result.rounds;
    coord.rule = {RuleKind::NNA, cfg.f};
    coord.policy = cfg.policy;
    coord.seb = cfg.seb;
    coord.signatures = scheme.get();

    const std::size_t num_correct = cfg.n - cfg.f;
    CoordinationFn phase = [&](std::span<const ParamVector> z, const FaultyPolicy& faulty,
                               std::uint64_t seed) {
        std::vector<Rng> rngs;
        rngs.reserve(num_correct);
        for (std::size_t r = 0; r < num_correct; ++r) {
            rngs.push_back(make_stream(seed, StreamKind::Delivery, r));
        }
        return run_coordination_phase(coord, z, faulty, rngs);
    };
    const InputGenerator inputs = default_audit_inputs(num_correct, cfg.dim);

    std::vector<AuditStrategy> strategies{AuditStrategy::CloneCorrect, AuditStrategy::LargeOutlier,
                                          AuditStrategy::MidHull};
    if (!cfg.seb) strategies.push_back(AuditStrategy::Equivocate);

    for (const AuditStrategy s : strategies) {
        const AdversaryFactory factory = [s, f = cfg.f](Rng& rng) {
            return make_audit_adversary(s, f, Rng(rng()));
        };
        MixingReport r = audit(phase, inputs, factory, cfg.trials, cfg.seed);
        r.rounds = result.rounds;
        r.regime = cfg.regime;
        result.per_strategy.emplace_back(s, r);
        result.overall = merge(result.overall, r);
    }
    result.overall.regime = cfg.regime;
    result.overall.rounds = result.rounds;
    return result;
}

}  // namespace monna
