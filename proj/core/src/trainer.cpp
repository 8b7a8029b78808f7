#include "monna/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "monna/errors.hpp"
#include "monna/reduction.hpp"

namespace monna {

ObjectiveSuite build_suite(const SystemConfig& config) {
    return build_objectives(config.objective, config.n - config.f, config.objective.seed);
}

RunResult run(const SystemConfig& config, std::uint64_t seed, const RunOptions& options) {
    return run(config, build_suite(config), seed, options);
}

double momentum_deviation(std::span<const CorrectNodeState> states,
                          std::span<const LocalObjective> objectives) {
    if (states.size() != objectives.size() || states.empty()) {
        throw DimensionError("momentum_deviation: need one objective per state");
    }
    ParamVector sum(states.front().theta.dim());
    for (std::size_t i = 0; i < states.size(); ++i) {
        sum += states[i].momentum;
        sum -= true_gradient(objectives[i], states[i].theta);
    }
    sum /= static_cast<double>(states.size());
    return norm(sum);
}

RunResult run(const SystemConfig& config, const ObjectiveSuite& suite, std::uint64_t seed,
              const RunOptions& options) {
    const std::size_t n = config.n;
    const std::size_t f = config.f;
    if (f >= n) throw ConfigError("system.f", "need n > f");
    const std::size_t nc = n - f;
    if (suite.locals.size() != nc) {
        throw DimensionError("run: objective suite has " + std::to_string(suite.locals.size()) +
                             " nodes, expected " + std::to_string(nc));
    }
    const std::size_t d = config.objective.dim;
    const std::size_t T = config.iterations;
    const Schedule sched{config.gamma, config.beta, config.rounds, T};
    validate(sched);

    RunResult result;
    result.seed = seed;
    result.optimal_loss = suite.optimal_loss;
    result.smoothness = suite.smoothness;
    const double L = suite.smoothness;
    const std::span<const LocalObjective> locals = suite.locals;

    std::unique_ptr<SignatureScheme> scheme;
    if (config.seb) scheme = make_signature_scheme(config.signatures, n, seed);

    std::vector<Rng> grad_rngs;
    std::vector<Rng> delivery_rngs;
    std::vector<std::size_t> output_at(nc, 0);
    for (std::size_t i = 0; i < nc; ++i) {
        grad_rngs.push_back(make_stream(seed, StreamKind::Gradient, i));
        delivery_rngs.push_back(make_stream(seed, StreamKind::Delivery, i));
        Rng out = make_stream(seed, StreamKind::Output, i);
        if (T > 0) output_at[i] = output_index(T, out);
    }

    const ParamVector theta0(d, config.theta0);
    std::vector<CorrectNodeState> states;
    for (std::size_t i = 0; i < nc; ++i) states.push_back(CorrectNodeState::initial(i, theta0));
    result.output_models.assign(nc, theta0);
    if (options.keep_history) result.history.assign(nc, {});

    Attacker attacker(options.attack_override.value_or(config.attack), n, f,
                      AggregationRule{config.rule, f}, locals, sched);
    const FaultyPolicy faulty = [&attacker](std::size_t k, std::span<const ParamVector> xs) {
        return attacker.traffic(k, xs);
    };

    CoordinationConfig coord;
    coord.n = n;
    coord.f = f;
    coord.rounds = config.rounds;
    coord.rule = {config.rule, f};
    coord.policy = config.policy;
    coord.seb = config.seb;
    coord.signatures = scheme.get();

    std::vector<ParamVector> thetas(nc);
    std::vector<ParamVector> momenta(nc);
    result.rows.reserve(T);
    result.deviation_sq.reserve(T);

    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < nc; ++i) {
            const ParamVector g =
                stochastic_gradient(locals[i], suite.noise, states[i].theta, grad_rngs[i]);
            states[i] = local_phase(std::move(states[i]), g, sched);
            thetas[i] = states[i].theta;
            momenta[i] = states[i].momentum;
        }

        MetricsRow row;
        row.t = t;
        const ParamVector mean_theta = mean_of(thetas);
        row.grad_norm_sq = squared_norm(global_gradient(locals, mean_theta));
        for (const auto& th : thetas) {
            row.grad_norm_sq_node_max =
                std::max(row.grad_norm_sq_node_max, squared_norm(global_gradient(locals, th)));
        }
        row.drift_theta = drift(thetas);
        row.drift_momentum = drift(momenta);
        row.loss = global_loss(locals, mean_theta);
        const double dev = momentum_deviation(states, locals);
        result.deviation_sq.push_back(dev * dev);
        row.lyapunov = row.loss - suite.optimal_loss + dev * dev / (4.0 * L);
        if (config.check_invariants) {
            const double rhs = 1.5 * row.grad_norm_sq +
                               3.0 * L * L * static_cast<double>(n) * row.drift_theta;
            if (row.grad_norm_sq_node_max > rhs * (1.0 + 1e-9) + 1e-300) {
                ++result.invariant_violations;
                if (result.invariant_violations == 1) {
                    result.warnings.push_back("gradient decomposition bound violated at t = " +
                                              std::to_string(t));
                }
            }
        }
        result.rows.push_back(row);

        for (std::size_t i = 0; i < nc; ++i) {
            if (options.keep_history) result.history[i].push_back(thetas[i]);
            if (output_at[i] == t) result.output_models[i] = thetas[i];
        }

        attacker.begin_iteration(t, states);
        coord.iteration = t;
        run_coordination_phase(coord, states, faulty, delivery_rngs, &result.stats);
        for (auto& s : states) s = finalize_iteration(std::move(s));
    }

    if (result.stats.gm_fallbacks > 0) {
        result.warnings.push_back("geometric median hit its iteration cap " +
                                  std::to_string(result.stats.gm_fallbacks) +
                                  " times; last iterate used");
    }
    for (auto& s : states) result.final_models.push_back(std::move(s.theta));
    for (std::size_t i = 0; i < nc; ++i) {
        result.final_grad_norm_sq.push_back(
            squared_norm(global_gradient(locals, result.final_models[i])));
        result.output_grad_norm_sq.push_back(
            squared_norm(global_gradient(locals, result.output_models[i])));
    }
    return result;
}

ResilienceVerdict resilience_check(std::span<const RunResult> runs, double epsilon_target) {
    if (runs.empty()) throw DimensionError("resilience_check: no runs");
    const std::size_t nodes = runs.front().output_grad_norm_sq.size();
    ResilienceVerdict v;
    v.epsilon_bound = epsilon_target;
    v.epsilon_measured = -1.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        double sum = 0.0;
        double sum_sq = 0.0;
        for (const auto& r : runs) {
            if (r.output_grad_norm_sq.size() != nodes) {
                throw DimensionError("resilience_check: runs differ in node count");
            }
            sum += r.output_grad_norm_sq[i];
            sum_sq += r.output_grad_norm_sq[i] * r.output_grad_norm_sq[i];
        }
        const double k = static_cast<double>(runs.size());
        const double mean = sum / k;
        if (mean > v.epsilon_measured) {
            v.epsilon_measured = mean;
            const double var = runs.size() > 1 ? std::max(0.0, (sum_sq - k * mean * mean) / (k - 1.0))
                                               : 0.0;
            v.standard_error = std::sqrt(var / k);
        }
    }
    v.epsilon_measured = std::max(v.epsilon_measured, 0.0);
    v.satisfied = v.epsilon_measured <= epsilon_target;
    if (runs.size() < 20) {
        v.warning = "only " + std::to_string(runs.size()) +
                    " seeds; expectation estimate has low statistical power (20 or more advised)";
    }
    return v;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    const std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

std::vector<RunResult> run_seeds(const SystemConfig& config, unsigned threads,
                                 const RunOptions& options) {
    const ObjectiveSuite suite = build_suite(config);
    std::vector<RunResult> results(config.seeds.size());
    parallel_for(config.seeds.size(), threads, [&](std::size_t k) {
        results[k] = run(config, suite, config.seeds[k], options);
    });
    return results;
}

std::vector<MetricsRow> average_rows(std::span<const RunResult> runs) {
    if (runs.empty()) return {};
    std::size_t len = runs.front().rows.size();
    for (const auto& r : runs) len = std::min(len, r.rows.size());
    std::vector<MetricsRow> out(len);
    const double k = static_cast<double>(runs.size());
    for (std::size_t t = 0; t < len; ++t) {
        MetricsRow& m = out[t];
        m.t = t;
        for (const auto& r : runs) {
            const MetricsRow& x = r.rows[t];
            m.grad_norm_sq += x.grad_norm_sq / k;
            m.grad_norm_sq_node_max += x.grad_norm_sq_node_max / k;
            m.drift_theta += x.drift_theta / k;
            m.drift_momentum += x.drift_momentum / k;
            m.lyapunov += x.lyapunov / k;
            m.loss += x.loss / k;
        }
    }
    return out;
}

std::string ablation_cell_name(const AblationCell& cell) {
    std::ostringstream name;
    name << to_string(cell.rule) << "_beta" << format_double(cell.beta) << "_"
         << to_string(cell.attack);
    return name.str();
}

std::vector<AblationCell> ablation_matrix(const SystemConfig& base, unsigned threads,
                                          const std::optional<std::filesystem::path>& output_dir) {
    const double high_beta = base.beta > 0.0 ? base.beta : 0.9;
    std::vector<AblationCell> cells;
    for (RuleKind rule : {RuleKind::NNA, RuleKind::CWTM, RuleKind::GM, RuleKind::Mean}) {
        for (double beta : {0.0, high_beta}) {
            for (AttackKind attack : {AttackKind::FOE, AttackKind::ALIE, AttackKind::SF, AttackKind::LF}) {
                AblationCell c;
                c.rule = rule;
                c.beta = beta;
                c.attack = attack;
                cells.push_back(c);
            }
        }
    }
    const ObjectiveSuite suite = build_suite(base);
    const std::size_t seeds = base.seeds.size();
    std::vector<std::vector<RunResult>> runs(cells.size(), std::vector<RunResult>(seeds));
    std::vector<std::optional<std::string>> errors(cells.size());
    std::mutex error_mutex;

    parallel_for(cells.size() * seeds, threads, [&](std::size_t job) {
        const std::size_t c = job / seeds;
        const std::size_t s = job % seeds;
        SystemConfig cfg = base;
        cfg.rule = cells[c].rule;
        cfg.beta = cells[c].beta;
        cfg.step_theoretical = false;
        cfg.attack.kind = cells[c].attack;
        try {
            validate_and_resolve(cfg);
            runs[c][s] = run(cfg, suite, base.seeds[s]);
            if (output_dir) {
                emit_metrics(runs[c][s].rows, *output_dir / ablation_cell_name(cells[c]) /
                                                  ("seed_" + std::to_string(base.seeds[s]) + ".csv"));
            }
        } catch (const std::exception& e) {
            const std::lock_guard lock(error_mutex);
            if (!errors[c]) errors[c] = e.what();
        }
    });

    for (std::size_t c = 0; c < cells.size(); ++c) {
        cells[c].error = errors[c];
        if (errors[c]) {
            cells[c].final_grad_norm_sq = std::nan("");
            cells[c].output_grad_norm_sq = std::nan("");
            continue;
        }
        double fin = 0.0;
        double out = 0.0;
        std::size_t count = 0;
        for (const auto& r : runs[c]) {
            for (std::size_t i = 0; i < r.final_grad_norm_sq.size(); ++i) {
                fin += r.final_grad_norm_sq[i];
                out += r.output_grad_norm_sq[i];
                ++count;
            }
        }
        cells[c].final_grad_norm_sq = count ? fin / static_cast<double>(count) : 0.0;
        cells[c].output_grad_norm_sq = count ? out / static_cast<double>(count) : 0.0;
    }
    if (output_dir) write_text(*output_dir / "summary.csv", ablation_summary_csv(cells));
    return cells;
}

std::string ablation_summary_csv(std::span<const AblationCell> cells) {
    std::string out = "rule,beta,attack,final_grad_norm_sq,output_grad_norm_sq,error\n";
    for (const auto& c : cells) {
        out += std::string(to_string(c.rule)) + ',' + format_double(c.beta) + ',' +
               std::string(to_string(c.attack)) + ',' + format_double(c.final_grad_norm_sq) + ',' +
               format_double(c.output_grad_norm_sq) + ',';
        if (c.error) {
            std::string e = *c.error;
            std::replace(e.begin(), e.end(), ',', ';');
            std::replace(e.begin(), e.end(), '\n', ' ');
            out += e;
        }
        out += '\n';
    }
    return out;
}

}  // namespace monna
