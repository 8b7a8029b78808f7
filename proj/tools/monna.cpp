// monna: run experiments, reduction audits, ablation grids and the SEB suite.
//
// Exit codes: 0 success, 1 invalid configuration or arguments, 2 invariant
// violation during a run, 3 I/O failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "monna/config.hpp"
#include "monna/errors.hpp"
#include "monna/io.hpp"
#include "monna/network.hpp"
#include "monna/reduction.hpp"
#include "monna/trainer.hpp"

namespace fs = std::filesystem;
using namespace monna;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kViolation = 2;
constexpr int kIo = 3;

struct CommonArgs {
    std::string config;
    std::string seeds;
    std::string output_dir;
    unsigned threads = 1;
};

SystemConfig load(const CommonArgs& args) {
    SystemConfig cfg = parse_and_validate(args.config);
    if (!args.seeds.empty()) cfg.seeds = parse_seed_list(args.seeds, "--seeds");
    if (!args.output_dir.empty()) cfg.output_dir = args.output_dir;
    return cfg;
}

int cmd_run(const CommonArgs& args) {
    const SystemConfig cfg = load(args);
    const std::vector<RunResult> runs = run_seeds(cfg, args.threads);
    const fs::path out = cfg.output_dir;
    write_text(out / "config.ini", emit_config(cfg));
    std::size_t violations = 0;
    double final_sq = 0.0;
    std::size_t count = 0;
    for (const auto& r : runs) {
        emit_metrics(r.rows, out / ("seed_" + std::to_string(r.seed) + ".csv"));
        violations += r.invariant_violations;
        for (double g : r.final_grad_norm_sq) {
            final_sq += g;
            ++count;
        }
        for (const auto& w : r.warnings) std::cerr << "seed " << r.seed << ": warning: " << w << "\n";
    }
    emit_metrics(average_rows(runs), out / "mean.csv");
    const ResilienceVerdict verdict = resilience_check(runs, 0.0);

    std::cout << "run: n=" << cfg.n << " f=" << cfg.f << " rule=" << to_string(cfg.rule)
              << " attack=" << to_string(cfg.attack.kind) << " T=" << cfg.iterations
              << " K=" << cfg.rounds << " gamma=" << format_double(cfg.gamma)
              << " beta=" << format_double(cfg.beta) << " seeds=" << runs.size()
              << " final_grad_norm_sq=" << format_double(count ? final_sq / count : 0.0)
              << " epsilon_measured=" << format_double(verdict.epsilon_measured)
              << " violations=" << violations << " -> " << out.string() << "\n";
    return violations > 0 ? kViolation : kOk;
}

struct AuditArgs {
    std::size_t n = 26;
    std::size_t f = 2;
    std::size_t trials = 1000;
    std::size_t rounds = 1;
    std::string regime = "auto";
    double delta = 0.0;
    std::size_t dim = 5;
    std::uint64_t seed = 0;
    bool no_seb = false;
    std::string policy = "faulty_first";
    std::string output_dir = "out";
};

int cmd_audit(const AuditArgs& a) {
    AuditConfig cfg;
    cfg.n = a.n;
    cfg.f = a.f;
    cfg.trials = a.trials;
    cfg.rounds = a.rounds;
    cfg.regime = a.regime == "auto" ? select_regime(a.n, a.f) : parse_regime(a.regime);
    cfg.delta = a.delta;
    cfg.dim = a.dim;
    cfg.seed = a.seed;
    cfg.seb = !a.no_seb;
    cfg.policy = parse_delivery_policy(a.policy);
    const AuditResult result = audit_nna(cfg);
    const fs::path out = a.output_dir;
    emit_audit(result, out / "audit.csv");

    const MixingReport& r = result.overall;
    const bool within = r.alpha_hat <= result.bound.alpha && r.lambda_hat <= result.bound.lambda;
    std::cout << "audit: n=" << a.n << " f=" << a.f << " regime=" << to_string(cfg.regime)
              << " K=" << result.rounds << " trials=" << r.trials
              << " alpha_hat=" << format_double(r.alpha_hat)
              << " alpha=" << format_double(result.bound.alpha)
              << " lambda_hat=" << format_double(r.lambda_hat)
              << " lambda=" << format_double(result.bound.lambda)
              << (r.violation ? " zero-drift violation" : "") << (within ? "" : " BOUND EXCEEDED")
              << " -> " << out.string() << "\n";
    return (within && !r.violation) ? kOk : kViolation;
}

int cmd_ablate(const CommonArgs& args) {
    const SystemConfig cfg = load(args);
    const fs::path out = cfg.output_dir;
    const auto cells = ablation_matrix(cfg, args.threads, out);
    std::size_t failed = 0;
    for (const auto& c : cells) {
        if (c.error) {
            ++failed;
            std::cerr << ablation_cell_name(c) << ": " << *c.error << "\n";
        }
    }
    std::cout << "ablate: " << cells.size() << " cells x " << cfg.seeds.size() << " seeds, "
              << failed << " failed -> " << out.string() << "\n";
    return failed > 0 ? kViolation : kOk;
}

int cmd_seb_test(std::size_t max_n, std::size_t max_f, const std::string& output_dir) {
    const SebSuiteReport report = seb_property_suite(max_n, max_f);
    for (const auto& e : report.examples) std::cerr << e << "\n";
    const fs::path out = output_dir;
    write_text(out / "seb.csv",
               "executions,consistency_violations,validity_failures,max_messages_per_peer\n" +
                   std::to_string(report.executions) + "," +
                   std::to_string(report.consistency_violations) + "," +
                   std::to_string(report.validity_failures) + "," +
                   format_double(report.max_messages_per_peer) + "\n");
    std::cout << "seb-test: n<=" << max_n << " f<=" << max_f << " executions=" << report.executions
              << " consistency_violations=" << report.consistency_violations
              << " validity_failures=" << report.validity_failures
              << " max_messages_per_peer=" << format_double(report.max_messages_per_peer) << " -> "
              << out.string() << "\n";
    return report.consistency_violations + report.validity_failures > 0 ? kViolation : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Byzantine-robust decentralized SGD simulator (MoNNA)"};
    app.require_subcommand(1);

    CommonArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment for every seed");
    run_cmd->add_option("--config", run_args.config, "Experiment config (INI)")->required();
    run_cmd->add_option("--seeds", run_args.seeds, "Seeds, e.g. 1..5 or 1,4,9");
    run_cmd->add_option("--output-dir", run_args.output_dir, "Where CSV files go");
    run_cmd->add_option("--threads", run_args.threads, "Seeds run in parallel")->check(CLI::PositiveNumber);

    AuditArgs audit_args;
    auto* audit_cmd = app.add_subcommand("audit", "Measure NNA contraction against the reduction bounds");
    audit_cmd->add_option("--n", audit_args.n, "Number of nodes");
    audit_cmd->add_option("--f", audit_args.f, "Number of faulty nodes");
    audit_cmd->add_option("--trials", audit_args.trials, "Trials per adversary strategy");
    audit_cmd->add_option("--K", audit_args.rounds, "Coordination rounds (11f regime)");
    audit_cmd->add_option("--regime", audit_args.regime, "auto, 11f or 5f");
    audit_cmd->add_option("--delta", audit_args.delta, "5f slack; 0 picks n/f - 5");
    audit_cmd->add_option("--dim", audit_args.dim, "Vector dimension");
    audit_cmd->add_option("--seed", audit_args.seed, "Audit seed");
    audit_cmd->add_option("--schedule", audit_args.policy, "faulty_first, fifo or seeded_shuffle");
    audit_cmd->add_flag("--no-seb", audit_args.no_seb, "Disable SEB (adds the equivocation strategy)");
    audit_cmd->add_option("--output-dir", audit_args.output_dir, "Where audit.csv goes");

    CommonArgs ablate_args;
    auto* ablate_cmd = app.add_subcommand("ablate", "Rule x momentum x attack grid");
    ablate_cmd->add_option("--config", ablate_args.config, "Base config (INI)")->required();
    ablate_cmd->add_option("--seeds", ablate_args.seeds, "Seeds, e.g. 1..5");
    ablate_cmd->add_option("--output-dir", ablate_args.output_dir, "Where CSV files go");
    ablate_cmd->add_option("--threads", ablate_args.threads, "Runs in parallel")->check(CLI::PositiveNumber);

    std::size_t max_n = 7;
    std::size_t max_f = 2;
    std::string seb_out = "out";
    auto* seb_cmd = app.add_subcommand("seb-test", "Exhaustive SEB validity and consistency check");
    seb_cmd->add_option("--max-n", max_n, "Largest n");
    seb_cmd->add_option("--max-f", max_f, "Largest f");
    seb_cmd->add_option("--output-dir", seb_out, "Where seb.csv goes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }

    try {
        if (*run_cmd) return cmd_run(run_args);
        if (*audit_cmd) return cmd_audit(audit_args);
        if (*ablate_cmd) return cmd_ablate(ablate_args);
        if (*seb_cmd) return cmd_seb_test(max_n, max_f, seb_out);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kIo;
    } catch (const ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kInvalid;
    } catch (const RegimeError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kInvalid;
    } catch (const UnsupportedAttackError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return kViolation;
    }
    return kInvalid;
}
