#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "monna/attacks.hpp"
#include "monna/config.hpp"
#include "monna/coordination.hpp"
#include "monna/io.hpp"
#include "monna/node.hpp"
#include "monna/objectives.hpp"

namespace monna {

struct RunOptions {
    bool keep_history = false;  // store θᵢ,₀ … θᵢ,T₋₁ for every correct node
    /// Replaces the attack from the config (e.g. a Custom attack).
    std::optional<AttackSpec> attack_override;
};

struct RunResult {
    std::uint64_t seed = 0;
    std::vector<MetricsRow> rows;                  // one per iteration t = 0 … T-1
    std::vector<ParamVector> final_models;         // θᵢ,T
    std::vector<ParamVector> output_models;        // θ̂ᵢ sampled uniformly from θᵢ,₀ … θᵢ,T₋₁
    std::vector<double> final_grad_norm_sq;        // ‖∇Q(θᵢ,T)‖²
    std::vector<double> output_grad_norm_sq;       // ‖∇Q(θ̂ᵢ)‖²
    std::vector<std::vector<ParamVector>> history; // [node][t], only with keep_history
    std::vector<double> deviation_sq;              // ‖δₜ‖² per iteration
    CoordinationStats stats;
    std::size_t invariant_violations = 0;          // failed gradient-decomposition checks
    std::vector<std::string> warnings;
    double optimal_loss = 0.0;
    double smoothness = 0.0;
};

/// The correct nodes' objectives of an experiment; independent of the run seed.
ObjectiveSuite build_suite(const SystemConfig& config);

/**
 * Runs MoNNA for T iterations with the correct nodes 0 … n-f-1 and the
 * faulty nodes n-f … n-1 under the configured attack. Row t is recorded after
 * the local phase of iteration t: θ and m are θₜ and mₜ. Deterministic given
 * (config, seed).
 */
RunResult run(const SystemConfig& config, std::uint64_t seed, const RunOptions& options = {});

/// Same with a prebuilt objective suite (must match the config).
RunResult run(const SystemConfig& config, const ObjectiveSuite& suite, std::uint64_t seed,
              const RunOptions& options = {});

/// ‖(1/|C|) Σ (mᵢ - ∇Qᵢ(θᵢ))‖.
double momentum_deviation(std::span<const CorrectNodeState> states,
                          std::span<const LocalObjective> objectives);

struct ResilienceVerdict {
    double epsilon_measured = 0.0;  // maxᵢ of the seed mean of ‖∇Q(θ̂ᵢ)‖²
    double standard_error = 0.0;    // of the worst node's mean
    double epsilon_bound = 0.0;
    bool satisfied = false;
    std::optional<std::string> warning;
};

/// Uses output_grad_norm_sq of each run. Fewer than 20 runs attach a warning.
ResilienceVerdict resilience_check(std::span<const RunResult> runs, double epsilon_target);

/// Runs `config` once per seed in config.seeds, `threads` at a time.
std::vector<RunResult> run_seeds(const SystemConfig& config, unsigned threads,
                                 const RunOptions& options = {});

/// Element-wise mean of the metrics rows over runs (rows truncated to the shortest run).
std::vector<MetricsRow> average_rows(std::span<const RunResult> runs);

struct AblationCell {
    RuleKind rule = RuleKind::NNA;
    double beta = 0.0;
    AttackKind attack = AttackKind::SF;
    double final_grad_norm_sq = 0.0;   // mean over seeds and correct nodes of ‖∇Q(θᵢ,T)‖²
    double output_grad_norm_sq = 0.0;  // same for θ̂ᵢ
    std::optional<std::string> error;
};

std::string ablation_cell_name(const AblationCell& cell);

/**
 * Rules {NNA, CWTM, GM, Mean} × β {0, base β (0.9 if the base has none)} ×
 * attacks {FOE, ALIE, SF, LF} over the base config's seeds. With an output
 * directory, writes <dir>/<cell>/seed_<s>.csv per run and <dir>/summary.csv.
 * A failing cell records its error and the grid continues.
 */
std::vector<AblationCell> ablation_matrix(const SystemConfig& base, unsigned threads,
                                          const std::optional<std::filesystem::path>& output_dir);

std::string ablation_summary_csv(std::span<const AblationCell> cells);

/// Runs jobs 0 … count-1 over up to `threads` worker threads.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job);

}  // namespace monna
