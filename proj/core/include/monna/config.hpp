#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "monna/aggregation.hpp"
#include "monna/attacks.hpp"
#include "monna/network.hpp"
#include "monna/objectives.hpp"
#include "monna/reduction.hpp"

namespace monna {

/// Full experiment description. After parse_and_validate every numeric field
/// is resolved; the *_theoretical flags remember where a value came from.
struct SystemConfig {
    std::size_t n = 16;
    std::size_t f = 3;
    std::size_t iterations = 1000;  // T
    std::size_t rounds = 1;         // K
    bool rounds_theoretical = false;
    std::optional<Regime> regime;   // nullopt: no regime claimed (only legal off NNA or n <= 5f)
    bool regime_auto = true;
    double delta = 0.0;             // five-f δ; resolved to n/f - 5 when left on auto
    bool delta_auto = true;
    RuleKind rule = RuleKind::NNA;

    double gamma = 0.05;
    double beta = 0.9;
    bool step_theoretical = false;  // γ and β both from the convergence theorem

    AttackSpec attack{AttackKind::SF, {}, {}};
    ObjectiveSpec objective;

    DeliveryPolicy policy = DeliveryPolicy::FaultyFirst;
    bool seb = true;
    std::string signatures = "keyed";

    std::vector<std::uint64_t> seeds{1};
    std::string output_dir = "out";
    double theta0 = 0.0;            // every coordinate of the shared initial model
    bool check_invariants = true;

    bool operator==(const SystemConfig& other) const;
};

/// Parses "1..5", "1,2,9" or a mix such as "1..3,7". Throws ConfigError.
std::vector<std::uint64_t> parse_seed_list(std::string_view text,
                                           std::string_view field = "run.seeds");

/// Checks cross-field constraints and expands "theoretical"/"auto" values.
/// Throws ConfigError or RegimeError naming the offending field.
void validate_and_resolve(SystemConfig& config);

/// Reads a flat INI file ([section] key = value). Unknown sections or keys are
/// errors. Throws IoError when the file cannot be read.
SystemConfig parse_and_validate(const std::filesystem::path& path);
SystemConfig parse_config_text(std::string_view text);

/// INI text that parses back to the same config.
std::string emit_config(const SystemConfig& config);

}  // namespace monna
