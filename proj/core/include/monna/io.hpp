#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "monna/reduction.hpp"

namespace monna {

/// One line of the per-iteration metrics file.
struct MetricsRow {
    std::size_t t = 0;
    double grad_norm_sq = 0.0;           // ‖∇Q(θ̄ₜ)‖²
    double grad_norm_sq_node_max = 0.0;  // maxᵢ ‖∇Q(θᵢ,ₜ)‖²
    double drift_theta = 0.0;            // Γ(θₜ)
    double drift_momentum = 0.0;         // Γ(mₜ)
    double lyapunov = 0.0;               // Q(θ̄ₜ) - Q* + ‖δₜ‖²/(4L)
    double loss = 0.0;                   // Q(θ̄ₜ)

    bool operator==(const MetricsRow&) const = default;
};

inline constexpr std::string_view kMetricsHeader =
    "t,grad_norm_sq,grad_norm_sq_node_max,drift_theta,drift_momentum,lyapunov,loss";

/// Shortest text with 17 significant digits; parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text, std::string_view field);

std::string metrics_csv(std::span<const MetricsRow> rows);
std::vector<MetricsRow> parse_metrics_csv(std::string_view text);

/// Writes the CSV, creating parent directories. Throws IoError with the path.
void emit_metrics(std::span<const MetricsRow> rows, const std::filesystem::path& path);
std::vector<MetricsRow> read_metrics(const std::filesystem::path& path);

/// Audit report: one row per strategy plus an "all" row.
std::string audit_csv(const AuditResult& result);
void emit_audit(const AuditResult& result, const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace monna
