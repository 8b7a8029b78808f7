#include "monna/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "monna/errors.hpp"

namespace monna {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view field) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ConfigError(std::string(field), "not a number: '" + std::string(text) + "'");
    }
    return value;
}

std::string metrics_csv(std::span<const MetricsRow> rows) {
    std::string out(kMetricsHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += std::to_string(r.t);
        for (double v : {r.grad_norm_sq, r.grad_norm_sq_node_max, r.drift_theta, r.drift_momentum,
                         r.lyapunov, r.loss}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::vector<MetricsRow> parse_metrics_csv(std::string_view text) {
    std::vector<MetricsRow> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kMetricsHeader) {
        throw IoError("metrics CSV: unexpected header '" + line + "'");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string_view> cells;
        std::string_view rest = line;
        for (;;) {
            const auto comma = rest.find(',');
            cells.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (cells.size() != 7) throw IoError("metrics CSV: expected 7 columns in '" + line + "'");
        MetricsRow r;
        r.t = static_cast<std::size_t>(parse_double(cells[0], "t"));
        r.grad_norm_sq = parse_double(cells[1], "grad_norm_sq");
        r.grad_norm_sq_node_max = parse_double(cells[2], "grad_norm_sq_node_max");
        r.drift_theta = parse_double(cells[3], "drift_theta");
        r.drift_momentum = parse_double(cells[4], "drift_momentum");
        r.lyapunov = parse_double(cells[5], "lyapunov");
        r.loss = parse_double(cells[6], "loss");
        rows.push_back(r);
    }
    return rows;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError(path.string() + ": write failed");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string() + ": cannot open for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void emit_metrics(std::span<const MetricsRow> rows, const std::filesystem::path& path) {
    write_text(path, metrics_csv(rows));
}

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path) {
    return parse_metrics_csv(read_text(path));
}

std::string audit_csv(const AuditResult& result) {
    std::string out =
        "strategy,trials,K,regime,gamma_in,gamma_out,alpha_hat,lambda_hat,alpha_bound,"
        "lambda_bound,violation\n";
    auto row = [&](std::string_view name, const MixingReport& r) {
        out += name;
        out += ',' + std::to_string(r.trials) + ',' + std::to_string(result.rounds) + ',';
        out += to_string(r.regime);
        for (double v : {r.gamma_in, r.gamma_out, r.alpha_hat, r.lambda_hat, result.bound.alpha,
                         result.bound.lambda}) {
            out += ',' + format_double(v);
        }
        out += r.violation ? ",1\n" : ",0\n";
    };
    for (const auto& [strategy, report] : result.per_strategy) row(to_string(strategy), report);
    row("all", result.overall);
    return out;
}

void emit_audit(const AuditResult& result, const std::filesystem::path& path) {
    write_text(path, audit_csv(result));
}

}  // namespace monna
