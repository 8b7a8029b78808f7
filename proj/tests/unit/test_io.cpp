#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

#include "generators.hpp"
#include "monna/errors.hpp"
#include "monna/io.hpp"

using namespace monna;
using namespace monna::testing;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "monna_test_io";
    fs::create_directories(dir);
    return dir / name;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("format_double round-trips every bit pattern it is given") {
    Rng rng(71);
    for (int i = 0; i < 20000; ++i) {
        const std::uint64_t bits = rng();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        if (std::isnan(v)) continue;
        CHECK(same_bits(parse_double(format_double(v), "x"), v));
    }
    for (double v : {0.0, -0.0, 1.0, 0.1, 1e-308, 5e-324, std::numeric_limits<double>::max(),
                     std::numeric_limits<double>::infinity()}) {
        CHECK(same_bits(parse_double(format_double(v), "x"), v));
    }
    CHECK_THROWS_AS(parse_double("1.0x", "x"), ConfigError);
    CHECK_THROWS_AS(parse_double("", "x"), ConfigError);
}

TEST_CASE("metrics csv round trip") {
    CHECK(metrics_csv({}) == std::string(kMetricsHeader) + "\n");
    CHECK(parse_metrics_csv(metrics_csv({})).empty());

    Rng rng(72);
    std::vector<MetricsRow> rows;
    for (std::size_t t = 0; t < 50; ++t) {
        rows.push_back({t, uniform_real(rng, 0, 1e3), uniform_real(rng, 0, 1), uniform_real(rng, 0, 1e-9),
                        uniform_real(rng, 0, 1), uniform_real(rng, -1, 1), uniform_real(rng, -5, 5)});
    }
    CHECK(parse_metrics_csv(metrics_csv(rows)) == rows);
    CHECK(metrics_csv(rows) == metrics_csv(parse_metrics_csv(metrics_csv(rows))));

    CHECK_THROWS_AS(parse_metrics_csv("t,loss\n0,1\n"), IoError);
    CHECK_THROWS_AS(parse_metrics_csv(std::string(kMetricsHeader) + "\n0,1,2\n"), IoError);
}

TEST_CASE("metrics files") {
    const std::vector<MetricsRow> rows{{0, 1.5, 2.0, 0.0, 0.25, 3.0, -1.0}};
    const fs::path a = scratch("nested/a.csv");
    const fs::path b = scratch("nested/b.csv");
    emit_metrics(rows, a);
    emit_metrics(rows, b);
    CHECK(read_metrics(a) == rows);
    CHECK(read_text(a) == read_text(b));
    CHECK_THROWS_AS(read_metrics(scratch("missing.csv")), IoError);
}

TEST_CASE("audit csv has a row per strategy and an overall row") {
    AuditResult r;
    r.overall.alpha_hat = 0.5;
    r.overall.trials = 3;
    r.per_strategy.push_back({AuditStrategy::CloneCorrect, r.overall});
    r.per_strategy.push_back({AuditStrategy::LargeOutlier, r.overall});
    r.bound = {0.8, 0.75};
    const std::string csv = audit_csv(r);
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 4);
    CHECK(csv.find("all") != std::string::npos);
}
