#include <doctest.h>

#include "generators.hpp"
#include "monna/coordination.hpp"
#include "monna/errors.hpp"
#include "monna/reduction.hpp"

using namespace monna;
using namespace monna::testing;

namespace {

std::vector<Rng> streams(std::size_t count, std::uint64_t seed) {
    std::vector<Rng> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(make_stream(seed, StreamKind::Delivery, i));
    return out;
}

FaultyPolicy silent(std::size_t f) {
    return [f](std::size_t, std::span<const ParamVector>) { return silent_traffic(f); };
}

}  // namespace

TEST_CASE("f = 0 coordination is exact averaging in one round") {
    CoordinationConfig cfg;
    cfg.n = 5;
    cfg.f = 0;
    cfg.rule = {RuleKind::NNA, 0};
    KeyedTagScheme keys(5, 1);
    cfg.signatures = &keys;
    const std::vector<ParamVector> in{{1.0}, {2.0}, {3.0}, {4.0}, {10.0}};
    auto rngs = streams(5, 1);
    const auto out = run_coordination_phase(cfg, in, silent(0), rngs);
    for (const auto& y : out) CHECK(y == ParamVector{4.0});
}

TEST_CASE("silent faulty nodes do not stall the phase") {
    CoordinationConfig cfg;
    cfg.n = 16;
    cfg.f = 3;
    cfg.rule = {RuleKind::NNA, 3};
    KeyedTagScheme keys(16, 2);
    cfg.signatures = &keys;
    Rng rng(51);
    std::vector<ParamVector> in;
    for (int i = 0; i < 13; ++i) in.push_back(gaussian_vec(rng, 3));
    auto rngs = streams(13, 2);
    CoordinationStats stats;
    const auto out = run_coordination_phase(cfg, in, silent(3), rngs, &stats);
    CHECK(out.size() == 13);
    CHECK(stats.seb_instances > 0);
    CHECK(drift(out) < drift(in));
}

TEST_CASE("states variant updates x_current only") {
    CoordinationConfig cfg;
    cfg.n = 4;
    cfg.f = 1;
    cfg.rule = {RuleKind::NNA, 1};
    cfg.seb = false;
    std::vector<CorrectNodeState> states;
    for (NodeId i = 0; i < 3; ++i) {
        auto s = CorrectNodeState::initial(i, ParamVector{double(i)});
        s.x_current = ParamVector{double(i) + 1.0};
        states.push_back(s);
    }
    auto rngs = streams(3, 3);
    run_coordination_phase(cfg, states, silent(1), rngs);
    // Each node hears the other two and keeps the nearer; node 1 is equidistant
    // from both and keeps the smaller sender id.
    const std::vector<double> expected{1.5, 1.5, 2.5};
    for (NodeId i = 0; i < 3; ++i) {
        CHECK(states[i].theta == ParamVector{double(i)});
        CHECK(states[i].x_current == ParamVector{expected[i]});
    }
}

TEST_CASE("seb stops equivocation from splitting correct nodes") {
    CoordinationConfig cfg;
    cfg.n = 7;
    cfg.f = 2;
    cfg.rule = {RuleKind::Mean, 2};
    KeyedTagScheme keys(7, 4);
    cfg.signatures = &keys;
    const std::vector<ParamVector> in(5, ParamVector{0.0});
    // Each faulty node shows a different vector to every receiver.
    const FaultyPolicy equivocate = [](std::size_t, std::span<const ParamVector> correct) {
        FaultyTraffic t;
        t.broadcast.assign(2, std::nullopt);
        t.per_receiver.resize(2);
        for (std::size_t j = 0; j < 2; ++j) {
            for (std::size_t r = 0; r < correct.size(); ++r) {
                t.per_receiver[j].push_back(ParamVector{100.0 * double(r + 1) + double(j)});
            }
        }
        return t;
    };
    auto rngs = streams(5, 4);
    CoordinationStats stats;
    const auto out = run_coordination_phase(cfg, in, equivocate, rngs, &stats);
    // No faulty vector gathers a certificate, so everyone averages zeros.
    for (const auto& y : out) CHECK(y == ParamVector{0.0});
    CHECK(stats.seb_stalls > 0);

    cfg.seb = false;
    auto rngs2 = streams(5, 4);
    const auto split = run_coordination_phase(cfg, in, equivocate, rngs2);
    CHECK(drift(split) > 0.0);
}

TEST_CASE("coordination replays bit-identically") {
    CoordinationConfig cfg;
    cfg.n = 16;
    cfg.f = 3;
    cfg.rounds = 3;
    cfg.rule = {RuleKind::NNA, 3};
    KeyedTagScheme keys(16, 5);
    cfg.signatures = &keys;
    Rng rng(52);
    std::vector<ParamVector> in;
    for (int i = 0; i < 13; ++i) in.push_back(gaussian_vec(rng, 4));
    const FaultyPolicy far = [](std::size_t, std::span<const ParamVector>) {
        return FaultyTraffic{{ParamVector(4, 50.0), ParamVector(4, -50.0), std::nullopt}, {}};
    };
    auto r1 = streams(13, 9);
    auto r2 = streams(13, 9);
    CHECK(run_coordination_phase(cfg, in, far, r1) == run_coordination_phase(cfg, in, far, r2));
}

TEST_CASE("coordination configuration errors") {
    CoordinationConfig cfg;
    cfg.n = 5;
    cfg.f = 1;
    cfg.seb = true;
    cfg.signatures = nullptr;
    const std::vector<ParamVector> in(4, ParamVector{0.0});
    auto rngs = streams(4, 6);
    CHECK_THROWS_AS(run_coordination_phase(cfg, in, silent(1), rngs), ConfigError);
}
