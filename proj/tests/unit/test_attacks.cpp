#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "generators.hpp"
#include "monna/attacks.hpp"
#include "monna/errors.hpp"

using namespace monna;
using namespace monna::testing;

TEST_CASE("attack vector formulas") {
    const ParamVector anchor{1.0, -2.0};
    CHECK(sign_flip_vector(anchor) == ParamVector{-1.0, 2.0});
    CHECK(foe_vector(anchor, 2.0) == sign_flip_vector(anchor));
    CHECK(foe_vector(anchor, 0.0) == anchor);
    CHECK(alie_vector(anchor, ParamVector{0.0, 0.0}, 3.0) == anchor);
    CHECK(alie_vector(anchor, ParamVector{1.0, 0.5}, 2.0) == ParamVector{-1.0, -3.0});
}

TEST_CASE("coordinate std is the population deviation per coordinate") {
    const std::vector<ParamVector> vs{{0.0, 1.0}, {2.0, 1.0}};
    CHECK(coordinate_std(vs) == ParamVector{1.0, 0.0});
    const std::vector<ParamVector> same(3, ParamVector{4.0, -4.0});
    CHECK(coordinate_std(same) == ParamVector{0.0, 0.0});
}

TEST_CASE("alie on identical correct vectors sends a clone") {
    const std::vector<ParamVector> correct(5, ParamVector{0.5, 1.5});
    const AttackView view{correct, 0, 0};
    const AttackSpec spec{AttackKind::ALIE, {}, {}};
    const auto probe = make_probe({RuleKind::NNA, 1}, 6, correct);
    CHECK(*attack_vector(spec, view, probe) == ParamVector{0.5, 1.5});
}

TEST_CASE("grid search examples") {
    const ParamVector anchor{0.0};
    const auto make = [](double z) { return ParamVector{z}; };
    const ProbeFn identity = [](const ParamVector& c) { return c; };

    const double single[] = {1.5};
    CHECK(grid_search_zeta(single, make, identity, anchor) == 1.5);
    const double zero[] = {0.0};
    CHECK(grid_search_zeta(zero, make, identity, anchor) == 0.0);

    // Distance through an untrimmed mean grows with ζ: the largest wins.
    const std::vector<ParamVector> correct{{0.0}, {0.0}, {0.0}, {0.0}};
    const auto mean_probe = make_probe({RuleKind::Mean, 1}, 5, correct);
    const auto grid = default_zeta_grid();
    CHECK(grid_search_zeta(grid, make, mean_probe, anchor) == grid.back());

    // Symmetric candidates tie; the larger ζ is kept.
    const double sym[] = {-1.0, 1.0};
    const ProbeFn abs_probe = [](const ParamVector& c) { return ParamVector{std::abs(c[0])}; };
    CHECK(grid_search_zeta(sym, make, abs_probe, anchor) == 1.0);

    const std::vector<double> empty;
    CHECK_THROWS_AS(grid_search_zeta(empty, make, identity, anchor), ConfigError);
}

TEST_CASE("grid search agrees with brute force over random probes") {
    Rng rng(61);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ParamVector> correct;
        for (int i = 0; i < 13; ++i) correct.push_back(gaussian_vec(rng, 3));
        const ParamVector anchor = mean_of(correct);
        const ParamVector sd = coordinate_std(correct);
        const auto probe = make_probe({RuleKind::NNA, 3}, 16, correct);
        const auto grid = default_zeta_grid();
        const auto make = [&](double z) { return alie_vector(anchor, sd, z); };
        double best = -1.0;
        double best_zeta = 0.0;
        for (double z : grid) {
            const double d = squared_distance(probe(make(z)), anchor);
            if (d >= best) {
                best = d;
                best_zeta = z;
            }
        }
        CHECK(grid_search_zeta(grid, make, probe, anchor) == best_zeta);
    }
}

TEST_CASE("default grid contains the sign-flip value") {
    const auto grid = default_zeta_grid();
    CHECK(grid.front() == 0.5);
    CHECK(grid.back() == 5.0);
    CHECK(std::find(grid.begin(), grid.end(), 2.0) != grid.end());
}

TEST_CASE("attack_vector dispatch") {
    const std::vector<ParamVector> correct{{1.0, -2.0}, {1.0, -2.0}};
    const AttackView view{correct, 3, 0};
    CHECK_FALSE(attack_vector(AttackSpec{AttackKind::None, {}, {}}, view, {}).has_value());
    CHECK(*attack_vector(AttackSpec{AttackKind::SF, {}, {}}, view, {}) == ParamVector{-1.0, 2.0});
    CHECK_THROWS_AS(attack_vector(AttackSpec{AttackKind::LF, {}, {}}, view, {}), UnsupportedAttackError);

    AttackSpec custom{AttackKind::Custom, {}, {}};
    custom.custom = [](const AttackView& v) { return ParamVector(2, double(v.iteration)); };
    CHECK(*attack_vector(custom, view, {}) == ParamVector{3.0, 3.0});
    CHECK_THROWS_AS(attack_vector(AttackSpec{AttackKind::Custom, {}, {}}, view, {}),
                    UnsupportedAttackError);

    CHECK(parse_attack_kind("alie") == AttackKind::ALIE);
    CHECK_THROWS_AS(parse_attack_kind("gaussian"), ConfigError);
}

TEST_CASE("attacker broadcasts one vector from every faulty node") {
    ObjectiveSpec spec;
    spec.dim = 2;
    const auto suite = build_objectives(spec, 4, 1);
    Attacker sf(AttackSpec{AttackKind::SF, {}, {}}, 6, 2, {RuleKind::NNA, 2}, suite.locals,
                Schedule{0.1, 0.5, 1, 10});
    const std::vector<ParamVector> correct{{1.0, 1.0}, {1.0, 1.0}, {3.0, 1.0}, {3.0, 1.0}};
    const FaultyTraffic t = sf.traffic(0, correct);
    REQUIRE(t.broadcast.size() == 2);
    CHECK(*t.broadcast[0] == ParamVector{-2.0, -1.0});
    CHECK(*t.broadcast[1] == ParamVector{-2.0, -1.0});
    CHECK(t.per_receiver.empty());
    CHECK(std::isnan(sf.last_zeta()));
}

TEST_CASE("label flipping follows shadow momentum on the flipped objectives") {
    const auto make = [](double c) {
        return LocalObjective(QuadraticObjective{std::make_shared<DenseMatrix>(DenseMatrix::identity(1)),
                                                 ParamVector{c}, 1.0});
    };
    const std::vector<LocalObjective> objs{make(0.0), make(4.0)};
    const Schedule sched{0.5, 0.0, 1, 10};
    Attacker lf(AttackSpec{AttackKind::LF, {}, {}}, 3, 1, {RuleKind::NNA, 1}, objs, sched);
    std::vector<CorrectNodeState> states{CorrectNodeState::initial(0, ParamVector{1.0}),
                                         CorrectNodeState::initial(1, ParamVector{1.0})};
    lf.begin_iteration(0, states);
    // Flipped centers are 4 and 0; with β = 0 the half steps are
    // 1 - 0.5(1 - 4) = 2.5 and 1 - 0.5(1 - 0) = 0.5, mean 1.5.
    const std::vector<ParamVector> xs{{1.0}, {1.0}};
    CHECK(*lf.traffic(0, xs).broadcast[0] == ParamVector{1.5});
}
