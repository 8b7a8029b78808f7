#include <doctest.h>

#include <cmath>
#include <memory>

#include "generators.hpp"
#include "monna/errors.hpp"
#include "monna/objectives.hpp"

using namespace monna;
using namespace monna::testing;

namespace {

LocalObjective quad(const DenseMatrix& a, ParamVector center, double l) {
    return LocalObjective(QuadraticObjective{std::make_shared<DenseMatrix>(a), std::move(center), l});
}

ParamVector finite_difference(const LocalObjective& obj, const ParamVector& theta, double h) {
    ParamVector g(theta.dim());
    for (std::size_t c = 0; c < theta.dim(); ++c) {
        ParamVector up = theta;
        ParamVector down = theta;
        up[c] += h;
        down[c] -= h;
        g[c] = (loss(obj, up) - loss(obj, down)) / (2.0 * h);
    }
    return g;
}

}  // namespace

TEST_CASE("quadratic gradient examples") {
    const auto id = quad(DenseMatrix::identity(2), ParamVector{0.0, 0.0}, 1.0);
    CHECK(true_gradient(id, ParamVector{1.0, 0.0}) == ParamVector{1.0, 0.0});

    const double diag[] = {1.0, 4.0};
    const auto q = quad(DenseMatrix::diagonal(diag), ParamVector{1.0, 1.0}, 4.0);
    CHECK(true_gradient(q, ParamVector{0.0, 0.0}) == ParamVector{-1.0, -4.0});
}

TEST_CASE("global gradient and heterogeneity examples") {
    const auto a = quad(DenseMatrix::identity(1), ParamVector{0.0}, 1.0);
    const auto b = quad(DenseMatrix::identity(1), ParamVector{2.0}, 1.0);
    const std::vector<LocalObjective> two{a, b};
    CHECK(global_gradient(two, ParamVector{0.0}) == ParamVector{-1.0});

    const auto m = quad(DenseMatrix::identity(1), ParamVector{-1.0}, 1.0);
    const auto p = quad(DenseMatrix::identity(1), ParamVector{1.0}, 1.0);
    const std::vector<LocalObjective> pm{m, p};
    const std::vector<ParamVector> samples{{0.0}, {3.0}, {-7.5}};
    CHECK(measure_heterogeneity(pm, samples) == doctest::Approx(1.0).epsilon(1e-15));

    const std::vector<LocalObjective> same{a, a, a};
    CHECK(measure_heterogeneity(same, samples) == 0.0);
}

TEST_CASE("center spread suites hit zeta exactly and are centered on the minimizer") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        ObjectiveSpec spec;
        spec.dim = uniform_size(rng, 1, 8);
        spec.smoothness = uniform_real(rng, 0.5, 4.0);
        spec.strong_convexity = spec.smoothness * uniform_real(rng, 0.05, 1.0);
        spec.zeta = uniform_real(rng, 0.0, 3.0);
        spec.rotate = trial % 2 == 0;
        const std::size_t nodes = uniform_size(rng, 2, 12);
        const auto suite = build_objectives(spec, nodes, trial);
        REQUIRE(suite.locals.size() == nodes);

        std::vector<ParamVector> samples;
        for (int s = 0; s < 5; ++s) samples.push_back(gaussian_vec(rng, spec.dim, 4.0));
        CHECK(measure_heterogeneity(suite.locals, samples) ==
              doctest::Approx(spec.zeta * spec.zeta).epsilon(1e-9));
        CHECK(squared_norm(global_gradient(suite.locals, suite.minimizer)) < 1e-20 + 1e-24);
        CHECK(suite.smoothness == spec.smoothness);
        CHECK(global_loss(suite.locals, suite.minimizer) ==
              doctest::Approx(suite.optimal_loss).epsilon(1e-12));
    }
}

TEST_CASE("gradients are L-Lipschitz and match finite differences") {
    Rng rng(22);
    ObjectiveSpec spec;
    spec.dim = 6;
    spec.smoothness = 3.0;
    spec.strong_convexity = 0.2;
    const auto suite = build_objectives(spec, 4, 5);

    ObjectiveSpec lspec;
    lspec.kind = ObjectiveKind::Logistic;
    lspec.heterogeneity = HeterogeneityKind::DirichletLabels;
    lspec.dim = 4;
    lspec.samples_per_node = 32;
    const auto logistic = build_objectives(lspec, 4, 5);

    for (const auto* s : {&suite, &logistic}) {
        for (const auto& obj : s->locals) {
            const double l = smoothness_constant(obj);
            for (int k = 0; k < 100; ++k) {
                const ParamVector t1 = gaussian_vec(rng, obj.dim(), 2.0);
                const ParamVector t2 = gaussian_vec(rng, obj.dim(), 2.0);
                CHECK(norm(true_gradient(obj, t1) - true_gradient(obj, t2)) <=
                      l * norm(t1 - t2) * (1.0 + 1e-12));
            }
            const ParamVector theta = gaussian_vec(rng, obj.dim());
            const ParamVector exact = true_gradient(obj, theta);
            const ParamVector fd = finite_difference(obj, theta, 1e-5);
            for (std::size_t c = 0; c < obj.dim(); ++c) {
                CHECK(std::abs(fd[c] - exact[c]) <= 1e-6 * std::max(1.0, std::abs(exact[c])));
            }
        }
    }
}

TEST_CASE("stochastic gradient is unbiased with total variance sigma squared") {
    const auto obj = quad(DenseMatrix::identity(3), ParamVector{1.0, -2.0, 0.5}, 1.0);
    const ParamVector theta{0.3, 0.1, -0.4};
    const ParamVector exact = true_gradient(obj, theta);

    Rng quiet(1);
    CHECK(stochastic_gradient(obj, NoiseModel{0.0, NoiseKind::Gaussian}, theta, quiet) == exact);

    for (NoiseKind kind : {NoiseKind::Gaussian, NoiseKind::UniformBall}) {
        const NoiseModel noise{2.0, kind};
        Rng rng(23);
        const int draws = 100000;
        std::vector<double> sum(3, 0.0);
        std::vector<double> sum_sq(3, 0.0);
        double total_sq = 0.0;
        for (int i = 0; i < draws; ++i) {
            const ParamVector g = stochastic_gradient(obj, noise, theta, rng);
            for (std::size_t c = 0; c < 3; ++c) {
                const double e = g[c] - exact[c];
                sum[c] += e;
                sum_sq[c] += e * e;
                total_sq += e * e;
            }
        }
        for (std::size_t c = 0; c < 3; ++c) {
            const double mean = sum[c] / draws;
            const double var = sum_sq[c] / draws - mean * mean;
            CHECK(std::abs(mean) <= 5.0 * std::sqrt(var / draws));
        }
        CHECK(total_sq / draws <= 4.0 * 1.05);
        if (kind == NoiseKind::UniformBall) {
            Rng r(24);
            for (int i = 0; i < 1000; ++i) {
                // E‖u‖² = R²·d/(d+2) for u uniform in the radius-R ball
                const double radius = 2.0 * std::sqrt(5.0 / 3.0);
                CHECK(norm(stochastic_gradient(obj, noise, theta, r) - exact) <= radius + 1e-12);
            }
        }
    }
}

TEST_CASE("gradient oracles replay bit-identically") {
    ObjectiveSpec spec;
    const auto a = build_objectives(spec, 5, 77);
    const auto b = build_objectives(spec, 5, 77);
    Rng r1(3);
    Rng r2(3);
    const ParamVector theta(spec.dim, 0.25);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(stochastic_gradient(a.locals[i], a.noise, theta, r1) ==
              stochastic_gradient(b.locals[i], b.noise, theta, r2));
    }
}

TEST_CASE("flipped quadratic centers reflect through the box midpoint") {
    const auto a = quad(DenseMatrix::identity(2), ParamVector{0.0, 4.0}, 1.0);
    const auto b = quad(DenseMatrix::identity(2), ParamVector{2.0, 0.0}, 1.0);
    const std::vector<LocalObjective> objs{a, b};
    const auto flipped = flip_labels(objs);
    // pivot p = (1, 2)
    CHECK(flipped[0].as_quadratic()->center == ParamVector{2.0, 0.0});
    CHECK(flipped[1].as_quadratic()->center == ParamVector{0.0, 4.0});
    const std::vector<LocalObjective> none;
    CHECK_THROWS_AS(flip_labels(none), UnsupportedAttackError);
}

TEST_CASE("logistic labels flip") {
    ObjectiveSpec spec;
    spec.kind = ObjectiveKind::Logistic;
    spec.heterogeneity = HeterogeneityKind::DirichletLabels;
    spec.dim = 3;
    spec.samples_per_node = 16;
    const auto suite = build_objectives(spec, 3, 9);
    const auto flipped = flip_labels(suite.locals);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& orig = suite.locals[i].as_logistic()->labels;
        const auto& flip = flipped[i].as_logistic()->labels;
        REQUIRE(orig.size() == flip.size());
        for (std::size_t s = 0; s < orig.size(); ++s) CHECK(flip[s] == 1 - orig[s]);
    }
    CHECK(squared_norm(global_gradient(suite.locals, suite.minimizer)) < 1e-12);
}

TEST_CASE("objective spec errors") {
    ObjectiveSpec spec;
    spec.strong_convexity = 2.0;  // above L
    CHECK_THROWS_AS(build_objectives(spec, 3, 0), ConfigError);
    CHECK_THROWS_AS(parse_noise_kind("cauchy"), ConfigError);
}
