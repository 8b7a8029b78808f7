#include <doctest.h>

#include <cmath>
#include <limits>

#include "monna/errors.hpp"
#include "monna/param_vector.hpp"
#include "monna/rng.hpp"

using namespace monna;

TEST_CASE("arithmetic is element-wise") {
    ParamVector a{1.0, 2.0, 3.0};
    const ParamVector b{0.5, -1.0, 4.0};
    CHECK(a + b == ParamVector{1.5, 1.0, 7.0});
    CHECK(a - b == ParamVector{0.5, 3.0, -1.0});
    CHECK(2.0 * a == ParamVector{2.0, 4.0, 6.0});
    a.axpy(-2.0, b);
    CHECK(a == ParamVector{0.0, 4.0, -5.0});
    a /= 2.0;
    CHECK(a == ParamVector{0.0, 2.0, -2.5});
}

TEST_CASE("norms and distances") {
    const ParamVector a{3.0, 4.0};
    CHECK(squared_norm(a) == 25.0);
    CHECK(norm(a) == 5.0);
    CHECK(dot(a, ParamVector{1.0, 1.0}) == 7.0);
    CHECK(squared_distance(a, ParamVector{0.0, 0.0}) == 25.0);
}

TEST_CASE("shape mismatches throw") {
    ParamVector a{1.0, 2.0};
    const ParamVector b{1.0};
    CHECK_THROWS_AS(a += b, DimensionError);
    CHECK_THROWS_AS(squared_distance(a, b), DimensionError);
    CHECK_THROWS_AS(dot(a, b), DimensionError);
    const std::vector<ParamVector> empty;
    CHECK_THROWS_AS(mean_of(empty), DimensionError);
    const std::vector<ParamVector> mixed{a, b};
    CHECK_THROWS_AS(require_dim(mixed, 2, "test"), DimensionError);
}

TEST_CASE("mean_of sums in list order") {
    const std::vector<ParamVector> vs{{1.0}, {2.0}, {6.0}};
    CHECK(mean_of(vs) == ParamVector{3.0});
}

TEST_CASE("all_finite") {
    CHECK(ParamVector{1.0, 2.0}.all_finite());
    CHECK_FALSE(ParamVector{1.0, std::numeric_limits<double>::quiet_NaN()}.all_finite());
    CHECK_FALSE(ParamVector{std::numeric_limits<double>::infinity()}.all_finite());
}

TEST_CASE("derived streams are stable and distinct") {
    CHECK(derive_seed(1, StreamKind::Gradient, 0) == derive_seed(1, StreamKind::Gradient, 0));
    CHECK(derive_seed(1, StreamKind::Gradient, 0) != derive_seed(1, StreamKind::Gradient, 1));
    CHECK(derive_seed(1, StreamKind::Gradient, 0) != derive_seed(1, StreamKind::Delivery, 0));
    CHECK(derive_seed(1, StreamKind::Gradient, 0) != derive_seed(2, StreamKind::Gradient, 0));
    Rng a = make_stream(7, StreamKind::Output, 3);
    Rng b = make_stream(7, StreamKind::Output, 3);
    for (int i = 0; i < 10; ++i) CHECK(a() == b());
}
