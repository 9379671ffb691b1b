#include <doctest.h>

#include <cmath>

#include "wgcm/citests.hpp"
#include "wgcm/simlab.hpp"

using namespace wgcm;

namespace {

SimSetting motivating(double lambda, std::size_t n, std::uint64_t seed) {
    SimSetting s;
    s.family = SimFamily::motivating;
    s.lambda = lambda;
    s.n = n;
    s.seed = seed;
    return s;
}

}  // namespace

TEST_SUITE("simlab") {

TEST_CASE("h_lambda frozen values") {
    CHECK(h_lambda(3.0, 1.0) == 3.0);
    CHECK(h_lambda(3.0, 0.0) == 4.5);
    CHECK(h_lambda(3.0, 0.5) == 3.75);
    CHECK_THROWS_AS(h_lambda(1.0, -0.1), WgcmError);
    CHECK_THROWS_AS(h_lambda(1.0, 1.1), WgcmError);
}

TEST_CASE("h_b frozen identities") {
    for (double b1 : {0.0, 0.3, 1.0}) {
        CHECK(h_b(0.0, b1, 0.0) == 0.0);
    }
    // b2 = 0 reduces to the piecewise-linear part
    for (double t : {-2.0, -0.5, 0.0, 1.0, 3.0}) {
        const double expected = 0.3 * (0.4 * std::abs(t) + 0.6 * t);
        CHECK(h_b(t, 0.4, 0.0) == doctest::Approx(expected).epsilon(1e-15));
    }
    // oscillating part at t=0 equals b1
    const double h1_at_zero = (0.7 * 1.0 + 0.3 * 0.0) * 1.0;
    const double got = h_b(0.0, 0.7, 1.0);  // (1-b2)*h2(0) - b2*h1(0) = -h1(0)
    CHECK(got == doctest::Approx(-h1_at_zero).epsilon(1e-15));
}

TEST_CASE("h_b is continuous on a grid") {
    for (double b1 : {0.0, 0.5, 1.0}) {
        for (double b2 : {0.0, 0.5, 1.0}) {
            for (double t = -4.0; t < 4.0; t += 0.01) {
                const double delta = std::abs(h_b(t + 1e-7, b1, b2) - h_b(t, b1, b2));
                CHECK(delta < 1e-5);
            }
        }
    }
}

TEST_CASE("generators are deterministic and shaped correctly") {
    const Dataset a = generate(motivating(0.5, 5, 99));
    const Dataset b = generate(motivating(0.5, 5, 99));
    CHECK(a.n() == 5);
    CHECK(a.dx() == 1);
    CHECK(a.dy() == 1);
    CHECK(a.dz() == 1);
    CHECK(a.x() == b.x());
    CHECK(a.y() == b.y());
    CHECK(a.z() == b.z());

    const Dataset c = generate(motivating(0.5, 5, 100));
    CHECK(a.x() != c.x());
}

TEST_CASE("ten-dimensional settings expose dZ = 10") {
    SimSetting s;
    s.family = SimFamily::s10d_add;
    s.b1 = 0.5;
    s.b2 = 0.5;
    s.n = 100;
    s.seed = 3;
    const Dataset add = generate(s);
    CHECK(add.dz() == 10);
    CHECK(add.dx() == 1);
    s.family = SimFamily::s10d_nonadd;
    const Dataset nonadd = generate(s);
    CHECK(nonadd.dz() == 10);
}

TEST_CASE("example74 produces d predictors and the product response") {
    SimSetting s;
    s.family = SimFamily::example74;
    s.d = 10;
    s.n = 50;
    s.seed = 8;
    const Dataset ds = generate(s);
    CHECK(ds.dx() == 10);
    CHECK(ds.dy() == 1);
    // response reconstructs from the stored predictors up to the noise draw
    SimSetting s2 = s;
    const Dataset ds2 = generate(s2);
    CHECK(ds.y() == ds2.y());
}

TEST_CASE("marginal sanity of the generators") {
    const std::size_t n = 10000;
    const Dataset ds = generate(motivating(0.0, n, 1234));
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += ds.z()(i, 0);
    mean /= static_cast<double>(n);
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        var += (ds.z()(i, 0) - mean) * (ds.z()(i, 0) - mean);
    }
    var /= static_cast<double>(n - 1);
    CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("the (c1,c2) alternative is an additive modification") {
    SimSetting base;
    base.family = SimFamily::s1d;
    base.b1 = 0.5;
    base.b2 = 0.25;
    base.n = 64;
    base.seed = 777;
    SimSetting alt = base;
    alt.alternative = std::make_pair(0.6, 0.4);
    const Dataset null_ds = generate(base);
    const Dataset alt_ds = generate(alt);
    CHECK(null_ds.x() == alt_ds.x());
    CHECK(null_ds.z() == alt_ds.z());
    for (std::size_t i = 0; i < base.n; ++i) {
        // the alternative is exactly one extra addition on top of the null draw
        const double expected = null_ds.y()(i, 0) + h_b(null_ds.x()(i, 0), 0.6, 0.4);
        CHECK(alt_ds.y()(i, 0) == expected);
    }
}

TEST_CASE("rejection_rate with a constant-p runner") {
    const auto always_one = [](const Dataset&, std::uint64_t) { return 1.0; };
    const auto res = rejection_rate(motivating(0.5, 20, 5), always_one, 0.05, 1, 9);
    CHECK(res.rate == 0.0);
    CHECK(res.reject_count == 0);

    const auto always_tiny = [](const Dataset&, std::uint64_t) { return 1e-6; };
    const auto res2 = rejection_rate(motivating(0.5, 20, 5), always_tiny, 0.05, 7, 9);
    CHECK(res2.rate == 1.0);
    CHECK(res2.reject_count == 7);
}

TEST_CASE("rejection_rate is deterministic and thread invariant") {
    TestConfig config;
    config.method = Method::gcm;
    RegressorSpec knn;
    knn.kind = RegressorKind::knn;
    knn.knn.k = 5;
    config.reg = knn;
    config.reg_h = knn;
    const auto runner = make_test_runner(config);
    const auto a = rejection_rate(motivating(0.0, 40, 2), runner, 0.05, 10, 321, 1);
    const auto b = rejection_rate(motivating(0.0, 40, 2), runner, 0.05, 10, 321, 4);
    REQUIRE(a.per_replicate.size() == b.per_replicate.size());
    for (std::size_t r = 0; r < a.per_replicate.size(); ++r) {
        CHECK(a.per_replicate[r].p == b.per_replicate[r].p);
        CHECK(a.per_replicate[r].dataset_seed == b.per_replicate[r].dataset_seed);
    }
}

TEST_CASE("failed replicates are excluded from the denominator") {
    int call = 0;
    const auto flaky = [&call](const Dataset&, std::uint64_t) -> double {
        if (++call % 2 == 0) {
            throw WgcmError(ErrorKind::degenerate_residuals, "synthetic failure");
        }
        return 0.01;
    };
    const auto res = rejection_rate(motivating(0.5, 20, 5), flaky, 0.05, 10, 11, 1);
    CHECK(res.n_failed == 5);
    CHECK(res.reject_count == 5);
    CHECK(res.rate == 1.0);
}

TEST_CASE("invalid settings are rejected") {
    SimSetting bad;
    bad.family = SimFamily::s1d;
    bad.b1 = 1.5;
    bad.n = 10;
    CHECK_THROWS_AS(generate(bad), WgcmError);
    SimSetting small;
    small.family = SimFamily::example74;
    small.d = 2;
    small.n = 10;
    CHECK_THROWS_AS(generate(small), WgcmError);
    const auto noop = [](const Dataset&, std::uint64_t) { return 1.0; };
    CHECK_THROWS_AS(rejection_rate(motivating(0.5, 10, 1), noop, 0.05, 0, 1), WgcmError);
}

}  // TEST_SUITE
