#include <doctest.h>

#include <cmath>

#include "wgcm/gaussmax.hpp"
#include "wgcm/normal.hpp"
#include "wgcm/rng.hpp"

using namespace wgcm;

namespace {

CorrelationMatrix identity_sigma(std::size_t k) {
    Matrix m(k, k, 0.0);
    for (std::size_t i = 0; i < k; ++i) m(i, i) = 1.0;
    return CorrelationMatrix::checked(std::move(m));
}

CorrelationMatrix all_ones_sigma(std::size_t k) {
    Matrix m(k, k, 1.0);
    return CorrelationMatrix::checked(std::move(m));
}

ResidualProducts make_rp(std::vector<double> r) {
    ResidualProducts rp;
    rp.r = std::move(r);
    return rp;
}

}  // namespace

TEST_SUITE("gaussmax") {

TEST_CASE("two-sided normal p frozen values") {
    CHECK(normal_two_sided_p(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(normal_two_sided_p(1.959964) == doctest::Approx(0.05).epsilon(2e-5));
    CHECK(normal_two_sided_p(-1.959964) == doctest::Approx(0.05).epsilon(2e-5));
    CHECK(normal_two_sided_p(2.575829) == doctest::Approx(0.01).epsilon(2e-4));
}

TEST_CASE("normal quantile matches the CDF (round trip)") {
    for (double p : {1e-8, 1e-4, 0.01, 0.2, 0.5, 0.8, 0.975, 0.995, 1.0 - 1e-7}) {
        const double x = normal_quantile(p);
        CHECK(normal_cdf(x) == doctest::Approx(p).epsilon(1e-10));
    }
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(normal_quantile(0.995) == doctest::Approx(2.5758293035489004).epsilon(1e-12));
}

TEST_CASE("bonferroni p frozen values") {
    CHECK(bonferroni_p(1.959964, 8) == doctest::Approx(0.4).epsilon(1e-4));
    CHECK(bonferroni_p(1.5, 1) == normal_two_sided_p(1.5));
    CHECK(bonferroni_p(0.0, 3) == 1.0);
    CHECK_THROWS_AS(bonferroni_p(-1.0, 3), WgcmError);
    CHECK_THROWS_AS(normal_two_sided_p(std::nan("")), WgcmError);
}

TEST_CASE("identity sigma factorizes without jitter") {
    const auto sampler = build_sampler(identity_sigma(3), 100, 1);
    CHECK(sampler.jitter_used() == 0.0);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(sampler.cholesky_factor()(i, j) == (i == j ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("rank-deficient sigma needs jitter and stays faithful") {
    const auto sampler = build_sampler(all_ones_sigma(2), 100, 1);
    CHECK(sampler.jitter_used() > 0.0);
    CHECK(sampler.jitter_used() <= 1e-6);
    const Matrix& l = sampler.cholesky_factor();
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            double v = 0.0;
            for (std::size_t t = 0; t < 2; ++t) v += l(i, t) * l(j, t);
            const double expected = (i == j) ? 1.0 + sampler.jitter_used() : 1.0;
            CHECK(std::abs(v - expected) < 1e-8);
        }
    }
}

TEST_CASE("comonotone max matches the single-coordinate tail") {
    const auto sampler = build_sampler(all_ones_sigma(2), 40000, 7);
    const double s = 1.959964;
    const auto [p, se] = gaussian_max_p(sampler, s);
    CHECK(std::abs(p - normal_two_sided_p(s)) <= 3.0 * se + 1e-3);
}

TEST_CASE("gaussian max p is deterministic and positive") {
    const auto a = build_sampler(identity_sigma(4), 5000, 99);
    const auto b = build_sampler(identity_sigma(4), 5000, 99);
    const auto pa = gaussian_max_p(a, 2.0);
    const auto pb = gaussian_max_p(b, 2.0);
    CHECK(pa.p_hat == pb.p_hat);
    CHECK(gaussian_max_p(a, 1e9).p_hat > 0.0);
}

TEST_CASE("threaded sampling matches serial sampling") {
    const auto serial = build_sampler(identity_sigma(5), 4000, 123, 1);
    const auto threaded = build_sampler(identity_sigma(5), 4000, 123, 4);
    CHECK(serial.sorted_max_samples() == threaded.sorted_max_samples());
}

TEST_CASE("p is nonincreasing in s on a fixed draw set") {
    const auto sampler = build_sampler(identity_sigma(3), 10000, 5);
    double prev = 2.0;
    for (double s = 0.0; s < 4.0; s += 0.25) {
        const double p = gaussian_max_p(sampler, s).p_hat;
        CHECK(p <= prev);
        prev = p;
    }
}

TEST_CASE("K=1 quantile approximates the normal quantile") {
    const auto sampler = build_sampler(identity_sigma(1), 100000, 31);
    CHECK(gaussian_max_quantile(sampler, 0.95) == doctest::Approx(1.959964).epsilon(0.011));
}

TEST_CASE("quantile is monotone and tops out at the sample maximum") {
    const auto sampler = build_sampler(identity_sigma(2), 10000, 8);
    double prev = 0.0;
    for (double a = 0.05; a < 1.0; a += 0.05) {
        const double q = gaussian_max_quantile(sampler, a);
        CHECK(q >= prev);
        prev = q;
    }
    CHECK(gaussian_max_quantile(sampler, 0.9999) == sampler.sorted_max_samples().back());
}

TEST_CASE("p/quantile duality on the shared draw set") {
    const auto sampler = build_sampler(identity_sigma(4), 20000, 77);
    for (double alpha : {0.01, 0.05, 0.1}) {
        const double q = gaussian_max_quantile(sampler, 1.0 - alpha);
        const auto [p, se] = gaussian_max_p(sampler, q);
        CHECK(std::abs(p - alpha) <= 2.0 / 20000.0 + 3.0 * se);
    }
}

TEST_CASE("dominance against bonferroni on random correlated instances") {
    Rng rng(515);
    for (int rep = 0; rep < 25; ++rep) {
        const std::size_t k = 3 + (rep % 3) * 2;
        const std::size_t n = 60;
        std::vector<double> eps(n), xi(n), z(n);
        for (std::size_t i = 0; i < n; ++i) {
            eps[i] = rng.normal();
            xi[i] = rng.normal();
            z[i] = rng.normal();
        }
        std::vector<ResidualProducts> rps;
        std::vector<TestStatistic> stats;
        for (std::size_t a = 0; a < k; ++a) {
            const double cut = rng.normal();
            std::vector<double> r(n);
            for (std::size_t i = 0; i < n; ++i) {
                r[i] = eps[i] * xi[i] * (z[i] < cut ? -1.0 : 1.0);
            }
            rps.push_back(make_rp(std::move(r)));
            stats.push_back(t_statistic(rps.back()));
        }
        const double s = max_abs_statistic(stats);
        const auto sampler = build_sampler(correlation_matrix(rps), 8000, 1000 + rep);
        const auto [p, se] = gaussian_max_p(sampler, s);
        CHECK(p <= bonferroni_p(s, static_cast<int>(k)) + 3.0 * se);
    }
}

TEST_CASE("hopeless matrices raise NotDecomposable") {
    // entries all valid, but the matrix is indefinite far beyond jitter repair
    Matrix bad(3, 3, -0.9);
    for (std::size_t i = 0; i < 3; ++i) bad(i, i) = 1.0;
    const auto sigma = CorrelationMatrix::checked(std::move(bad));
    try {
        build_sampler(sigma, 100, 1);
        FAIL("expected NotDecomposable");
    } catch (const WgcmError& e) {
        CHECK(e.kind() == ErrorKind::not_decomposable);
    }
}

}  // TEST_SUITE
