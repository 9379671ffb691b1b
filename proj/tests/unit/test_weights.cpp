#include <doctest.h>

#include <cmath>

#include "wgcm/rng.hpp"
#include "wgcm/weights.hpp"

using namespace wgcm;

namespace {

Matrix column_matrix(const std::vector<double>& values) {
    Matrix m(values.size(), 1);
    for (std::size_t i = 0; i < values.size(); ++i) m(i, 0) = values[i];
    return m;
}

Dataset univariate_dataset(const std::vector<double>& x, const std::vector<double>& y,
                           const std::vector<double>& z) {
    return Dataset(column_matrix(x), column_matrix(y), column_matrix(z));
}

RegressorSpec mean_spec() {
    RegressorSpec spec;
    spec.kind = RegressorKind::mean_only;
    return spec;
}

}  // namespace

TEST_SUITE("weights") {

TEST_CASE("axis sign convention: -1 below, +1 at and above the threshold") {
    const WeightFunction w = WeightFunction::axis_sign(0, 2.0);
    const double below[] = {1.5};
    const double at[] = {2.0};
    const double above[] = {2.5};
    CHECK(eval_weight(w, below) == -1.0);
    CHECK(eval_weight(w, at) == 1.0);
    CHECK(eval_weight(w, above) == 1.0);

    const WeightFunction one = WeightFunction::constant_one();
    CHECK(eval_weight(one, below) == 1.0);
}

TEST_CASE("axis sign flips antisymmetrically around the threshold") {
    const WeightFunction w = WeightFunction::axis_sign(0, 0.7);
    for (double delta : {1e-9, 0.1, 3.0}) {
        const double lo[] = {0.7 - delta};
        const double hi[] = {0.7 + delta};
        CHECK(eval_weight(w, lo) == -eval_weight(w, hi));
    }
}

TEST_CASE("quantile grid sizes match k0*dZ + 1") {
    std::vector<double> z1(100);
    for (std::size_t i = 0; i < 100; ++i) z1[i] = static_cast<double>(i + 1);
    const WeightGrid g1 = quantile_sign_grid(column_matrix(z1), 7);
    CHECK(g1.size() == 8);
    CHECK(g1.functions.front().form() == WeightForm::constant_one);

    Rng rng(5);
    Matrix z10(200, 10);
    for (std::size_t i = 0; i < 200; ++i) {
        for (std::size_t d = 0; d < 10; ++d) z10(i, d) = rng.normal();
    }
    const WeightGrid g10 = quantile_sign_grid(z10, 7);
    CHECK(g10.size() == 71);
}

TEST_CASE("quantile grid thresholds follow the order-statistic rule") {
    const WeightGrid grid = quantile_sign_grid(column_matrix({1, 2, 3, 4, 5, 6, 7, 8}), 3);
    REQUIRE(grid.size() == 4);
    CHECK(grid.functions[1].threshold() == 2.0);
    CHECK(grid.functions[2].threshold() == 4.0);
    CHECK(grid.functions[3].threshold() == 6.0);
}

TEST_CASE("grid thresholds are nondecreasing within each dimension") {
    Rng rng(9);
    Matrix z(77, 3);
    for (std::size_t i = 0; i < 77; ++i) {
        for (std::size_t d = 0; d < 3; ++d) z(i, d) = rng.normal() * (1.0 + 2.0 * d);
    }
    const WeightGrid grid = quantile_sign_grid(z, 5);
    double prev = -1e300;
    std::size_t prev_dim = 0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const auto& w = grid.functions[k];
        if (w.dim() != prev_dim) {
            prev = -1e300;
            prev_dim = w.dim();
        }
        CHECK(w.threshold() >= prev);
        prev = w.threshold();
    }
}

TEST_CASE("duplicate thresholds are deduplicated") {
    const WeightGrid grid = quantile_sign_grid(column_matrix({1, 1, 1, 1, 1, 1, 1, 1}), 3);
    CHECK(grid.size() == 2);  // constant + one distinct cut
}

TEST_CASE("estimated sign weight with constant-h regression is a global sign") {
    Rng rng(41);
    std::vector<double> z(30), x(30), y(30);
    for (std::size_t i = 0; i < 30; ++i) {
        z[i] = rng.normal();
        x[i] = rng.normal() + 1.0;
        y[i] = 0.7 * x[i];
    }
    // mean_only residual products average strictly positive here
    const Dataset ds = univariate_dataset(x, y, z);
    const WeightFunction w = estimate_sign_weight(ds, mean_spec(), mean_spec());
    for (double q : {-3.0, 0.0, 2.5}) {
        const double zq[] = {q};
        CHECK(eval_weight(w, zq) == 1.0);
    }

    std::vector<double> y_neg(30);
    for (std::size_t i = 0; i < 30; ++i) y_neg[i] = -0.7 * x[i];
    const Dataset ds_neg = univariate_dataset(x, y_neg, z);
    const WeightFunction w_neg = estimate_sign_weight(ds_neg, mean_spec(), mean_spec());
    const double zq[] = {0.3};
    CHECK(eval_weight(w_neg, zq) == -1.0);
}

TEST_CASE("every weight form stays inside its bound") {
    Rng rng(4242);
    std::vector<double> zs(40), xs(40), ys(40);
    for (std::size_t i = 0; i < 40; ++i) {
        zs[i] = rng.normal();
        xs[i] = zs[i] + 0.3 * rng.normal();
        ys[i] = zs[i] * zs[i] + 0.3 * rng.normal();
    }
    RegressorSpec knn;
    knn.kind = RegressorKind::knn;
    knn.knn.k = 3;
    const WeightFunction estimated =
        estimate_sign_weight(univariate_dataset(xs, ys, zs), knn, knn);
    const WeightFunction cut = WeightFunction::axis_sign(0, 0.1);
    const WeightFunction one = WeightFunction::constant_one();
    for (int i = 0; i < 1000; ++i) {
        const double q[] = {rng.normal() * 4.0};
        for (const auto* w : {&estimated, &cut, &one}) {
            const double v = eval_weight(*w, q);
            CHECK(std::abs(v) <= w->bound());
        }
    }
}

TEST_CASE("weight estimation needs a minimum sample") {
    std::vector<double> tiny(5, 1.0);
    const Dataset ds = univariate_dataset(tiny, tiny, tiny);
    try {
        estimate_sign_weight(ds, mean_spec(), mean_spec());
        FAIL("expected TooFewSamples");
    } catch (const WgcmError& e) {
        CHECK(e.kind() == ErrorKind::too_few_samples);
    }
}

TEST_CASE("grid serializes to JSON descriptors") {
    const WeightGrid grid = quantile_sign_grid(column_matrix({1, 2, 3, 4, 5, 6, 7, 8}), 3);
    const std::string json = grid.to_json_string();
    CHECK(json.find("\"const\"") != std::string::npos);
    CHECK(json.find("\"axis_sign\"") != std::string::npos);
    CHECK(json.find("\"threshold\"") != std::string::npos);
}

}  // TEST_SUITE
