#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "wgcm/datamodel.hpp"
#include "wgcm/rng.hpp"

using namespace wgcm;

namespace {

std::string write_temp_csv(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

Dataset tiny_dataset(std::size_t n, std::uint64_t seed = 7) {
    Rng rng(seed);
    Matrix x(n, 1), y(n, 1), z(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        y(i, 0) = rng.normal();
        z(i, 0) = rng.normal();
    }
    return Dataset(std::move(x), std::move(y), std::move(z));
}

}  // namespace

TEST_SUITE("datamodel") {

TEST_CASE("load_csv parses a small file") {
    const auto path = write_temp_csv("wgcm_small.csv", "x,y,z1\n1,2,3\n4,5.5,6e0\n7,8,9\n");
    const Dataset ds = load_csv(path, {{"x"}, {"y"}, {"z1"}});
    CHECK(ds.n() == 3);
    CHECK(ds.dx() == 1);
    CHECK(ds.dy() == 1);
    CHECK(ds.dz() == 1);
    CHECK(ds.x()(1, 0) == 4.0);
    CHECK(ds.y()(1, 0) == 5.5);
    CHECK(ds.z()(1, 0) == 6.0);
    std::remove(path.c_str());
}

TEST_CASE("load_csv reports the offending cell") {
    const auto path = write_temp_csv("wgcm_bad.csv", "x,y,z\n1,2,3\n4,NA,6\n7,8,9\n");
    try {
        load_csv(path, {{"x"}, {"y"}, {"z"}});
        FAIL("expected ParseError");
    } catch (const WgcmError& e) {
        CHECK(e.kind() == ErrorKind::parse_error);
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
        CHECK(std::string(e.what()).find("'y'") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("load_csv missing column and empty data") {
    const auto path = write_temp_csv("wgcm_md.csv", "x,y,z\n1,2,3\n");
    CHECK_THROWS_WITH_AS(load_csv(path, {{"x"}, {"y"}, {"z9"}}), doctest::Contains("z9"),
                         WgcmError);
    const auto empty = write_temp_csv("wgcm_empty.csv", "x,y,z\n");
    try {
        load_csv(empty, {{"x"}, {"y"}, {"z"}});
        FAIL("expected EmptyData");
    } catch (const WgcmError& e) {
        CHECK(e.kind() == ErrorKind::empty_data);
    }
    std::remove(path.c_str());
    std::remove(empty.c_str());
}

TEST_CASE("load_csv rejects non-finite cells") {
    const auto path = write_temp_csv("wgcm_inf.csv", "x,y,z\n1,inf,3\n");
    try {
        load_csv(path, {{"x"}, {"y"}, {"z"}});
        FAIL("expected NonFinite");
    } catch (const WgcmError& e) {
        CHECK(e.kind() == ErrorKind::non_finite);
    }
    std::remove(path.c_str());
}

TEST_CASE("split sizes follow the floor rule") {
    const Dataset ds = tiny_dataset(10);
    const SplitPlan plan = split(ds, 0.3, 42);
    CHECK(plan.indices_a.size() == 3);
    CHECK(plan.indices_main.size() == 7);

    const SplitPlan tiny = split(ds, 0.05, 42);
    CHECK(tiny.indices_a.size() == 1);
}

TEST_CASE("split is deterministic and partitions the rows") {
    for (std::uint64_t seed : {1ull, 99ull, 123456789ull}) {
        for (std::size_t n : {2ull, 7ull, 31ull, 100ull}) {
            const Dataset ds = tiny_dataset(n, seed + n);
            const SplitPlan a = split(ds, 0.3, seed);
            const SplitPlan b = split(ds, 0.3, seed);
            CHECK(a.indices_a == b.indices_a);
            CHECK(a.indices_main == b.indices_main);

            std::set<std::size_t> all(a.indices_a.begin(), a.indices_a.end());
            all.insert(a.indices_main.begin(), a.indices_main.end());
            CHECK(all.size() == n);
            CHECK(*all.rbegin() == n - 1);
            CHECK(a.indices_a.size() + a.indices_main.size() == n);
        }
    }
}

TEST_CASE("different seeds give different shuffles") {
    const Dataset ds = tiny_dataset(64);
    const SplitPlan a = split(ds, 0.5, 1);
    const SplitPlan b = split(ds, 0.5, 2);
    CHECK(a.indices_a != b.indices_a);
}

TEST_CASE("subset selects rows in order, bitwise") {
    const Dataset ds = tiny_dataset(3);
    const Dataset sub = subset(ds, {2, 0});
    CHECK(sub.n() == 2);
    CHECK(sub.x()(0, 0) == ds.x()(2, 0));
    CHECK(sub.x()(1, 0) == ds.x()(0, 0));
    CHECK(sub.z()(0, 0) == ds.z()(2, 0));

    std::vector<std::size_t> all{0, 1, 2};
    const Dataset same = subset(ds, all);
    CHECK(same.x() == ds.x());
    CHECK(same.y() == ds.y());
    CHECK(same.z() == ds.z());
}

TEST_CASE("subset error paths") {
    const Dataset ds = tiny_dataset(3);
    try {
        subset(ds, {});
        FAIL("expected EmptyData");
    } catch (const WgcmError& e) {
        CHECK(e.kind() == ErrorKind::empty_data);
    }
    try {
        subset(ds, {3});
        FAIL("expected IndexOutOfRange");
    } catch (const WgcmError& e) {
        CHECK(e.kind() == ErrorKind::index_out_of_range);
    }
}

TEST_CASE("split round trip through subset matches original rows") {
    const Dataset ds = tiny_dataset(20, 5);
    const SplitPlan plan = split(ds, 0.35, 11);
    const Dataset part = subset(ds, plan.indices_a);
    for (std::size_t i = 0; i < plan.indices_a.size(); ++i) {
        CHECK(part.x()(i, 0) == ds.x()(plan.indices_a[i], 0));
        CHECK(part.y()(i, 0) == ds.y()(plan.indices_a[i], 0));
        CHECK(part.z()(i, 0) == ds.z()(plan.indices_a[i], 0));
    }
}

TEST_CASE("degenerate splits are rejected") {
    const Dataset two = tiny_dataset(2);
    const SplitPlan ok = split(two, 0.5, 1);
    CHECK(ok.indices_a.size() == 1);
    CHECK(ok.indices_main.size() == 1);

    const Dataset one = tiny_dataset(1);
    try {
        split(one, 0.5, 1);
        FAIL("expected DegenerateSplit");
    } catch (const WgcmError& e) {
        CHECK(e.kind() == ErrorKind::degenerate_split);
    }
    CHECK_THROWS_AS(split(two, 1.0, 1), WgcmError);
}

TEST_CASE("dataset construction rejects NaN") {
    Matrix x(2, 1), y(2, 1), z(2, 1);
    x(0, 0) = std::nan("");
    CHECK_THROWS_AS(Dataset(x, y, z), WgcmError);
}

}  // TEST_SUITE
