#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <algorithm>

#include "mscluster/error.hpp"
#include "mscluster/util.hpp"

using namespace mscluster;

TEST_CASE("format_double round-trips") {
    for (double v : {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, std::nextafter(1.0, 2.0)}) {
        double back = 0;
        REQUIRE(parse_double(format_double(v), back));
        CHECK(std::signbit(back) == std::signbit(v));
        CHECK(back == v);
    }
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("parse_double is strict") {
    double v = 0;
    CHECK_FALSE(parse_double("", v));
    CHECK_FALSE(parse_double("1.0x", v));
    CHECK_FALSE(parse_double(" 1", v));
    CHECK(parse_double("-3e2", v));
    CHECK(v == -300.0);
}

TEST_CASE("sha256 of known strings") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("parallel_for covers every index and rethrows") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, 4);
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 7) throw ValidationError("seven"); }, 3),
                    ValidationError);
}

TEST_CASE("stable_shuffle is reproducible") {
    std::vector<int> a(20), b(20);
    std::iota(a.begin(), a.end(), 0);
    b = a;
    std::mt19937_64 r1(42), r2(42);
    stable_shuffle(a, r1);
    stable_shuffle(b, r2);
    CHECK(a == b);
    std::vector<int> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 20; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("write_file creates parent folders") {
    const auto dir = std::filesystem::temp_directory_path() / "mscluster_util_test";
    std::filesystem::remove_all(dir);
    write_file(dir / "a" / "b.txt", "hello");
    CHECK(read_file(dir / "a" / "b.txt") == "hello");
    CHECK_THROWS_AS(read_file(dir / "missing"), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("split_fields") {
    const auto f = split_fields("  a\tb   c ");
    REQUIRE(f.size() == 3);
    CHECK(f[0] == "a");
    CHECK(f[2] == "c");
}
