#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cpmes/common.hpp"

using namespace cpmes;

TEST_CASE("derived rng streams are stable and independent") {
    Rng a = Rng::derive(42, 7, 3);
    Rng b = Rng::derive(42, 7, 3);
    for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng c = Rng::derive(42, 7, 4);
    Rng d = Rng::derive(42, 8, 3);
    CHECK(Rng::derive(42, 7, 3).next_u64() != c.next_u64());
    CHECK(Rng::derive(42, 7, 3).next_u64() != d.next_u64());
}

TEST_CASE("uniform draws stay in range") {
    Rng rng(123);
    for (int i = 0; i < 1000; ++i) {
        double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        double v = rng.uniform_pos();
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
        auto k = rng.uniform_int(7ull);
        CHECK(k < 7);
    }
}

TEST_CASE("normal draws have sane moments") {
    Rng rng(9);
    const int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.02);
}

TEST_CASE("normal cdf reference values") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(2.0) == doctest::Approx(0.9772498680518208).epsilon(1e-12));
    CHECK(normal_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
}

TEST_CASE("lattice indexing round-trips") {
    auto lat = DesignLattice::regular(101, 3);
    CHECK(lat.size() == 404);
    for (std::size_t i = 0; i < lat.size(); i += 17) CHECK(lat.index_of(lat.at(i)) == i);
    CHECK(lat.at(0) == DesignPoint{0.0, 0});
    CHECK(lat.at(lat.size() - 1) == DesignPoint{1.0, 3});
    CHECK_THROWS_AS(lat.index_of(DesignPoint{0.005, 1}), std::invalid_argument);
    CHECK_THROWS_AS(lat.index_of(DesignPoint{0.5, 4}), std::invalid_argument);
}

TEST_CASE("lattice snap picks the nearest grid design") {
    auto lat = DesignLattice::regular(11, 3);
    CHECK(lat.snap(0.32, 2) == DesignPoint{0.3, 2});
    CHECK(lat.snap(-0.4, -2) == DesignPoint{0.0, 0});
    CHECK(lat.snap(1.7, 9) == DesignPoint{1.0, 3});
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.0, 1.0, -2.5, 0.1, 1e-300, 3.141592653589793, 255.53}) {
        std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}
