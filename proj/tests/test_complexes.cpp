#include <doctest.h>

#include <random>
#include <tuple>

#include "tdac/complexes.hpp"
#include "tdac/errors.hpp"

using namespace tdac;

namespace {

GrayImage random_gray(std::size_t w, std::size_t h, std::mt19937_64& rng) {
    GrayImage g(w, h);
    std::uniform_int_distribution<int> d(0, 4);
    for (auto& v : g.values) v = d(rng);
    return g;
}

void check_nesting(const FilteredComplex& cx) {
    for (const auto& c : cx.cells)
        for (auto f : c.boundary) CHECK(cx.by_id(f).value <= c.value);
}

}  // namespace

TEST_CASE("single pixel closure") {
    GrayImage g(1, 1, 3.0);
    auto cx = build_cubical_filtration(g);
    CHECK(cx.count_dim(0) == 4);
    CHECK(cx.count_dim(1) == 4);
    CHECK(cx.count_dim(2) == 1);
    for (const auto& c : cx.cells) CHECK(c.value == 3.0);
    CHECK_NOTHROW(cx.check_filtration());
}

TEST_CASE("shared faces take the minimum") {
    GrayImage g(1, 2);
    g.at(0, 0) = 0;
    g.at(0, 1) = 1;
    auto cx = build_cubical_filtration(g);
    // the horizontal edge at y = 1 and its two vertices are shared
    std::size_t at_zero_edges = 0, at_zero_vertices = 0;
    for (const auto& c : cx.cells) {
        if (c.value != 0.0) continue;
        if (c.dim == 1) ++at_zero_edges;
        if (c.dim == 0) ++at_zero_vertices;
    }
    CHECK(at_zero_edges == 4);
    CHECK(at_zero_vertices == 4);
    CHECK(cx.max_value() == 1.0);
}

TEST_CASE("cell counts and Euler characteristic") {
    std::mt19937_64 rng(4);
    for (std::size_t w = 1; w <= 5; ++w)
        for (std::size_t h = 1; h <= 5; ++h) {
            auto cx = build_cubical_filtration(random_gray(w, h, rng));
            std::size_t v = cx.count_dim(0), e = cx.count_dim(1), s = cx.count_dim(2);
            CHECK(v == (w + 1) * (h + 1));
            CHECK(e == w * (h + 1) + h * (w + 1));
            CHECK(s == w * h);
            CHECK(static_cast<long>(v) - static_cast<long>(e) + static_cast<long>(s) == 1);
            CHECK(cx.size() == v + e + s);
        }
    CHECK(build_cubical_filtration(GrayImage(2, 2)).size() == 25);
}

TEST_CASE("cubical filtrations are nested and sorted") {
    std::mt19937_64 rng(5);
    for (int it = 0; it < 30; ++it) {
        auto cx = build_cubical_filtration(random_gray(4, 3, rng));
        CHECK_NOTHROW(cx.check_filtration());
        check_nesting(cx);
        for (const auto& c : cx.cells) CHECK(c.boundary.size() == static_cast<std::size_t>(2 * c.dim));
        for (std::size_t i = 1; i < cx.size(); ++i) {
            const auto& a = cx.cells[i - 1];
            const auto& b = cx.cells[i];
            CHECK(std::tie(a.value, a.dim, a.id) < std::tie(b.value, b.dim, b.id));
        }
    }
}

TEST_CASE("check_filtration rejects bad complexes") {
    std::vector<Cell> cells{{0, 0, {}, 1.0}, {1, 0, {}, 0.0}};
    CHECK_THROWS_AS(FilteredComplex::as_given(cells).check_filtration(), ContractError);

    std::vector<Cell> late_face{{0, 0, {}, 0.0}, {1, 1, {0, 2}, 1.0}, {2, 0, {}, 1.0}};
    CHECK_THROWS_AS(FilteredComplex::as_given(late_face).check_filtration(), ContractError);

    std::vector<Cell> wrong_dim{{0, 0, {}, 0.0}, {1, 0, {}, 0.0}, {2, 2, {0, 1}, 0.0}};
    CHECK_THROWS_AS(FilteredComplex::as_given(wrong_dim).check_filtration(), ContractError);

    std::vector<Cell> bad_ids{{0, 0, {}, 0.0}, {5, 0, {}, 0.0}};
    CHECK_THROWS_AS(FilteredComplex::as_given(bad_ids), ContractError);
}

TEST_CASE("vr examples") {
    auto two = build_vr_filtration(PointCloud::from_2d({{0, 0}, {2, 0}}), 1, 10.0);
    REQUIRE(two.size() == 3);
    CHECK(two.cells[2].dim == 1);
    CHECK(two.cells[2].value == 1.0);

    auto one = build_vr_filtration(PointCloud::from_2d({{3, 4}}), 2, 10.0);
    CHECK(one.size() == 1);
    CHECK(one.cells[0].value == 0.0);

    const double h = std::sqrt(3.0);
    auto tri = build_vr_filtration(PointCloud::from_2d({{0, 0}, {2, 0}, {1, h}}), 2, 10.0);
    REQUIRE(tri.count_dim(2) == 1);
    for (const auto& c : tri.cells)
        if (c.dim >= 1) CHECK(c.value == doctest::Approx(1.0));
    CHECK_NOTHROW(tri.check_filtration());
}

TEST_CASE("vr respects max_scale, budget and max_dim") {
    auto pc = PointCloud::from_2d({{0, 0}, {1, 0}, {5, 0}});
    auto cx = build_vr_filtration(pc, 2, 1.0);
    CHECK(cx.count_dim(1) == 1);  // 0.5 kept; 2.0 and 2.5 above scale
    CHECK(cx.count_dim(2) == 0);

    PointCloud big;
    for (int i = 0; i < 5; ++i) big.points.push_back({double(i), 0.0});
    CHECK_THROWS_AS(build_vr_filtration(big, 1, 1.0, 4), SizeError);
    CHECK_THROWS_AS(build_vr_filtration(pc, 3, 1.0), ParameterError);
    CHECK_THROWS_AS(build_vr_filtration(pc, 1, -1.0), ParameterError);
}

TEST_CASE("vr flag complex enumerates every triangle") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0, 3);
    for (int it = 0; it < 20; ++it) {
        std::vector<Point2> pts(6);
        for (auto& p : pts) p = {u(rng), u(rng)};
        auto pc = PointCloud::from_2d(pts);
        const double scale = 1.0;
        auto cx = build_vr_filtration(pc, 2, scale);
        CHECK_NOTHROW(cx.check_filtration());
        check_nesting(cx);
        std::size_t edges = 0, triangles = 0;
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = i + 1; j < 6; ++j) {
                CHECK(pc.distance(i, j) == pc.distance(j, i));
                if (pc.distance(i, j) / 2 <= scale) ++edges;
                for (std::size_t k = j + 1; k < 6; ++k)
                    if (std::max({pc.distance(i, j), pc.distance(i, k), pc.distance(j, k)}) / 2 <= scale) ++triangles;
            }
        CHECK(cx.count_dim(1) == edges);
        CHECK(cx.count_dim(2) == triangles);
        for (const auto& c : cx.cells) CHECK(c.boundary.size() == (c.dim == 0 ? 0u : static_cast<std::size_t>(c.dim + 1)));
    }
}

TEST_CASE("complex json lists cells") {
    auto cx = build_cubical_filtration(GrayImage(1, 1, 2.0));
    auto js = complex_json(cx);
    CHECK(js.front() == '[');
    CHECK(js.find("\"dim\":2") != std::string::npos);
}
