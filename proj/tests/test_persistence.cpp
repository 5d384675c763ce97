#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "oracle.hpp"
#include "tdac/errors.hpp"
#include "tdac/persistence.hpp"

using namespace tdac;

namespace {

PersistenceDiagram cubical(const GrayImage& g, PersistenceOptions o = {}) {
    return compute_persistence(build_cubical_filtration(g), o);
}

GrayImage random_gray(std::size_t w, std::size_t h, std::mt19937_64& rng, int levels) {
    GrayImage g(w, h);
    std::uniform_int_distribution<int> d(0, levels - 1);
    for (auto& v : g.values) v = d(rng);
    return g;
}

// Random simplicial complex on a few vertices with values built upward
// from random vertex values, so faces never enter after cofaces.
FilteredComplex random_simplicial(std::mt19937_64& rng) {
    const std::size_t nv = 3 + rng() % 5;
    std::uniform_int_distribution<int> d(0, 5);
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < nv; ++i) cells.push_back({static_cast<CellId>(i), 0, {}, double(d(rng))});
    std::map<std::pair<std::size_t, std::size_t>, CellId> edge_id;
    for (std::size_t i = 0; i < nv; ++i)
        for (std::size_t j = i + 1; j < nv; ++j) {
            if (rng() % 3 == 0) continue;
            auto id = static_cast<CellId>(cells.size());
            double v = std::max(cells[i].value, cells[j].value) + double(rng() % 3);
            cells.push_back({id, 1, {CellId(i), CellId(j)}, v});
            edge_id[{i, j}] = id;
        }
    for (std::size_t i = 0; i < nv; ++i)
        for (std::size_t j = i + 1; j < nv; ++j)
            for (std::size_t k = j + 1; k < nv; ++k) {
                auto a = edge_id.find({i, j}), b = edge_id.find({i, k}), c = edge_id.find({j, k});
                if (a == edge_id.end() || b == edge_id.end() || c == edge_id.end() || rng() % 2) continue;
                double v = std::max({cells[a->second].value, cells[b->second].value, cells[c->second].value}) +
                           double(rng() % 2);
                cells.push_back({static_cast<CellId>(cells.size()), 2, {a->second, b->second, c->second}, v});
            }
    return FilteredComplex::sorted(std::move(cells));
}

}  // namespace

TEST_CASE("empty complex gives an empty diagram") {
    auto pd = compute_persistence(FilteredComplex::sorted({}));
    CHECK(pd.empty());
}

TEST_CASE("two-pixel height example") {
    BinaryImage img(2, 1);
    img.set(0, 0);
    img.set(1, 0);
    auto pd = compute_persistence(build_cubical_filtration(height_filtration(img, Direction(1, 0))));
    REQUIRE(pd[0].size() == 1);
    CHECK(pd[0][0].birth == 0.0);
    CHECK(pd[0][0].essential());
    CHECK(pd[1].empty());
}

TEST_CASE("L-shaped image has one essential component") {
    BinaryImage img(2, 2);
    img.set(0, 0);
    img.set(1, 0);
    img.set(0, 1);
    auto pd = compute_persistence(build_cubical_filtration(height_filtration(img, Direction(0, 1))));
    CHECK(std::count_if(pd[0].begin(), pd[0].end(), [](const auto& p) { return p.essential(); }) == 1);
    CHECK(pd == oracle::cubical_diagram(height_filtration(img, Direction(0, 1))));
}

TEST_CASE("hollow square under radial filtration has one loop") {
    BinaryImage img(5, 5);
    for (std::size_t i = 0; i < 5; ++i) {
        img.set(i, 0);
        img.set(i, 4);
        img.set(0, i);
        img.set(4, i);
    }
    auto g = radial_filtration(img, Center{2, 2});
    auto pd = compute_persistence(build_cubical_filtration(g));
    REQUIRE(pd[1].size() == 1);
    // Side pixels at distance sqrt(5) already touch diagonally at the inner
    // corners, so the loop closes before the corner pixels (2 sqrt 2) enter.
    double r_inf = *std::max_element(g.values.begin(), g.values.end());
    CHECK(pd[1][0].birth == doctest::Approx(std::sqrt(5.0)));
    CHECK(pd[1][0].death == doctest::Approx(r_inf));
    CHECK(pd == oracle::cubical_diagram(g));

    // 3x3 ring: the four side pixels at distance 1 already enclose the center
    BinaryImage thin(3, 3);
    for (std::size_t i = 0; i < 9; ++i) thin.pixels[i] = i == 4 ? 0 : 1;
    auto t = radial_filtration(thin, Center{1, 1});
    auto tp = compute_persistence(build_cubical_filtration(t));
    REQUIRE(tp[1].size() == 1);
    CHECK(tp[1][0].birth == doctest::Approx(1.0));
    CHECK(tp == oracle::cubical_diagram(t));
}

TEST_CASE("engine matches the rank oracle on random small images") {
    std::mt19937_64 rng(7);
    for (int it = 0; it < 150; ++it) {
        auto g = random_gray(1 + rng() % 4, 1 + rng() % 4, rng, 1 + static_cast<int>(rng() % 5));
        CHECK(cubical(g) == oracle::cubical_diagram(g));
    }
}

TEST_CASE("sum rule: bars alive equal sublevel Betti numbers") {
    std::mt19937_64 rng(8);
    for (int it = 0; it < 40; ++it) {
        auto g = random_gray(4, 4, rng, 4);
        auto pd = cubical(g);
        for (double t : {0.0, 0.5, 1.0, 2.0, 3.0, 3.5}) {
            auto betti = oracle::sublevel_betti(g, t);
            CHECK(oracle::alive_at(pd, 0, t) == betti[0]);
            CHECK(oracle::alive_at(pd, 1, t) == betti[1]);
        }
        auto essential = std::count_if(pd[0].begin(), pd[0].end(), [](const auto& p) { return p.essential(); });
        CHECK(essential == 1);
        CHECK(std::none_of(pd[1].begin(), pd[1].end(), [](const auto& p) { return p.essential(); }));
    }
}

TEST_CASE("clearing is output-equivalent to the plain reduction") {
    std::mt19937_64 rng(9);
    PersistenceOptions plain{false};
    for (int it = 0; it < 200; ++it) {
        auto cx = random_simplicial(rng);
        CHECK(compute_persistence(cx) == compute_persistence(cx, plain));
    }
    for (int it = 0; it < 50; ++it) {
        auto g = random_gray(5, 4, rng, 3);
        CHECK(cubical(g) == cubical(g, plain));
    }
}

TEST_CASE("reordering within tie groups keeps the diagram") {
    std::mt19937_64 rng(10);
    for (int it = 0; it < 50; ++it) {
        auto base = build_cubical_filtration(random_gray(4, 4, rng, 3));
        auto cells = base.cells;
        // shuffle inside each (value, dim) block so faces still come first
        std::size_t start = 0;
        for (std::size_t i = 1; i <= cells.size(); ++i) {
            if (i == cells.size() || cells[i].value != cells[start].value || cells[i].dim != cells[start].dim) {
                std::shuffle(cells.begin() + static_cast<long>(start), cells.begin() + static_cast<long>(i), rng);
                start = i;
            }
        }
        auto shuffled = FilteredComplex::as_given(cells);
        CHECK_NOTHROW(shuffled.check_filtration());
        CHECK(compute_persistence(shuffled) == compute_persistence(base));
    }
}

TEST_CASE("non-filtrations are rejected") {
    std::vector<Cell> cells{{0, 0, {}, 0.0}, {1, 0, {}, 2.0}, {2, 1, {0, 1}, 1.0}};
    CHECK_THROWS_AS(compute_persistence(FilteredComplex::as_given(cells)), ContractError);
}

TEST_CASE("vr diagram of a square") {
    auto pc = PointCloud::from_2d({{0, 0}, {2, 0}, {2, 2}, {0, 2}});
    auto pd = compute_persistence(build_vr_filtration(pc, 2, 10.0));
    REQUIRE(pd[0].size() == 4);
    CHECK(pd[0][0] == PersistencePair{0.0, 1.0});
    CHECK(pd[0][3].essential());
    REQUIRE(pd[1].size() == 1);
    CHECK(pd[1][0].birth == doctest::Approx(1.0));
    CHECK(pd[1][0].death == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("finitize") {
    PersistenceDiagram pd;
    pd[0] = {{0.0, kInfinity}};
    auto f = finitize(pd, 5.0);
    CHECK(f[0][0] == PersistencePair{0.0, 5.0});

    PersistenceDiagram finite;
    finite[0] = {{0.0, 1.0}};
    finite[1] = {{0.5, 2.0}};
    CHECK(finitize(finite, 3.0) == finite);
    CHECK(finitize(PersistenceDiagram{}, 1.0).empty());

    PersistenceDiagram high;
    high[0] = {{4.0, kInfinity}};
    CHECK_THROWS_AS(finitize(high, 3.0), ParameterError);
}

TEST_CASE("diagram json") {
    PersistenceDiagram pd;
    pd[0] = {{0.0, 0.5}, {0.0, kInfinity}};
    CHECK(diagram_json(pd) == R"({"h0":[[0,0.5],[0,null]],"h1":[]})");
}
