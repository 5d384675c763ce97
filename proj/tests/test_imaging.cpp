#include <doctest.h>

#include <cmath>
#include <random>

#include "tdac/errors.hpp"
#include "tdac/imaging.hpp"

using namespace tdac;

namespace {

BinaryImage random_image(std::size_t w, std::size_t h, std::mt19937_64& rng) {
    BinaryImage img(w, h);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() & 1);
    return img;
}

}  // namespace

TEST_CASE("from_ciphertext copies C[y][x]") {
    BitMatrix id(2, 2);
    id.at(0, 0) = 1;
    id.at(1, 1) = 1;
    auto img = from_ciphertext(id);
    CHECK(img.width == 2);
    CHECK(img.at(0, 0) == 1);
    CHECK(img.at(1, 1) == 1);
    CHECK(img.at(1, 0) == 0);
    CHECK(to_matrix(img) == id);

    BitMatrix rect(2, 3);
    rect.at(1, 2) = 1;  // row 1, column 2
    auto r = from_ciphertext(rect);
    CHECK(r.width == 3);
    CHECK(r.height == 2);
    CHECK(r.at(2, 1) == 1);
    CHECK(to_matrix(r) == rect);

    auto blank = from_ciphertext(BitMatrix(4, 4));
    for (auto p : blank.pixels) CHECK(p == 0);
}

TEST_CASE("direction normalizes") {
    Direction d(-1, 1);
    CHECK(d.x() == doctest::Approx(-std::sqrt(0.5)));
    CHECK(d.y() == doctest::Approx(std::sqrt(0.5)));
    CHECK_THROWS_AS(Direction(0, 0), ParameterError);
}

TEST_CASE("height filtration examples") {
    BinaryImage full(2, 2);
    for (auto& p : full.pixels) p = 1;
    auto g = height_filtration(full, Direction(0, 1));
    CHECK(g.at(0, 0) == 0.0);
    CHECK(g.at(1, 0) == 0.0);
    CHECK(g.at(0, 1) == 1.0);
    CHECK(g.at(1, 1) == 1.0);

    BinaryImage one(2, 1);
    one.set(1, 0);
    auto diag = height_filtration(one, Direction(-1, 1));
    CHECK(diag.at(1, 0) == doctest::Approx(-0.70710678118654752).epsilon(1e-15));

    BinaryImage corner(2, 2);
    corner.set(0, 0);
    auto c = height_filtration(corner, Direction(0, 1));
    CHECK(c.at(0, 0) == 0.0);
    CHECK(c.at(1, 0) == 1.0);
    CHECK(c.at(0, 1) == 1.0);
    CHECK(c.at(1, 1) == 1.0);
}

TEST_CASE("radial filtration examples") {
    BinaryImage img(20, 20);
    img.set(10, 9);
    img.set(13, 13);
    auto g = radial_filtration(img, Center{13, 13});
    CHECK(g.at(10, 9) == 5.0);
    CHECK(g.at(13, 13) == 0.0);

    BinaryImage small(3, 3);
    small.set(1, 1);
    auto s = radial_filtration(small, Center{1, 1});
    CHECK(s.at(0, 0) == doctest::Approx(std::sqrt(2.0)));

    CHECK_THROWS_AS(radial_filtration(small, Center{3, 1}), ParameterError);
    CHECK_THROWS_AS(radial_filtration(small, Center{-1, 0}), ParameterError);
}

TEST_CASE("background equals the grid maximum") {
    std::mt19937_64 rng(1);
    for (int it = 0; it < 50; ++it) {
        auto img = random_image(7, 5, rng);
        Direction dir(static_cast<double>(rng() % 7) - 3.0, 1.0);
        auto h = height_filtration(img, dir);
        double hmax = -INFINITY;
        for (std::size_t y = 0; y < 5; ++y)
            for (std::size_t x = 0; x < 7; ++x) hmax = std::max(hmax, dir.x() * x + dir.y() * y);
        Center c{static_cast<std::int64_t>(rng() % 7), static_cast<std::int64_t>(rng() % 5)};
        auto r = radial_filtration(img, c);
        double rmax = 0;
        for (std::size_t y = 0; y < 5; ++y)
            for (std::size_t x = 0; x < 7; ++x)
                rmax = std::max(rmax, std::hypot(double(x) - double(c.x), double(y) - double(c.y)));
        for (std::size_t y = 0; y < 5; ++y)
            for (std::size_t x = 0; x < 7; ++x) {
                if (img.at(x, y)) {
                    CHECK(h.at(x, y) == doctest::Approx(dir.x() * x + dir.y() * y));
                    CHECK(r.at(x, y) == doctest::Approx(std::hypot(double(x) - double(c.x), double(y) - double(c.y))));
                } else {
                    CHECK(h.at(x, y) == doctest::Approx(hmax));
                    CHECK(r.at(x, y) == doctest::Approx(rmax));
                }
            }
    }
}

TEST_CASE("negated direction negates foreground values") {
    std::mt19937_64 rng(2);
    auto img = random_image(6, 6, rng);
    auto a = height_filtration(img, Direction(2, 1));
    auto b = height_filtration(img, Direction(-2, -1));
    for (std::size_t y = 0; y < 6; ++y)
        for (std::size_t x = 0; x < 6; ++x)
            if (img.at(x, y)) CHECK(a.at(x, y) == doctest::Approx(-b.at(x, y)));
}

TEST_CASE("radial values are translation equivariant") {
    std::mt19937_64 rng(3);
    auto img = random_image(5, 5, rng);
    BinaryImage shifted(9, 8);
    for (std::size_t y = 0; y < 5; ++y)
        for (std::size_t x = 0; x < 5; ++x) shifted.set(x + 3, y + 2, img.at(x, y));
    auto a = radial_filtration(img, Center{2, 1});
    auto b = radial_filtration(shifted, Center{5, 3});
    for (std::size_t y = 0; y < 5; ++y)
        for (std::size_t x = 0; x < 5; ++x)
            if (img.at(x, y)) CHECK(a.at(x, y) == b.at(x + 3, y + 2));
}

TEST_CASE("gray image json") {
    GrayImage g(2, 1);
    g.at(0, 0) = 0.5;
    g.at(1, 0) = 2;
    CHECK(gray_image_json(g) == "[[0.5,2]]");
}
