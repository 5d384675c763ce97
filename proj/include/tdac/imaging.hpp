#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tdac/gsw.hpp"

namespace tdac {

// Pixel (x, y) is column x, row y, zero-based.
struct BinaryImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // row-major, {0,1}

    BinaryImage() = default;
    BinaryImage(std::size_t w, std::size_t h) : width(w), height(h), pixels(w * h, 0) {}

    std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
    void set(std::size_t x, std::size_t y, bool on = true) { pixels[y * width + x] = on ? 1 : 0; }

    friend bool operator==(const BinaryImage&, const BinaryImage&) = default;
};

struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values;  // row-major

    GrayImage() = default;
    GrayImage(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), values(w * h, fill) {}

    double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
    double& at(std::size_t x, std::size_t y) { return values[y * width + x]; }
};

// Unit vector; the constructor normalizes and rejects the zero vector.
class Direction {
public:
    Direction(double x, double y);
    double x() const { return x_; }
    double y() const { return y_; }

private:
    double x_;
    double y_;
};

struct Center {
    std::int64_t x = 0;
    std::int64_t y = 0;

    friend auto operator<=>(const Center&, const Center&) = default;
};

BinaryImage from_ciphertext(const BitMatrix& bits);
BinaryImage from_ciphertext(const Ciphertext& ct);
BitMatrix to_matrix(const BinaryImage& img);

// Foreground pixel p gets <p, v>; background gets the maximum of <p, v>
// over the full grid.
GrayImage height_filtration(const BinaryImage& img, const Direction& dir);

// Foreground pixel p gets |c - p|; background gets the maximum distance
// from c over the full grid.
GrayImage radial_filtration(const BinaryImage& img, const Center& c);

// Row-major array of arrays.
std::string gray_image_json(const GrayImage& img);

}  // namespace tdac
