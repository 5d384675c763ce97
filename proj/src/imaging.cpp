#include "tdac/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "tdac/errors.hpp"

namespace tdac {

Direction::Direction(double x, double y) {
    double norm = std::hypot(x, y);
    if (!(norm > 0.0) || !std::isfinite(norm)) throw ParameterError("direction must be a finite nonzero vector");
    x_ = x / norm;
    y_ = y / norm;
}

BinaryImage from_ciphertext(const BitMatrix& bits) {
    BinaryImage img(bits.cols, bits.rows);
    for (std::size_t y = 0; y < bits.rows; ++y)
        for (std::size_t x = 0; x < bits.cols; ++x) img.set(x, y, bits.at(y, x) != 0);
    return img;
}

BinaryImage from_ciphertext(const Ciphertext& ct) { return from_ciphertext(ct.bits); }

BitMatrix to_matrix(const BinaryImage& img) {
    BitMatrix m(img.height, img.width);
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x) m.at(y, x) = img.at(x, y);
    return m;
}

GrayImage height_filtration(const BinaryImage& img, const Direction& dir) {
    GrayImage out(img.width, img.height);
    double h_inf = -std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < img.height; ++y) {
        for (std::size_t x = 0; x < img.width; ++x) {
            double h = static_cast<double>(x) * dir.x() + static_cast<double>(y) * dir.y();
            out.at(x, y) = h;
            h_inf = std::max(h_inf, h);
        }
    }
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        if (!img.pixels[i]) out.values[i] = h_inf;
    return out;
}

GrayImage radial_filtration(const BinaryImage& img, const Center& c) {
    if (c.x < 0 || c.y < 0 || static_cast<std::size_t>(c.x) >= img.width || static_cast<std::size_t>(c.y) >= img.height)
        throw ParameterError(fmt::format("radial center ({}, {}) outside {}x{} image", c.x, c.y, img.width, img.height));
    GrayImage out(img.width, img.height);
    double r_inf = 0.0;
    for (std::size_t y = 0; y < img.height; ++y) {
        for (std::size_t x = 0; x < img.width; ++x) {
            double r = std::hypot(static_cast<double>(static_cast<std::int64_t>(x) - c.x),
                                  static_cast<double>(static_cast<std::int64_t>(y) - c.y));
            out.at(x, y) = r;
            r_inf = std::max(r_inf, r);
        }
    }
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        if (!img.pixels[i]) out.values[i] = r_inf;
    return out;
}

std::string gray_image_json(const GrayImage& img) {
    std::string out = "[";
    for (std::size_t y = 0; y < img.height; ++y) {
        out += y ? ",[" : "[";
        for (std::size_t x = 0; x < img.width; ++x) {
            if (x) out += ',';
            out += fmt::format("{:.17g}", img.at(x, y));
        }
        out += ']';
    }
    out += ']';
    return out;
}

}  // namespace tdac
