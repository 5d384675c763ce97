#include "tdac/complexes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "tdac/errors.hpp"

namespace tdac {

namespace {

bool filtration_less(const Cell& a, const Cell& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.dim != b.dim) return a.dim < b.dim;
    return a.id < b.id;
}

std::vector<std::size_t> index_ids(const std::vector<Cell>& cells) {
    std::vector<std::size_t> position(cells.size(), std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        CellId id = cells[i].id;
        if (id >= cells.size() || position[id] != std::numeric_limits<std::size_t>::max())
            throw ContractError(fmt::format("complex: cell ids must be a permutation of 0..{}", cells.size() - 1));
        position[id] = i;
    }
    return position;
}

}  // namespace

FilteredComplex FilteredComplex::sorted(std::vector<Cell> cells) {
    std::sort(cells.begin(), cells.end(), filtration_less);
    FilteredComplex cx;
    cx.position = index_ids(cells);
    cx.cells = std::move(cells);
    return cx;
}

FilteredComplex FilteredComplex::as_given(std::vector<Cell> cells) {
    FilteredComplex cx;
    cx.position = index_ids(cells);
    cx.cells = std::move(cells);
    return cx;
}

double FilteredComplex::max_value() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& c : cells) m = std::max(m, c.value);
    return m;
}

std::size_t FilteredComplex::count_dim(int dim) const {
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [dim](const Cell& c) { return c.dim == dim; }));
}

void FilteredComplex::check_filtration() const {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Cell& c = cells[i];
        if (!std::isfinite(c.value)) throw ContractError(fmt::format("complex: cell {} has non-finite value", c.id));
        if (i > 0 && cells[i - 1].value > c.value)
            throw ContractError(fmt::format("complex: cells not sorted by value at position {}", i));
        for (CellId f : c.boundary) {
            if (f >= cells.size()) throw ContractError(fmt::format("complex: cell {} has unknown face {}", c.id, f));
            const Cell& face = by_id(f);
            if (face.dim != c.dim - 1)
                throw ContractError(fmt::format("complex: face {} of cell {} has wrong dimension", f, c.id));
            if (position[f] >= i)
                throw ContractError(fmt::format("complex: face {} does not precede cell {}", f, c.id));
            if (face.value > c.value)
                throw ContractError(fmt::format("complex: face {} enters after cell {} (not nested)", f, c.id));
        }
    }
}

FilteredComplex build_cubical_filtration(const GrayImage& img) {
    const std::size_t w = img.width;
    const std::size_t h = img.height;
    if (w == 0 || h == 0) return {};
    const double inf = std::numeric_limits<double>::infinity();

    // Ids: vertices, horizontal edges, vertical edges, squares.
    const std::size_t n_vert = (w + 1) * (h + 1);
    const std::size_t n_hedge = w * (h + 1);
    const std::size_t n_vedge = (w + 1) * h;
    const std::size_t n_square = w * h;
    auto vert = [&](std::size_t i, std::size_t j) { return static_cast<CellId>(j * (w + 1) + i); };
    auto hedge = [&](std::size_t i, std::size_t j) { return static_cast<CellId>(n_vert + j * w + i); };
    auto vedge = [&](std::size_t i, std::size_t j) { return static_cast<CellId>(n_vert + n_hedge + j * (w + 1) + i); };
    auto square = [&](std::size_t x, std::size_t y) {
        return static_cast<CellId>(n_vert + n_hedge + n_vedge + y * w + x);
    };

    std::vector<Cell> cells(n_vert + n_hedge + n_vedge + n_square);
    for (std::size_t k = 0; k < cells.size(); ++k) {
        cells[k].id = static_cast<CellId>(k);
        cells[k].value = inf;
    }
    for (std::size_t j = 0; j <= h; ++j)
        for (std::size_t i = 0; i <= w; ++i) cells[vert(i, j)].dim = 0;
    for (std::size_t j = 0; j <= h; ++j) {
        for (std::size_t i = 0; i < w; ++i) {
            Cell& e = cells[hedge(i, j)];
            e.dim = 1;
            e.boundary = {vert(i, j), vert(i + 1, j)};
        }
    }
    for (std::size_t j = 0; j < h; ++j) {
        for (std::size_t i = 0; i <= w; ++i) {
            Cell& e = cells[vedge(i, j)];
            e.dim = 1;
            e.boundary = {vert(i, j), vert(i, j + 1)};
        }
    }
    auto lower = [&](CellId id, double v) { cells[id].value = std::min(cells[id].value, v); };
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            double v = img.at(x, y);
            Cell& s = cells[square(x, y)];
            s.dim = 2;
            s.value = v;
            s.boundary = {hedge(x, y), hedge(x, y + 1), vedge(x, y), vedge(x + 1, y)};
            lower(hedge(x, y), v);
            lower(hedge(x, y + 1), v);
            lower(vedge(x, y), v);
            lower(vedge(x + 1, y), v);
            lower(vert(x, y), v);
            lower(vert(x + 1, y), v);
            lower(vert(x, y + 1), v);
            lower(vert(x + 1, y + 1), v);
        }
    }
    return FilteredComplex::sorted(std::move(cells));
}

PointCloud PointCloud::from_2d(const std::vector<Point2>& pts) {
    PointCloud pc;
    pc.points.reserve(pts.size());
    for (const auto& p : pts) pc.points.push_back({p.x, p.y});
    return pc;
}

double PointCloud::distance(std::size_t i, std::size_t j) const {
    const auto& a = points[i];
    const auto& b = points[j];
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        double d = a[k] - b[k];
        acc += d * d;
    }
    return std::sqrt(acc);
}

FilteredComplex build_vr_filtration(const PointCloud& pc, int max_dim, double max_scale, std::size_t point_budget) {
    if (max_dim < 0 || max_dim > 2) throw ParameterError(fmt::format("vr: max_dim {} not in [0, 2]", max_dim));
    if (!(max_scale >= 0.0)) throw ParameterError("vr: max_scale must be >= 0");
    const std::size_t n = pc.points.size();
    if (n > point_budget) throw SizeError(fmt::format("vr: {} points exceed the budget of {}", n, point_budget));
    for (const auto& p : pc.points) {
        if (!pc.points.empty() && p.size() != pc.points.front().size())
            throw ParameterError("vr: points have mixed dimensions");
        for (double c : p)
            if (!std::isfinite(c)) throw ParameterError("vr: non-finite coordinate");
    }

    std::vector<Cell> cells;
    for (std::size_t i = 0; i < n; ++i) cells.push_back(Cell{static_cast<CellId>(i), 0, {}, 0.0});

    // edge_id[i * n + j] for i < j, or -1 if the edge is beyond max_scale
    std::vector<std::int64_t> edge_id(n * n, -1);
    if (max_dim >= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double v = pc.distance(i, j) / 2.0;
                if (v > max_scale) continue;
                auto id = static_cast<CellId>(cells.size());
                edge_id[i * n + j] = id;
                cells.push_back(Cell{id, 1, {static_cast<CellId>(i), static_cast<CellId>(j)}, v});
            }
        }
    }
    if (max_dim >= 2) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (edge_id[i * n + j] < 0) continue;
                for (std::size_t k = j + 1; k < n; ++k) {
                    auto ij = edge_id[i * n + j], ik = edge_id[i * n + k], jk = edge_id[j * n + k];
                    if (ik < 0 || jk < 0) continue;
                    double v = std::max({cells[ij].value, cells[ik].value, cells[jk].value});
                    auto id = static_cast<CellId>(cells.size());
                    cells.push_back(Cell{id, 2, {static_cast<CellId>(ij), static_cast<CellId>(jk), static_cast<CellId>(ik)}, v});
                }
            }
        }
    }
    return FilteredComplex::sorted(std::move(cells));
}

std::string complex_json(const FilteredComplex& cx) {
    std::string out = "[";
    for (std::size_t i = 0; i < cx.cells.size(); ++i) {
        const Cell& c = cx.cells[i];
        if (i) out += ',';
        out += fmt::format("{{\"id\":{},\"dim\":{},\"value\":{:.17g},\"boundary\":[{}]}}", c.id, c.dim, c.value,
                           fmt::join(c.boundary, ","));
    }
    out += ']';
    return out;
}

}  // namespace tdac
