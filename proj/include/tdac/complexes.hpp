#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tdac/imaging.hpp"

namespace tdac {

using CellId = std::uint32_t;

struct Cell {
    CellId id = 0;
    int dim = 0;
    std::vector<CellId> boundary;  // ids of (dim - 1)-cells
    double value = 0.0;
};

// Cells in filtration order (value, dim, id). position[id] is the index of
// the cell with that id in `cells`.
struct FilteredComplex {
    std::vector<Cell> cells;
    std::vector<std::size_t> position;

    // Sorts into filtration order and builds the id index.
    static FilteredComplex sorted(std::vector<Cell> cells);
    // Keeps the given order; only builds the id index. Ids must be 0..n-1.
    static FilteredComplex as_given(std::vector<Cell> cells);

    std::size_t size() const { return cells.size(); }
    bool empty() const { return cells.empty(); }
    const Cell& by_id(CellId id) const { return cells[position[id]]; }
    double max_value() const;
    std::size_t count_dim(int dim) const;

    // Every face precedes its cofaces and has value <= theirs, and the
    // order is sorted by value. Throws ContractError otherwise.
    void check_filtration() const;
};

// One 2-cube per pixel with all faces; a face takes the minimum value of the
// pixels containing it.
FilteredComplex build_cubical_filtration(const GrayImage& img);

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct PointCloud {
    std::vector<std::vector<double>> points;

    static PointCloud from_2d(const std::vector<Point2>& pts);
    double distance(std::size_t i, std::size_t j) const;
};

inline constexpr std::size_t kDefaultPointBudget = 256;

// Vietoris-Rips with the 2-epsilon rule: an edge {i, j} enters at
// d(i, j) / 2, a triangle at the largest of its edge values.
FilteredComplex build_vr_filtration(const PointCloud& pc, int max_dim, double max_scale,
                                    std::size_t point_budget = kDefaultPointBudget);

std::string complex_json(const FilteredComplex& cx);

}  // namespace tdac
