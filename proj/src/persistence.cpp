#include "tdac/persistence.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "tdac/errors.hpp"

namespace tdac {

namespace {

using Column = std::vector<std::uint32_t>;  // sorted positions, Z/2 coefficients

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

void add_into(Column& target, const Column& source, Column& scratch) {
    scratch.clear();
    std::set_symmetric_difference(target.begin(), target.end(), source.begin(), source.end(),
                                  std::back_inserter(scratch));
    target.swap(scratch);
}

}  // namespace

bool PersistenceDiagram::empty() const {
    return std::all_of(dims.begin(), dims.end(), [](const auto& d) { return d.empty(); });
}

void PersistenceDiagram::normalize() {
    for (auto& d : dims) std::sort(d.begin(), d.end());
}

PersistenceDiagram compute_persistence(const FilteredComplex& cx, PersistenceOptions options) {
    cx.check_filtration();
    const std::size_t n = cx.size();
    PersistenceDiagram pd;
    if (n == 0) return pd;

    int top_dim = 0;
    for (const auto& c : cx.cells) top_dim = std::max(top_dim, c.dim);

    std::vector<Column> columns(n);
    for (std::size_t j = 0; j < n; ++j) {
        auto& col = columns[j];
        for (CellId f : cx.cells[j].boundary) col.push_back(static_cast<std::uint32_t>(cx.position[f]));
        std::sort(col.begin(), col.end());
        // Repeated faces cancel over Z/2.
        Column dedup;
        for (std::size_t k = 0; k < col.size();) {
            std::size_t r = k;
            while (r < col.size() && col[r] == col[k]) ++r;
            if ((r - k) % 2 == 1) dedup.push_back(col[k]);
            k = r;
        }
        col.swap(dedup);
    }

    std::vector<std::uint32_t> pivot_owner(n, kNone);  // low row -> column
    std::vector<std::uint8_t> paired(n, 0);
    Column scratch;

    auto reduce_column = [&](std::size_t j) {
        auto& col = columns[j];
        while (!col.empty()) {
            std::uint32_t low = col.back();
            std::uint32_t owner = pivot_owner[low];
            if (owner == kNone) {
                pivot_owner[low] = static_cast<std::uint32_t>(j);
                paired[low] = 1;
                paired[j] = 1;
                return;
            }
            add_into(col, columns[owner], scratch);
        }
    };

    if (options.clearing) {
        // Highest dimension first: a column whose cell is already a pivot
        // row is a birth and reduces to zero, so it is cleared instead.
        for (int d = top_dim; d >= 1; --d) {
            for (std::size_t j = 0; j < n; ++j) {
                if (cx.cells[j].dim != d) continue;
                if (paired[j]) {
                    columns[j].clear();
                    continue;
                }
                reduce_column(j);
            }
        }
    } else {
        for (std::size_t j = 0; j < n; ++j) reduce_column(j);
    }

    for (std::size_t row = 0; row < n; ++row) {
        const Cell& birth_cell = cx.cells[row];
        if (birth_cell.dim > PersistenceDiagram::kMaxDim) continue;
        std::uint32_t owner = pivot_owner[row];
        if (owner != kNone) {
            double b = birth_cell.value;
            double d = cx.cells[owner].value;
            if (d > b) pd[birth_cell.dim].push_back({b, d});
        } else if (!paired[row]) {
            pd[birth_cell.dim].push_back({birth_cell.value, kInfinity});
        }
    }
    pd.normalize();
    return pd;
}

PersistenceDiagram finitize(const PersistenceDiagram& pd, double replacement) {
    PersistenceDiagram out = pd;
    for (const auto& d : pd.dims) {
        for (const auto& p : d) {
            if (replacement < p.birth || (!p.essential() && replacement < p.death))
                throw ParameterError(fmt::format("finitize: replacement {} is below diagram value", replacement));
        }
    }
    for (auto& d : out.dims)
        for (auto& p : d)
            if (p.essential()) p.death = replacement;
    out.normalize();
    return out;
}

std::string diagram_json(const PersistenceDiagram& pd) {
    std::string out = "{";
    for (int k = 0; k <= PersistenceDiagram::kMaxDim; ++k) {
        if (k) out += ',';
        out += fmt::format("\"h{}\":[", k);
        bool first = true;
        for (const auto& p : pd[k]) {
            if (!first) out += ',';
            first = false;
            if (p.essential())
                out += fmt::format("[{:.17g},null]", p.birth);
            else
                out += fmt::format("[{:.17g},{:.17g}]", p.birth, p.death);
        }
        out += ']';
    }
    out += '}';
    return out;
}

}  // namespace tdac
