#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tdac/complexes.hpp"

namespace tdac {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct PersistencePair {
    double birth = 0.0;
    double death = kInfinity;

    bool essential() const { return std::isinf(death); }
    double persistence() const { return death - birth; }

    friend auto operator<=>(const PersistencePair&, const PersistencePair&) = default;
};

// Pairs per homology dimension 0 and 1, each list sorted ascending.
struct PersistenceDiagram {
    static constexpr int kMaxDim = 1;
    std::array<std::vector<PersistencePair>, kMaxDim + 1> dims;

    std::vector<PersistencePair>& operator[](int k) { return dims.at(static_cast<std::size_t>(k)); }
    const std::vector<PersistencePair>& operator[](int k) const { return dims.at(static_cast<std::size_t>(k)); }
    bool empty() const;
    void normalize();

    friend bool operator==(const PersistenceDiagram&, const PersistenceDiagram&) = default;
};

struct PersistenceOptions {
    // Skip columns already known to be births (twist / clearing).
    bool clearing = true;
};

// Z/2 column reduction. Zero-persistence pairs are dropped; unpaired cells
// are essential classes with infinite death. Throws ContractError when the
// complex is not a valid filtration.
PersistenceDiagram compute_persistence(const FilteredComplex& cx, PersistenceOptions options = {});

// Replaces infinite deaths. Throws ParameterError if replacement is below
// any finite value of the diagram.
PersistenceDiagram finitize(const PersistenceDiagram& pd, double replacement);

// {"h0": [[b, d], ...], "h1": [...]}, infinity rendered as null, values
// with 17 significant digits.
std::string diagram_json(const PersistenceDiagram& pd);

}  // namespace tdac
