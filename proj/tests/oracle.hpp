#pragma once

// Brute-force reference for cubical persistence. It builds its own cell
// lists from a grayscale image, computes Z/2 ranks of boundary maps for
// every pair of sublevel thresholds and recovers bar multiplicities by
// inclusion-exclusion over persistent Betti numbers. Nothing here calls
// the reduction engine.

#include <array>
#include <vector>

#include "tdac/imaging.hpp"
#include "tdac/persistence.hpp"

namespace oracle {

// Betti numbers (b0, b1) of the sublevel complex {cells with value <= t}.
std::array<std::size_t, 2> sublevel_betti(const tdac::GrayImage& img, double t);

// Diagram with zero-persistence bars excluded, matching the engine's output
// convention (sorted pairs, infinite death for essential classes).
tdac::PersistenceDiagram cubical_diagram(const tdac::GrayImage& img);

// Number of bars of dimension k alive at t (birth <= t < death).
std::size_t alive_at(const tdac::PersistenceDiagram& pd, int k, double t);

}  // namespace oracle
