#pragma once

#include <string>

#include "gb/models.hpp"
#include "gb/types.hpp"

namespace gb {

/// Compact box in chart coordinates times a clock interval.
struct Region {
    Vec x_lo, x_hi;
    Vec p_lo, p_hi;
    double t_lo = 0.0, t_hi = 0.0;
    std::string description;
};

struct GridSpec {
    int per_axis = 9;       // samples per x/p axis
    int time_samples = 5;   // samples along the clock interval
    double fd_step = 1e-4;  // central-difference step for third derivatives
};

/// Grid-sampled bounds for a hamiltonian on a region. This is a heuristic
/// certificate: maxima over a finite grid, inflated by a safety factor.
struct BoundednessCertificate {
    HamiltonianPtr ham;
    Region region;
    GridSpec grid;
    double safety = 1.1;

    double b1_raw = 0.0;  // grid max of derivative norms up to order 3
    double b2_raw = 0.0;  // grid min eigenvalue of H_pp
    long samples = 0;

    double b1() const { return b1_raw * safety; }
    double b2() const { return b2_raw / safety; }
};

/// Sample derivatives of `ham` up to order three over a grid on `region`.
/// Throws ConvexityError if H_pp has a nonpositive eigenvalue at any node.
BoundednessCertificate certify_bounded(HamiltonianPtr ham, const Region& region,
                                       const GridSpec& grid = {},
                                       double safety = 1.1);

}  // namespace gb
