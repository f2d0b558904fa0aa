#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "seedbank/torus.hpp"

namespace seedbank {

// Translation-invariant jump kernel a(i,j) = a(0, j-i) on a torus, stored as
// signed offsets with rates. Offsets satisfy 2|o_k| < side so each offset and
// its negation are distinct sites; this keeps symmetrization well defined and
// lets the same kernel be rebound to larger tori (on_torus) for side sweeps.
struct WalkKernel {
    Torus torus;
    std::vector<std::vector<int>> offsets; // signed minimal representatives
    std::vector<double> rates;             // parallel to offsets, all > 0
    double totalRate = 0;

    static WalkKernel from_offsets(const Torus& t,
                                   std::vector<std::pair<std::vector<int>, double>> entries);

    // Nearest-neighbour walk, rate/(2 dim) per direction, total rate `rate`.
    static WalkKernel simple(const Torus& t, double rate = 1.0);

    // All rate on a single displacement (rate defaults to 1). The zero offset
    // is legal: it is the identity displacement used by the model-3 -> model-2
    // reduction.
    static WalkKernel point_mass(const Torus& t, std::vector<int> offset, double rate = 1.0);

    // 2-d drifted walk: +e1,+e2 at (1+eta)/4, -e1,-e2 at (1-eta)/4.
    static WalkKernel drifted_2d(int side, double eta);

    // 1-d heavy-tailed walk, rate(+-k) proportional to k^-(1+delta) for
    // k = 1..maxRange (default side/2 - 1), normalized to total rate 1.
    static WalkKernel power_law_1d(int side, double delta, int maxRange = 0);

    double rate_of(const std::vector<int>& offset) const; // 0 if absent
    bool symmetric(double tol = 1e-12) const;
    bool separable() const;   // every offset has at most one nonzero coordinate
    bool irreducible() const; // directed reachability of the whole torus from 0
    bool has_zero_offset() const;

    WalkKernel symmetrized() const; // rate(o) -> (rate(o) + rate(-o)) / 2
    WalkKernel reversed() const;    // rate(o) -> rate(-o)
    WalkKernel on_torus(const Torus& t) const;

    void validate() const;
};

// Flat neighbour table for convolution loops: entry k*V + i is the site index
// of i shifted by offsets[k].
std::vector<std::int32_t> neighbor_table(const WalkKernel& k);

// Same, with every offset negated (used where sums run over a(j,i)).
std::vector<std::int32_t> reverse_neighbor_table(const WalkKernel& k);

} // namespace seedbank
