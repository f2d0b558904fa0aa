#pragma once

#include <vector>

#include "seedbank/kernel.hpp"

namespace seedbank {

// Transition probability a_t(0, displacement) of the continuous-time walk
// driven by the kernel, by Fourier inversion on the torus. Kernels whose
// support is axis-aligned factorize per axis, so large sides stay cheap.
double transition_probability(const WalkKernel& k, double t, const std::vector<int>& displacement);

double return_probability(const WalkKernel& k, double t);

// (a_t * b_t)(0,0) where both symbols are normalized to unit jump rate; this
// is the return weight of two independent unit-rate walks run side by side.
// Both kernels must be symmetric and live on the same torus.
double convolved_return(const WalkKernel& a, const WalkKernel& b, double t);

// Closed form on the infinite lattice Z^dim for the simple walk with the
// given total jump rate: [e^{-rt/d} I_0(rt/d)]^d.
double simple_walk_return_infinite(int dim, double t, double rate = 1.0);

// Sparse CTMC with uniformized semigroup action; used as the independent
// oracle for the Fourier formulas and for exact dual distributions.
struct SparseCtmc {
    std::int64_t n = 0;
    std::vector<std::vector<std::pair<std::int32_t, double>>> rows; // off-diagonal rates
    double maxExit = 0;

    void add(std::int64_t from, std::int64_t to, double rate);
    void finalize(); // computes maxExit

    // Distribution at time t from initial law p0 (row vector times e^{tQ}).
    std::vector<double> propagate(const std::vector<double>& p0, double t,
                                  double tol = 1e-13) const;
};

SparseCtmc walk_ctmc(const WalkKernel& k);

} // namespace seedbank
