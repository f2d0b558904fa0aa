#pragma once

#include <functional>
#include <string>
#include <vector>

#include "seedbank/stats.hpp"

namespace seedbank {

enum class Finiteness { Finite, Divergent, Inconclusive };

std::string to_string(Finiteness f);

struct IntegrateOptions {
    double tmax = 1e6;
    int nodesPerDecade = 64;
    double fitDecades = 1.0;    // width of the tail-fit window, in decades
    double boundaryTol = 0.02;  // |p - 1| <= tol flags a boundary case
    double floor = 1e-300;      // values below this count as exact zero
};

struct TailFit {
    double exponent = 0;  // p in h(t) ~ amplitude * t^-p
    double amplitude = 0;
    double rmse = 0;
    int points = 0;
};

// Verdict for integral_1^inf h(t) dt estimated from [1, tmax] plus a power
// fit of the tail. Rules: finite iff p > 1 (analytic tail added to the
// value), divergent iff p < 1 - boundaryTol, inconclusive otherwise. An
// integrand that collapses below the floor before tmax is finite regardless.
struct IntegralVerdict {
    Finiteness verdict = Finiteness::Inconclusive;
    double value = 0;     // quadPart + tailPart when Finite, quadPart otherwise
    double quadPart = 0;  // trapezoid over [1, tmax] on the log grid
    double tailPart = 0;  // analytic continuation of the fitted power law
    TailFit fit;
    bool nearBoundary = false; // |p - 1| <= boundaryTol
    bool collapsed = false;    // integrand underflowed before tmax
};

IntegralVerdict integrate_tail(const std::function<double(double)>& h,
                               const IntegrateOptions& opts = {});

// Polynomial degree of an integrand: bracket of sup{zeta : integral of
// t^zeta h(t) converges}, probed on a caller-supplied zeta grid.
struct DegreeBracket {
    double finiteMax = -1;    // largest zeta that still converged (-1 = none)
    double divergentMin = 0;  // smallest zeta that diverged (+inf if none)
    bool anyInconclusive = false;
    std::vector<std::pair<double, Finiteness>> table;
};

DegreeBracket walk_degree(const std::function<double(double)>& h,
                          const std::vector<double>& zetas,
                          const IntegrateOptions& opts = {});

} // namespace seedbank
