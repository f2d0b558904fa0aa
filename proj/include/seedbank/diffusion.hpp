#pragma once

#include <string>
#include <vector>

#include "seedbank/errors.hpp"

namespace seedbank {

// Diffusion coefficient g under the noise term sqrt(g(x)) dw. Must vanish at
// 0 and 1, be positive inside, and be Lipschitz; those properties keep the
// components in [0,1] and are what the moment duality needs.
struct DiffusionFunction {
    enum class Preset { FisherWright, KimuraOhta, Tabulated };
    Preset preset = Preset::FisherWright;
    double d = 1.0;                 // multiplier; for FisherWright this is the
                                    // resampling rate entering the dual
    std::vector<double> table;      // Tabulated: values on a uniform [0,1] grid

    static DiffusionFunction fisher_wright(double d = 1.0);
    static DiffusionFunction kimura_ohta(double d = 1.0);
    static DiffusionFunction tabulated(std::vector<double> values);

    double operator()(double x) const;
    double max_slope() const; // sup |g'| on a fine grid
    bool is_fisher_wright() const { return preset == Preset::FisherWright; }
    std::string name() const;
    void validate() const;
};

} // namespace seedbank
