#include "seedbank/diffusion.hpp"

#include <algorithm>
#include <cmath>

namespace seedbank {

DiffusionFunction DiffusionFunction::fisher_wright(double d) {
    DiffusionFunction g;
    g.preset = Preset::FisherWright;
    g.d = d;
    g.validate();
    return g;
}

DiffusionFunction DiffusionFunction::kimura_ohta(double d) {
    DiffusionFunction g;
    g.preset = Preset::KimuraOhta;
    g.d = d;
    g.validate();
    return g;
}

DiffusionFunction DiffusionFunction::tabulated(std::vector<double> values) {
    DiffusionFunction g;
    g.preset = Preset::Tabulated;
    g.d = 1.0;
    g.table = std::move(values);
    g.validate();
    return g;
}

double DiffusionFunction::operator()(double x) const {
    x = std::clamp(x, 0.0, 1.0);
    switch (preset) {
    case Preset::FisherWright:
        return d * x * (1.0 - x);
    case Preset::KimuraOhta: {
        const double h = x * (1.0 - x);
        return d * h * h;
    }
    case Preset::Tabulated: {
        const auto n = table.size();
        const double pos = x * static_cast<double>(n - 1);
        const auto lo = std::min(static_cast<size_t>(pos), n - 2);
        const double frac = pos - static_cast<double>(lo);
        return table[lo] + frac * (table[lo + 1] - table[lo]);
    }
    }
    return 0.0;
}

double DiffusionFunction::max_slope() const {
    if (preset == Preset::FisherWright) return d;
    if (preset == Preset::Tabulated) {
        const auto n = table.size();
        const double dx = 1.0 / static_cast<double>(n - 1);
        double worst = 0.0;
        for (size_t i = 0; i + 1 < n; ++i)
            worst = std::max(worst, std::abs(table[i + 1] - table[i]) / dx);
        return worst;
    }
    // generic fine-grid bound, covers KimuraOhta
    const int n = 4096;
    double worst = 0.0;
    double prev = (*this)(0.0);
    for (int i = 1; i <= n; ++i) {
        const double cur = (*this)(static_cast<double>(i) / n);
        worst = std::max(worst, std::abs(cur - prev) * n);
        prev = cur;
    }
    return worst;
}

std::string DiffusionFunction::name() const {
    switch (preset) {
    case Preset::FisherWright: return "fisher-wright";
    case Preset::KimuraOhta: return "kimura-ohta";
    case Preset::Tabulated: return "tabulated";
    }
    return "?";
}

void DiffusionFunction::validate() const {
    if (!(d > 0.0) || !std::isfinite(d))
        throw ConfigError("diffusion multiplier d must be positive and finite");
    if (preset != Preset::Tabulated) return;
    if (table.size() < 3)
        throw ConfigError("tabulated diffusion needs at least 3 grid values");
    for (double v : table)
        if (!std::isfinite(v))
            throw ConfigError("tabulated diffusion contains a non-finite value");
    if (table.front() != 0.0 || table.back() != 0.0)
        throw ConfigError("diffusion must vanish at x=0 and x=1");
    for (size_t i = 1; i + 1 < table.size(); ++i)
        if (!(table[i] > 0.0))
            throw ConfigError("tabulated diffusion must be positive inside (0,1)");
}

} // namespace seedbank
