#pragma once

#include <cstdint>
#include <vector>

#include "seedbank/errors.hpp"

namespace seedbank {

// d-dimensional discrete torus (Z / side Z)^dim. Sites are indexed in mixed
// radix with coordinate 0 the fastest-varying digit.
struct Torus {
    int dim = 1;
    int side = 1;

    Torus() = default;
    Torus(int dim_, int side_) : dim(dim_), side(side_) {
        if (dim < 1 || dim > 6) throw ConfigError("Torus: dim must be in [1,6]");
        if (side < 1) throw ConfigError("Torus: side must be >= 1");
    }

    std::int64_t sites() const {
        std::int64_t v = 1;
        for (int k = 0; k < dim; ++k) v *= side;
        return v;
    }

    void coords(std::int64_t idx, int* c) const {
        for (int k = 0; k < dim; ++k) {
            c[k] = static_cast<int>(idx % side);
            idx /= side;
        }
    }

    std::int64_t index(const int* c) const {
        std::int64_t idx = 0;
        for (int k = dim - 1; k >= 0; --k) idx = idx * side + c[k];
        return idx;
    }

    int wrap(int coord) const {
        int r = coord % side;
        if (r < 0) r += side;
        return r;
    }

    // Site reached from idx by a signed offset (wrapped per coordinate).
    std::int64_t shift(std::int64_t idx, const std::vector<int>& offset) const {
        int c[6];
        coords(idx, c);
        for (int k = 0; k < dim; ++k) c[k] = wrap(c[k] + offset[k]);
        return index(c);
    }

    bool operator==(const Torus& o) const { return dim == o.dim && side == o.side; }
    bool operator!=(const Torus& o) const { return !(*this == o); }
};

} // namespace seedbank
