#include "seedbank/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <queue>

namespace seedbank {

namespace {

std::vector<int> negated(const std::vector<int>& o) {
    std::vector<int> n(o.size());
    for (std::size_t k = 0; k < o.size(); ++k) n[k] = -o[k];
    return n;
}

bool is_zero(const std::vector<int>& o) {
    return std::all_of(o.begin(), o.end(), [](int c) { return c == 0; });
}

} // namespace

WalkKernel WalkKernel::from_offsets(const Torus& t,
                                    std::vector<std::pair<std::vector<int>, double>> entries) {
    WalkKernel k;
    k.torus = t;
    std::map<std::vector<int>, double> acc;
    for (auto& [off, rate] : entries) {
        if (static_cast<int>(off.size()) != t.dim)
            throw ConfigError("WalkKernel: offset dimension does not match torus");
        for (int c : off)
            if (2 * std::abs(c) >= t.side)
                throw ConfigError("WalkKernel: offset coordinate must satisfy 2|o| < side");
        if (!(rate > 0)) throw ConfigError("WalkKernel: rates must be positive");
        acc[off] += rate;
    }
    if (acc.empty()) throw ConfigError("WalkKernel: empty support");
    for (auto& [off, rate] : acc) {
        k.offsets.push_back(off);
        k.rates.push_back(rate);
        k.totalRate += rate;
    }
    return k;
}

WalkKernel WalkKernel::simple(const Torus& t, double rate) {
    std::vector<std::pair<std::vector<int>, double>> entries;
    const double per = rate / (2.0 * t.dim);
    for (int k = 0; k < t.dim; ++k) {
        std::vector<int> o(t.dim, 0);
        o[k] = 1;
        entries.emplace_back(o, per);
        o[k] = -1;
        entries.emplace_back(o, per);
    }
    return from_offsets(t, std::move(entries));
}

WalkKernel WalkKernel::point_mass(const Torus& t, std::vector<int> offset, double rate) {
    WalkKernel k;
    k.torus = t;
    if (static_cast<int>(offset.size()) != t.dim)
        throw ConfigError("WalkKernel: offset dimension does not match torus");
    for (int c : offset)
        if (2 * std::abs(c) >= t.side)
            throw ConfigError("WalkKernel: offset coordinate must satisfy 2|o| < side");
    if (!(rate > 0)) throw ConfigError("WalkKernel: rates must be positive");
    k.offsets.push_back(std::move(offset));
    k.rates.push_back(rate);
    k.totalRate = rate;
    return k;
}

WalkKernel WalkKernel::drifted_2d(int side, double eta) {
    if (!(eta > -1 && eta < 1)) throw ConfigError("drifted_2d: eta must lie in (-1,1)");
    Torus t(2, side);
    return from_offsets(t, {{{1, 0}, (1 + eta) / 4},
                            {{0, 1}, (1 + eta) / 4},
                            {{-1, 0}, (1 - eta) / 4},
                            {{0, -1}, (1 - eta) / 4}});
}

WalkKernel WalkKernel::power_law_1d(int side, double delta, int maxRange) {
    Torus t(1, side);
    if (maxRange <= 0) maxRange = side / 2 - 1;
    if (maxRange < 1) throw ConfigError("power_law_1d: side too small");
    std::vector<std::pair<std::vector<int>, double>> entries;
    double total = 0;
    for (int k = 1; k <= maxRange; ++k) total += 2 * std::pow(k, -(1 + delta));
    for (int k = 1; k <= maxRange; ++k) {
        const double r = std::pow(k, -(1 + delta)) / total;
        entries.push_back({{k}, r});
        entries.push_back({{-k}, r});
    }
    return from_offsets(t, std::move(entries));
}

double WalkKernel::rate_of(const std::vector<int>& offset) const {
    for (std::size_t k = 0; k < offsets.size(); ++k)
        if (offsets[k] == offset) return rates[k];
    return 0;
}

bool WalkKernel::symmetric(double tol) const {
    for (std::size_t k = 0; k < offsets.size(); ++k)
        if (std::abs(rates[k] - rate_of(negated(offsets[k]))) > tol) return false;
    return true;
}

bool WalkKernel::separable() const {
    for (const auto& o : offsets) {
        int nz = 0;
        for (int c : o)
            if (c != 0) ++nz;
        if (nz > 1) return false;
    }
    return true;
}

bool WalkKernel::irreducible() const {
    // On an Abelian group, reachability of every site from 0 implies strong
    // connectivity, so one BFS along the directed offsets suffices.
    const std::int64_t V = torus.sites();
    std::vector<char> seen(V, 0);
    std::queue<std::int64_t> q;
    seen[0] = 1;
    q.push(0);
    std::int64_t count = 1;
    while (!q.empty()) {
        const std::int64_t u = q.front();
        q.pop();
        for (const auto& o : offsets) {
            const std::int64_t v = torus.shift(u, o);
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                q.push(v);
            }
        }
    }
    return count == V;
}

bool WalkKernel::has_zero_offset() const {
    for (const auto& o : offsets)
        if (is_zero(o)) return true;
    return false;
}

WalkKernel WalkKernel::symmetrized() const {
    std::vector<std::pair<std::vector<int>, double>> entries;
    for (std::size_t k = 0; k < offsets.size(); ++k) {
        entries.emplace_back(offsets[k], rates[k] / 2);
        entries.emplace_back(negated(offsets[k]), rates[k] / 2);
    }
    return from_offsets(torus, std::move(entries));
}

WalkKernel WalkKernel::reversed() const {
    std::vector<std::pair<std::vector<int>, double>> entries;
    for (std::size_t k = 0; k < offsets.size(); ++k)
        entries.emplace_back(negated(offsets[k]), rates[k]);
    return from_offsets(torus, std::move(entries));
}

WalkKernel WalkKernel::on_torus(const Torus& t) const {
    if (t.dim != torus.dim) throw ConfigError("on_torus: dimension mismatch");
    std::vector<std::pair<std::vector<int>, double>> entries;
    for (std::size_t k = 0; k < offsets.size(); ++k) entries.emplace_back(offsets[k], rates[k]);
    return from_offsets(t, std::move(entries));
}

void WalkKernel::validate() const {
    if (offsets.empty()) throw ConfigError("WalkKernel: empty support");
    if (offsets.size() != rates.size()) throw ConfigError("WalkKernel: ragged support");
    for (double r : rates)
        if (!(r > 0)) throw ConfigError("WalkKernel: rates must be positive");
}

std::vector<std::int32_t> neighbor_table(const WalkKernel& k) {
    const std::int64_t V = k.torus.sites();
    std::vector<std::int32_t> tab(k.offsets.size() * V);
    for (std::size_t o = 0; o < k.offsets.size(); ++o)
        for (std::int64_t i = 0; i < V; ++i)
            tab[o * V + i] = static_cast<std::int32_t>(k.torus.shift(i, k.offsets[o]));
    return tab;
}

std::vector<std::int32_t> reverse_neighbor_table(const WalkKernel& k) {
    const std::int64_t V = k.torus.sites();
    std::vector<std::int32_t> tab(k.offsets.size() * V);
    for (std::size_t o = 0; o < k.offsets.size(); ++o) {
        std::vector<int> neg(k.offsets[o].size());
        for (std::size_t c = 0; c < neg.size(); ++c) neg[c] = -k.offsets[o][c];
        for (std::int64_t i = 0; i < V; ++i)
            tab[o * V + i] = static_cast<std::int32_t>(k.torus.shift(i, neg));
    }
    return tab;
}

} // namespace seedbank
