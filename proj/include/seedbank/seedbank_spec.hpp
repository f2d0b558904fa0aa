#pragma once

#include <optional>
#include <vector>

#include "seedbank/errors.hpp"

namespace seedbank {

// Colour ladder of dormancy parameters. Colour m has relative size K_m and
// wake rate e_m; chi = sum K_m e_m is the total exchange rate and must be
// finite, rho = sum K_m is the total relative seed-bank size and may diverge.
//
// Three variants:
//   Single     - one colour (K, e).
//   Explicit   - finite list, rho always finite.
//   Asymptotic - K_m = A (m+1)^-alpha, e_m = B (m+1)^-beta truncated at M,
//                with alpha <= 1 < alpha + beta, so rho diverges and the
//                wake-time exponent gamma = (alpha + beta - 1) / beta is in
//                (0, 1]. Simulations use the truncated ladder; the neglected
//                exchange mass past M is reported, never silently dropped.
struct SeedBankSpec {
    enum class Kind { Single, Explicit, Asymptotic };
    Kind kind = Kind::Single;

    double K = 0, e = 0;             // Single
    std::vector<double> Ks, es;      // Explicit
    double A = 0, alpha = 0, B = 0, beta = 0; // Asymptotic
    int M = 0;                       // Asymptotic truncation (colours 0..M)

    static SeedBankSpec single(double K, double e);
    static SeedBankSpec explicit_list(std::vector<double> Ks, std::vector<double> es);
    static SeedBankSpec asymptotic(double A, double alpha, double B, double beta, int truncation);

    void validate() const;

    int colours() const;
    double Km(int m) const;
    double em(int m) const;

    double chi() const;            // truncated sum K_m e_m (simulation scale)
    double rho_truncated() const;  // truncated sum K_m
    std::optional<double> rho() const;   // exact total when finite, nullopt otherwise
    bool rho_finite() const { return kind != Kind::Asymptotic; }
    std::optional<double> gamma() const; // (alpha+beta-1)/beta, Asymptotic only
    double neglected_exchange_mass() const; // bound on sum_{m>M} K_m e_m
};

inline std::optional<double> gamma_of(const SeedBankSpec& sb) { return sb.gamma(); }

} // namespace seedbank
