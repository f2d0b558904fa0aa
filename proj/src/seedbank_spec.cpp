#include "seedbank/seedbank_spec.hpp"

#include <cmath>

namespace seedbank {

SeedBankSpec SeedBankSpec::single(double K, double e) {
    SeedBankSpec sb;
    sb.kind = Kind::Single;
    sb.K = K;
    sb.e = e;
    sb.validate();
    return sb;
}

SeedBankSpec SeedBankSpec::explicit_list(std::vector<double> Ks, std::vector<double> es) {
    SeedBankSpec sb;
    sb.kind = Kind::Explicit;
    sb.Ks = std::move(Ks);
    sb.es = std::move(es);
    sb.validate();
    return sb;
}

SeedBankSpec SeedBankSpec::asymptotic(double A, double alpha, double B, double beta,
                                      int truncation) {
    SeedBankSpec sb;
    sb.kind = Kind::Asymptotic;
    sb.A = A;
    sb.alpha = alpha;
    sb.B = B;
    sb.beta = beta;
    sb.M = truncation;
    sb.validate();
    return sb;
}

void SeedBankSpec::validate() const {
    switch (kind) {
        case Kind::Single:
            if (!(K > 0) || !(e > 0)) throw ConfigError("SeedBankSpec: need K > 0 and e > 0");
            return;
        case Kind::Explicit:
            if (Ks.empty() || Ks.size() != es.size())
                throw ConfigError("SeedBankSpec: explicit lists must be non-empty and equal length");
            for (std::size_t m = 0; m < Ks.size(); ++m)
                if (!(Ks[m] > 0) || !(es[m] > 0))
                    throw ConfigError("SeedBankSpec: all K_m and e_m must be positive");
            return;
        case Kind::Asymptotic:
            if (!(A > 0) || !(B > 0)) throw ConfigError("SeedBankSpec: need A > 0 and B > 0");
            if (!(alpha >= 0) || alpha > 1)
                throw ConfigError(
                    "SeedBankSpec: asymptotic ladder needs 0 <= alpha <= 1 (alpha > 1 makes rho "
                    "finite; use an explicit list)");
            if (!(beta > 0)) throw ConfigError("SeedBankSpec: need beta > 0");
            if (!(alpha + beta > 1))
                throw ConfigError(
                    "SeedBankSpec: need alpha + beta > 1, otherwise the exchange rate chi = sum "
                    "K_m e_m diverges");
            if (M < 1) throw ConfigError("SeedBankSpec: asymptotic ladder needs truncation >= 1");
            return;
    }
}

int SeedBankSpec::colours() const {
    switch (kind) {
        case Kind::Single: return 1;
        case Kind::Explicit: return static_cast<int>(Ks.size());
        default: return M + 1;
    }
}

double SeedBankSpec::Km(int m) const {
    switch (kind) {
        case Kind::Single: return K;
        case Kind::Explicit: return Ks[m];
        default: return A * std::pow(m + 1, -alpha);
    }
}

double SeedBankSpec::em(int m) const {
    switch (kind) {
        case Kind::Single: return e;
        case Kind::Explicit: return es[m];
        default: return B * std::pow(m + 1, -beta);
    }
}

double SeedBankSpec::chi() const {
    double s = 0;
    for (int m = 0; m < colours(); ++m) s += Km(m) * em(m);
    return s;
}

double SeedBankSpec::rho_truncated() const {
    double s = 0;
    for (int m = 0; m < colours(); ++m) s += Km(m);
    return s;
}

std::optional<double> SeedBankSpec::rho() const {
    if (kind == Kind::Asymptotic) return std::nullopt;
    return rho_truncated();
}

std::optional<double> SeedBankSpec::gamma() const {
    if (kind != Kind::Asymptotic) return std::nullopt;
    return (alpha + beta - 1) / beta;
}

double SeedBankSpec::neglected_exchange_mass() const {
    if (kind != Kind::Asymptotic) return 0;
    // sum_{m > M} A B (m+1)^-(alpha+beta) <= A B integral_{M+1}^inf u^-(alpha+beta) du
    const double p = alpha + beta;
    return A * B * std::pow(M + 1, 1 - p) / (p - 1);
}

} // namespace seedbank
