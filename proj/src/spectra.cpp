#include "krlab/spectra.hpp"

#include <algorithm>
#include <cmath>

namespace krlab::spectra {

std::string family_name(Family f) {
    switch (f) {
        case Family::Powerlaw: return "powerlaw";
        case Family::LogPowerlaw: return "logpowerlaw";
        case Family::SuperPolynomial: return "superpolynomial";
        case Family::Explicit: return "explicit";
    }
    return "unknown";
}

double Spectrum::trace() const {
    return tail_sum(1);
}

std::size_t Spectrum::rank() const {
    std::size_t r = 0;
    for (double x : values)
        if (x > 0.0) ++r;
    return r;
}

double Spectrum::tail_sum(std::size_t i0) const {
    if (i0 < 1) i0 = 1;
    double s = 0.0;
    // sum smallest-first: the tail is ascending in magnitude reversed
    for (std::size_t i = values.size(); i >= i0; --i) {
        s += values[i - 1];
        if (i == 1) break;
    }
    return s;
}

namespace {

void check_common(std::size_t M, double delta) {
    if (M < 2) throw SpectrumError("spectrum truncation must satisfy M >= 2");
    if (delta < 0.0) throw SpectrumError("ridge delta must be nonnegative");
    if (!std::isfinite(delta)) throw SpectrumError("ridge delta must be finite");
}

}  // namespace

Spectrum make_powerlaw(double alpha, std::size_t M, double delta) {
    check_common(M, delta);
    if (!(alpha > 0.0)) throw SpectrumError("powerlaw exponent must be positive");
    Spectrum s;
    s.family = Family::Powerlaw;
    s.alpha = alpha;
    s.M = M;
    s.delta = delta;
    s.values.resize(M);
    for (std::size_t i = 0; i < M; ++i)
        s.values[i] = std::pow(static_cast<double>(i + 1), -alpha);
    return s;
}

Spectrum make_logpowerlaw(double alpha, std::size_t M, double delta) {
    check_common(M, delta);
    if (!(alpha > 0.0)) throw SpectrumError("logpowerlaw exponent must be positive");
    Spectrum s;
    s.family = Family::LogPowerlaw;
    s.alpha = alpha;
    s.M = M;
    s.delta = delta;
    s.values.resize(M);
    for (std::size_t i = 2; i <= M; ++i) {
        double x = static_cast<double>(i);
        s.values[i - 1] = std::pow(std::log(x), -alpha) / x;
    }
    s.values[0] = s.values[1];  // i=1 is singular (log 1 = 0); head choice is regime-neutral
    return s;
}

Spectrum make_superpolynomial(std::size_t M, double delta) {
    check_common(M, delta);
    Spectrum s;
    s.family = Family::SuperPolynomial;
    s.M = M;
    s.delta = delta;
    s.values.resize(M);
    for (std::size_t i = 0; i < M; ++i) {
        double x = static_cast<double>(i + 1);
        s.values[i] = std::pow(x, -std::log(x));
    }
    return s;
}

Spectrum make_explicit(std::vector<double> values, double delta) {
    check_common(values.size(), delta);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0) || !std::isfinite(values[i]))
            throw SpectrumError("explicit eigenvalues must be finite and nonnegative");
        if (i > 0 && values[i] > values[i - 1])
            throw SpectrumError("explicit eigenvalues must be nonincreasing");
    }
    Spectrum s;
    s.family = Family::Explicit;
    s.M = values.size();
    s.delta = delta;
    s.values = std::move(values);
    return s;
}

namespace {

TargetCoefficients normalize(const Spectrum& s, std::vector<double> raw, double budget) {
    if (raw.size() != s.M) throw SpectrumError("coefficient count must match spectrum truncation");
    for (std::size_t i = 0; i < s.M; ++i)
        if (s.values[i] == 0.0) raw[i] = 0.0;  // no weight outside the RKHS
    double ss = 0.0;
    for (double x : raw) ss += x * x;
    TargetCoefficients c;
    if (budget > 0.0) {
        if (ss == 0.0) throw SpectrumError("cannot normalize all-zero coefficients to a positive budget");
        double scale = std::sqrt(budget / ss);
        for (double& x : raw) x *= scale;
        c.budget = budget;
    } else {
        c.budget = ss;
    }
    c.v = std::move(raw);
    return c;
}

}  // namespace

TargetCoefficients make_power_coefficients(const Spectrum& s, double exponent, double budget) {
    std::vector<double> raw(s.M);
    for (std::size_t i = 0; i < s.M; ++i)
        raw[i] = std::pow(static_cast<double>(i + 1), -exponent);
    return normalize(s, std::move(raw), budget);
}

TargetCoefficients make_zero_coefficients(const Spectrum& s) {
    TargetCoefficients c;
    c.v.assign(s.M, 0.0);
    c.budget = 0.0;
    return c;
}

TargetCoefficients make_explicit_coefficients(const Spectrum& s, std::vector<double> raw, double budget) {
    return normalize(s, std::move(raw), budget);
}

Assumption1Report validate_assumption1(const Spectrum& s, const TargetCoefficients& c) {
    Assumption1Report r;

    r.ordered_descending = true;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (!(s.values[i] >= 0.0)) r.ordered_descending = false;
        if (i > 0 && s.values[i] > s.values[i - 1]) r.ordered_descending = false;
    }

    // (b) finite trace, heuristically: if the second half of the retained
    // modes still carries a sizable share of the partial trace, the full sum
    // is growing with M rather than converging.
    double total = s.trace();
    double tail = s.tail_sum(s.M / 2 + 1);
    r.tail_fraction = total > 0.0 ? tail / total : 0.0;
    r.trace_finite = std::isfinite(total) && r.tail_fraction < 0.05;

    double ss = 0.0;
    bool coeffs_finite = true;
    for (double x : c.v) {
        if (!std::isfinite(x)) coeffs_finite = false;
        ss += x * x;
    }
    r.coeff_norm_finite = coeffs_finite && std::isfinite(ss) &&
                          (c.budget <= 0.0 || std::abs(ss - c.budget) <= 1e-12 * std::max(1.0, c.budget));

    r.no_weight_on_zero_modes = true;
    for (std::size_t i = 0; i < std::min(c.v.size(), s.values.size()); ++i)
        if (s.values[i] == 0.0 && c.v[i] != 0.0) r.no_weight_on_zero_modes = false;

    r.rank_note = "infinite rank approximated by truncation M=" + std::to_string(s.M);
    return r;
}

}  // namespace krlab::spectra
