#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

// Eigenvalue sequences that parameterize the closed-form risk theory.
// A Spectrum is a truncated, nonincreasing, nonnegative eigenvalue list
// plus an explicit ridge delta and an optional "tailsum" mass delta_prime
// standing in for the modes dropped by the truncation (tiny eigenvalues in
// aggregate act on the self-consistent equation exactly like a ridge).

namespace krlab::spectra {

enum class Family { Powerlaw, LogPowerlaw, SuperPolynomial, Explicit };

std::string family_name(Family f);

struct Spectrum {
    Family family = Family::Explicit;
    double alpha = 0.0;           // decay exponent; meaningful for Powerlaw/LogPowerlaw
    std::size_t M = 0;            // retained modes
    double delta = 0.0;           // explicit ridge
    double delta_prime = 0.0;     // tail mass treated as effective ridge
    std::vector<double> values;   // lambda_1..lambda_M, nonincreasing

    double trace() const;
    std::size_t rank() const;     // number of strictly positive eigenvalues
    // Sum of lambda_i for i >= i0 (1-based); 0 when i0 > M.
    double tail_sum(std::size_t i0) const;
};

// Target-function expansion coefficients in the kernel eigenbasis,
// normalized so that sum v_i^2 equals the stated budget.
struct TargetCoefficients {
    std::vector<double> v;
    double budget = 0.0;
};

struct Assumption1Report {
    bool ordered_descending = false;   // (a)
    bool trace_finite = false;         // (b)  heuristic: tail fraction small
    bool coeff_norm_finite = false;    // (d)
    bool no_weight_on_zero_modes = false;  // (e), finite-M surrogate
    std::string rank_note;             // (c) is approximated by truncation, not pass/fail
    double tail_fraction = 0.0;        // evidence for (b)

    bool all_testable_pass() const {
        return ordered_descending && trace_finite && coeff_norm_finite && no_weight_on_zero_modes;
    }
};

struct SpectrumError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// family constructors; M >= 2, delta >= 0, alpha > 0 where applicable
Spectrum make_powerlaw(double alpha, std::size_t M, double delta);
Spectrum make_logpowerlaw(double alpha, std::size_t M, double delta);
Spectrum make_superpolynomial(std::size_t M, double delta);
Spectrum make_explicit(std::vector<double> values, double delta);

// v_i proportional to i^{-exponent}, scaled to the budget; zero-eigenvalue
// modes get zero weight.
TargetCoefficients make_power_coefficients(const Spectrum& s, double exponent, double budget);
TargetCoefficients make_zero_coefficients(const Spectrum& s);
// arbitrary raw coefficients, normalized to the budget (budget <= 0 keeps raw scale)
TargetCoefficients make_explicit_coefficients(const Spectrum& s, std::vector<double> raw, double budget);

Assumption1Report validate_assumption1(const Spectrum& s, const TargetCoefficients& c);

}  // namespace krlab::spectra
