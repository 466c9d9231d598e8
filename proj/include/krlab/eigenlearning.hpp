#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "krlab/spectra.hpp"

// Closed-form test-risk prediction from a kernel eigenspectrum.
//
// Given eigenvalues {lambda_i}, ridge delta and sample size n, a single
// constant C > 0 solves
//
//     sum_i lambda_i / (lambda_i + C) + delta / C = n,
//
// and the per-mode "learnabilities" L_i = lambda_i / (lambda_i + C) yield the
// predicted test MSE  E0 * (sum_i (1 - L_i)^2 v_i^2 + sigma^2)  with
// E0 = n / (n - sum_j L_j^2).  The predicted MSE includes noise on test
// labels; predicted_excess subtracts it.

namespace krlab::eigenlearning {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoSolution : SolverError {
    using SolverError::SolverError;
};
struct NonConvergence : SolverError {
    using SolverError::SolverError;
};
struct DegenerateE0 : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct Unclassified : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EffectiveRidge {
    double C = 0.0;
    double residual = 0.0;  // lhs(C) - n at the returned C
    double lo = 0.0;        // certified lower bound (gamma * lambda_{n(1+gamma)} form, or delta/n)
    double hi = 0.0;        // certified upper bound ((1/(n*gamma)) (delta + tail) with gamma = 1/2)
    int iterations = 0;
};

struct RiskEstimate {
    double C = 0.0;
    std::vector<double> learnabilities;  // L_i, nonincreasing, in [0,1]
    double learnability_sq_sum = 0.0;    // sum_j L_j^2
    double E0 = 1.0;                     // overfitting coefficient, >= 1
    double bias_term = 0.0;              // sum_i (1 - L_i)^2 v_i^2
    double sigma2 = 0.0;
    double predicted_mse = 0.0;          // includes test-label noise
    double predicted_excess = 0.0;       // predicted_mse - sigma2
};

enum class RegimeKind { Benign, Tempered, Catastrophic };

struct Regime {
    RegimeKind kind;
    // asymptotic test MSE for Tempered (> sigma2); unset otherwise
    std::optional<double> asymptotic_mse;
};

std::string regime_name(RegimeKind k);

// Self-consistent equation residual:  sum lambda/(lambda+C) + (delta+delta')/C - n.
double self_consistent_residual(const spectra::Spectrum& s, std::size_t n, double C);

// Unique positive root by bisection on log C.  |residual| <= 1e-10 * n.
// Throws NoSolution when delta = delta' = 0 and rank <= n, NonConvergence
// past the iteration cap.
EffectiveRidge solve_effective_ridge(const spectra::Spectrum& s, std::size_t n);

RiskEstimate risk_estimate(const spectra::Spectrum& s, const spectra::TargetCoefficients& c,
                           std::size_t n, double sigma2);

// Rule-based trichotomy over the constructor families (sigma2 > 0 required):
//  - any ridge (delta or delta') or LogPowerlaw(alpha > 1) -> Benign
//  - ridgeless Powerlaw(alpha > 1)                         -> Tempered(alpha * sigma2)
//  - ridgeless SuperPolynomial, or an Explicit spectrum whose successive
//    ratios decay at least superpolynomially fast          -> Catastrophic
// Throws Unclassified when no rule applies.
Regime classify_regime(const spectra::Spectrum& s, double sigma2);

struct SweepPoint {
    std::size_t n = 0;
    std::optional<RiskEstimate> estimate;
    std::string error;  // nonempty when the solver failed at this n
};

std::vector<SweepPoint> asymptotic_sweep(const spectra::Spectrum& s,
                                         const spectra::TargetCoefficients& c, double sigma2,
                                         const std::vector<std::size_t>& n_grid);

}  // namespace krlab::eigenlearning
