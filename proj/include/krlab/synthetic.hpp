#pragma once

#include <cstdint>
#include <vector>

#include "krlab/kr.hpp"

// Kernel regression with an exactly known eigensystem: eigenfunction values
// are drawn as i.i.d. standard normals, so the train/train kernel matrix is
// K = Phi^T Lambda Phi with Lambda = diag(i^{-alpha}).  This gives a
// Monte-Carlo oracle for the closed-form risk predictions, with targets
// Y = Phi^T v + noise built from eigencoefficients v_i ~ i^{-q} normalized to
// a fixed norm budget.

namespace krlab::synthetic {

struct SyntheticTask {
    std::size_t M = 10000;        // feature modes
    double alpha = 2.0;           // eigenvalue decay exponent
    double coeff_exponent = 2.0;  // v_i ~ i^{-coeff_exponent}
    double budget = 10.0;         // sum v_i^2 after normalization; 0 means v = 0
    double sigma2 = 1.0;          // label noise variance (train and test)
    std::size_t n = 256;          // training samples; must stay < M
    std::size_t n_test = 3000;
    std::uint64_t seed = 1;
};

// Ridgeless KR through the n x n kernel matrix; returns test MSE against
// noisy test labels.  Deterministic given task.seed.
double run_synthetic_kr(const SyntheticTask& t);

// The same task solved as minimum-norm linear regression on features
// Lambda^{1/2} phi via a rank-revealing orthogonal decomposition.  Shares the
// random draws with run_synthetic_kr, so results agree to ~1e-6 relative.
double equivalent_linear_regression(const SyntheticTask& t);

struct DimensionCell {
    int d = 0;
    std::size_t n = 0;
    std::vector<double> excess_mse;  // per trial
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    std::size_t failures = 0;  // solve failures recorded, not fatal
};

// Laplace-kernel ridgeless regression on uniform sphere data with pure-noise
// training targets and zero test targets, so MSE = excess risk.  One row per
// (d, n); medians with quartile bands over `trials` independent runs.
std::vector<DimensionCell> laplace_dimension_sweep(const std::vector<int>& d_list,
                                                   const std::vector<std::size_t>& n_grid,
                                                   std::size_t trials, std::uint64_t root_seed,
                                                   double bandwidth = 1.0,
                                                   std::size_t n_test = 2000);

// Single (d, n, trial) cell of the sweep above; exposed for the harness.
double laplace_excess_cell(int d, std::size_t n, double bandwidth, std::size_t n_test,
                           std::uint64_t seed);

}  // namespace krlab::synthetic
