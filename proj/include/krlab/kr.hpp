#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

// Exact kernel (ridge) regression on sampled data: the predictor
//   f(x) = K(x, D) (K(D, D) + delta I)^{-1} Y
// solved by dense symmetric factorization.  Ill-conditioning is reported via
// a condition diagnostic, never repaired by silent jitter: near-singular
// ridgeless solves are themselves an object of study here.

namespace krlab::kr {

struct SingularMatrix : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class KernelKind { Gaussian, Laplace };

struct KernelSpec {
    KernelKind kind = KernelKind::Gaussian;
    double bandwidth = 1.0;  // w in exp(-r^2/w^2) resp. exp(-r/w)
};

std::string kernel_name(const KernelSpec& k);

// n i.i.d. uniform points on the unit sphere S^d embedded in R^{d+1}
// (d = manifold dimension), one point per row; deterministic given seed.
Eigen::MatrixXd sample_sphere(int d, int n, std::uint64_t seed);

// Dense kernel matrices; rows of A/B are points.
Eigen::MatrixXd kernel_matrix(const KernelSpec& k, const Eigen::MatrixXd& A);
Eigen::MatrixXd cross_kernel(const KernelSpec& k, const Eigen::MatrixXd& A,
                             const Eigen::MatrixXd& B);  // K(A_i, B_j)

struct KRFit {
    Eigen::VectorXd coeffs;       // (K + delta I)^{-1} Y
    double delta = 0.0;
    double condition = 0.0;       // pivot-ratio surrogate for cond(K + delta I)
    bool ill_conditioned = false; // condition above 1e12 (or factorization fallback hit)
};

// Direct solve: Cholesky first, pivoted LDLT as the best-effort fallback when
// the matrix is singular at working precision (pivots at roundoff scale; the
// fit is flagged ill_conditioned and any divergence surfaces in the
// predictions, which is the phenomenon under study).  SingularMatrix is
// thrown for exactly duplicated ridgeless points and for solves that come
// back non-finite.  delta >= 0; delta = 0 is the ridgeless/interpolating case.
KRFit kr_fit(const KernelSpec& k, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
             double delta);

Eigen::VectorXd kr_predict(const KernelSpec& k, const Eigen::MatrixXd& X_train,
                           const KRFit& fit, const Eigen::MatrixXd& X_test);

// Mean squared error against clean targets; with identically-zero targets this
// is the excess risk of a pure-noise experiment.
double test_mse(const Eigen::VectorXd& predictions, const Eigen::VectorXd& clean_targets);

}  // namespace krlab::kr
