#include "krlab/kr.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

#include "krlab/rng.hpp"

namespace krlab::kr {

std::string kernel_name(const KernelSpec& k) {
    return (k.kind == KernelKind::Gaussian ? "gaussian" : "laplace");
}

Eigen::MatrixXd sample_sphere(int d, int n, std::uint64_t seed) {
    if (d < 1 || n < 1) throw std::invalid_argument("sample_sphere: d >= 1 and n >= 1 required");
    rng::Stream st(seed);
    Eigen::MatrixXd X(n, d + 1);
    for (int i = 0; i < n; ++i) {
        double norm2;
        do {
            norm2 = 0.0;
            for (int j = 0; j <= d; ++j) {
                double g = st.gauss();
                X(i, j) = g;
                norm2 += g * g;
            }
        } while (norm2 == 0.0);  // probability-zero guard
        X.row(i) /= std::sqrt(norm2);
    }
    return X;
}

namespace {

// squared distances via the inner-product expansion; clamped at 0
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::VectorXd an = A.rowwise().squaredNorm();
    Eigen::VectorXd bn = B.rowwise().squaredNorm();
    Eigen::MatrixXd D = an.replicate(1, B.rows());
    D.rowwise() += bn.transpose();
    D.noalias() -= 2.0 * A * B.transpose();
    return D.cwiseMax(0.0);
}

void apply_kernel_inplace(const KernelSpec& k, Eigen::MatrixXd& D2) {
    double w = k.bandwidth;
    if (!(w > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
    if (k.kind == KernelKind::Gaussian)
        D2.array() = (-D2.array() / (w * w)).exp();
    else
        D2.array() = (-D2.array().sqrt() / w).exp();
}

}  // namespace

Eigen::MatrixXd kernel_matrix(const KernelSpec& k, const Eigen::MatrixXd& A) {
    Eigen::MatrixXd K = squared_distances(A, A);
    apply_kernel_inplace(k, K);
    // symmetrize and pin the unit diagonal (exact by definition, fuzzy in fp)
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
        K(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            double m = 0.5 * (K(i, j) + K(j, i));
            K(i, j) = m;
            K(j, i) = m;
        }
    }
    return K;
}

Eigen::MatrixXd cross_kernel(const KernelSpec& k, const Eigen::MatrixXd& A,
                             const Eigen::MatrixXd& B) {
    Eigen::MatrixXd K = squared_distances(A, B);
    apply_kernel_inplace(k, K);
    return K;
}

KRFit kr_fit(const KernelSpec& k, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
             double delta) {
    if (delta < 0.0) throw std::invalid_argument("ridge delta must be nonnegative");
    if (X.rows() != y.size()) throw std::invalid_argument("point/target count mismatch");

    Eigen::MatrixXd G = kernel_matrix(k, X);

    // Coincident points give off-diagonal kernel value exactly 1 and an exactly
    // rank-deficient matrix; at delta = 0 that cannot be solved honestly.
    if (delta == 0.0) {
        for (Eigen::Index i = 0; i < G.rows(); ++i)
            for (Eigen::Index j = 0; j < i; ++j)
                if (G(i, j) >= 1.0)
                    throw SingularMatrix("duplicate training points: kernel matrix is rank-deficient at delta = 0");
    }

    G.diagonal().array() += delta;

    KRFit fit;
    fit.delta = delta;

    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() == Eigen::Success) {
        const auto& L = llt.matrixLLT();
        double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < L.rows(); ++i) {
            double v = L(i, i);
            dmax = std::max(dmax, v);
            dmin = std::min(dmin, v);
        }
        if (dmin <= 0.0) throw SingularMatrix("zero Cholesky pivot: kernel matrix is singular");
        // cond(G) ~ (max diag(L) / min diag(L))^2, a cheap pivot-ratio surrogate
        fit.condition = (dmax / dmin) * (dmax / dmin);
        fit.coeffs = llt.solve(y);
    } else {
        // Singular at working precision (smooth kernels in the interpolating
        // regime get here routinely).  LDLT pivots near roundoff act like a
        // ~1e-16-relative jitter, which is how such systems behave in float64
        // no matter the solver; keep the solution, flag it, and let divergent
        // predictions speak for themselves.  Eigen reports NumericalIssue for
        // the tiny negative pivots this produces, so info() is not a gate.
        Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
        Eigen::VectorXd dabs = ldlt.vectorD().cwiseAbs();
        double dmax = dabs.maxCoeff();
        double dmin = dabs.minCoeff();
        fit.condition = (dmin > 0.0) ? dmax / dmin : std::numeric_limits<double>::infinity();
        fit.ill_conditioned = true;
        fit.coeffs = ldlt.solve(y);
        if (!fit.coeffs.allFinite())
            throw SingularMatrix("kernel matrix is numerically singular: solve returned non-finite coefficients");
    }
    if (fit.condition > 1e12) fit.ill_conditioned = true;
    return fit;
}

Eigen::VectorXd kr_predict(const KernelSpec& k, const Eigen::MatrixXd& X_train,
                           const KRFit& fit, const Eigen::MatrixXd& X_test) {
    return cross_kernel(k, X_test, X_train) * fit.coeffs;
}

double test_mse(const Eigen::VectorXd& predictions, const Eigen::VectorXd& clean_targets) {
    if (predictions.size() != clean_targets.size())
        throw std::invalid_argument("prediction/target length mismatch");
    if (predictions.size() == 0) return 0.0;
    return (predictions - clean_targets).squaredNorm() / static_cast<double>(predictions.size());
}

}  // namespace krlab::kr
