#include "krlab/synthetic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>

#include "krlab/rng.hpp"
#include "krlab/spectra.hpp"
#include "krlab/stats.hpp"

namespace krlab::synthetic {

namespace {

constexpr std::size_t kTestBlock = 512;

struct TrainDraw {
    Eigen::MatrixXd A;            // Lambda^{1/2} Phi, M x n
    Eigen::VectorXd y;            // noisy training targets
    Eigen::VectorXd v;            // eigencoefficients
    Eigen::ArrayXd sqrt_lambda;   // per-mode scale
    rng::Stream st;               // positioned at the start of the test draws

    explicit TrainDraw(std::uint64_t seed) : st(seed) {}
};

void fill_gauss(rng::Stream& st, Eigen::MatrixXd& m) {
    double* p = m.data();
    for (Eigen::Index k = 0; k < m.size(); ++k) p[k] = st.gauss();
}

TrainDraw draw_training(const SyntheticTask& t) {
    if (t.n >= t.M) throw std::invalid_argument("synthetic task requires n < M (interpolation regime)");
    if (t.n_test < 1) throw std::invalid_argument("n_test must be >= 1");

    TrainDraw d(t.seed);
    const auto M = static_cast<Eigen::Index>(t.M);
    const auto n = static_cast<Eigen::Index>(t.n);

    d.sqrt_lambda.resize(M);
    for (Eigen::Index i = 0; i < M; ++i)
        d.sqrt_lambda(i) = std::pow(static_cast<double>(i + 1), -0.5 * t.alpha);

    d.v = Eigen::VectorXd::Zero(M);
    if (t.budget > 0.0) {
        auto spec = spectra::make_powerlaw(t.alpha, t.M, 0.0);
        auto coeffs = spectra::make_power_coefficients(spec, t.coeff_exponent, t.budget);
        for (Eigen::Index i = 0; i < M; ++i) d.v(i) = coeffs.v[static_cast<std::size_t>(i)];
    }

    // draw order is part of the contract: Phi entries column-major, then
    // training noise, then the test stream (consumed lazily in blocks)
    d.A.resize(M, n);
    fill_gauss(d.st, d.A);

    d.y = d.A.transpose() * d.v;  // Phi^T v, computed before the in-place scaling
    double sig = std::sqrt(t.sigma2);
    for (Eigen::Index j = 0; j < n; ++j) d.y(j) += sig * d.st.gauss();

    d.A.array().colwise() *= d.sqrt_lambda;  // Phi -> Lambda^{1/2} Phi
    return d;
}

// Streams the test set in blocks: calls f(B_scaled, y_test_block) where
// B_scaled is M x nb.  Identical draw order for both solve paths.
template <class F>
void for_each_test_block(const SyntheticTask& t, TrainDraw& d, F&& f) {
    double sig = std::sqrt(t.sigma2);
    std::size_t done = 0;
    Eigen::MatrixXd B;
    while (done < t.n_test) {
        std::size_t nb = std::min(kTestBlock, t.n_test - done);
        B.resize(static_cast<Eigen::Index>(t.M), static_cast<Eigen::Index>(nb));
        fill_gauss(d.st, B);
        Eigen::VectorXd yte = B.transpose() * d.v;
        for (Eigen::Index j = 0; j < yte.size(); ++j) yte(j) += sig * d.st.gauss();
        B.array().colwise() *= d.sqrt_lambda;
        f(B, yte);
        done += nb;
    }
}

}  // namespace

double run_synthetic_kr(const SyntheticTask& t) {
    TrainDraw d = draw_training(t);
    const auto n = static_cast<Eigen::Index>(t.n);

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    K.selfadjointView<Eigen::Lower>().rankUpdate(d.A.transpose());
    K = K.selfadjointView<Eigen::Lower>();

    Eigen::VectorXd a;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() == Eigen::Success) {
        a = llt.solve(d.y);
    } else {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
        if (ldlt.info() != Eigen::Success || ldlt.vectorD().cwiseAbs().minCoeff() == 0.0)
            throw kr::SingularMatrix("synthetic kernel matrix is numerically singular");
        a = ldlt.solve(d.y);
    }

    Eigen::VectorXd feat = d.A * a;  // M-vector; test predictions are B^T feat
    double se = 0.0;
    for_each_test_block(t, d, [&](const Eigen::MatrixXd& B, const Eigen::VectorXd& yte) {
        se += (B.transpose() * feat - yte).squaredNorm();
    });
    return se / static_cast<double>(t.n_test);
}

double equivalent_linear_regression(const SyntheticTask& t) {
    TrainDraw d = draw_training(t);

    // minimum-norm solution of A^T beta = y via a rank-revealing decomposition
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(d.A.transpose());
    Eigen::VectorXd beta = cod.solve(d.y);

    double se = 0.0;
    for_each_test_block(t, d, [&](const Eigen::MatrixXd& B, const Eigen::VectorXd& yte) {
        se += (B.transpose() * beta - yte).squaredNorm();
    });
    return se / static_cast<double>(t.n_test);
}

double laplace_excess_cell(int d, std::size_t n, double bandwidth, std::size_t n_test,
                           std::uint64_t seed) {
    rng::Stream st(seed);
    // points, then training noise, then test points: one stream, fixed order
    Eigen::MatrixXd X = kr::sample_sphere(d, static_cast<int>(n), st.next_u64());
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < y.size(); ++j) y(j) = st.gauss();
    Eigen::MatrixXd Xt = kr::sample_sphere(d, static_cast<int>(n_test), st.next_u64());

    kr::KernelSpec kern{kr::KernelKind::Laplace, bandwidth};
    kr::KRFit fit = kr::kr_fit(kern, X, y, 0.0);
    Eigen::VectorXd pred = kr::kr_predict(kern, X, fit, Xt);
    return kr::test_mse(pred, Eigen::VectorXd::Zero(pred.size()));
}

std::vector<DimensionCell> laplace_dimension_sweep(const std::vector<int>& d_list,
                                                   const std::vector<std::size_t>& n_grid,
                                                   std::size_t trials, std::uint64_t root_seed,
                                                   double bandwidth, std::size_t n_test) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    std::vector<DimensionCell> out;
    for (int d : d_list) {
        for (std::size_t n : n_grid) {
            DimensionCell cell;
            cell.d = d;
            cell.n = n;
            std::uint64_t cell_key =
                (static_cast<std::uint64_t>(static_cast<std::uint32_t>(d)) << 32) ^ n;
            for (std::size_t trial = 0; trial < trials; ++trial) {
                try {
                    cell.excess_mse.push_back(laplace_excess_cell(
                        d, n, bandwidth, n_test, rng::derive_seed(root_seed, cell_key, trial)));
                } catch (const kr::SingularMatrix&) {
                    ++cell.failures;
                }
            }
            if (!cell.excess_mse.empty()) {
                cell.median = stats::median(cell.excess_mse);
                cell.q25 = stats::quantile(cell.excess_mse, 0.25);
                cell.q75 = stats::quantile(cell.excess_mse, 0.75);
            }
            out.push_back(std::move(cell));
        }
    }
    return out;
}

}  // namespace krlab::synthetic
