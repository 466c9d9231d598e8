#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// One-dimensional toy interpolators on [0,1]: a Nadaraya-Watson smoother with
// a singular kernel (weights |x - x_i|^{-a}, so it interpolates), piecewise
// linear interpolation, the full degree-(n-1) Lagrange interpolant in
// barycentric form, and nearest-neighbor classifiers.  Cheap, fully
// analyzable examples of error that vanishes, stabilizes, or diverges as n
// grows.

namespace krlab::interpolators {

struct DuplicateX : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ToyKind { SingularSmoother, PiecewiseLinear, PolynomialInterp, OneNN, KNN };
enum class KRule { Fixed, LogN };

struct ToyMethod {
    ToyKind kind = ToyKind::PiecewiseLinear;
    double exponent = 2.0;  // singular-smoother weight exponent a
    KRule k_rule = KRule::LogN;
    int k_fixed = 1;

    static ToyMethod singular(double a = 2.0) { return {ToyKind::SingularSmoother, a, KRule::Fixed, 1}; }
    static ToyMethod piecewise_linear() { return {ToyKind::PiecewiseLinear, 0.0, KRule::Fixed, 1}; }
    static ToyMethod polynomial() { return {ToyKind::PolynomialInterp, 0.0, KRule::Fixed, 1}; }
    static ToyMethod one_nn() { return {ToyKind::OneNN, 0.0, KRule::Fixed, 1}; }
    static ToyMethod knn_logn() { return {ToyKind::KNN, 0.0, KRule::LogN, 1}; }
    static ToyMethod knn_fixed(int k) { return {ToyKind::KNN, 0.0, KRule::Fixed, k}; }
};

std::string method_name(const ToyMethod& m);

// k = max(1, round(ln n)) for LogN, else k_fixed; always capped at n.
int knn_k(const ToyMethod& m, std::size_t n);

// Fitted state for one training set; prediction is a pure function.
// Nearest-neighbor distance ties break toward the lowest original index.
class ToyFit {
public:
    ToyFit(const ToyMethod& m, const std::vector<double>& x, const std::vector<double>& y);

    double predict(double x_query) const;
    std::vector<double> predict(const std::vector<double>& xs) const;

private:
    double predict_singular(double xq) const;
    double predict_pwl(double xq) const;
    double predict_poly(double xq) const;
    std::size_t nearest_sorted_slot(double xq) const;
    double predict_knn(double xq, int k) const;

    ToyMethod m_;
    std::vector<double> xs_, ys_;       // sorted by x
    std::vector<std::size_t> orig_;     // original index per sorted slot
    std::vector<double> logw_, sgnw_;   // barycentric weights (log magnitude, sign)
};

// one-shot convenience wrapper
double fit_predict_1d(const ToyMethod& m, const std::vector<double>& x,
                      const std::vector<double>& y, double x_query);

struct ToyCell {
    std::size_t n = 0;
    std::vector<double> excess_mse;       // regression trials (+inf on overflow)
    std::vector<double> clean_error;      // classification trials, clean test labels
    std::vector<double> noisy_error;      // classification trials, noisy test labels
};

// Regression protocol: ground truth f* = 0 on [0,1], uniform inputs, Gaussian
// noise sigma2; excess risk is mean squared prediction against 0 over a fresh
// uniform test set.  Non-finite polynomial blowups are recorded as +inf.
std::vector<ToyCell> toy_regression_curve(const ToyMethod& m,
                                          const std::vector<std::size_t>& n_grid, double sigma2,
                                          std::size_t trials, std::uint64_t root_seed,
                                          std::size_t n_test = 1000);

// Classification protocol: constant ground-truth label 1, exact-fraction
// round(p*n) labels flipped on the training side and independently on a noisy
// copy of the test labels.  Reports error against both clean and noisy test
// labels (they converge to different levels, p-linked vs 2p(1-p)-linked).
std::vector<ToyCell> nn_classification_curve(const ToyMethod& m,
                                             const std::vector<std::size_t>& n_grid, double p,
                                             std::size_t trials, std::uint64_t root_seed,
                                             std::size_t n_test = 2000);

}  // namespace krlab::interpolators
