#include "krlab/interpolators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "krlab/rng.hpp"

namespace krlab::interpolators {

std::string method_name(const ToyMethod& m) {
    switch (m.kind) {
        case ToyKind::SingularSmoother: {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%g", m.exponent);
            return std::string("singular_smoother_a") + buf;
        }
        case ToyKind::PiecewiseLinear: return "piecewise_linear";
        case ToyKind::PolynomialInterp: return "polynomial_interp";
        case ToyKind::OneNN: return "one_nn";
        case ToyKind::KNN:
            return m.k_rule == KRule::LogN ? "knn_logn" : "knn_k" + std::to_string(m.k_fixed);
    }
    return "unknown";
}

int knn_k(const ToyMethod& m, std::size_t n) {
    long k = m.k_rule == KRule::LogN
                 ? std::lround(std::log(static_cast<double>(n)))
                 : m.k_fixed;
    k = std::max(1L, k);
    return static_cast<int>(std::min<long>(k, static_cast<long>(n)));
}

ToyFit::ToyFit(const ToyMethod& m, const std::vector<double>& x, const std::vector<double>& y)
    : m_(m) {
    if (x.size() != y.size() || x.empty())
        throw std::invalid_argument("training inputs/targets must be nonempty and equal length");

    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    xs_.resize(x.size());
    ys_.resize(x.size());
    orig_ = order;
    for (std::size_t i = 0; i < order.size(); ++i) {
        xs_[i] = x[order[i]];
        ys_[i] = y[order[i]];
        if (i > 0 && xs_[i] == xs_[i - 1]) throw DuplicateX("duplicate training abscissa");
    }

    if (m_.kind == ToyKind::PolynomialInterp) {
        // barycentric weights w_i = 1 / prod_{j != i} (x_i - x_j), carried as
        // log magnitude + sign so n in the thousands stays representable
        std::size_t n = xs_.size();
        logw_.assign(n, 0.0);
        sgnw_.assign(n, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            double lm = 0.0, sg = 1.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                double diff = xs_[i] - xs_[j];
                lm -= std::log(std::abs(diff));
                if (diff < 0.0) sg = -sg;
            }
            logw_[i] = lm;
            sgnw_[i] = sg;
        }
        double lmax = *std::max_element(logw_.begin(), logw_.end());
        for (double& l : logw_) l -= lmax;  // common factor cancels in the ratio
    }
}

double ToyFit::predict_singular(double xq) const {
    // normalized weights (dmin/d_i)^a keep the largest weight at 1
    double dmin = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
        double d = std::abs(xq - xs_[i]);
        if (d < dmin) {
            dmin = d;
            arg = i;
        }
    }
    if (dmin == 0.0) return ys_[arg];  // interpolation via the singularity
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
        double w = std::pow(dmin / std::abs(xq - xs_[i]), m_.exponent);
        num += w * ys_[i];
        den += w;
    }
    return num / den;
}

double ToyFit::predict_pwl(double xq) const {
    if (xq <= xs_.front()) return ys_.front();
    if (xq >= xs_.back()) return ys_.back();
    auto it = std::upper_bound(xs_.begin(), xs_.end(), xq);
    std::size_t hi = static_cast<std::size_t>(it - xs_.begin());
    std::size_t lo = hi - 1;
    double t = (xq - xs_[lo]) / (xs_[hi] - xs_[lo]);
    return ys_[lo] + t * (ys_[hi] - ys_[lo]);
}

double ToyFit::predict_poly(double xq) const {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
        double diff = xq - xs_[i];
        if (diff == 0.0) return ys_[i];
        double w = sgnw_[i] * std::exp(logw_[i]) / diff;
        num += w * ys_[i];
        den += w;
    }
    return num / den;  // may be inf/nan when den underflows: caller records it
}

std::size_t ToyFit::nearest_sorted_slot(double xq) const {
    auto it = std::lower_bound(xs_.begin(), xs_.end(), xq);
    std::size_t r = static_cast<std::size_t>(it - xs_.begin());
    if (r == 0) return 0;
    if (r == xs_.size()) return xs_.size() - 1;
    double dl = xq - xs_[r - 1];
    double dr = xs_[r] - xq;
    if (dl < dr) return r - 1;
    if (dr < dl) return r;
    return orig_[r - 1] < orig_[r] ? r - 1 : r;  // tie: lowest original index
}

double ToyFit::predict_knn(double xq, int k) const {
    std::size_t n = xs_.size();
    std::size_t nearest = nearest_sorted_slot(xq);

    // expanding window around the nearest slot
    std::size_t lo = nearest, hi = nearest;
    std::vector<std::size_t> picked;
    picked.reserve(static_cast<std::size_t>(k));
    picked.push_back(nearest);
    while (picked.size() < static_cast<std::size_t>(k)) {
        bool has_l = lo > 0, has_r = hi + 1 < n;
        if (!has_l && !has_r) break;
        if (!has_r) {
            picked.push_back(--lo);
        } else if (!has_l) {
            picked.push_back(++hi);
        } else {
            double dl = std::abs(xq - xs_[lo - 1]);
            double dr = std::abs(xs_[hi + 1] - xq);
            if (dl < dr || (dl == dr && orig_[lo - 1] < orig_[hi + 1]))
                picked.push_back(--lo);
            else
                picked.push_back(++hi);
        }
    }

    // majority vote; a tie goes to the nearest neighbor's label
    double label_a = ys_[picked[0]];
    std::size_t count_a = 0, count_other = 0;
    double label_other = label_a;
    for (std::size_t idx : picked) {
        if (ys_[idx] == label_a) {
            ++count_a;
        } else {
            label_other = ys_[idx];
            ++count_other;
        }
    }
    return count_other > count_a ? label_other : label_a;
}

double ToyFit::predict(double xq) const {
    switch (m_.kind) {
        case ToyKind::SingularSmoother: return predict_singular(xq);
        case ToyKind::PiecewiseLinear: return predict_pwl(xq);
        case ToyKind::PolynomialInterp: return predict_poly(xq);
        case ToyKind::OneNN: return ys_[nearest_sorted_slot(xq)];
        case ToyKind::KNN: return predict_knn(xq, knn_k(m_, xs_.size()));
    }
    throw std::logic_error("unhandled toy method");
}

std::vector<double> ToyFit::predict(const std::vector<double>& xs) const {
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = predict(xs[i]);
    return out;
}

double fit_predict_1d(const ToyMethod& m, const std::vector<double>& x,
                      const std::vector<double>& y, double x_query) {
    return ToyFit(m, x, y).predict(x_query);
}

namespace {

// exact-fraction corruption: flips round(p*n) labels of a 0/1 vector
void flip_exact_fraction(std::vector<double>& labels, double p, rng::Stream& st) {
    std::size_t n = labels.size();
    std::size_t nflip = static_cast<std::size_t>(std::llround(p * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < nflip; ++i) {  // partial Fisher-Yates
        std::size_t j = i + static_cast<std::size_t>(st.below(n - i));
        std::swap(idx[i], idx[j]);
        labels[idx[i]] = 1.0 - labels[idx[i]];
    }
}

}  // namespace

std::vector<ToyCell> toy_regression_curve(const ToyMethod& m,
                                          const std::vector<std::size_t>& n_grid, double sigma2,
                                          std::size_t trials, std::uint64_t root_seed,
                                          std::size_t n_test) {
    std::vector<ToyCell> out;
    double sig = std::sqrt(sigma2);
    for (std::size_t n : n_grid) {
        ToyCell cell;
        cell.n = n;
        for (std::size_t trial = 0; trial < trials; ++trial) {
            rng::Stream st(rng::derive_seed(root_seed, n, trial));
            std::vector<double> x(n), y(n);
            for (std::size_t i = 0; i < n; ++i) x[i] = st.uniform();
            for (std::size_t i = 0; i < n; ++i) y[i] = sig * st.gauss();
            ToyFit fit(m, x, y);
            double se = 0.0;
            for (std::size_t i = 0; i < n_test; ++i) {
                double pred = fit.predict(st.uniform());
                se += pred * pred;
            }
            double mse = se / static_cast<double>(n_test);
            cell.excess_mse.push_back(std::isfinite(mse)
                                          ? mse
                                          : std::numeric_limits<double>::infinity());
        }
        out.push_back(std::move(cell));
    }
    return out;
}

std::vector<ToyCell> nn_classification_curve(const ToyMethod& m,
                                             const std::vector<std::size_t>& n_grid, double p,
                                             std::size_t trials, std::uint64_t root_seed,
                                             std::size_t n_test) {
    if (m.kind != ToyKind::OneNN && m.kind != ToyKind::KNN)
        throw std::invalid_argument("classification protocol applies to nearest-neighbor methods");
    if (p < 0.0 || p >= 1.0) throw std::invalid_argument("flip probability must lie in [0,1)");

    std::vector<ToyCell> out;
    for (std::size_t n : n_grid) {
        ToyCell cell;
        cell.n = n;
        for (std::size_t trial = 0; trial < trials; ++trial) {
            rng::Stream st(rng::derive_seed(root_seed, n, trial));
            std::vector<double> x(n);
            for (std::size_t i = 0; i < n; ++i) x[i] = st.uniform();
            std::vector<double> labels(n, 1.0);  // constant ground truth
            flip_exact_fraction(labels, p, st);

            std::vector<double> xt(n_test);
            for (std::size_t i = 0; i < n_test; ++i) xt[i] = st.uniform();
            std::vector<double> noisy(n_test, 1.0);
            flip_exact_fraction(noisy, p, st);

            ToyFit fit(m, x, labels);
            std::size_t wrong_clean = 0, wrong_noisy = 0;
            for (std::size_t i = 0; i < n_test; ++i) {
                double pred = fit.predict(xt[i]);
                if (pred != 1.0) ++wrong_clean;
                if (pred != noisy[i]) ++wrong_noisy;
            }
            cell.clean_error.push_back(static_cast<double>(wrong_clean) / static_cast<double>(n_test));
            cell.noisy_error.push_back(static_cast<double>(wrong_noisy) / static_cast<double>(n_test));
        }
        out.push_back(std::move(cell));
    }
    return out;
}

}  // namespace krlab::interpolators
