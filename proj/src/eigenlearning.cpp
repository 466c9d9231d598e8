#include "krlab/eigenlearning.hpp"

#include <algorithm>
#include <cmath>

namespace krlab::eigenlearning {

std::string regime_name(RegimeKind k) {
    switch (k) {
        case RegimeKind::Benign: return "benign";
        case RegimeKind::Tempered: return "tempered";
        case RegimeKind::Catastrophic: return "catastrophic";
    }
    return "unknown";
}

double self_consistent_residual(const spectra::Spectrum& s, std::size_t n, double C) {
    double ridge = s.delta + s.delta_prime;
    double acc = 0.0;
    // ascending order: the tiny tail eigenvalues accumulate first
    for (std::size_t i = s.values.size(); i-- > 0;) {
        double l = s.values[i];
        if (l > 0.0) acc += l / (l + C);
    }
    if (ridge > 0.0) acc += ridge / C;
    return acc - static_cast<double>(n);
}

EffectiveRidge solve_effective_ridge(const spectra::Spectrum& s, std::size_t n) {
    if (n < 1) throw SolverError("n must be >= 1");
    double ridge = s.delta + s.delta_prime;
    std::size_t rank = s.rank();
    if (ridge == 0.0 && rank <= n)
        throw NoSolution("no positive effective ridge: delta = 0 and rank(spectrum) <= n");

    const double nd = static_cast<double>(n);
    const double tol = 1e-10 * nd;

    // Certified bounds (these double as the returned bracket):
    //   upper, gamma = 1/2:  C <= (2/n) (delta + sum_{i >= n/2} lambda_i)
    //   lower, gamma = 1 when 2n <= M:  C >= lambda_{2n};
    //   otherwise gamma = (M-n)/n when M > n:  C >= ((M-n)/n) lambda_M;
    //   and always C >= ridge/n.
    std::size_t ub_start = std::max<std::size_t>(1, n / 2);
    double cert_hi = (2.0 / nd) * (ridge + s.tail_sum(ub_start));
    double cert_lo = ridge / nd;
    if (2 * n <= s.M) {
        cert_lo = std::max(cert_lo, s.values[2 * n - 1]);
    } else if (s.M > n && s.values[s.M - 1] > 0.0) {
        double gamma = static_cast<double>(s.M - n) / nd;
        cert_lo = std::max(cert_lo, gamma * s.values[s.M - 1]);
    }

    // Initial bracket per the certified bounds, padded three decades each way;
    // expanded geometrically if the signs are not straddling yet.
    double lo = (cert_lo > 0.0 ? cert_lo : std::max(cert_hi, 1e-300)) * 1e-3;
    double hi = std::max(cert_hi, lo * 4.0) * 1e3;

    // residual is strictly decreasing in C: f(lo) > 0 > f(hi) wanted
    int guard = 0;
    while (self_consistent_residual(s, n, lo) <= 0.0 && guard++ < 200) lo /= 16.0;
    guard = 0;
    while (self_consistent_residual(s, n, hi) >= 0.0 && guard++ < 200) hi *= 16.0;

    EffectiveRidge out;
    out.lo = cert_lo;
    out.hi = cert_hi;

    double llo = std::log(lo), lhi = std::log(hi);
    double C = std::sqrt(lo * hi), f = 0.0;
    for (out.iterations = 1; out.iterations <= 200; ++out.iterations) {
        double lmid = 0.5 * (llo + lhi);
        C = std::exp(lmid);
        f = self_consistent_residual(s, n, C);
        if (std::abs(f) <= tol) {
            out.C = C;
            out.residual = f;
            return out;
        }
        (f > 0.0 ? llo : lhi) = lmid;
    }
    throw NonConvergence("effective-ridge bisection did not reach tolerance in 200 iterations");
}

RiskEstimate risk_estimate(const spectra::Spectrum& s, const spectra::TargetCoefficients& c,
                           std::size_t n, double sigma2) {
    if (c.v.size() != s.M) throw SolverError("coefficient count must match spectrum truncation");
    if (sigma2 < 0.0) throw SolverError("sigma2 must be nonnegative");

    EffectiveRidge er = solve_effective_ridge(s, n);
    RiskEstimate r;
    r.C = er.C;
    r.sigma2 = sigma2;
    r.learnabilities.resize(s.M);

    double sq = 0.0, bias = 0.0;
    for (std::size_t i = s.M; i-- > 0;) {  // ascending accumulation
        double l = s.values[i];
        double L = l > 0.0 ? l / (l + er.C) : 0.0;
        r.learnabilities[i] = L;
        sq += L * L;
        double miss = (1.0 - L) * c.v[i];
        bias += miss * miss;
    }
    r.learnability_sq_sum = sq;
    r.bias_term = bias;

    double nd = static_cast<double>(n);
    if (sq >= nd * (1.0 - 1e-12))
        throw DegenerateE0("sum of squared learnabilities reached n; E0 diverges");
    r.E0 = nd / (nd - sq);
    r.predicted_mse = r.E0 * (bias + sigma2);
    r.predicted_excess = r.predicted_mse - sigma2;
    return r;
}

namespace {

// Clause for explicit lists: eigenvalues falling at least as fast as the
// superpolynomial reference i^{-log i}, checked on successive ratios.  The
// reference ratio is i^{-ln i}/(i+1)^{-ln(i+1)} = exp(ln^2(i+1) - ln^2 i).
bool ratio_condition_superpoly(const std::vector<double>& v) {
    std::size_t m = v.size();
    while (m > 0 && v[m - 1] == 0.0) --m;  // trailing zero modes drop infinitely fast
    if (m < 2) return false;               // no ratio evidence
    for (std::size_t i = 1; i < m; ++i) {
        double x = static_cast<double>(i);
        double y = static_cast<double>(i + 1);
        double ref = std::exp(std::log(y) * std::log(y) - std::log(x) * std::log(x));
        if (v[i - 1] / v[i] < ref * (1.0 - 1e-12)) return false;
    }
    return true;
}

}  // namespace

Regime classify_regime(const spectra::Spectrum& s, double sigma2) {
    if (!(sigma2 > 0.0))
        throw Unclassified("regime classification requires sigma2 > 0");

    if (s.delta > 0.0 || s.delta_prime > 0.0) return {RegimeKind::Benign, std::nullopt};

    switch (s.family) {
        case spectra::Family::LogPowerlaw:
            if (s.alpha > 1.0) return {RegimeKind::Benign, std::nullopt};
            throw Unclassified("logpowerlaw with alpha <= 1 matches no clause");
        case spectra::Family::Powerlaw:
            if (s.alpha > 1.0) return {RegimeKind::Tempered, s.alpha * sigma2};
            throw Unclassified("powerlaw with alpha <= 1 matches no clause");
        case spectra::Family::SuperPolynomial:
            return {RegimeKind::Catastrophic, std::nullopt};
        case spectra::Family::Explicit:
            if (ratio_condition_superpoly(s.values)) return {RegimeKind::Catastrophic, std::nullopt};
            throw Unclassified("explicit spectrum matches no clause");
    }
    throw Unclassified("unknown family");
}

std::vector<SweepPoint> asymptotic_sweep(const spectra::Spectrum& s,
                                         const spectra::TargetCoefficients& c, double sigma2,
                                         const std::vector<std::size_t>& n_grid) {
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1]) throw SolverError("n grid must be strictly increasing");

    std::vector<SweepPoint> out;
    out.reserve(n_grid.size());
    for (std::size_t n : n_grid) {
        SweepPoint p;
        p.n = n;
        try {
            p.estimate = risk_estimate(s, c, n, sigma2);
        } catch (const std::exception& e) {
            p.error = e.what();
        }
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace krlab::eigenlearning
