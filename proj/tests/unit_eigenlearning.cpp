#include <doctest.h>

#include <cmath>

#include "krlab/eigenlearning.hpp"
#include "krlab/spectra.hpp"

using namespace krlab;
using namespace krlab::eigenlearning;

TEST_SUITE("eigenlearning") {

TEST_CASE("two-mode ridgeless constant has a closed form") {
    // lambda = {1, 1/2}, n = 1:  1/(1+C) + (1/2)/(1/2+C) = 1  =>  C = sqrt(1/2)
    spectra::Spectrum s = spectra::make_explicit({1.0, 0.5}, 0.0);
    EffectiveRidge r = solve_effective_ridge(s, 1);
    CHECK(r.C == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    CHECK(std::abs(r.residual) <= 1e-10);
    CHECK(r.iterations > 0);
    // certified bracket (allow an ulp of slack at the endpoints)
    CHECK(r.C >= r.lo * (1.0 - 1e-9));
    CHECK(r.C <= r.hi * (1.0 + 1e-9));
}

TEST_CASE("residual tolerance and certificates on a powerlaw spectrum") {
    spectra::Spectrum s = spectra::make_powerlaw(2.0, 100000, 0.0);
    std::size_t n = 100;
    EffectiveRidge r = solve_effective_ridge(s, n);
    CHECK(std::abs(r.residual) <= 1e-10 * static_cast<double>(n));
    CHECK(r.lo > 0.0);
    CHECK(r.lo <= r.hi);
    CHECK(r.C >= r.lo * (1.0 - 1e-9));
    CHECK(r.C <= r.hi * (1.0 + 1e-9));
    CHECK(std::abs(self_consistent_residual(s, n, r.C)) <= 1e-10 * static_cast<double>(n));
}

TEST_CASE("powerlaw constant approaches the closed-form asymptote") {
    // alpha = 2: C -> (pi/2)^2 / n^2 as n grows
    spectra::Spectrum s = spectra::make_powerlaw(2.0, 1000000, 0.0);
    EffectiveRidge r = solve_effective_ridge(s, 100);
    double predicted = std::pow((3.14159265358979324 / 2.0), 2.0) / (100.0 * 100.0);
    CHECK(r.C == doctest::Approx(predicted).epsilon(0.03));
}

TEST_CASE("constant is monotone in n and in the ridge") {
    spectra::Spectrum s100 = spectra::make_powerlaw(2.0, 20000, 0.0);
    double c50 = solve_effective_ridge(s100, 50).C;
    double c100 = solve_effective_ridge(s100, 100).C;
    double c200 = solve_effective_ridge(s100, 200).C;
    CHECK(c50 > c100);
    CHECK(c100 > c200);

    spectra::Spectrum ridged = spectra::make_powerlaw(2.0, 20000, 0.5);
    CHECK(solve_effective_ridge(ridged, 100).C > c100);
    spectra::Spectrum more = spectra::make_powerlaw(2.0, 20000, 5.0);
    CHECK(solve_effective_ridge(more, 100).C > solve_effective_ridge(ridged, 100).C);
}

TEST_CASE("tail mass acts like a ridge") {
    spectra::Spectrum s = spectra::make_powerlaw(2.0, 20000, 0.0);
    s.delta_prime = 0.3;
    spectra::Spectrum t = spectra::make_powerlaw(2.0, 20000, 0.3);
    CHECK(solve_effective_ridge(s, 64).C == doctest::Approx(solve_effective_ridge(t, 64).C));
}

TEST_CASE("no solution when a ridgeless spectrum can interpolate") {
    spectra::Spectrum s = spectra::make_explicit({1.0, 0.5}, 0.0);
    CHECK_THROWS_AS(solve_effective_ridge(s, 2), NoSolution);
    CHECK_THROWS_AS(solve_effective_ridge(s, 5), NoSolution);
    spectra::Spectrum ridged = spectra::make_explicit({1.0, 0.5}, 0.01);
    CHECK_NOTHROW(solve_effective_ridge(ridged, 2));
}

TEST_CASE("ridgeless learnabilities sum to n exactly") {
    spectra::Spectrum s = spectra::make_powerlaw(2.0, 10000, 0.0);
    RiskEstimate r = risk_estimate(s, spectra::make_zero_coefficients(s), 100, 1.0);
    double sum = 0.0;
    for (double L : r.learnabilities) {
        CHECK(L >= 0.0);
        CHECK(L <= 1.0);
        sum += L;
    }
    CHECK(sum == doctest::Approx(100.0).epsilon(1e-8));
    CHECK(r.E0 >= 1.0);
}

TEST_CASE("risk estimate matches hand arithmetic on the two-mode system") {
    spectra::Spectrum s = spectra::make_explicit({1.0, 0.5}, 0.0);
    spectra::TargetCoefficients v = spectra::make_explicit_coefficients(s, {1.0, 0.0}, 0.0);
    double sigma2 = 1.0;
    RiskEstimate r = risk_estimate(s, v, 1, sigma2);

    double C = std::sqrt(0.5);
    double L1 = 1.0 / (1.0 + C);
    double L2 = 0.5 / (0.5 + C);
    double e0 = 1.0 / (1.0 - L1 * L1 - L2 * L2);
    double bias = (1.0 - L1) * (1.0 - L1) * 1.0;
    CHECK(r.C == doctest::Approx(C).epsilon(1e-9));
    CHECK(r.learnabilities[0] == doctest::Approx(L1).epsilon(1e-9));
    CHECK(r.learnabilities[1] == doctest::Approx(L2).epsilon(1e-9));
    CHECK(r.E0 == doctest::Approx(e0).epsilon(1e-8));
    CHECK(r.bias_term == doctest::Approx(bias).epsilon(1e-8));
    CHECK(r.predicted_mse == doctest::Approx(e0 * (bias + sigma2)).epsilon(1e-8));
    CHECK(r.predicted_excess == doctest::Approx(e0 * (bias + sigma2) - sigma2).epsilon(1e-8));
}

TEST_CASE("frozen value: powerlaw-2 risk at the synthetic defaults") {
    spectra::Spectrum s = spectra::make_powerlaw(2.0, 10000, 0.0);
    spectra::TargetCoefficients v = spectra::make_power_coefficients(s, 2.0, 10.0);
    CHECK(risk_estimate(s, v, 32, 1.0).predicted_mse == doctest::Approx(1.9734).epsilon(1e-3));
    CHECK(risk_estimate(s, v, 512, 1.0).predicted_mse == doctest::Approx(2.0423).epsilon(1e-3));
}

TEST_CASE("degenerate overfitting coefficient is reported") {
    spectra::Spectrum s = spectra::make_explicit({1.0, 1.0}, 0.0);
    s.delta_prime = 1e-28;  // vanishing ridge: learnabilities -> 1, E0 -> infinity
    CHECK_THROWS_AS(risk_estimate(s, spectra::make_zero_coefficients(s), 2, 1.0), DegenerateE0);
}

TEST_CASE("rule-based trichotomy") {
    double sigma2 = 0.25;

    Regime t = classify_regime(spectra::make_powerlaw(2.0, 100, 0.0), sigma2);
    CHECK(t.kind == RegimeKind::Tempered);
    CHECK(*t.asymptotic_mse == doctest::Approx(2.0 * sigma2));

    CHECK(classify_regime(spectra::make_powerlaw(2.0, 100, 0.1), sigma2).kind == RegimeKind::Benign);
    spectra::Spectrum tail = spectra::make_powerlaw(2.0, 100, 0.0);
    tail.delta_prime = 0.05;
    CHECK(classify_regime(tail, sigma2).kind == RegimeKind::Benign);

    CHECK(classify_regime(spectra::make_logpowerlaw(2.0, 100, 0.0), sigma2).kind ==
          RegimeKind::Benign);
    CHECK(classify_regime(spectra::make_superpolynomial(100, 0.0), sigma2).kind ==
          RegimeKind::Catastrophic);

    CHECK_THROWS_AS(classify_regime(spectra::make_powerlaw(0.9, 100, 0.0), sigma2), Unclassified);
    CHECK_THROWS_AS(classify_regime(spectra::make_logpowerlaw(1.0, 100, 0.0), sigma2), Unclassified);
    CHECK_THROWS_AS(classify_regime(spectra::make_powerlaw(2.0, 100, 0.0), 0.0), Unclassified);
}

TEST_CASE("explicit spectra are catastrophic only under the ratio condition") {
    // the superpolynomial family itself, rebuilt as an explicit list, qualifies
    spectra::Spectrum sp = spectra::make_superpolynomial(50, 0.0);
    spectra::Spectrum as_explicit = spectra::make_explicit(sp.values, 0.0);
    CHECK(classify_regime(as_explicit, 1.0).kind == RegimeKind::Catastrophic);

    // a polynomial tail decays far too slowly for the ratio condition
    spectra::Spectrum pw = spectra::make_powerlaw(2.0, 50, 0.0);
    spectra::Spectrum pw_explicit = spectra::make_explicit(pw.values, 0.0);
    CHECK_THROWS_AS(classify_regime(pw_explicit, 1.0), Unclassified);
}

TEST_CASE("sweep returns per-point results and captures failures") {
    spectra::Spectrum s = spectra::make_powerlaw(2.0, 100, 0.0);
    spectra::TargetCoefficients v = spectra::make_zero_coefficients(s);
    auto points = asymptotic_sweep(s, v, 1.0, {50, 100, 200});
    REQUIRE(points.size() == 3);
    CHECK(points[0].estimate.has_value());
    CHECK(points[0].error.empty());
    CHECK_FALSE(points[1].estimate.has_value());  // rank <= n: no ridgeless constant
    CHECK_FALSE(points[1].error.empty());
    CHECK_FALSE(points[2].estimate.has_value());

    CHECK_THROWS_AS(asymptotic_sweep(s, v, 1.0, {100, 50}), SolverError);
    CHECK_THROWS_AS(asymptotic_sweep(s, v, 1.0, {50, 50}), SolverError);
}

}  // TEST_SUITE
