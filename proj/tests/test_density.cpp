#include <doctest.h>

#include "mcc/density.hpp"

using namespace mcc;

TEST_CASE("beta parameter recovery across a wide shape grid") {
    const Real grid[] = {0.5, 1, 2, 5, 20, 50};
    for (Real a : grid)
        for (Real b : grid) {
            const auto [s, k] = detail::beta_skew_kurt(a, b);
            const auto got = solve_beta_params(s, k);
            REQUIRE(got.has_value());
            CHECK(got->first == doctest::Approx(a).epsilon(1e-8));
            CHECK(got->second == doctest::Approx(b).epsilon(1e-8));
        }
}

TEST_CASE("infeasible moment pairs are rejected, not mangled") {
    // (s, k) outside the beta region: the naive root formula produces a
    // spurious symmetric pair here, which must not be accepted
    CHECK_FALSE(solve_beta_params(2.5, 1.0).has_value());
    // normal point (s=0, k=0) is a boundary/limit case -> no finite beta
    CHECK_FALSE(solve_beta_params(0.0, 0.0).has_value());
    // s=0, k=-1 is uniform-like: alpha = beta = 1.5
    const auto u = solve_beta_params(0.0, -1.0);
    REQUIRE(u.has_value());
    CHECK(u->first == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(u->second == doctest::Approx(1.5).epsilon(1e-10));
}

TEST_CASE("gamma fallback matches skewness and reports kurtosis mismatch") {
    const Real s = 2.8, k = 6.0, var = 0.01;
    const auto f = fit_shifted_gamma(s, k, var);
    CHECK(f.kind == FitKind::ShiftedGamma);
    CHECK(f.shape == doctest::Approx(4.0 / (s * s)).epsilon(1e-14));
    CHECK(f.shape * f.theta * f.theta == doctest::Approx(var).epsilon(1e-12));
    CHECK(f.kurtosis_mismatch == doctest::Approx(k - 1.5 * s * s).epsilon(1e-12));
    CHECK(f.reflect == 1);
    CHECK(fit_shifted_gamma(-s, k, var).reflect == -1);
    CHECK_THROWS_AS(fit_shifted_gamma(0.0, 1.0, var), std::invalid_argument);
}

TEST_CASE("fit_density picks the right branch") {
    MomentSummary m;
    m.variance = 1.0 / 15.0;

    m.skewness = 0.8;
    m.excess_kurtosis = 0.9;  // within the beta-attainable region
    CHECK(fit_density(m).kind == FitKind::RescaledBeta);

    m.skewness = 2.5;
    m.excess_kurtosis = 1.0;  // infeasible for a beta
    CHECK(fit_density(m).kind == FitKind::ShiftedGamma);

    m.skewness = 0.0;
    m.excess_kurtosis = 0.5;  // symmetric, heavy-tailed: flat-beta stand-in
    const auto f = fit_density(m);
    CHECK(f.kind == FitKind::RescaledBeta);
    CHECK(f.alpha == f.beta);

    m.variance = 0.0;
    CHECK_THROWS_AS(fit_density(m), degenerate_input);
}

TEST_CASE("tail probabilities are complementary and calibrated") {
    MomentSummary m;
    m.variance = 1.0 / 19.0;
    m.skewness = 1.1;
    m.excess_kurtosis = 1.8;
    const auto f = fit_density(m);
    for (Real r : {-0.5, -0.1, 0.0, 0.05, 0.3, 0.7}) {
        const auto [pl, pr] = tail_probs(f, r);
        CHECK(pl + pr == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(pl >= 0);
        CHECK(pr >= 0);
    }
    // monotone in r
    CHECK(tail_probs(f, 0.2).first < tail_probs(f, 0.4).first);
    // mean-zero fit: mass below 0 close to mass implied by the skewed shape
    const auto at0 = tail_probs(f, 0.0);
    CHECK(at0.first > 0.5);  // right-skewed -> median below mean
}

TEST_CASE("deep tails keep relative precision on both branches") {
    MomentSummary m;
    m.variance = 1.0 / 199.0;
    m.skewness = 0.9;
    m.excess_kurtosis = 1.2;
    const auto beta_fit = fit_density(m);
    REQUIRE(beta_fit.kind == FitKind::RescaledBeta);
    const auto deep = tail_probs(beta_fit, 0.6);
    CHECK(deep.second > 0);
    CHECK(deep.second < 1e-5);

    m.skewness = -2.5;
    m.excess_kurtosis = 1.0;
    const auto gamma_fit = fit_density(m);
    REQUIRE(gamma_fit.kind == FitKind::ShiftedGamma);
    const auto gdeep = tail_probs(gamma_fit, -0.8);
    CHECK(gdeep.first > 0);
    CHECK(gdeep.first < 1e-3);
    CHECK(tail_probs(gamma_fit, 0.0).first + tail_probs(gamma_fit, 0.0).second ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("density_pdf integrates to its cdf") {
    MomentSummary m;
    m.variance = 1.0 / 29.0;
    m.skewness = 0.7;
    m.excess_kurtosis = 0.6;
    const auto f = fit_density(m);
    // trapezoid integral of the pdf from far left to 0.1 vs p_left(0.1)
    const Real lo = -1.0, hi = 0.1;
    const int steps = 20000;
    Real acc = 0;
    for (int i = 0; i < steps; ++i) {
        const Real a = lo + (hi - lo) * i / steps;
        const Real b = lo + (hi - lo) * (i + 1) / steps;
        acc += 0.5 * (density_pdf(f, a) + density_pdf(f, b)) * (b - a);
    }
    CHECK(acc == doctest::Approx(tail_probs(f, hi).first).epsilon(1e-6));
}

TEST_CASE("standard-r tail probabilities") {
    // r^2 ~ Beta(1/2, (n-2)/2); at r = 0 both tails are 1/2
    const auto mid = standard_r_pvalues(0.0, 20);
    CHECK(mid.first == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mid.second == doctest::Approx(0.5).epsilon(1e-12));
    const auto pos = standard_r_pvalues(0.5, 20);
    CHECK(pos.second < 0.05);
    CHECK(pos.first + pos.second == doctest::Approx(1.0).epsilon(1e-12));
    const auto neg = standard_r_pvalues(-0.5, 20);
    CHECK(neg.first == doctest::Approx(pos.second).epsilon(1e-12));
    CHECK_THROWS_AS(standard_r_pvalues(0.1, 3), insufficient_sample);
}
