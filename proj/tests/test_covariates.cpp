#include <doctest.h>

#include "mcc/covariates.hpp"
#include "mcc/oracle.hpp"
#include "mcc/sim.hpp"

using namespace mcc;

namespace {

std::vector<Real> random_vector(rng::RandomSource& rs, Index n) {
    std::vector<Real> v(n);
    for (auto& x : v) x = rs.normal();
    return v;
}

}  // namespace

TEST_CASE("residual is orthogonal to the design and idempotent") {
    rng::RandomSource rs(61, 0);
    const Index n = 40;
    CovariateMatrix Z;
    Z.n = n;
    Z.columns = {random_vector(rs, n), random_vector(rs, n)};
    const auto v = random_vector(rs, n);
    const auto r = residualize(v, Z);
    CHECK(std::abs(pairwise_sum(r)) < 1e-10);
    for (const auto& col : Z.columns) CHECK(std::abs(dot(r, col)) < 1e-10);
    const auto r2 = residualize(r, Z);
    for (Index j = 0; j < n; ++j) CHECK(r[j] == doctest::Approx(r2[j]).epsilon(1e-12));
}

TEST_CASE("empty covariate set reduces to centering") {
    CovariateMatrix Z;
    Z.n = 5;
    const std::vector<Real> v = {1, 2, 3, 4, 10};
    const auto r = residualize(v, Z);
    for (Index j = 0; j < 5; ++j) CHECK(r[j] == doctest::Approx(v[j] - 4.0));
}

TEST_CASE("a covariate regressed on itself leaves nothing") {
    rng::RandomSource rs(62, 0);
    CovariateMatrix Z;
    Z.n = 20;
    Z.columns = {random_vector(rs, 20)};
    const auto r = residualize(Z.columns[0], Z);
    for (Real x : r) CHECK(std::abs(x) < 1e-10);
}

TEST_CASE("rank-deficient designs are rejected by name") {
    CovariateMatrix Z;
    Z.n = 10;
    Z.columns = {std::vector<Real>(10, 2.0)};  // collinear with the intercept
    Z.names = {"batch"};
    const std::vector<Real> v(10, 1.0);
    CHECK_THROWS_WITH_AS(residualize(v, Z), doctest::Contains("batch"),
                         degenerate_input);
}

TEST_CASE("matrix residualization agrees with per-row calls") {
    rng::RandomSource rs(63, 0);
    const Index m = 10, n = 30;
    CovariateMatrix Z;
    Z.n = n;
    Z.columns = {random_vector(rs, n), random_vector(rs, n)};
    FeatureMatrix X;
    X.rows = m;
    X.cols = n;
    for (Index i = 0; i < m * n; ++i) X.values.push_back(rs.normal());
    const auto R = residualize_matrix(X, Z);
    for (Index i = 0; i < m; ++i) {
        const auto single = residualize(X.row(i), Z);
        for (Index j = 0; j < n; ++j)
            CHECK(R.row(i)[j] == doctest::Approx(single[j]).epsilon(1e-12));
    }
}

TEST_CASE("scenario-iv residualization removes the shared covariate") {
    ScenarioSpec spec;
    spec.id = ScenarioId::IV;
    spec.n = 400;
    spec.seed = 5;
    const auto d = generate_scenario(spec);
    REQUIRE(d.Z.has_value());
    const auto xz = residualize(d.x, *d.Z);
    CHECK(std::abs(dot(xz, d.Z->columns[0])) < 1e-9);
    CHECK(std::abs(dot(xz, d.Z->columns[1])) < 1e-9);
}

TEST_CASE("single stratum matches the unstratified engine") {
    rng::RandomSource rs(64, 0);
    const Index n = 25;
    const auto x = random_vector(rs, n);
    const auto y = random_vector(rs, n);
    const auto strata = StrataAssignment::from_labels(std::vector<int>(n, 1));
    const auto a = stratified_mcc_row(x, y, strata);
    const auto b = mcc_row(x, y);
    CHECK(a.p_left == doctest::Approx(b.p_left).epsilon(1e-10));
    CHECK(a.p_right == doctest::Approx(b.p_right).epsilon(1e-10));
    CHECK(a.p_two == doctest::Approx(b.p_two).epsilon(1e-10));
}

TEST_CASE("stratified p-values track the within-stratum oracle") {
    rng::RandomSource rs(65, 0);
    std::vector<int> labels;
    for (int j = 0; j < 4; ++j) labels.push_back(1);
    for (int j = 0; j < 5; ++j) labels.push_back(2);
    const auto strata = StrataAssignment::from_labels(labels);
    std::vector<Real> x(9), y(9);
    for (auto& v : x) v = std::floor(6.0 * rs.uniform());
    for (auto& v : y) v = std::floor(4.0 * rs.uniform());
    AnalysisConfig cfg;
    cfg.continuity_auto = false;  // compare uncorrected tails to the oracle
    const auto p = stratified_mcc_row(x, y, strata, cfg);
    const auto mc = monte_carlo_pvalues(x, y, 1000000, 17, strata);
    // discrete statistic: the smooth fit should land between the full-tie and
    // mid-p conventions, well within a few MC standard errors of either
    CHECK(p.p_left > mc.mid_p_left - 0.03);
    CHECK(p.p_left < mc.p_left + 0.03);
    CHECK(p.p_right > mc.mid_p_right - 0.03);
    CHECK(p.p_right < mc.p_right + 0.03);
}

TEST_CASE("continuity correction on matched pairs tracks the permutation p") {
    // many small strata of binary data, as in matched case-control sets
    rng::RandomSource rs(66, 0);
    const int pairs = 40;
    std::vector<int> labels;
    std::vector<Real> x, y;
    for (int s = 0; s < pairs; ++s) {
        labels.push_back(s + 1);
        labels.push_back(s + 1);
        x.push_back(1);
        x.push_back(0);
        const Real p1 = 0.35, p0 = 0.2;
        y.push_back(rs.bernoulli(p1));
        y.push_back(rs.bernoulli(p0));
    }
    const auto strata = StrataAssignment::from_labels(labels);
    const auto p = stratified_mcc_row(x, y, strata);  // auto-corrected
    const auto mc = monte_carlo_pvalues(x, y, 2000000, 19, strata);
    // the half-unit offset targets the full-tie tail P(A >= a_obs); without it
    // the smooth fit sits near the mid-p convention instead
    CHECK(p.p_right == doctest::Approx(mc.p_right).epsilon(0.1));
    CHECK(p.p_right > mc.mid_p_right);
    AnalysisConfig off;
    off.continuity_auto = false;
    const auto raw = stratified_mcc_row(x, y, strata, off);
    CHECK(raw.p_right == doctest::Approx(mc.mid_p_right).epsilon(0.15));
    CHECK(p.p_double ==
          doctest::Approx(std::min(Real(1), 2 * mc.p_right)).epsilon(0.1));
}

TEST_CASE("stratified results are invariant to relabeling and reordering") {
    rng::RandomSource rs(67, 0);
    std::vector<int> labels = {1, 1, 1, 1, 2, 2, 2, 2, 2};
    std::vector<Real> x(9), y(9);
    for (auto& v : x) v = rs.normal();
    for (auto& v : y) v = rs.normal();
    const auto base =
        stratified_mcc_row(x, y, StrataAssignment::from_labels(labels));

    std::vector<int> swapped = {2, 2, 2, 2, 1, 1, 1, 1, 1};
    const auto relabeled =
        stratified_mcc_row(x, y, StrataAssignment::from_labels(swapped));
    CHECK(base.p_left == doctest::Approx(relabeled.p_left).epsilon(1e-12));

    // reorder two samples inside stratum 2
    std::swap(x[5], x[7]);
    std::swap(y[5], y[7]);
    const auto reordered =
        stratified_mcc_row(x, y, StrataAssignment::from_labels(labels));
    CHECK(base.p_left == doctest::Approx(reordered.p_left).epsilon(1e-12));
}

TEST_CASE("strata validation") {
    CHECK_THROWS_AS(StrataAssignment::from_labels({1, 0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(StrataAssignment::from_labels({1, 3, 1}), std::invalid_argument);
}
