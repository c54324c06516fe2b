#include <doctest.h>

#include "mcc/sim.hpp"

using namespace mcc;

TEST_CASE("generators are seed-deterministic") {
    for (ScenarioId id : {ScenarioId::I, ScenarioId::III, ScenarioId::V}) {
        ScenarioSpec spec{id, 200, 42, 0};
        const auto a = generate_scenario(spec);
        const auto b = generate_scenario(spec);
        CHECK(a.x == b.x);
        CHECK(a.y == b.y);
        spec.seed = 43;
        const auto c = generate_scenario(spec);
        CHECK(a.x != c.x);
    }
}

TEST_CASE("scenario marginals match their definitions") {
    ScenarioSpec spec{ScenarioId::III, 5000, 7, 0};
    const auto d = generate_scenario(spec);
    Real mx = 0, my = 0;
    for (Real v : d.x) {
        CHECK((v == 0 || v == 1 || v == 2));
        mx += v;
    }
    for (Real v : d.y) {
        CHECK((v == 0 || v == 1));
        my += v;
    }
    CHECK(mx / 5000 == doctest::Approx(0.2).epsilon(0.15));
    CHECK(my / 5000 == doctest::Approx(0.2).epsilon(0.15));

    ScenarioSpec s1{ScenarioId::I, 5000, 7, 0};
    const auto d1 = generate_scenario(s1);
    Index zeros = 0;
    for (Real v : d1.x)
        if (v == 0) ++zeros;
    CHECK(static_cast<Real>(zeros) / 5000 == doctest::Approx(0.5).epsilon(0.1));

    ScenarioSpec s4{ScenarioId::IV, 4000, 7, 0};
    const auto d4 = generate_scenario(s4);
    REQUIRE(d4.Z.has_value());
    const auto xs = scale_center(d4.x);
    const auto zs = scale_center(d4.Z->columns[0]);
    CHECK(dot(xs, zs) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(0.05));

    ScenarioSpec s5{ScenarioId::V, 2000, 7, 0};
    const auto d5 = generate_scenario(s5);
    REQUIRE(d5.strata.has_value());
    CHECK(d5.strata->K == 2);
}

TEST_CASE("midranks follow the tie convention") {
    const std::vector<Real> v = {3.0, 1.0, 3.0, 2.0};
    const auto r = midranks(v);
    CHECK(r[0] == doctest::Approx(3.5));
    CHECK(r[1] == doctest::Approx(1.0));
    CHECK(r[2] == doctest::Approx(3.5));
    CHECK(r[3] == doctest::Approx(2.0));
}

TEST_CASE("null p-values are roughly uniform on every scenario") {
    // coarse binned check; discrete scenarios get wide slack
    for (ScenarioId id :
         {ScenarioId::I, ScenarioId::II, ScenarioId::III, ScenarioId::IV,
          ScenarioId::V}) {
        Index reps = 400, below_half = 0, usable = 0;
        for (Index rep = 0; rep < reps; ++rep) {
            ScenarioSpec spec{id, 150, 100 + rep, 0};
            const auto r = analyze_scenario(generate_scenario(spec));
            if (!r.ok) continue;
            ++usable;
            if (r.mcc.p_left <= 0.5) ++below_half;
        }
        CHECK(usable > 350);
        const Real frac = static_cast<Real>(below_half) / usable;
        CHECK(frac > 0.38);
        CHECK(frac < 0.62);
    }
}

TEST_CASE("type1 report structure and broad calibration") {
    ScenarioSpec spec{ScenarioId::III, 300, 11, 0};
    const std::vector<Real> alphas = {0.05};
    const auto rep = type1_experiment(spec, 2000, alphas);
    REQUIRE(rep.cells.size() == 1);
    CHECK(rep.usable > 1900);
    const auto& c = rep.cells[0];
    CHECK(c.mcc_right > 0.02);
    CHECK(c.mcc_right < 0.09);
    CHECK(c.mcc_left > 0.02);
    CHECK(c.mcc_left < 0.09);
    CHECK(c.sd_mcc_right >= 0);
}

TEST_CASE("power under the null equals the level") {
    ScenarioSpec spec{ScenarioId::PowerB, 50, 13, 0};
    const std::vector<Real> betas = {0.0};
    const auto pts = power_experiment(spec, betas, 0.05, 1500);
    REQUIRE(pts.size() == 1);
    CHECK(std::abs(pts[0].power_double - 0.05) < 0.02);
    CHECK(std::abs(pts[0].power_two - 0.05) < 0.02);
}

TEST_CASE("symmetric null gives power parity") {
    // X normal: no skew in the permutation distribution, p_two == p_double
    ScenarioSpec spec{ScenarioId::PowerA, 50, 17, 0};
    const std::vector<Real> betas = {0.6};
    const auto pts = power_experiment(spec, betas, 0.01, 1500);
    CHECK(std::abs(pts[0].power_double - pts[0].power_two) <
          2 * (pts[0].se_double + pts[0].se_two) + 0.01);
}

TEST_CASE("ordering check: symmetry and the delta = 0 degeneracy") {
    // symmetric beta: thresholds coincide, both margins vanish
    const auto sym = ordering_check(5, 5, 0.05, 0.01);
    CHECK(sym.b_minus == doctest::Approx(sym.b_lo).epsilon(1e-6));
    CHECK(sym.b_plus == doctest::Approx(sym.b_hi).epsilon(1e-6));
    CHECK(std::abs(sym.margin1) < 1e-9);
    CHECK(std::abs(sym.margin2) < 1e-9);

    // delta = 0: the expansion's bracketed difference is exactly zero
    const auto zero = ordering_check(5, 20, 0.05, 0.0);
    CHECK(std::abs(zero.margin1) < 1e-12);
    CHECK(std::abs(zero.margin2) < 1e-12);
    CHECK(zero.region1 == doctest::Approx(zero.region2).epsilon(1e-10));

    // right-skewed case: second condition and the region ordering hold
    const auto skew = ordering_check(5, 20, 0.05, 0.02);
    CHECK(skew.cond2);
    CHECK(skew.region_ordered);
    CHECK_THROWS_AS(ordering_check(5, 20, 0.7, 0.01), std::invalid_argument);
}

TEST_CASE("timing fit has near-linear slope on a small grid") {
    const std::vector<Index> m_grid = {512, 1024, 2048};
    const std::vector<Index> n_grid = {256};
    const auto rep = timing_benchmark(m_grid, n_grid, 3);
    REQUIRE(rep.cells.size() == 3);
    for (const auto& c : rep.cells) CHECK(c.seconds > 0);
    CHECK(rep.slope > 0.5);
    CHECK(rep.slope < 1.5);
}
