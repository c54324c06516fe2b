#include <doctest.h>

#include "mcc/mcc_one.hpp"
#include "mcc/oracle.hpp"

using namespace mcc;

namespace {

std::vector<Real> random_vector(rng::Xoshiro256pp& gen, Index n, Real lo = -1,
                                Real hi = 1) {
    std::vector<Real> v(n);
    for (auto& x : v)
        x = lo + (hi - lo) * static_cast<Real>(gen.next() >> 11) * 0x1.0p-53;
    return v;
}

std::vector<Index> random_permutation(rng::Xoshiro256pp& gen, Index n) {
    std::vector<Index> p(n);
    std::iota(p.begin(), p.end(), Index(0));
    for (Index j = n - 1; j > 0; --j)
        std::swap(p[j], p[gen.bounded(j + 1)]);
    return p;
}

}  // namespace

TEST_CASE("referent decomposition is an exact identity") {
    rng::Xoshiro256pp gen(31, 0);
    for (Index n : {8, 16}) {
        for (int rep = 0; rep < 50; ++rep) {
            const ScaledPair pair(random_vector(gen, n), random_vector(gen, n));
            const Index ref = gen.bounded(n);
            const auto pi = random_permutation(gen, n);
            const Index choice = pi[ref];
            const auto d = referent_decomposition(pair, ref, choice);
            CHECK(d.b1 > 0);

            Real r_pi = 0;
            for (Index a = 0; a < n; ++a) r_pi += pair.x[a] * pair.y[pi[a]];

            // induced permutation on the reduced (scaled) vectors
            std::vector<Index> xpos(n, n), ypos(n, n);
            Index c = 0;
            for (Index a = 0; a < n; ++a)
                if (a != ref) xpos[a] = c++;
            c = 0;
            for (Index a = 0; a < n; ++a)
                if (a != choice) ypos[a] = c++;
            Real r_red = 0;
            for (Index a = 0; a < n; ++a)
                if (a != ref)
                    r_red += d.reduced_pair.x[xpos[a]] * d.reduced_pair.y[ypos[pi[a]]];

            const Real rebuilt = d.referent_x * d.paired_y + d.b0 + d.b1 * r_red;
            CHECK(std::abs(r_pi - rebuilt) < 1e-12);
        }
    }
}

TEST_CASE("decomposition guards") {
    std::vector<Real> x = {1, 2, 3, 4, 5};
    CHECK_THROWS_AS(referent_decomposition(ScaledPair(x, x), 0, 0),
                    insufficient_sample);
    std::vector<Real> x6 = {1, 2, 3, 4, 5, 6};
    CHECK_THROWS_AS(referent_decomposition(ScaledPair(x6, x6), 9, 0),
                    std::out_of_range);
    // b0 vanishes when the referent value is zero
    std::vector<Real> xz = {0, 1, -1, 2, -2, 0};  // mean 0; index 0 stays 0
    const ScaledPair p(xz, x6);
    const auto d = referent_decomposition(p, 0, 2);
    CHECK(d.b0 == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
}

TEST_CASE("select_referent picks the largest deviation from the median") {
    CHECK(select_referent(std::vector<Real>{0, 0, 10}) == 2);
    CHECK(select_referent(std::vector<Real>{-5, 0, 1}) == 0);
    CHECK(select_referent(std::vector<Real>{3, 3, 3, 3}) == 0);  // tie rule
    CHECK(select_referent(std::vector<Real>{1, 9, 2, 3, 4}) == 1);
}

TEST_CASE("mixture tail probabilities are complementary") {
    rng::Xoshiro256pp gen(7, 0);
    const auto x = random_vector(gen, 20);
    const auto y = random_vector(gen, 20);
    const auto p = mcc1_row(x, y);
    CHECK(p.p_left + p.p_right == doctest::Approx(1.0).epsilon(1e-10));
    const auto pa = mcc1_all_row(x, y);
    CHECK(pa.p_left + pa.p_right == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("close to plain fit when the data have no outliers") {
    rng::Xoshiro256pp gen(19, 0);
    int checked = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const auto x = random_vector(gen, 40, 0, 1);
        const auto y = random_vector(gen, 40, 0, 1);
        const auto plain = mcc_row(x, y);
        if (plain.p_directional < 0.01) continue;
        const auto refined = mcc1_row(x, y);
        CHECK(refined.p_directional ==
              doctest::Approx(plain.p_directional).epsilon(0.10));
        ++checked;
    }
    CHECK(checked > 10);
}

TEST_CASE("refinement helps with a planted outlier") {
    // n = 50, one y value at 6 sample SDs: compare max tail-probability error
    // against a large Monte-Carlo oracle across several probe points
    rng::Xoshiro256pp gen(23, 0);
    const Index n = 50;
    auto y = random_vector(gen, n, 0, 1);
    Real mean = 0;
    for (Real v : y) mean += v;
    mean /= n;
    Real sd = 0;
    for (Real v : y) sd += (v - mean) * (v - mean);
    sd = std::sqrt(sd / (n - 1));
    y[0] = mean + 6.0 * sd;
    const auto x = random_vector(gen, n, 0, 1);

    const auto mc = monte_carlo_pvalues(x, y, 2000000, 71);
    const auto plain = mcc_row(x, y);
    const auto refined = mcc1_row(x, y);

    const Real mc_right = mc.mid_p_right;
    if (mc_right > 1e-4 && mc_right < 1e-1) {
        const Real err_plain = std::abs(std::log10(plain.p_right / mc_right));
        const Real err_refined = std::abs(std::log10(refined.p_right / mc_right));
        CHECK(err_refined <= err_plain + 0.02);
    }
    // the mixture must remain a proper distribution
    CHECK(refined.p_left + refined.p_right == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("mcc1_all is invariant to joint sample reordering") {
    rng::Xoshiro256pp gen(41, 0);
    const auto x = random_vector(gen, 12);
    const auto y = random_vector(gen, 12);
    const auto pi = random_permutation(gen, 12);
    std::vector<Real> xp(12), yp(12);
    for (Index j = 0; j < 12; ++j) {
        xp[j] = x[pi[j]];
        yp[j] = y[pi[j]];
    }
    const auto a = mcc1_all_row(x, y);
    const auto b = mcc1_all_row(xp, yp);
    CHECK(a.p_left == doctest::Approx(b.p_left).epsilon(1e-10));
    CHECK(a.p_two == doctest::Approx(b.p_two).epsilon(1e-10));
}

TEST_CASE("all-referent average equals single referent under full symmetry") {
    // equal-magnitude values: every referent is equivalent
    std::vector<Real> x = {1, -1, 1, -1, 1, -1, 1, -1};
    std::vector<Real> y = {2, -2, -2, 2, 2, -2, 2, -2};
    const auto one = mcc1_row(x, y, 0);
    const auto all = mcc1_all_row(x, y);
    CHECK(one.p_left == doctest::Approx(all.p_left).epsilon(1e-10));
    CHECK(one.p_right == doctest::Approx(all.p_right).epsilon(1e-10));
}

namespace {

// count strictly interior local maxima of a density on a grid; points next to
// zero density are support edges (beta densities with alpha or beta < 1
// diverge there) and do not count as modes
template <typename F>
int interior_modes(F&& pdf) {
    int modes = 0;
    const int steps = 400;
    Real prev2 = 0, prev1 = 0;
    for (int i = 0; i <= steps; ++i) {
        const Real r = -1.0 + 2.0 * i / steps;
        const Real f = pdf(r);
        if (i >= 2 && prev1 > prev2 && prev1 > f && prev2 > 1e-3 && f > 1e-3)
            ++modes;
        prev2 = prev1;
        prev1 = f;
    }
    return modes;
}

}  // namespace

TEST_CASE("the all-referent mixture can be multimodal where one fit cannot") {
    // one extreme count in x: the conditional location shifts split the
    // mixture into separated lumps
    std::vector<Real> x(30, 0.0);
    x[0] = 10.0;
    x[1] = 1.0;
    x[2] = 1.0;
    rng::Xoshiro256pp gen(53, 0);
    const auto y = random_vector(gen, 30, 0, 1);
    const auto mix = mcc1_all_mixture(x, y);
    CHECK(interior_modes([&](Real r) { return mix.pdf(r); }) >= 2);
    // while a single four-moment fit has at most one interior mode
    const auto fit = fit_density(unstratified_moments(ScaledPair(x, y)));
    CHECK(interior_modes([&](Real r) { return density_pdf(fit, r); }) <= 1);
}
