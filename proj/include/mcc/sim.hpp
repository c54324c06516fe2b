#pragma once

#include <chrono>

#include "mcc/ci.hpp"
#include "mcc/covariates.hpp"

namespace mcc {

// Simulation scenarios: (i)-(v) are null-calibration designs, power-a/b the
// two power-comparison designs (X normal vs X exponential, Y = beta*X + err).
enum class ScenarioId { I, II, III, IV, V, PowerA, PowerB };

struct ScenarioSpec {
    ScenarioId id = ScenarioId::I;
    Index n = 500;
    std::uint64_t seed = 1;
    Real effect = 0;  // beta for power scenarios, 0 under the null
};

struct Dataset {
    std::vector<Real> x, y;
    std::optional<CovariateMatrix> Z;
    std::optional<StrataAssignment> strata;
};

namespace rng {

// Sampling adapters over the raw generator.
struct RandomSource {
    Xoshiro256pp gen;
    bool have_spare = false;
    Real spare = 0;

    RandomSource(std::uint64_t seed, std::uint64_t stream) : gen(seed, stream) {}

    Real uniform() { return static_cast<Real>(gen.next() >> 11) * 0x1.0p-53; }

    Real normal() {
        if (have_spare) {
            have_spare = false;
            return spare;
        }
        Real u1 = uniform();
        while (u1 <= 0) u1 = uniform();
        const Real u2 = uniform();
        const Real mag = std::sqrt(-2.0 * std::log(u1));
        spare = mag * std::sin(2.0 * M_PI * u2);
        have_spare = true;
        return mag * std::cos(2.0 * M_PI * u2);
    }

    Real exponential() {
        Real u = uniform();
        while (u <= 0) u = uniform();
        return -std::log(u);
    }

    Real chisq1() {
        const Real z = normal();
        return z * z;
    }

    int bernoulli(Real p) { return uniform() < p ? 1 : 0; }
    int binomial2(Real p) { return bernoulli(p) + bernoulli(p); }
};

}  // namespace rng

// Mid-ranks (ties share the average of the ranks they span).
inline std::vector<Real> midranks(std::span<const Real> v) {
    const Index n = v.size();
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index(0));
    std::sort(order.begin(), order.end(),
              [&](Index a, Index b) { return v[a] < v[b]; });
    std::vector<Real> r(n);
    Index i = 0;
    while (i < n) {
        Index j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const Real avg = 0.5 * (static_cast<Real>(i) + static_cast<Real>(j)) + 1.0;
        for (Index k = i; k <= j; ++k) r[order[k]] = avg;
        i = j + 1;
    }
    return r;
}

inline Dataset generate_scenario(const ScenarioSpec& spec) {
    rng::RandomSource rs(spec.seed, static_cast<std::uint64_t>(spec.id));
    const Index n = spec.n;
    Dataset d;
    d.x.resize(n);
    d.y.resize(n);
    switch (spec.id) {
        case ScenarioId::I:
            // two-sample mixed: x half zeros, rest chi-square(1); y ~ Bern(0.2)
            for (Index j = 0; j < n; ++j) {
                d.x[j] = rs.uniform() < 0.5 ? 0.0 : rs.chisq1();
                d.y[j] = rs.bernoulli(0.2);
            }
            break;
        case ScenarioId::II: {
            // ranks of a 0 / 3.0 / chi-square(1) mixture (0.2 / 0.1 / 0.7)
            std::vector<Real> raw(n);
            for (Index j = 0; j < n; ++j) {
                const Real u = rs.uniform();
                raw[j] = u < 0.2 ? 0.0 : (u < 0.3 ? 3.0 : rs.chisq1());
                d.y[j] = rs.bernoulli(0.2);
            }
            d.x = midranks(raw);
            break;
        }
        case ScenarioId::III:
            // unbalanced case/control: genotype-like x, case indicator y
            for (Index j = 0; j < n; ++j) {
                d.x[j] = rs.binomial2(0.1);
                d.y[j] = rs.bernoulli(0.2);
            }
            break;
        case ScenarioId::IV: {
            // shared continuous covariate Z1; Z2 is noise but still fitted
            CovariateMatrix Z;
            Z.n = n;
            Z.columns.assign(2, std::vector<Real>(n));
            Z.names = {"Z1", "Z2"};
            for (Index j = 0; j < n; ++j) {
                const Real z1 = rs.normal();
                Z.columns[0][j] = z1;
                Z.columns[1][j] = rs.exponential();
                d.y[j] = z1 + rs.exponential();
                d.x[j] = 2.0 * z1 + rs.exponential();
            }
            d.Z = std::move(Z);
            break;
        }
        case ScenarioId::V: {
            // discrete confounder as stratum
            std::vector<int> labels(n);
            for (Index j = 0; j < n; ++j) {
                const int z = rs.bernoulli(0.5);
                labels[j] = z + 1;
                d.x[j] = rs.binomial2(0.02 + 0.16 * z);
                d.y[j] = rs.bernoulli(0.04 + 0.32 * z);
            }
            d.strata = StrataAssignment::from_labels(std::move(labels));
            break;
        }
        case ScenarioId::PowerA:
            for (Index j = 0; j < n; ++j) {
                d.x[j] = rs.normal();
                d.y[j] = spec.effect * d.x[j] + rs.exponential();
            }
            break;
        case ScenarioId::PowerB:
            for (Index j = 0; j < n; ++j) {
                d.x[j] = rs.exponential();
                d.y[j] = spec.effect * d.x[j] + rs.exponential();
            }
            break;
    }
    return d;
}

// Route a dataset through the matching analysis path (covariate
// residualization for scenario iv, stratification for v, plain otherwise)
// and also produce the parametric comparator p-values.
struct ScenarioPValues {
    PValueSet mcc;
    Real std_left = 1, std_right = 1;
    bool ok = true;
};

inline ScenarioPValues analyze_scenario(const Dataset& d,
                                        const AnalysisConfig& cfg = {}) {
    ScenarioPValues out;
    try {
        if (d.strata) {
            out.mcc = stratified_mcc_row(d.x, d.y, *d.strata, cfg);
            if (out.mcc.untestable) {
                out.ok = false;
                return out;
            }
            // comparator on the stratum-centered data
            const auto c = detail::center_by_strata(d.x, d.y, *d.strata);
            const ScaledPair pair(c.xc, c.yc);
            std::tie(out.std_left, out.std_right) =
                standard_r_pvalues(trend_statistic(pair), pair.n());
            return out;
        }
        std::vector<Real> x = d.x, y = d.y;
        if (d.Z) {
            x = residualize(x, *d.Z);
            y = residualize(y, *d.Z);
        }
        out.mcc = mcc_row(x, y, cfg);
        if (out.mcc.untestable) {
            out.ok = false;
            return out;
        }
        std::tie(out.std_left, out.std_right) =
            standard_r_pvalues(out.mcc.r_obs, x.size());
    } catch (const degenerate_input&) {
        out.ok = false;
    }
    return out;
}

// Per-tail empirical type I rates and the log10(rate / alpha) summary used
// in the calibration plots, with batch standard deviations.
struct Type1Cell {
    Real alpha = 0;
    Real mcc_left = 0, mcc_right = 0, std_left = 0, std_right = 0;  // rates
    Real sd_mcc_left = 0, sd_mcc_right = 0, sd_std_left = 0, sd_std_right = 0;
};

struct Type1Report {
    std::vector<Type1Cell> cells;
    Index replications = 0;
    Index usable = 0;

    static Real log_ratio(Real rate, Real alpha) {
        return std::log10(std::max(rate, Real(1e-300)) / alpha);
    }
};

inline Type1Report type1_experiment(ScenarioSpec spec, Index replications,
                                    std::span<const Real> alpha_grid,
                                    unsigned workers = 0) {
    constexpr Index kBatches = 10;
    struct Tally {
        std::vector<std::array<std::uint64_t, 4>> hits;  // per alpha: ml,mr,sl,sr
        std::uint64_t usable = 0;
    };
    std::vector<Tally> batch(kBatches);
    for (auto& b : batch)
        b.hits.assign(alpha_grid.size(), {0, 0, 0, 0});

    std::vector<ScenarioPValues> results(replications);
    parallel_for(replications, workers, [&](Index rep) {
        ScenarioSpec s = spec;
        s.seed = spec.seed + rep;
        results[rep] = analyze_scenario(generate_scenario(s));
    });
    for (Index rep = 0; rep < replications; ++rep) {
        const auto& r = results[rep];
        if (!r.ok) continue;
        auto& b = batch[rep % kBatches];
        ++b.usable;
        for (Index a = 0; a < alpha_grid.size(); ++a) {
            const Real al = alpha_grid[a];
            if (r.mcc.p_left <= al) ++b.hits[a][0];
            if (r.mcc.p_right <= al) ++b.hits[a][1];
            if (r.std_left <= al) ++b.hits[a][2];
            if (r.std_right <= al) ++b.hits[a][3];
        }
    }

    Type1Report rep;
    rep.replications = replications;
    for (const auto& b : batch) rep.usable += b.usable;
    for (Index a = 0; a < alpha_grid.size(); ++a) {
        Type1Cell cell;
        cell.alpha = alpha_grid[a];
        std::array<Real, 4> mean{};
        std::array<std::vector<Real>, 4> rates;
        for (const auto& b : batch) {
            if (b.usable == 0) continue;
            for (int c = 0; c < 4; ++c)
                rates[c].push_back(static_cast<Real>(b.hits[a][c]) /
                                   static_cast<Real>(b.usable));
        }
        for (int c = 0; c < 4; ++c) {
            Real m = 0;
            for (Real v : rates[c]) m += v;
            m /= static_cast<Real>(rates[c].size());
            mean[c] = m;
            Real s2 = 0;
            for (Real v : rates[c]) s2 += (v - m) * (v - m);
            const Real sd = rates[c].size() > 1
                                ? std::sqrt(s2 / (static_cast<Real>(rates[c].size()) - 1))
                                : 0;
            switch (c) {
                case 0: cell.sd_mcc_left = sd; break;
                case 1: cell.sd_mcc_right = sd; break;
                case 2: cell.sd_std_left = sd; break;
                case 3: cell.sd_std_right = sd; break;
            }
        }
        cell.mcc_left = mean[0];
        cell.mcc_right = mean[1];
        cell.std_left = mean[2];
        cell.std_right = mean[3];
        rep.cells.push_back(cell);
    }
    return rep;
}

// Power of p_double vs p_two at one |beta|, averaged over the +beta and
// -beta alternatives.
struct PowerPoint {
    Real beta_abs = 0;
    Real power_double = 0, power_two = 0;
    Real se_double = 0, se_two = 0;
};

inline std::vector<PowerPoint> power_experiment(ScenarioSpec spec,
                                                std::span<const Real> beta_grid,
                                                Real alpha, Index replications,
                                                unsigned workers = 0) {
    std::vector<PowerPoint> out;
    for (Real beta : beta_grid) {
        PowerPoint pt;
        pt.beta_abs = std::abs(beta);
        std::uint64_t hit_double = 0, hit_two = 0, total = 0;
        std::vector<std::array<std::uint8_t, 3>> flags(2 * replications);
        parallel_for(2 * replications, workers, [&](Index i) {
            const int sign = i < replications ? 1 : -1;
            ScenarioSpec s = spec;
            s.effect = sign * pt.beta_abs;
            s.seed = spec.seed + i;
            const auto r = analyze_scenario(generate_scenario(s));
            flags[i] = {static_cast<std::uint8_t>(r.ok),
                        static_cast<std::uint8_t>(r.ok && r.mcc.p_double <= alpha),
                        static_cast<std::uint8_t>(r.ok && r.mcc.p_two <= alpha)};
        });
        for (const auto& f : flags) {
            total += f[0];
            hit_double += f[1];
            hit_two += f[2];
        }
        const Real t = static_cast<Real>(std::max<std::uint64_t>(total, 1));
        pt.power_double = static_cast<Real>(hit_double) / t;
        pt.power_two = static_cast<Real>(hit_two) / t;
        pt.se_double = std::sqrt(pt.power_double * (1 - pt.power_double) / t);
        pt.se_two = std::sqrt(pt.power_two * (1 - pt.power_two) / t);
        out.push_back(pt);
    }
    return out;
}

// Power-ordering conditions for a beta null density, evaluated on the
// untransformed beta (b) scale. Thresholds: (b_minus, b_plus) symmetric about
// the mean with total tail mass alpha; (b_lo, b_hi) the equal-tailed
// quantiles. The alternative is the symmetric shift mixture
// g(b) = (H(b - delta) + H(b + delta)) / 2.
struct OrderingResult {
    Real b_minus = 0, b_plus = 0, b_lo = 0, b_hi = 0;
    Real margin1 = 0, margin2 = 0;  // lhs - rhs of conditions (1), (2)
    Real region1 = 0, region2 = 0;
    bool cond1 = false, cond2 = false, region_ordered = false;
};

inline OrderingResult ordering_check(Real a1, Real a2, Real alpha_level,
                                     Real delta) {
    if (!(alpha_level > 0) || !(alpha_level < 0.5))
        throw std::invalid_argument("ordering_check: need 0 < alpha_level < 0.5");
    const auto H = [&](Real b) {
        return special::betainc(a1, a2, std::clamp(b, Real(0), Real(1)));
    };
    const Real mu = a1 / (a1 + a2);
    // symmetric thresholds: H(mu - c) + 1 - H(mu + c) = alpha
    Real lo = 0, hi = std::max(mu, 1 - mu);
    for (int i = 0; i < 200; ++i) {
        const Real c = 0.5 * (lo + hi);
        const Real mass = H(mu - c) + 1.0 - H(mu + c);
        if (mass > alpha_level)
            lo = c;
        else
            hi = c;
    }
    OrderingResult res;
    const Real c = 0.5 * (lo + hi);
    res.b_minus = mu - c;
    res.b_plus = mu + c;
    res.b_lo = special::beta_quantile(a1, a2, alpha_level / 2.0);
    res.b_hi = special::beta_quantile(a1, a2, 1.0 - alpha_level / 2.0);
    res.margin1 = (H(res.b_lo - delta) - H(res.b_minus - delta)) -
                  (H(res.b_hi - delta) - H(res.b_plus - delta));
    res.margin2 = (H(res.b_lo + delta) - H(res.b_minus + delta)) -
                  (H(res.b_hi + delta) - H(res.b_plus + delta));
    const auto G = [&](Real b) { return 0.5 * (H(b - delta) + H(b + delta)); };
    res.region1 = G(res.b_lo) - G(res.b_minus);
    res.region2 = G(res.b_hi) - G(res.b_plus);
    res.cond1 = res.margin1 > 0;
    res.cond2 = res.margin2 > 0;
    res.region_ordered = res.region1 > res.region2;
    return res;
}

// Wall-clock scaling of the batch engine over an (m, n) grid, with a
// log-log linear fit of time against m*n.
struct TimingCell {
    Index m = 0, n = 0;
    Real seconds = 0;
};

struct TimingReport {
    std::vector<TimingCell> cells;
    Real intercept = 0, slope = 0;  // log(t) ~ intercept + slope * log(mn)
};

inline TimingReport timing_benchmark(std::span<const Index> m_grid,
                                     std::span<const Index> n_grid,
                                     std::uint64_t seed = 1,
                                     unsigned workers = 0) {
    TimingReport rep;
    AnalysisConfig cfg;
    cfg.workers = workers;
    for (Index n : n_grid) {
        rng::RandomSource rs(seed, n);
        std::vector<Real> y(n);
        for (Real& v : y) v = rs.exponential();
        for (Index m : m_grid) {
            FeatureMatrix X;
            X.rows = m;
            X.cols = n;
            X.values.resize(m * n);
            for (Real& v : X.values) v = rs.exponential();
            const auto t0 = std::chrono::steady_clock::now();
            const auto res = mcc_matrix(X, y, cfg);
            const auto t1 = std::chrono::steady_clock::now();
            (void)res;
            TimingCell cell;
            cell.m = m;
            cell.n = n;
            cell.seconds = std::chrono::duration<Real>(t1 - t0).count();
            rep.cells.push_back(cell);
        }
    }
    // least squares on (log mn, log t)
    Real sx = 0, sy = 0, sxx = 0, sxy = 0;
    const Real k = static_cast<Real>(rep.cells.size());
    for (const auto& c : rep.cells) {
        const Real lx = std::log(static_cast<Real>(c.m) * static_cast<Real>(c.n));
        const Real ly = std::log(std::max(c.seconds, Real(1e-9)));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const Real den = k * sxx - sx * sx;
    if (den > 0) {
        rep.slope = (k * sxy - sx * sy) / den;
        rep.intercept = (sy - rep.slope * sx) / k;
    }
    return rep;
}

}  // namespace mcc
