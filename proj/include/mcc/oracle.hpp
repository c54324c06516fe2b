#pragma once

#include <cstdint>
#include <optional>

#include "mcc/moments.hpp"

namespace mcc {

// Ground-truth permutation p-values: exact enumeration when the arrangement
// count is small, Monte Carlo otherwise.
struct OracleResult {
    Real p_left = 1, p_right = 1, p_two = 1;
    Real p_directional = 1, p_double = 1;
    Real mid_p_left = 1, mid_p_right = 1;  // ties counted half
    Real se_left = 0, se_right = 0;        // 0 in exhaustive mode
    std::uint64_t draws = 0;               // enumeration size or B
    bool exhaustive = false;
    Real statistic_obs = 0;
    MomentSummary statistic_moments;  // of the sampled/enumerated statistic
};

namespace rng {

// splitmix64: seeding / stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++, one independent stream per (seed, stream index).
struct Xoshiro256pp {
    std::uint64_t s[4];

    Xoshiro256pp(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t sm = seed;
        (void)splitmix64(sm);
        sm ^= 0x6a09e667f3bcc909ULL * (stream + 1);
        for (auto& w : s) w = splitmix64(sm);
        if (!(s[0] | s[1] | s[2] | s[3])) s[0] = 1;
    }

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    // uniform in [0, m) by 128-bit multiply-shift; bias O(m / 2^64)
    std::uint64_t bounded(std::uint64_t m) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * m) >> 64);
    }
};

}  // namespace rng

namespace detail {

// Streaming first-four-moments accumulator (plain sums; the statistic values
// are O(1) so cancellation is not a concern at these counts).
struct MomentAccum {
    Real s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    std::uint64_t count = 0;

    void add(Real v) {
        s1 += v;
        const Real v2 = v * v;
        s2 += v2;
        s3 += v2 * v;
        s4 += v2 * v2;
        ++count;
    }
    void add_weighted(Real v, Real w) {
        s1 += w * v;
        const Real v2 = v * v;
        s2 += w * v2;
        s3 += w * v2 * v;
        s4 += w * v2 * v2;
        count += static_cast<std::uint64_t>(w);
    }

    MomentSummary summary(Real total) const {
        MomentSummary m;
        const Real m1 = s1 / total;
        const Real m2 = s2 / total - m1 * m1;
        m.mean = m1;
        m.variance = m2;
        if (m2 > 0) {
            const Real c3 = s3 / total - 3.0 * m1 * s2 / total + 2.0 * m1 * m1 * m1;
            const Real c4 = s4 / total - 4.0 * m1 * s3 / total +
                            6.0 * m1 * m1 * s2 / total - 3.0 * m1 * m1 * m1 * m1;
            m.skewness = c3 / std::pow(m2, 1.5);
            m.excess_kurtosis = c4 / (m2 * m2) - 3.0;
        }
        return m;
    }
};

// Tail counters with full-tie and half-tie (mid-p) conventions.
struct TailCounts {
    Real le = 0, ge = 0, eq = 0, abs_ge = 0;
    Real obs, abs_obs, tol;

    explicit TailCounts(Real observed, Real tolerance)
        : obs(observed), abs_obs(std::abs(observed)), tol(tolerance) {}

    void add(Real v, Real w = 1.0) {
        const bool tie = std::abs(v - obs) <= tol;
        if (tie) {
            eq += w;
            le += w;
            ge += w;
        } else if (v < obs) {
            le += w;
        } else {
            ge += w;
        }
        if (std::abs(v) >= abs_obs - tol) abs_ge += w;
    }
};

inline void fill_exhaustive(OracleResult& r, const TailCounts& t, Real total) {
    r.p_left = t.le / total;
    r.p_right = t.ge / total;
    r.p_two = t.abs_ge / total;
    r.p_directional = std::min(r.p_left, r.p_right);
    r.p_double = std::min(Real(1), 2.0 * r.p_directional);
    r.mid_p_left = (t.le - 0.5 * t.eq) / total;
    r.mid_p_right = (t.ge - 0.5 * t.eq) / total;
    r.exhaustive = true;
}

// Within-stratum centered working copies plus observed statistic.
struct StratifiedData {
    std::vector<Real> xc, yc;
    std::vector<std::vector<Index>> groups;
    Real a_obs = 0;
};

inline StratifiedData center_by_strata(std::span<const Real> x,
                                       std::span<const Real> y,
                                       const StrataAssignment& strata) {
    StratifiedData d;
    d.xc.assign(x.begin(), x.end());
    d.yc.assign(y.begin(), y.end());
    d.groups = strata.groups();
    for (const auto& g : d.groups) {
        Real mx = 0, my = 0;
        for (Index j : g) {
            mx += d.xc[j];
            my += d.yc[j];
        }
        mx /= static_cast<Real>(g.size());
        my /= static_cast<Real>(g.size());
        for (Index j : g) {
            d.xc[j] -= mx;
            d.yc[j] -= my;
        }
    }
    d.a_obs = dot(d.xc, d.yc);
    return d;
}

inline Real lchoose(Real n, Real k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace detail

inline constexpr std::uint64_t kMaxEnumeration = 10'000'000;

// Exact tail probabilities by full enumeration. Unstratified continuous data
// enumerate all n! pairings; binary x collapses to the distinct group
// assignments; strata enumerate the product of within-stratum permutations.
inline OracleResult exhaustive_pvalues(
    std::span<const Real> x, std::span<const Real> y,
    const std::optional<StrataAssignment>& strata = std::nullopt) {
    const Index n = x.size();
    if (y.size() != n)
        throw std::invalid_argument("exhaustive_pvalues: length mismatch");
    OracleResult res;

    if (strata) {
        Real log_total = 0;
        for (Index nk : strata->sizes) log_total += std::lgamma(Real(nk) + 1.0);
        if (log_total > std::log(Real(kMaxEnumeration)))
            throw std::invalid_argument(
                "exhaustive_pvalues: arrangement count exceeds 1e7; use "
                "monte_carlo_pvalues");
        auto d = detail::center_by_strata(x, y, *strata);
        res.statistic_obs = d.a_obs;
        detail::TailCounts tails(d.a_obs, 1e-12 * std::max(Real(1), std::abs(d.a_obs)));
        detail::MomentAccum acc;
        // odometer over per-stratum permutations of y
        std::vector<std::vector<Index>> perms(d.groups.size());
        for (Index k = 0; k < d.groups.size(); ++k) {
            perms[k].resize(d.groups[k].size());
            std::iota(perms[k].begin(), perms[k].end(), Index(0));
        }
        std::vector<Real> part(d.groups.size());
        const auto stratum_stat = [&](Index k) {
            Real a = 0;
            const auto& g = d.groups[k];
            for (Index j = 0; j < g.size(); ++j)
                a += d.xc[g[j]] * d.yc[g[perms[k][j]]];
            return a;
        };
        for (Index k = 0; k < d.groups.size(); ++k) part[k] = stratum_stat(k);
        bool more = true;
        while (more) {
            Real a = 0;
            for (Real p : part) a += p;
            tails.add(a);
            acc.add(a);
            more = false;
            for (Index k = 0; k < d.groups.size(); ++k) {
                if (std::next_permutation(perms[k].begin(), perms[k].end())) {
                    part[k] = stratum_stat(k);
                    more = true;
                    break;
                }
                part[k] = stratum_stat(k);  // wrapped to identity
            }
        }
        res.draws = acc.count;
        detail::fill_exhaustive(res, tails, static_cast<Real>(acc.count));
        res.statistic_moments = acc.summary(static_cast<Real>(acc.count));
        return res;
    }

    const ScaledPair pair(x, y);
    const Real r_obs = trend_statistic(pair);
    res.statistic_obs = r_obs;
    detail::TailCounts tails(r_obs, 1e-12);
    detail::MomentAccum acc;

    // two-sample shortcut: binary x depends only on which samples are in one
    // group, so enumerate subsets instead of n! orderings
    std::vector<Real> distinct(x.begin(), x.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() == 2) {
        Index n1 = 0;
        for (Real v : x)
            if (v == distinct[1]) ++n1;
        const Real log_count = detail::lchoose(Real(n), Real(n1));
        if (log_count > std::log(Real(kMaxEnumeration)))
            throw std::invalid_argument(
                "exhaustive_pvalues: arrangement count exceeds 1e7; use "
                "monte_carlo_pvalues");
        // r is affine in the sum of y over the upper group
        const Real hi = *std::max_element(pair.x.begin(), pair.x.end());
        const Real lo = *std::min_element(pair.x.begin(), pair.x.end());
        std::vector<bool> pick(n, false);
        std::fill(pick.begin(), pick.begin() + n1, true);
        do {
            Real s_hi = 0;
            for (Index j = 0; j < n; ++j) s_hi += (pick[j] ? hi : lo) * pair.y[j];
            tails.add(s_hi);
            acc.add(s_hi);
        } while (std::prev_permutation(pick.begin(), pick.end()));
        res.draws = acc.count;
        detail::fill_exhaustive(res, tails, static_cast<Real>(acc.count));
        res.statistic_moments = acc.summary(static_cast<Real>(acc.count));
        return res;
    }

    Real log_fact = 0;
    for (Index j = 2; j <= n; ++j) log_fact += std::log(Real(j));
    if (log_fact > std::log(Real(kMaxEnumeration)))
        throw std::invalid_argument(
            "exhaustive_pvalues: arrangement count exceeds 1e7; use "
            "monte_carlo_pvalues");
    std::vector<Index> idx(n);
    std::iota(idx.begin(), idx.end(), Index(0));
    do {
        Real r = 0;
        for (Index j = 0; j < n; ++j) r += pair.x[j] * pair.y[idx[j]];
        tails.add(r);
        acc.add(r);
    } while (std::next_permutation(idx.begin(), idx.end()));
    res.draws = acc.count;
    detail::fill_exhaustive(res, tails, static_cast<Real>(acc.count));
    res.statistic_moments = acc.summary(static_cast<Real>(acc.count));
    return res;
}

namespace detail {

// Fused Fisher-Yates + inner product: one pass draws a fresh uniform pairing
// of work[] against xs[] and accumulates the statistic. Reusing work[] across
// draws is fine - a shuffle of a permutation is a uniform permutation.
inline Real shuffled_statistic(std::span<const Real> xs, std::span<Real> work,
                               rng::Xoshiro256pp& gen) {
    Real a = 0;
    const Index n = work.size();
    for (Index j = 0; j + 1 < n; ++j) {
        const Index k = j + gen.bounded(n - j);
        std::swap(work[j], work[k]);
        a += xs[j] * work[j];
    }
    a += xs[n - 1] * work[n - 1];
    return a;
}

}  // namespace detail

// Monte-Carlo permutation p-values with the add-one estimator
// (c + 1)/(B + 1). The stream is a pure function of (seed, feature), so
// results do not depend on scheduling.
inline OracleResult monte_carlo_pvalues(
    std::span<const Real> x, std::span<const Real> y, std::uint64_t B,
    std::uint64_t seed,
    const std::optional<StrataAssignment>& strata = std::nullopt,
    std::uint64_t feature = 0) {
    if (B < 1) throw std::invalid_argument("monte_carlo_pvalues: B >= 1");
    const Index n = x.size();
    if (y.size() != n)
        throw std::invalid_argument("monte_carlo_pvalues: length mismatch");
    rng::Xoshiro256pp gen(seed, feature);
    OracleResult res;
    res.draws = B;

    detail::MomentAccum acc;
    if (strata) {
        auto d = detail::center_by_strata(x, y, *strata);
        res.statistic_obs = d.a_obs;
        detail::TailCounts tails(d.a_obs,
                                 1e-12 * std::max(Real(1), std::abs(d.a_obs)));
        // per-stratum views into one contiguous working copy
        std::vector<Real> xs, work;
        std::vector<Index> offsets{0};
        for (const auto& g : d.groups) {
            for (Index j : g) {
                xs.push_back(d.xc[j]);
                work.push_back(d.yc[j]);
            }
            offsets.push_back(xs.size());
        }
        for (std::uint64_t b = 0; b < B; ++b) {
            Real a = 0;
            for (Index k = 0; k + 1 < offsets.size(); ++k) {
                const Index lo = offsets[k], hi = offsets[k + 1];
                if (hi - lo < 2) {
                    a += xs[lo] * work[lo];
                    continue;
                }
                a += detail::shuffled_statistic(
                    std::span<const Real>(xs).subspan(lo, hi - lo),
                    std::span<Real>(work).subspan(lo, hi - lo), gen);
            }
            tails.add(a);
            acc.add(a);
        }
        res.p_left = (tails.le + 1.0) / (static_cast<Real>(B) + 1.0);
        res.p_right = (tails.ge + 1.0) / (static_cast<Real>(B) + 1.0);
        res.p_two = (tails.abs_ge + 1.0) / (static_cast<Real>(B) + 1.0);
        res.mid_p_left = (tails.le - 0.5 * tails.eq + 1.0) / (Real(B) + 1.0);
        res.mid_p_right = (tails.ge - 0.5 * tails.eq + 1.0) / (Real(B) + 1.0);
    } else {
        const ScaledPair pair(x, y);
        res.statistic_obs = trend_statistic(pair);
        detail::TailCounts tails(res.statistic_obs, 1e-12);
        std::vector<Real> work = pair.y;
        for (std::uint64_t b = 0; b < B; ++b) {
            const Real r = detail::shuffled_statistic(pair.x, work, gen);
            tails.add(r);
            acc.add(r);
        }
        res.p_left = (tails.le + 1.0) / (static_cast<Real>(B) + 1.0);
        res.p_right = (tails.ge + 1.0) / (static_cast<Real>(B) + 1.0);
        res.p_two = (tails.abs_ge + 1.0) / (static_cast<Real>(B) + 1.0);
        res.mid_p_left = (tails.le - 0.5 * tails.eq + 1.0) / (Real(B) + 1.0);
        res.mid_p_right = (tails.ge - 0.5 * tails.eq + 1.0) / (Real(B) + 1.0);
    }
    res.p_directional = std::min(res.p_left, res.p_right);
    res.p_double = std::min(Real(1), 2.0 * res.p_directional);
    const Real Bf = static_cast<Real>(B);
    res.se_left = std::sqrt(res.p_left * (1.0 - res.p_left) / Bf);
    res.se_right = std::sqrt(res.p_right * (1.0 - res.p_right) / Bf);
    res.statistic_moments = acc.summary(Bf);
    return res;
}

// Sample moments of r over B random pairings; cross-checks the closed-form
// permutation moments.
inline MomentSummary empirical_moments(std::span<const Real> x,
                                       std::span<const Real> y, std::uint64_t B,
                                       std::uint64_t seed) {
    if (B < 1000) throw std::invalid_argument("empirical_moments: B >= 1000");
    if (is_constant(y) || is_constant(x)) {
        MomentSummary m;  // every pairing gives the same statistic
        return m;
    }
    const ScaledPair pair(x, y);
    rng::Xoshiro256pp gen(seed, 0);
    std::vector<Real> work = pair.y;
    detail::MomentAccum acc;
    for (std::uint64_t b = 0; b < B; ++b)
        acc.add(detail::shuffled_statistic(pair.x, work, gen));
    return acc.summary(static_cast<Real>(B));
}

}  // namespace mcc
