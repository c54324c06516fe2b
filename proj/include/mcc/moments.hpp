#pragma once

#include <array>
#include <numeric>

#include "mcc/vec.hpp"

namespace mcc {

// First four exact moments of the permutation distribution of the trend
// statistic, standardized: mean, variance, skewness, excess kurtosis.
struct MomentSummary {
    Real mean = 0;
    Real variance = 0;
    Real skewness = 0;
    Real excess_kurtosis = 0;
};

// Raw within-stratum moments E[A^2], E[A^3], E[A^4] of A = sum x_j y_perm(j).
struct StratumMoments {
    Real m2 = 0, m3 = 0, m4 = 0;
};

// n * sum(v^4) - 3 for a centered, unit-scaled vector ("population" kurtosis).
inline Real vector_excess_kurtosis(std::span<const Real> v) {
    const Real n = static_cast<Real>(v.size());
    return n * pairwise_transform_sum(v, [](Real x) { return (x * x) * (x * x); }) - 3.0;
}

namespace detail {

// Sums of x-products over ordered tuples of distinct indices, by pattern,
// expressed through power sums (inclusion-exclusion over coincidences).
struct TupleSums {
    Real u11;    // x_i x_j, i != j
    Real u21;    // x_i^2 x_j
    Real t111;   // x_i x_j x_k, all distinct
    Real u31;    // x_i^3 x_j
    Real u22;    // x_i^2 x_j^2
    Real u211;   // x_i^2 x_j x_k, all distinct
    Real t1111;  // x_i x_j x_k x_l, all distinct
};

inline TupleSums tuple_sums(const PowerSums& p) {
    TupleSums t;
    const Real s1 = p.s1, s2 = p.s2, s3 = p.s3, s4 = p.s4;
    t.u11 = s1 * s1 - s2;
    t.u21 = s2 * s1 - s3;
    t.t111 = s1 * s1 * s1 - 3.0 * s1 * s2 + 2.0 * s3;
    t.u31 = s3 * s1 - s4;
    t.u22 = s2 * s2 - s4;
    t.u211 = s2 * s1 * s1 - 2.0 * s3 * s1 - s2 * s2 + 2.0 * s4;
    t.t1111 = s1 * s1 * s1 * s1 - 6.0 * s1 * s1 * s2 + 3.0 * s2 * s2 +
              8.0 * s1 * s3 - 6.0 * s4;
    return t;
}

// Exact raw moments of A under uniform pairing of y against x. Valid for
// any vectors; the slot-arrangement multiplicities are 1/3/1 for the third
// moment patterns and 1/4/3/6/1 for the fourth.
inline std::array<Real, 4> raw_perm_moments(std::span<const Real> x,
                                            std::span<const Real> y) {
    const Real n = static_cast<Real>(x.size());
    const PowerSums px = power_sums(x), py = power_sums(y);
    const TupleSums tx = tuple_sums(px), ty = tuple_sums(py);
    const Real d2 = n * (n - 1.0);
    const Real d3 = d2 * (n - 2.0);
    const Real d4 = d3 * (n - 3.0);
    const Real m1 = px.s1 * py.s1 / n;
    const Real m2 = px.s2 * py.s2 / n + tx.u11 * ty.u11 / d2;
    const Real m3 = px.s3 * py.s3 / n + 3.0 * tx.u21 * ty.u21 / d2 +
                    tx.t111 * ty.t111 / d3;
    const Real m4 = px.s4 * py.s4 / n + 4.0 * tx.u31 * ty.u31 / d2 +
                    3.0 * tx.u22 * ty.u22 / d2 + 6.0 * tx.u211 * ty.u211 / d3 +
                    tx.t1111 * ty.t1111 / d4;
    return {m1, m2, m3, m4};
}

// Full enumeration fallback for strata too small for the closed formulas
// (n_k <= 3, where the fourth-moment denominators vanish).
inline std::array<Real, 4> enumerated_perm_moments(std::span<const Real> x,
                                                   std::span<const Real> y) {
    std::vector<Index> idx(x.size());
    std::iota(idx.begin(), idx.end(), Index(0));
    Real m1 = 0, m2 = 0, m3 = 0, m4 = 0;
    Index count = 0;
    do {
        Real a = 0;
        for (Index j = 0; j < x.size(); ++j) a += x[j] * y[idx[j]];
        m1 += a;
        m2 += a * a;
        m3 += a * a * a;
        m4 += (a * a) * (a * a);
        ++count;
    } while (std::next_permutation(idx.begin(), idx.end()));
    const Real c = static_cast<Real>(count);
    return {m1 / c, m2 / c, m3 / c, m4 / c};
}

}  // namespace detail

// Exact raw moments of A_k under within-stratum permutation; y_k must be
// centered within the stratum so all odd-order drift vanishes.
inline StratumMoments stratum_raw_moments(std::span<const Real> x_k,
                                          std::span<const Real> y_k) {
    if (std::abs(pairwise_sum(y_k)) >
        1e-9 * std::max(Real(1), pairwise_transform_sum(y_k, [](Real v) {
                            return std::abs(v);
                        })))
        throw std::invalid_argument("stratum_raw_moments: y not centered");
    const auto m = x_k.size() <= 3 ? detail::enumerated_perm_moments(x_k, y_k)
                                   : detail::raw_perm_moments(x_k, y_k);
    return {m[1], m[2], m[3]};
}

// Standardized moments of A = sum_k A_k for independent within-stratum parts.
inline MomentSummary combine_strata(std::span<const StratumMoments> parts) {
    if (parts.empty()) throw std::invalid_argument("combine_strata: no strata");
    Real v = 0, e3 = 0, e4 = 0, sum_m2sq = 0;
    for (const auto& p : parts) {
        v += p.m2;
        e3 += p.m3;
        e4 += p.m4;
        sum_m2sq += p.m2 * p.m2;
    }
    e4 += 3.0 * (v * v - sum_m2sq);  // cross terms E[A_k^2]E[A_l^2], k != l
    MomentSummary s;
    s.mean = 0;
    s.variance = v;
    if (v > 0) {
        s.skewness = e3 / std::pow(v, 1.5);
        s.excess_kurtosis = e4 / (v * v) - 3.0;
    }
    return s;
}

// Moments of r for a scaled pair under unstratified permutation. Variance is
// 1/(n-1) identically; skewness and excess kurtosis from the exact pairing
// expansion.
inline MomentSummary unstratified_moments(const ScaledPair& p) {
    const Index n = p.n();
    if (n < 4) throw insufficient_sample("unstratified_moments: need n >= 4");
    const auto m = detail::raw_perm_moments(p.x, p.y);
    MomentSummary s;
    s.mean = 0;
    s.variance = 1.0 / (static_cast<Real>(n) - 1.0);
    s.skewness = m[2] / std::pow(m[1], 1.5);
    s.excess_kurtosis = m[3] / (m[1] * m[1]) - 3.0;
    return s;
}

}  // namespace mcc
