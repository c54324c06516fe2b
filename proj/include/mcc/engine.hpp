#pragma once

#include "mcc/density.hpp"
#include "mcc/threads.hpp"

namespace mcc {

// The five p-value conventions for one feature.
struct PValueSet {
    Real p_left = 1, p_right = 1, p_two = 1;
    Real p_directional = 1, p_double = 1;
    FitKind fit_kind = FitKind::RescaledBeta;
    Real r_obs = 0;
    Real skewness = 0, excess_kurtosis = 0;
    bool untestable = false;
};

struct AnalysisConfig {
    bool continuity_correction = false;
    Real continuity_offset = 0.5;
    // nullopt = decide per feature (on iff both vectors integer-valued in
    // every stratum); set explicitly from the CLI to force either way.
    bool continuity_auto = true;
    unsigned workers = 0;
};

// Assemble the full set from one fitted density. p_two sums both extremity
// tails; p_double doubles the smaller directional tail, capped at 1.
inline PValueSet pvalue_set(const DensityFit& fit, Real r_obs) {
    PValueSet p;
    p.r_obs = r_obs;
    p.fit_kind = fit.kind;
    std::tie(p.p_left, p.p_right) = tail_probs(fit, r_obs);
    const Real a = std::abs(r_obs);
    p.p_two = std::min(Real(1), tail_probs(fit, -a).first + tail_probs(fit, a).second);
    p.p_directional = std::min(p.p_left, p.p_right);
    p.p_double = std::min(Real(1), 2.0 * p.p_directional);
    return p;
}

inline PValueSet mcc_pair(const ScaledPair& pair) {
    const MomentSummary m = unstratified_moments(pair);
    PValueSet p = pvalue_set(fit_density(m), trend_statistic(pair));
    p.skewness = m.skewness;
    p.excess_kurtosis = m.excess_kurtosis;
    return p;
}

inline PValueSet mcc_row(std::span<const Real> x_row, std::span<const Real> y,
                         const AnalysisConfig& = {}) {
    if (is_constant(x_row) || is_constant(y)) {
        PValueSet p;
        p.untestable = true;
        return p;
    }
    return mcc_pair(ScaledPair(x_row, y));
}

// Batch path: one scaled copy of y, per-row scaling and closed-form moments.
// O(mn) total; rows are independent work items gathered in input order.
inline std::vector<PValueSet> mcc_matrix(const FeatureMatrix& X,
                                         std::span<const Real> y,
                                         const AnalysisConfig& cfg = {}) {
    if (X.cols != y.size())
        throw std::invalid_argument("mcc_matrix: column count != response length");
    std::vector<PValueSet> out(X.rows);
    const std::vector<Real> ys = scale_center(y);
    const PowerSums py = power_sums(ys);
    const auto ty = detail::tuple_sums(py);
    const Real n = static_cast<Real>(X.cols);
    const Real d2 = n * (n - 1.0), d3 = d2 * (n - 2.0), d4 = d3 * (n - 3.0);
    parallel_for(X.rows, cfg.workers, [&](Index i) {
        const auto row = X.row(i);
        if (is_constant(row)) {
            out[i].untestable = true;
            return;
        }
        const std::vector<Real> xs = scale_center(row);
        const PowerSums px = power_sums(xs);
        const auto tx = detail::tuple_sums(px);
        const Real m2 = px.s2 * py.s2 / n + tx.u11 * ty.u11 / d2;
        const Real m3 = px.s3 * py.s3 / n + 3.0 * tx.u21 * ty.u21 / d2 +
                        tx.t111 * ty.t111 / d3;
        const Real m4 = px.s4 * py.s4 / n + 4.0 * tx.u31 * ty.u31 / d2 +
                        3.0 * tx.u22 * ty.u22 / d2 + 6.0 * tx.u211 * ty.u211 / d3 +
                        tx.t1111 * ty.t1111 / d4;
        MomentSummary m;
        m.variance = 1.0 / (n - 1.0);
        m.skewness = m3 / std::pow(m2, 1.5);
        m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
        PValueSet p =
            pvalue_set(fit_density(m), std::clamp(dot(xs, ys), Real(-1), Real(1)));
        p.skewness = m.skewness;
        p.excess_kurtosis = m.excess_kurtosis;
        out[i] = p;
    });
    return out;
}

}  // namespace mcc
