#pragma once

#include "mcc/engine.hpp"

namespace mcc {

// n x q covariate matrix, columns are covariates; an intercept column is
// always implied and never stored.
struct CovariateMatrix {
    Index n = 0;
    std::vector<std::vector<Real>> columns;
    std::vector<std::string> names;  // optional, used in error messages

    Index q() const { return columns.size(); }
};

// Orthonormal basis of span{1, Z}; residualization is then two passes of
// subtract-projection, reusable across all rows of a feature matrix.
class ResidualProjector {
public:
    explicit ResidualProjector(const CovariateMatrix& Z) {
        const Index n = Z.n;
        if (n == 0) throw degenerate_input("ResidualProjector: no samples");
        if (Z.q() + 2 >= n)
            throw insufficient_sample("ResidualProjector: need q < n - 2");
        // intercept first
        basis_.emplace_back(n, 1.0 / std::sqrt(static_cast<Real>(n)));
        for (Index c = 0; c < Z.q(); ++c) {
            if (Z.columns[c].size() != n)
                throw std::invalid_argument("ResidualProjector: ragged column");
            std::vector<Real> v = Z.columns[c];
            const Real norm0 = std::sqrt(dot(v, v));
            // modified Gram-Schmidt, twice for orthogonality to ~1e-14
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& b : basis_) {
                    const Real c0 = dot(b, v);
                    for (Index j = 0; j < n; ++j) v[j] -= c0 * b[j];
                }
            const Real norm = std::sqrt(dot(v, v));
            if (!(norm > 1e-10 * std::max(Real(1), norm0))) {
                const std::string label =
                    c < Z.names.size() ? Z.names[c] : "column " + std::to_string(c + 1);
                throw degenerate_input(
                    "covariates rank-deficient: " + label +
                    " is collinear with the intercept/preceding columns");
            }
            for (Real& x : v) x /= norm;
            basis_.push_back(std::move(v));
        }
    }

    void apply(std::span<Real> v) const {
        for (const auto& b : basis_) {
            const Real c0 = dot(b, v);
            for (Index j = 0; j < v.size(); ++j) v[j] -= c0 * b[j];
        }
    }

    Index n() const { return basis_.front().size(); }

private:
    std::vector<std::vector<Real>> basis_;
};

// Least-squares residual of v on [1, Z].
inline std::vector<Real> residualize(std::span<const Real> v,
                                     const CovariateMatrix& Z) {
    if (v.size() != Z.n)
        throw std::invalid_argument("residualize: length mismatch");
    const ResidualProjector proj(Z);
    std::vector<Real> r(v.begin(), v.end());
    proj.apply(r);
    return r;
}

// Residualize every row with one shared basis: O(mnq) total.
inline FeatureMatrix residualize_matrix(const FeatureMatrix& X,
                                        const CovariateMatrix& Z,
                                        unsigned workers = 0) {
    if (X.cols != Z.n)
        throw std::invalid_argument("residualize_matrix: dimension mismatch");
    const ResidualProjector proj(Z);
    FeatureMatrix R = X;
    parallel_for(R.rows, workers, [&](Index i) { proj.apply(R.row(i)); });
    return R;
}

namespace detail {

inline bool integer_valued(std::span<const Real> v) {
    return std::all_of(v.begin(), v.end(),
                       [](Real x) { return x == std::nearbyint(x); });
}

}  // namespace detail

// Within-stratum permutation test of A = sum_k A_k, A_k the inner product of
// the stratum-centered vectors. Moments per stratum are exact (closed form,
// or full enumeration when n_k <= 3) and combine across independent strata.
// The statistic is kept on the raw (uncentered-scale) lattice so the 0.5
// continuity offset lands between adjacent attainable values of discrete data.
inline PValueSet stratified_mcc_row(std::span<const Real> x,
                                    std::span<const Real> y,
                                    const StrataAssignment& strata,
                                    const AnalysisConfig& cfg = {}) {
    const Index n = x.size();
    if (y.size() != n || strata.labels.size() != n)
        throw std::invalid_argument("stratified_mcc_row: length mismatch");
    if (is_constant(x) || is_constant(y)) {
        PValueSet p;
        p.untestable = true;
        return p;
    }
    const bool correct = cfg.continuity_auto
                             ? detail::integer_valued(x) && detail::integer_valued(y)
                             : cfg.continuity_correction;

    std::vector<Real> xc(x.begin(), x.end()), yc(y.begin(), y.end());
    const auto groups = strata.groups();
    std::vector<StratumMoments> parts;
    parts.reserve(groups.size());
    std::vector<Real> xk, yk;
    for (const auto& g : groups) {
        Real mx = 0, my = 0;
        for (Index j : g) {
            mx += xc[j];
            my += yc[j];
        }
        mx /= static_cast<Real>(g.size());
        my /= static_cast<Real>(g.size());
        xk.clear();
        yk.clear();
        for (Index j : g) {
            xc[j] -= mx;
            yc[j] -= my;
            xk.push_back(xc[j]);
            yk.push_back(yc[j]);
        }
        parts.push_back(stratum_raw_moments(xk, yk));
    }
    const MomentSummary m = combine_strata(parts);
    if (!(m.variance > 0.0)) {
        PValueSet p;
        p.untestable = true;
        return p;
    }
    const DensityFit fit = fit_density(m);
    const Real a_obs = dot(xc, yc);
    const Real off = correct ? cfg.continuity_offset : 0.0;

    PValueSet p;
    p.r_obs = a_obs;
    p.fit_kind = fit.kind;
    p.skewness = m.skewness;
    p.excess_kurtosis = m.excess_kurtosis;
    p.p_left = std::clamp(tail_probs(fit, a_obs + off).first, Real(0), Real(1));
    p.p_right = std::clamp(tail_probs(fit, a_obs - off).second, Real(0), Real(1));
    const Real a = std::max(Real(0), std::abs(a_obs) - off);
    p.p_two = std::min(Real(1), tail_probs(fit, -a).first + tail_probs(fit, a).second);
    p.p_directional = std::min(p.p_left, p.p_right);
    p.p_double = std::min(Real(1), 2.0 * p.p_directional);
    return p;
}

}  // namespace mcc
