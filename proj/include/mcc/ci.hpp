#pragma once

#include <functional>

#include "mcc/mcc_one.hpp"
#include "mcc/oracle.hpp"

namespace mcc {

enum class CiMethod { MCC, MCC1, Exhaustive };

struct ConfidenceInterval {
    Real level = 0;
    Real lower = 0, upper = 0;
    CiMethod method = CiMethod::MCC;
    bool bracket_warning = false;  // bracket had to be widened past 2^40 x
};

namespace detail {

struct OlsFit {
    Real slope = 0, se = 1;
};

inline OlsFit ols_slope(std::span<const Real> x, std::span<const Real> y) {
    const Index n = x.size();
    const Real nx = static_cast<Real>(n);
    const Real mx = pairwise_sum(x) / nx, my = pairwise_sum(y) / nx;
    Real sxx = 0, sxy = 0;
    for (Index j = 0; j < n; ++j) {
        sxx += (x[j] - mx) * (x[j] - mx);
        sxy += (x[j] - mx) * (y[j] - my);
    }
    if (!(sxx > 0)) throw degenerate_input("ols_slope: constant x");
    OlsFit f;
    f.slope = sxy / sxx;
    Real rss = 0;
    for (Index j = 0; j < n; ++j) {
        const Real e = (y[j] - my) - f.slope * (x[j] - mx);
        rss += e * e;
    }
    if (n > 2) f.se = std::sqrt(rss / (nx - 2.0) / sxx);
    if (!(f.se > 0)) f.se = 1;
    return f;
}

// Correlation of x with y - beta*x; 0 when the residual is numerically
// constant (exact fit), which can only happen strictly between the bounds.
inline Real shifted_corr(std::span<const Real> x, std::span<const Real> y,
                         Real beta) {
    std::vector<Real> resid(y.size());
    for (Index j = 0; j < y.size(); ++j) resid[j] = y[j] - beta * x[j];
    if (is_constant(std::span<const Real>(resid))) return 0;
    try {
        return trend_statistic(ScaledPair(x, resid));
    } catch (const degenerate_input&) {
        return 0;
    }
}

// Solve pl(beta) = target for a (weakly) decreasing pl by bisection to
// absolute tolerance 1e-4 on beta.
inline Real invert_tail(const std::function<Real(Real)>& pl, Real target,
                        Real center, Real half0, bool& warn) {
    Real half = half0;
    Real lo = center - half, hi = center + half;
    int grow = 0;
    while (!(pl(lo) >= target && pl(hi) <= target)) {
        half *= 2;
        lo = center - half;
        hi = center + half;
        if (++grow > 40) {
            warn = true;
            break;
        }
    }
    while (hi - lo > 1e-4) {
        const Real mid = 0.5 * (lo + hi);
        if (pl(mid) >= target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Equal-tailed interval for the trend coefficient beta in y = beta*x + ...,
// by inverting the tail p-values of the test of x against y - beta*x. The
// null fit is computed once from the observed pair and the inversion moves
// only the observed statistic, so each tail function is monotone in beta.
// For binary 0/1 x, beta is the group mean difference.
inline ConfidenceInterval mcc_ci(std::span<const Real> x, std::span<const Real> y,
                                 Real level, CiMethod method = CiMethod::MCC) {
    if (!(level > 0.5) || !(level < 1))
        throw std::invalid_argument("mcc_ci: level must be in (0.5, 1)");
    const Real alpha = 1.0 - level;
    ConfidenceInterval ci;
    ci.level = level;
    ci.method = method;

    std::function<Real(Real)> pl;
    switch (method) {
        case CiMethod::MCC: {
            const DensityFit fit = fit_density(unstratified_moments(ScaledPair(x, y)));
            pl = [fit, x, y](Real beta) {
                return tail_probs(fit, detail::shifted_corr(x, y, beta)).first;
            };
            break;
        }
        case CiMethod::MCC1: {
            const Mcc1Mixture mix = mcc1_mixture(x, y, select_referent(y));
            pl = [mix, x, y](Real beta) {
                return mix.tails(detail::shifted_corr(x, y, beta)).first;
            };
            break;
        }
        case CiMethod::Exhaustive: {
            pl = [x, y](Real beta) {
                std::vector<Real> resid(y.size());
                for (Index j = 0; j < y.size(); ++j) resid[j] = y[j] - beta * x[j];
                return exhaustive_pvalues(x, resid).mid_p_left;
            };
            break;
        }
    }

    const auto ols = detail::ols_slope(x, y);
    const Real half0 = 10.0 * ols.se;
    ci.lower = detail::invert_tail(pl, 1.0 - alpha / 2.0, ols.slope, half0,
                                   ci.bracket_warning);
    ci.upper = detail::invert_tail(pl, alpha / 2.0, ols.slope, half0,
                                   ci.bracket_warning);
    if (ci.lower > ci.upper) std::swap(ci.lower, ci.upper);
    return ci;
}

}  // namespace mcc
