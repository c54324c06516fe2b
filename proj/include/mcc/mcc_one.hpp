#pragma once

#include "mcc/engine.hpp"

namespace mcc {

// One-step refinement: condition on the value paired with a fixed referent
// sample and mix the n conditional fits. The referent is chosen as the most
// outlying response value, where plain four-moment fits degrade fastest.

// Exact affine split of r around the referent position i of p.x paired with
// position j of p.y:
//
//   r = x_i * y_j + b0 + b1 * r_reduced
//
// where r_reduced is the correlation of the remaining n-1 elements after
// re-centering and re-scaling. Because p is centered and unit-scaled, the
// removed mass determines the constants in closed form:
//   b0 = x_i * y_j / (n - 1)
//   b1 = sqrt(1 - x_i^2 - x_i^2/(n-1)) * sqrt(1 - y_j^2 - y_j^2/(n-1))
struct ReferentDecomposition {
    Real referent_x = 0;
    Real paired_y = 0;
    Real b0 = 0, b1 = 0;
    ScaledPair reduced_pair;
};

inline ReferentDecomposition referent_decomposition(const ScaledPair& p,
                                                    Index referent,
                                                    Index y_choice) {
    const Index n = p.n();
    if (n < 6) throw insufficient_sample("referent_decomposition: need n >= 6");
    if (referent >= n || y_choice >= n)
        throw std::out_of_range("referent_decomposition: index out of range");
    const Real v = p.x[referent];
    const Real w = p.y[y_choice];
    const Real shrink = 1.0 + 1.0 / (static_cast<Real>(n) - 1.0);
    const Real cx2 = 1.0 - v * v * shrink;
    const Real cy2 = 1.0 - w * w * shrink;
    if (!(cx2 > 0.0) || !(cy2 > 0.0))
        throw degenerate_input("referent_decomposition: reduced vector degenerate");
    std::vector<Real> rx, ry;
    rx.reserve(n - 1);
    ry.reserve(n - 1);
    for (Index a = 0; a < n; ++a) {
        if (a != referent) rx.push_back(p.x[a]);
        if (a != y_choice) ry.push_back(p.y[a]);
    }
    ReferentDecomposition d;
    d.referent_x = v;
    d.paired_y = w;
    d.b0 = v * w / (static_cast<Real>(n) - 1.0);
    d.b1 = std::sqrt(cx2) * std::sqrt(cy2);
    d.reduced_pair = ScaledPair(rx, ry);
    return d;
}

// Referent sample: largest absolute deviation from the median, lowest index
// on ties.
inline Index select_referent(std::span<const Real> y) {
    if (y.empty()) throw degenerate_input("select_referent: empty vector");
    std::vector<Real> sorted(y.begin(), y.end());
    std::sort(sorted.begin(), sorted.end());
    const Index n = y.size();
    const Real median = n % 2 == 1
                            ? sorted[n / 2]
                            : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    Index best = 0;
    Real best_dev = std::abs(y[0] - median);
    for (Index j = 1; j < n; ++j) {
        const Real dev = std::abs(y[j] - median);
        if (dev > best_dev) {
            best = j;
            best_dev = dev;
        }
    }
    return best;
}

// One conditional component: r | (referent pairing) = shift + b1 * r_reduced
// with r_reduced distributed as the fitted null of the reduced pair.
struct Mcc1Component {
    Real shift = 0;
    Real b1 = 1;
    DensityFit fit;
};

struct Mcc1Mixture {
    std::vector<Mcc1Component> components;

    // Equal-weight average of the component tail probabilities at t;
    // component sums are exact complements, so the averages are too.
    std::pair<Real, Real> tails(Real t) const {
        Real pl = 0, pr = 0;
        for (const auto& c : components) {
            const auto [l, r] = tail_probs(c.fit, (t - c.shift) / c.b1);
            pl += l;
            pr += r;
        }
        const Real m = static_cast<Real>(components.size());
        return {pl / m, pr / m};
    }

    Real pdf(Real t) const {
        Real f = 0;
        for (const auto& c : components)
            f += density_pdf(c.fit, (t - c.shift) / c.b1) / c.b1;
        return f / static_cast<Real>(components.size());
    }
};

namespace detail {

// Conditioning is on the response value at the referent position, so the
// decomposition runs on the role-swapped pair: the referent's y value is
// held fixed while each x value takes a turn as its partner.
inline void append_referent_components(const ScaledPair& swapped, Index referent,
                                       std::vector<Mcc1Component>& out) {
    const Index n = swapped.n();
    for (Index c = 0; c < n; ++c) {
        const auto d = referent_decomposition(swapped, referent, c);
        Mcc1Component comp;
        comp.shift = d.referent_x * d.paired_y + d.b0;
        comp.b1 = d.b1;
        comp.fit = fit_density(unstratified_moments(d.reduced_pair));
        out.push_back(comp);
    }
}

inline PValueSet mixture_pvalues(const Mcc1Mixture& mix, Real r_obs,
                                 const MomentSummary& m) {
    PValueSet p;
    p.r_obs = r_obs;
    p.skewness = m.skewness;
    p.excess_kurtosis = m.excess_kurtosis;
    std::tie(p.p_left, p.p_right) = mix.tails(r_obs);
    const Real a = std::abs(r_obs);
    p.p_two = std::min(Real(1), mix.tails(-a).first + mix.tails(a).second);
    p.p_directional = std::min(p.p_left, p.p_right);
    p.p_double = std::min(Real(1), 2.0 * p.p_directional);
    return p;
}

}  // namespace detail

inline Mcc1Mixture mcc1_mixture(std::span<const Real> x, std::span<const Real> y,
                                Index referent) {
    const ScaledPair swapped(y, x);
    Mcc1Mixture mix;
    mix.components.reserve(swapped.n());
    detail::append_referent_components(swapped, referent, mix.components);
    return mix;
}

inline Mcc1Mixture mcc1_all_mixture(std::span<const Real> x,
                                    std::span<const Real> y) {
    const ScaledPair swapped(y, x);
    const Index n = swapped.n();
    Mcc1Mixture mix;
    mix.components.reserve(n * n);
    for (Index ref = 0; ref < n; ++ref)
        detail::append_referent_components(swapped, ref, mix.components);
    return mix;
}

inline PValueSet mcc1_row(std::span<const Real> x, std::span<const Real> y,
                          Index referent, const AnalysisConfig& = {}) {
    const ScaledPair pair(x, y);
    return detail::mixture_pvalues(mcc1_mixture(x, y, referent),
                                   trend_statistic(pair),
                                   unstratified_moments(pair));
}

inline PValueSet mcc1_row(std::span<const Real> x, std::span<const Real> y,
                          const AnalysisConfig& cfg = {}) {
    return mcc1_row(x, y, select_referent(y), cfg);
}

inline PValueSet mcc1_all_row(std::span<const Real> x, std::span<const Real> y,
                              const AnalysisConfig& = {}) {
    const ScaledPair pair(x, y);
    return detail::mixture_pvalues(mcc1_all_mixture(x, y),
                                   trend_statistic(pair),
                                   unstratified_moments(pair));
}

}  // namespace mcc
