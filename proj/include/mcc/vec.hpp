#pragma once

#include <algorithm>
#include <numeric>
#include <optional>

#include "mcc/prelude.hpp"

namespace mcc {

// Sums of powers 1..4 of a vector, inputs to the permutation moment formulas.
struct PowerSums {
    Real s1 = 0, s2 = 0, s3 = 0, s4 = 0;
};

inline PowerSums power_sums(std::span<const Real> v) {
    PowerSums p;
    p.s1 = pairwise_sum(v);
    p.s2 = pairwise_transform_sum(v, [](Real x) { return x * x; });
    p.s3 = pairwise_transform_sum(v, [](Real x) { return x * x * x; });
    p.s4 = pairwise_transform_sum(v, [](Real x) { return (x * x) * (x * x); });
    return p;
}

// Center to sum 0 and normalize to sum-of-squares 1. Increasing affine
// transform of the input, so correlation-type statistics are unchanged.
inline std::vector<Real> scale_center(std::span<const Real> v) {
    const Index n = v.size();
    if (n < 2) throw degenerate_input("scale_center: need at least 2 values");
    const Real mean = pairwise_sum(v) / static_cast<Real>(n);
    std::vector<Real> w(n);
    for (Index j = 0; j < n; ++j) w[j] = v[j] - mean;
    const Real ss = pairwise_transform_sum(w, [](Real x) { return x * x; });
    if (ss <= 0.0) throw degenerate_input("scale_center: constant vector");
    const Real inv = 1.0 / std::sqrt(ss);
    for (Real& x : w) x *= inv;
    return w;
}

inline bool is_constant(std::span<const Real> v) {
    return std::all_of(v.begin(), v.end(), [&](Real x) { return x == v.front(); });
}

// A centered, unit-scaled (x, y) pair; sum x_j y_j is the Pearson correlation
// of the original vectors.
struct ScaledPair {
    std::vector<Real> x;
    std::vector<Real> y;

    ScaledPair() = default;
    ScaledPair(std::span<const Real> raw_x, std::span<const Real> raw_y)
        : x(scale_center(raw_x)), y(scale_center(raw_y)) {
        if (x.size() != y.size())
            throw std::invalid_argument("ScaledPair: length mismatch");
    }

    Index n() const { return x.size(); }
};

inline Real trend_statistic(const ScaledPair& p) {
    Real s = 0.0;
    for (Index j = 0; j < p.n(); ++j) s += p.x[j] * p.y[j];
    // Cauchy-Schwarz bound; shave float fuzz
    return std::clamp(s, Real(-1), Real(1));
}

inline Real dot(std::span<const Real> a, std::span<const Real> b) {
    Real s = 0.0;
    for (Index j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

struct ResponseVector {
    std::vector<Real> values;
};

// Rows are features, columns are samples.
struct FeatureMatrix {
    Index rows = 0;
    Index cols = 0;
    std::vector<Real> values;  // row-major
    std::vector<std::string> feature_ids;

    std::span<const Real> row(Index i) const {
        return {values.data() + i * cols, cols};
    }
    std::span<Real> row(Index i) {
        return {values.data() + i * cols, cols};
    }
};

// Partition of sample indices into K strata (labels 1..K).
struct StrataAssignment {
    std::vector<int> labels;
    int K = 0;
    std::vector<Index> sizes;

    static StrataAssignment from_labels(std::vector<int> lab) {
        StrataAssignment s;
        s.labels = std::move(lab);
        int k = 0;
        for (int l : s.labels) {
            if (l < 1) throw std::invalid_argument("strata labels must be >= 1");
            k = std::max(k, l);
        }
        s.K = k;
        s.sizes.assign(static_cast<Index>(k), 0);
        for (int l : s.labels) ++s.sizes[static_cast<Index>(l - 1)];
        for (Index nk : s.sizes)
            if (nk == 0) throw std::invalid_argument("empty stratum");
        return s;
    }

    std::vector<std::vector<Index>> groups() const {
        std::vector<std::vector<Index>> g(static_cast<Index>(K));
        for (Index j = 0; j < labels.size(); ++j)
            g[static_cast<Index>(labels[j] - 1)].push_back(j);
        return g;
    }
};

}  // namespace mcc
