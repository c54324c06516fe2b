#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcc {

using Real = double;
using Index = std::size_t;

// Input that cannot be tested (constant vector, too few samples, ...).
class degenerate_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class insufficient_sample : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Pairwise (cascade) summation. Fourth-power sums over long vectors lose
// digits under naive left-to-right accumulation.
inline Real pairwise_sum(std::span<const Real> v) {
    const Index n = v.size();
    if (n <= 16) {
        Real s = 0.0;
        for (Real x : v) s += x;
        return s;
    }
    const Index half = n / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

template <typename F>
Real pairwise_transform_sum(std::span<const Real> v, F&& f) {
    const Index n = v.size();
    if (n <= 16) {
        Real s = 0.0;
        for (Real x : v) s += f(x);
        return s;
    }
    const Index half = n / 2;
    return pairwise_transform_sum(v.subspan(0, half), f) +
           pairwise_transform_sum(v.subspan(half), f);
}

inline bool nearly_equal(Real a, Real b, Real tol) {
    return std::abs(a - b) <= tol * std::max({Real(1), std::abs(a), std::abs(b)});
}

}  // namespace mcc
