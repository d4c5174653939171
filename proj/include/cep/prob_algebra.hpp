#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace cep {

/// Plain real arithmetic. Other algebras (e.g. the circuit builder) expose the
/// same members so the query formulas can be written once.
struct RealAlgebra {
    using Value = double;
    Value zero() const { return 0.0; }
    Value one() const { return 1.0; }
    Value add(Value a, Value b) const { return a + b; }
    Value mul(Value a, Value b) const { return a * b; }
    Value complement(Value a) const { return 1.0 - a; }
};

/// P(at least k of the independent events occur) via the Poisson-binomial
/// recursion over counts, truncated at k (state k absorbs "k or more").
/// Events are consumed left to right; each cell is updated exactly once per
/// event, so the operation sequence is fixed for a given (size, k).
template <class Algebra>
typename Algebra::Value at_least_k(Algebra& alg, std::span<const typename Algebra::Value> events, std::size_t k) {
    using V = typename Algebra::Value;
    if (k == 0) return alg.one();
    if (k > events.size()) return alg.zero();

    std::vector<V> dp(k + 1, alg.zero());
    dp[0] = alg.one();
    for (std::size_t i = 0; i < events.size(); ++i) {
        const V p = events[i];
        const V q = alg.complement(p);
        const std::size_t top = std::min(k, i + 1);
        for (std::size_t j = top; j >= 1; --j) {
            const bool fresh = j == i + 1;  // dp[j] is still structurally zero
            if (j == k)
                dp[k] = fresh ? alg.mul(dp[k - 1], p) : alg.add(dp[k], alg.mul(dp[k - 1], p));
            else
                dp[j] = fresh ? alg.mul(dp[j - 1], p) : alg.add(alg.mul(dp[j], q), alg.mul(dp[j - 1], p));
        }
        dp[0] = alg.mul(dp[0], q);
    }
    return dp[k];
}

/// Probability that a count/window pattern fires at its anchor: the trigger
/// at the anchor times P(at least count-1 further triggers in the window).
template <class Algebra>
typename Algebra::Value pattern_fire(Algebra& alg, std::span<const typename Algebra::Value> window_before,
                                     typename Algebra::Value anchor, std::size_t count) {
    return alg.mul(anchor, at_least_k(alg, window_before, count - 1));
}

}  // namespace cep
