#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cep/core.hpp"

namespace cep {

using ProbSeries = std::vector<double>;

/// Exact P(at least k of independent Bernoulli events). Throws DomainError for
/// inputs outside [0,1].
double at_least_k_prob(std::span<const double> probs, std::size_t k);

/// P(startsAt(fluent, t)) under independent per-step categorical atoms.
/// Requires rule.polarity == Start and t >= window-1 (WindowError otherwise).
double start_prob(std::span<const ClassDistribution> dists, const PatternRule& rule, TimePoint t);

/// As start_prob for an End rule.
double end_prob(std::span<const ClassDistribution> dists, const PatternRule& rule, TimePoint t);

/// Either of the above, dispatched on the rule's polarity.
double pattern_prob(std::span<const ClassDistribution> dists, const PatternRule& rule, TimePoint t);

/// holdsAt filtering recursion
///   h[t+1] = h[t] * (1 - term[t]) + (1 - h[t]) * init[t],  h[0] = h0,
/// where init/term are start/end probabilities (0 before a full window).
/// Output has one entry per stream step.
ProbSeries holds_at_filter(std::span<const ClassDistribution> dists, const RuleSet& rs, FluentId fluent, double h0);

/// The filtering recursion over precomputed initiation/termination series
/// (equal lengths). h[0] = h0.
ProbSeries holds_at_recursion(std::span<const double> init, std::span<const double> term, double h0);

/// Upper bound on classes^length accepted by the enumeration oracles.
inline constexpr double kOracleMaxAssignments = 1e6;

/// Exact query probability by summing the weight of every joint class
/// assignment of the whole stream on which the deterministic pattern fires.
/// Throws SizeError when classes^length exceeds kOracleMaxAssignments.
double enumerate_oracle(std::span<const ClassDistribution> dists, Polarity kind, FluentId fluent, TimePoint t,
                        const RuleSet& rs);

/// Exact P(holdsAt(fluent, t)) by enumeration under inertia semantics: the
/// fluent holds at t+1 iff (it holds at t and does not end at t) or (it does
/// not hold at t and starts at t). The initial state holds with probability h0.
double enumerate_holds_oracle(std::span<const ClassDistribution> dists, const RuleSet& rs, FluentId fluent,
                              double h0, TimePoint t);

}  // namespace cep
