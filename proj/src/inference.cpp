#include "cep/inference.hpp"

#include <cmath>
#include <string>

#include "cep/error.hpp"
#include "cep/prob_algebra.hpp"

namespace cep {
namespace {

void check_unit(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability outside [0,1]: " + std::to_string(p));
}

void check_query(std::span<const ClassDistribution> dists, const PatternRule& rule, TimePoint t) {
    if (t + 1 < rule.window)
        throw WindowError("query at t=" + std::to_string(t) + " precedes a full window of " +
                          std::to_string(rule.window));
    if (t >= dists.size())
        throw WindowError("query at t=" + std::to_string(t) + " beyond stream length " +
                          std::to_string(dists.size()));
    for (TimePoint s = t + 1 - rule.window; s <= t; ++s)
        if (rule.trigger_class >= dists[s].size()) throw DomainError("trigger class outside distribution");
}

void check_assignments(std::size_t classes, std::size_t length) {
    if (std::pow(static_cast<double>(classes), static_cast<double>(length)) > kOracleMaxAssignments)
        throw SizeError("enumeration needs " + std::to_string(classes) + "^" + std::to_string(length) +
                        " assignments, limit is 1e6");
}

// Odometer over all class assignments; calls visit(classes, weight).
template <class Visit>
void for_each_assignment(std::span<const ClassDistribution> dists, Visit&& visit) {
    const std::size_t n = dists.size();
    const std::size_t c = n ? dists[0].size() : 0;
    for (const auto& d : dists)
        if (d.size() != c) throw ValidationError("distributions have differing class counts");
    check_assignments(c, n);
    std::vector<ClassId> assign(n, 0);
    while (true) {
        double w = 1.0;
        for (std::size_t i = 0; i < n; ++i) w *= dists[i][assign[i]];
        visit(std::span<const ClassId>(assign), w);
        std::size_t i = 0;
        while (i < n && ++assign[i] == c) assign[i++] = 0;
        if (i == n) break;
    }
}

}  // namespace

double at_least_k_prob(std::span<const double> probs, std::size_t k) {
    for (double p : probs) check_unit(p);
    RealAlgebra alg;
    return at_least_k(alg, probs, k);
}

double pattern_prob(std::span<const ClassDistribution> dists, const PatternRule& rule, TimePoint t) {
    check_query(dists, rule, t);
    std::vector<double> before;
    before.reserve(rule.window - 1);
    for (TimePoint s = t + 1 - rule.window; s < t; ++s) before.push_back(dists[s][rule.trigger_class]);
    RealAlgebra alg;
    return pattern_fire(alg, std::span<const double>(before), dists[t][rule.trigger_class], rule.count);
}

double start_prob(std::span<const ClassDistribution> dists, const PatternRule& rule, TimePoint t) {
    if (rule.polarity != Polarity::Start) throw ValidationError("start_prob needs a Start rule");
    return pattern_prob(dists, rule, t);
}

double end_prob(std::span<const ClassDistribution> dists, const PatternRule& rule, TimePoint t) {
    if (rule.polarity != Polarity::End) throw ValidationError("end_prob needs an End rule");
    return pattern_prob(dists, rule, t);
}

ProbSeries holds_at_recursion(std::span<const double> init, std::span<const double> term, double h0) {
    check_unit(h0);
    if (init.size() != term.size()) throw ValidationError("initiation and termination series differ in length");
    ProbSeries h(init.size());
    if (h.empty()) return h;
    h[0] = h0;
    for (TimePoint t = 0; t + 1 < h.size(); ++t) h[t + 1] = h[t] * (1.0 - term[t]) + (1.0 - h[t]) * init[t];
    return h;
}

ProbSeries holds_at_filter(std::span<const ClassDistribution> dists, const RuleSet& rs, FluentId fluent, double h0) {
    const auto& start = rs.rule_for(fluent, Polarity::Start);
    const auto& end = rs.rule_for(fluent, Polarity::End);
    std::vector<double> init(dists.size(), 0.0), term(dists.size(), 0.0);
    for (TimePoint t = 0; t < dists.size(); ++t) {
        if (t + 1 >= start.window) init[t] = pattern_prob(dists, start, t);
        if (t + 1 >= end.window) term[t] = pattern_prob(dists, end, t);
    }
    return holds_at_recursion(init, term, h0);
}

double enumerate_oracle(std::span<const ClassDistribution> dists, Polarity kind, FluentId fluent, TimePoint t,
                        const RuleSet& rs) {
    const PatternRule& rule = rs.rule_for(fluent, kind);
    check_query(dists, rule, t);
    double total = 0.0;
    for_each_assignment(dists, [&](std::span<const ClassId> assign, double w) {
        if (pattern_fires(assign, rule, t)) total += w;
    });
    return total;
}

double enumerate_holds_oracle(std::span<const ClassDistribution> dists, const RuleSet& rs, FluentId fluent,
                              double h0, TimePoint t) {
    check_unit(h0);
    if (t >= dists.size()) throw WindowError("holdsAt query beyond stream length");
    const PatternRule& start = rs.rule_for(fluent, Polarity::Start);
    const PatternRule& end = rs.rule_for(fluent, Polarity::End);
    double total = 0.0;
    for_each_assignment(dists, [&](std::span<const ClassId> assign, double w) {
        // Weighted over the two possible initial states.
        for (bool initial : {false, true}) {
            bool holds = initial;
            for (TimePoint s = 0; s < t; ++s)
                holds = holds ? !pattern_fires(assign, end, s) : pattern_fires(assign, start, s);
            if (holds) total += w * (initial ? h0 : 1.0 - h0);
        }
    });
    return total;
}

}  // namespace cep
