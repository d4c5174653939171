#include "cep/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cep/error.hpp"

namespace cep {

const char* to_string(Polarity p) noexcept { return p == Polarity::Start ? "start" : "end"; }

ClassDistribution::ClassDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw DomainError("class distribution must have at least one class");
    double sum = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("class probability outside [0,1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError("class probabilities do not sum to 1");
}

ClassDistribution ClassDistribution::uniform(std::size_t classes) {
    return ClassDistribution(std::vector<double>(classes, 1.0 / static_cast<double>(classes)));
}

ClassDistribution ClassDistribution::one_hot(std::size_t classes, ClassId c) {
    if (c >= classes) throw DomainError("one-hot class out of range");
    std::vector<double> p(classes, 0.0);
    p[c] = 1.0;
    return ClassDistribution(std::move(p));
}

ClassId ClassDistribution::argmax() const noexcept {
    return static_cast<ClassId>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

EventStream::EventStream(std::size_t dim, std::vector<double> features,
                         std::optional<std::vector<ClassId>> gt_class)
    : dim_(dim), features_(std::move(features)), gt_class_(std::move(gt_class)) {
    if (dim_ == 0) throw ValidationError("feature dimension must be positive");
    if (features_.size() % dim_ != 0) throw ValidationError("feature buffer is not a multiple of the dimension");
    if (gt_class_ && gt_class_->size() != length())
        throw ValidationError("ground-truth length differs from feature length");
}

const EventAnnotation& EventStream::events() const {
    if (!events_) throw ValidationError("stream has no complex-event labels");
    return *events_;
}

void EventStream::set_events(EventAnnotation events) {
    if (events.size() != length()) throw ValidationError("event annotation length differs from stream length");
    events_ = std::move(events);
}

EventStream EventStream::without_ground_truth() const {
    EventStream copy = *this;
    copy.gt_class_.reset();
    return copy;
}

const PatternRule& RuleSet::rule_for(FluentId fluent, Polarity polarity) const {
    for (const auto& r : rules)
        if (r.fluent == fluent && r.polarity == polarity) return r;
    throw ValidationError("no " + std::string(to_string(polarity)) + " rule for fluent " + std::to_string(fluent));
}

std::size_t RuleSet::max_window() const noexcept {
    std::size_t w = 0;
    for (const auto& r : rules) w = std::max(w, r.window);
    return w;
}

RuleSet RuleSet::with_window(std::size_t window) const {
    RuleSet copy = *this;
    for (auto& r : copy.rules) r.window = window;
    return copy;
}

std::vector<std::string> validate_ruleset(const RuleSet& rs) {
    std::vector<std::string> out;

    std::set<std::string> seen;
    for (const auto& c : rs.classes)
        if (!seen.insert(c).second) out.push_back("class " + c + ": duplicate class name");
    seen.clear();
    for (const auto& f : rs.fluents)
        if (!seen.insert(f).second) out.push_back("fluent " + f + ": duplicate fluent name");

    auto fluent_name = [&](FluentId f) {
        return f < rs.fluents.size() ? rs.fluents[f] : "#" + std::to_string(f);
    };

    for (const auto& r : rs.rules) {
        const std::string where = "fluent " + fluent_name(r.fluent) + " " + to_string(r.polarity) + " rule: ";
        if (r.fluent >= rs.fluents.size()) out.push_back(where + "unknown fluent");
        if (r.trigger_class >= rs.classes.size()) out.push_back(where + "trigger class out of range");
        if (r.window < 2) out.push_back(where + "window must be at least 2");
        if (r.count < 2) out.push_back(where + "count must be at least 2");
        if (r.count > r.window) out.push_back(where + "count exceeds window");
    }

    for (FluentId f = 0; f < rs.fluents.size(); ++f) {
        for (Polarity p : {Polarity::Start, Polarity::End}) {
            auto n = std::count_if(rs.rules.begin(), rs.rules.end(),
                                   [&](const PatternRule& r) { return r.fluent == f && r.polarity == p; });
            const char* label = p == Polarity::Start ? "Start" : "End";
            if (n == 0) out.push_back("fluent " + rs.fluents[f] + ": missing " + label + " rule");
            if (n > 1) out.push_back("fluent " + rs.fluents[f] + ": multiple " + label + " rules");
        }
    }
    return out;
}

void require_valid(const RuleSet& rs) {
    auto v = validate_ruleset(rs);
    if (!v.empty()) throw ValidationError(v.front());
}

bool pattern_fires(std::span<const ClassId> classes, const PatternRule& rule, TimePoint t) {
    if (t >= classes.size() || t + 1 < rule.window) return false;
    if (classes[t] != rule.trigger_class) return false;
    std::size_t hits = 0;
    for (TimePoint s = t + 1 - rule.window; s < t; ++s)
        if (classes[s] == rule.trigger_class) ++hits;
    return hits + 1 >= rule.count;
}

EventAnnotation annotate_classes(std::span<const ClassId> classes, const RuleSet& rs) {
    EventAnnotation out(classes.size());
    for (TimePoint t = 0; t < classes.size(); ++t) {
        for (const auto& r : rs.rules)
            if (pattern_fires(classes, r, t)) out[t].push_back({r.polarity, r.fluent});
        std::sort(out[t].begin(), out[t].end());
    }
    return out;
}

EventAnnotation annotate_ground_truth(const EventStream& stream, const RuleSet& rs) {
    if (!stream.has_ground_truth()) throw ValidationError("ground truth required");
    return annotate_classes(*stream.gt_class(), rs);
}

}  // namespace cep
