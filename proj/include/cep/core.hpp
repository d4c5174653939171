#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cep {

using TimePoint = std::size_t;
using ClassId = std::size_t;
using FluentId = std::size_t;

/// Whether a pattern initiates or terminates its fluent. Doubles as the
/// query kind: Start <-> startsAt, End <-> endsAt.
enum class Polarity { Start, End };

const char* to_string(Polarity p) noexcept;

/// Categorical probability vector over the simple-event classes at one step.
class ClassDistribution {
public:
    ClassDistribution() = default;

    /// Validates entries in [0,1] summing to 1 within 1e-9.
    explicit ClassDistribution(std::vector<double> probs);

    static ClassDistribution uniform(std::size_t classes);
    static ClassDistribution one_hot(std::size_t classes, ClassId c);

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](ClassId c) const { return probs_[c]; }
    std::span<const double> probs() const noexcept { return probs_; }

    /// Index of the largest entry, lowest id on ties.
    ClassId argmax() const noexcept;

private:
    std::vector<double> probs_;
};

/// A fired start/end transition of a fluent.
struct EventLabel {
    Polarity kind = Polarity::Start;
    FluentId fluent = 0;

    bool operator==(const EventLabel&) const = default;
    auto operator<=>(const EventLabel&) const = default;
};

/// Per-timestep sets of fired transitions, each set sorted.
using EventAnnotation = std::vector<std::vector<EventLabel>>;

/// A sequence of fixed-dimension feature vectors with optional frame labels
/// and the complex-event labels derived from them.
class EventStream {
public:
    EventStream() = default;
    EventStream(std::size_t dim, std::vector<double> features,
                std::optional<std::vector<ClassId>> gt_class = std::nullopt);

    std::size_t length() const noexcept { return dim_ ? features_.size() / dim_ : 0; }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const double> feature(TimePoint t) const {
        return std::span<const double>(features_).subspan(t * dim_, dim_);
    }
    std::span<const double> features() const noexcept { return features_; }

    bool has_ground_truth() const noexcept { return gt_class_.has_value(); }
    const std::optional<std::vector<ClassId>>& gt_class() const noexcept { return gt_class_; }

    bool has_events() const noexcept { return events_.has_value(); }
    const EventAnnotation& events() const;
    void set_events(EventAnnotation events);

    /// Copy without frame-level labels; derived events are kept.
    EventStream without_ground_truth() const;

private:
    std::size_t dim_ = 0;
    std::vector<double> features_;
    std::optional<std::vector<ClassId>> gt_class_;
    std::optional<EventAnnotation> events_;
};

/// "count occurrences of trigger within window steps" anchored at the last one.
struct PatternRule {
    FluentId fluent = 0;
    Polarity polarity = Polarity::Start;
    ClassId trigger_class = 0;
    std::size_t count = 2;
    std::size_t window = 2;

    bool operator==(const PatternRule&) const = default;
};

struct RuleSet {
    std::vector<std::string> classes;
    std::vector<std::string> fluents;
    std::vector<PatternRule> rules;

    std::size_t num_classes() const noexcept { return classes.size(); }
    std::size_t num_fluents() const noexcept { return fluents.size(); }

    /// The unique rule for (fluent, polarity). Throws ValidationError if absent.
    const PatternRule& rule_for(FluentId fluent, Polarity polarity) const;

    /// Largest window over all rules (0 for an empty set).
    std::size_t max_window() const noexcept;

    /// Copy with every rule's window replaced.
    RuleSet with_window(std::size_t window) const;

    bool operator==(const RuleSet&) const = default;
};

struct QuerySample {
    Polarity kind = Polarity::Start;
    FluentId fluent = 0;
    TimePoint t = 0;
    bool label = false;

    bool operator==(const QuerySample&) const = default;
};

/// Human-readable list of RuleSet invariant violations; empty iff valid.
std::vector<std::string> validate_ruleset(const RuleSet& rs);

/// Throws ValidationError carrying the first violation, if any.
void require_valid(const RuleSet& rs);

/// True when the deterministic pattern of `rule` fires at `t` over the class
/// sequence: the trigger occurs at t and at least count-1 more times in
/// [t-window+1, t-1]. Never fires before a full window (t < window-1).
bool pattern_fires(std::span<const ClassId> classes, const PatternRule& rule, TimePoint t);

EventAnnotation annotate_classes(std::span<const ClassId> classes, const RuleSet& rs);

/// Fired transitions per timestep from the stream's frame labels.
EventAnnotation annotate_ground_truth(const EventStream& stream, const RuleSet& rs);

}  // namespace cep
