#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <boost/rational.hpp>
#include <nlohmann/json_fwd.hpp>

namespace strengthlab {

using Rational = boost::rational<std::int64_t>;

/// Urn of k labelled, equally likely balls.
struct DiscreteExperiment {
    int k = 1;
    explicit DiscreteExperiment(int k_);
};

/// Spinning wheel of unit circumference; outcome V in (0,1).
struct Wheel {};

using Experiment = std::variant<DiscreteExperiment, Wheel>;

/// Half-open interval [lo, hi) on the wheel.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

enum class EventKind { Discrete, Continuous };

/// A measurable subset of a canonical experiment's outcome space. Discrete events
/// hold a sorted duplicate-free set of outcome indices in 1..k; continuous events
/// hold sorted, merged, half-open subintervals of [0,1).
class Event {
public:
    /// Empty continuous event.
    Event() = default;

    static Event discrete(int k, std::vector<int> outcomes);
    static Event continuous(std::vector<Interval> intervals);
    static Event empty_like(const Event& other);
    static Event full(const Experiment& experiment);

    EventKind kind() const { return continuous_ ? EventKind::Continuous : EventKind::Discrete; }
    bool is_discrete() const { return !continuous_; }

    /// Number of urn balls; only meaningful for discrete events.
    int k() const { return k_; }
    const std::vector<int>& outcomes() const { return outcomes_; }
    const std::vector<Interval>& intervals() const { return intervals_; }

    bool empty() const { return continuous_ ? intervals_.empty() : outcomes_.empty(); }

    /// True if `this` is a subset of `other` (same kind and experiment required).
    bool subset_of(const Event& other) const;

    friend bool operator==(const Event&, const Event&) = default;

private:
    bool continuous_ = true;
    int k_ = 0;
    std::vector<int> outcomes_;
    std::vector<Interval> intervals_;
};

/// |O(E)|/k, exactly. Throws KindMismatch for continuous events.
Rational exact_probability(const Event& event);

/// |O(E)|/k for urn events, total interval length for wheel events.
double physical_probability(const Event& event);

/// As above, but checks the event belongs to `experiment`.
double physical_probability(const Experiment& experiment, const Event& event);

enum class SetOp { Union, Intersect, Complement };

Event event_union(const Event& a, const Event& b);
Event event_intersect(const Event& a, const Event& b);
Event event_complement(const Event& a);
Event event_algebra(SetOp op, const Event& a, const std::optional<Event>& b = std::nullopt);

/// Nested family R(lambda) of events with physical probability exactly lambda.
class ReferenceSet {
public:
    static ReferenceSet discrete(int k);
    static ReferenceSet continuous();

    bool is_discrete() const { return k_ > 0; }
    int k() const { return k_; }

    /// True when lambda is an admissible resolution. `extended` also admits the
    /// impossible (0) and certain (1) events.
    bool admits(double lambda, bool extended = false) const;

    /// Event R(lambda). Throws OutOfRange when lambda is off the grid.
    Event event(double lambda, bool extended = false) const;

    /// The admissible grid for discrete sets ({1/k,...,(k-1)/k}); empty for continuous.
    std::vector<double> grid() const;

    /// Stable text identity, e.g. "urn10" or "wheel".
    std::string name() const;

    friend bool operator==(const ReferenceSet&, const ReferenceSet&) = default;

private:
    int k_ = 0;
};

/// Outcome of repeated independent trials of an experiment for one event.
struct TrialRecord {
    std::string experiment;
    std::uint64_t n = 0;
    std::uint64_t count = 0;
    std::uint64_t seed = 0;

    double frequency() const { return n == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(n); }
    std::uint64_t complement_count() const { return n - count; }
};

/// Runs `n_trials` draws of `experiment` with a counter-based generator keyed by
/// `seed`. Results do not depend on `workers`.
TrialRecord run_trials(const Experiment& experiment, const Event& event, std::uint64_t n_trials,
                       std::uint64_t seed, unsigned workers = 0);

std::string experiment_name(const Experiment& experiment);
Experiment experiment_of(const Event& event);

void to_json(nlohmann::json& j, const Event& e);
void from_json(const nlohmann::json& j, Event& e);
void to_json(nlohmann::json& j, const TrialRecord& r);
void to_json(nlohmann::json& j, const ReferenceSet& r);
void from_json(const nlohmann::json& j, ReferenceSet& r);

}  // namespace strengthlab
