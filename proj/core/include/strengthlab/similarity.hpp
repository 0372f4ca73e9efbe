#pragma once

#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include <strengthlab/errors.hpp>
#include <strengthlab/events.hpp>

namespace strengthlab {

/// [lo, hi) in the value space of a named variable; endpoints may be infinite.
struct ValueInterval {
    double lo = 0.0;
    double hi = 0.0;
    friend bool operator==(const ValueInterval&, const ValueInterval&) = default;
};

/// The reference event R(lambda) of a reference set.
struct ReferenceEvent {
    ReferenceSet refset;
    double lambda = 0.0;
    friend bool operator==(const ReferenceEvent&, const ReferenceEvent&) = default;
};

/// An event about a modelled variable. Continuous variables use a union of value
/// intervals; finite-support variables use the auxiliary-wheel weights b_i, one per
/// support point in the owning distribution's order.
struct VariableEvent {
    std::string variable;
    std::vector<ValueInterval> intervals;
    std::vector<double> weights;
    bool discrete = false;
    friend bool operator==(const VariableEvent&, const VariableEvent&) = default;
};

/// A free-standing event known only by name (e.g. "rain tomorrow").
struct NamedEvent {
    std::string name;
    friend bool operator==(const NamedEvent&, const NamedEvent&) = default;
};

/// One argument of a similarity term. Its key() is the identity used by the store.
class EventRef {
public:
    using Payload = std::variant<ReferenceEvent, VariableEvent, NamedEvent>;

    EventRef() = default;
    EventRef(Payload payload);  // NOLINT(google-explicit-constructor)

    static EventRef reference(const ReferenceSet& refset, double lambda);
    static EventRef named(std::string name);

    const Payload& payload() const { return payload_; }
    const std::string& key() const { return key_; }

    const ReferenceEvent* as_reference() const { return std::get_if<ReferenceEvent>(&payload_); }
    const VariableEvent* as_variable() const { return std::get_if<VariableEvent>(&payload_); }
    const NamedEvent* as_named() const { return std::get_if<NamedEvent>(&payload_); }

    friend bool operator==(const EventRef& a, const EventRef& b) { return a.key_ == b.key_; }

private:
    Payload payload_;
    std::string key_;
};

/// Shortest round-trip decimal text of a double ("0.35", "-inf").
std::string format_number(double x);

/// S(a, b) as assessed under a given reasoning method. Unordered in (a, b).
struct SimilarityTerm {
    EventRef a;
    EventRef b;
    std::string method = "direct";

    SimilarityTerm() = default;
    SimilarityTerm(EventRef a_, EventRef b_, std::string method_ = "direct")
        : a(std::move(a_)), b(std::move(b_)), method(std::move(method_)) {}

    std::string key() const;
    bool shares_event_with(const SimilarityTerm& other) const;
};

enum class Relation { Greater, Less, Equal };
enum class Order { Greater, Less, Equal, Incomparable };

Relation flip(Relation r);
Order flip(Order o);
std::string to_string(Relation r);
std::string to_string(Order o);
Relation relation_from_string(const std::string& s);

/// An elicited comparison "lhs rel rhs".
struct Judgment {
    SimilarityTerm lhs;
    SimilarityTerm rhs;
    Relation relation = Relation::Equal;
    std::string source = "human";
    std::string timestamp;
    /// Marks a cross-pair comparison whose terms share no event.
    bool extended = false;
};

/// Raised when a judgment would close a strict cycle. `cycle` lists the stored
/// judgments along the offending path followed by the rejected judgment.
class ConflictError : public Error {
public:
    ConflictError(const std::string& message, std::vector<Judgment> cycle)
        : Error("conflict", message), cycle_(std::move(cycle)) {}
    const std::vector<Judgment>& cycle() const { return cycle_; }

private:
    std::vector<Judgment> cycle_;
};

/// Partially ordered similarity attribute built from judgments. Equal judgments
/// induce equivalence classes; Greater/Less judgments are strict edges between
/// classes, and the condensed graph is kept acyclic. Copies are independent
/// snapshots; const member functions are safe to call concurrently.
class SimilarityStore {
public:
    SimilarityStore();

    static const std::vector<std::string>& default_methods();

    /// Adds a judgment, refusing it (store unchanged) on a strict cycle.
    void record(const Judgment& j);

    /// All-or-nothing insertion of a batch.
    void record_all(std::span<const Judgment> batch);

    /// Makes a term known without any ordering information.
    int register_term(const SimilarityTerm& t);
    void register_method(const std::string& method);

    bool has_method(const std::string& method) const { return methods_.count(method) > 0; }
    const std::set<std::string>& methods() const { return methods_; }

    bool knows(const SimilarityTerm& t) const { return index_.count(t.key()) > 0; }
    std::optional<int> id_of(const SimilarityTerm& t) const;
    std::optional<int> id_of_key(const std::string& key) const;
    const SimilarityTerm& term(int id) const { return terms_[static_cast<std::size_t>(id)]; }
    std::size_t term_count() const { return terms_.size(); }

    const std::vector<Judgment>& judgments() const { return judgments_; }
    std::size_t size() const { return judgments_.size(); }

    /// Throws UnknownTerm when either term has never been registered.
    Order query(const SimilarityTerm& lhs, const SimilarityTerm& rhs) const;

    /// Like query() but unknown terms are Incomparable (identical keys are Equal).
    Order compare(const SimilarityTerm& lhs, const SimilarityTerm& rhs) const;
    Order compare_ids(int lhs, int rhs) const;

    /// Ids whose similarity is strictly greater (resp. smaller) than term `id`.
    std::vector<int> strictly_above(int id) const;
    std::vector<int> strictly_below(int id) const;
    bool same_class(int a, int b) const;

    /// Stored judgments that derive the relation between two terms (empty when
    /// Incomparable or identical).
    std::vector<Judgment> explain(const SimilarityTerm& lhs, const SimilarityTerm& rhs) const;

    /// Would `j` be accepted? Returns the conflict instead of throwing.
    std::optional<ConflictError> check(const Judgment& j) const;

private:
    struct Edge {
        int to;
        int judgment;
    };

    int intern(const SimilarityTerm& t);
    void validate(const Judgment& j) const;
    void apply(int lhs, int rhs, Relation rel, int judgment_index);
    int find(int x) const;
    void rebuild();

    /// Shortest path from `from` to `to` moving along Equal edges (either way) and
    /// strict "less than" edges upward; `need_strict` requires >= 1 strict edge.
    std::optional<std::vector<int>> path(int from, int to, bool need_strict) const;
    std::vector<int> reach(int id, bool upward) const;

    std::set<std::string> methods_;
    std::vector<SimilarityTerm> terms_;
    std::unordered_map<std::string, int> index_;
    std::vector<Judgment> judgments_;
    std::vector<std::vector<Edge>> up_;    // i < to
    std::vector<std::vector<Edge>> down_;  // i > to
    std::vector<std::vector<Edge>> eq_;
    mutable std::vector<int> parent_;
};

/// Functional form: returns a new store version with `j` recorded.
SimilarityStore record_judgment(const SimilarityStore& store, const Judgment& j);
Order query_order(const SimilarityStore& store, const SimilarityTerm& lhs, const SimilarityTerm& rhs);

/// Offsets for the imprecision/weak-analogy checks around a maximizer. Zero means
/// "one grid step".
struct ImprecisionConfig {
    double offset_below = 0.0;
    double offset_above = 0.0;
    std::string method = "direct";
};

struct ArgmaxResult {
    std::vector<double> maximizers;
    bool imprecise = false;
    bool weak_analogy = false;
    /// No judgment relates any two grid terms; the whole grid is returned.
    bool unjudged = false;
    std::vector<std::string> notes;
    double lower() const { return maximizers.empty() ? 0.0 : maximizers.front(); }
    double upper() const { return maximizers.empty() ? 0.0 : maximizers.back(); }
};

/// Grid resolutions whose term S(E, R(lambda)) is not dominated by any other grid
/// term. lambda = 0 and 1 denote the impossible and certain events.
ArgmaxResult argmax_similarity(const SimilarityStore& store, const EventRef& event, const ReferenceSet& refset,
                               std::vector<double> grid, const ImprecisionConfig& config = {});

/// Evenly spaced grid {0, step, ..., 1} built from integer multiples of step.
std::vector<double> unit_grid(double step, bool include_extremes = true);

void to_json(nlohmann::json& j, const EventRef& e);
void from_json(const nlohmann::json& j, EventRef& e);
void to_json(nlohmann::json& j, const SimilarityTerm& t);
void from_json(const nlohmann::json& j, SimilarityTerm& t);
void to_json(nlohmann::json& j, const Judgment& jd);
void from_json(const nlohmann::json& j, Judgment& jd);

/// Export as a judgment list; import replays it into a fresh store.
nlohmann::json export_store(const SimilarityStore& store);
SimilarityStore import_store(const nlohmann::json& judgments);

}  // namespace strengthlab
