#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include <strengthlab/distributions.hpp>
#include <strengthlab/similarity.hpp>

namespace strengthlab {

/// Shapes emitted for continuous laws and the search budget for pmfs.
struct ProbeConfig {
    bool tails = true;
    bool centered = true;
    bool two_tail = true;
    int windows = 9;  // sliding windows (q(t), q(t+a)); 0 disables
    int exhaustive_limit = 12;
    int samples = 512;
    std::uint64_t seed = 1;
};

struct Probe {
    EventRef event;
    std::string shape;  // left-tail, right-tail, centered, two-tail, window, b-vector, empty, full
    double mass = 0.0;  // probability under the owning distribution
};

/// A finite, recorded subset of the events with probability `level` under one law.
struct ProbeFamily {
    std::string variable;
    double level = 0.0;
    std::vector<Probe> probes;
};

ProbeFamily build_probes_continuous(const Distribution& dist, double a, const ProbeConfig& config = {});
ProbeFamily build_probes_discrete(const Distribution& dist, double a, const ProbeConfig& config = {});
/// Dispatches on the form of `dist`.
ProbeFamily build_probes(const Distribution& dist, double a, const ProbeConfig& config = {});

/// True when b has at most one entry outside {0,1} (tolerance 1e-12).
bool admissible_weights(const std::vector<double>& b);

/// Variable event for a weight vector; throws InvalidArgument when inadmissible.
EventRef weight_event(const std::string& variable, const std::vector<double>& b);

enum class Verdict { Stronger, Weaker, Indeterminate };

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);
Verdict mirror(Verdict v);

struct StrengthVerdict {
    std::string kind;  // internal or external
    Verdict relation = Verdict::Indeterminate;
    double lambda = 0.0;
    ReferenceSet refset = ReferenceSet::continuous();
    ProbeFamily probes_f;
    ProbeFamily probes_g;
    std::vector<std::string> methods_a;
    std::vector<std::string> methods_b;
    std::size_t required = 0;  // cross-family comparisons needed for a complete picture
    std::size_t derived = 0;   // of which the store derives an order
    std::vector<Judgment> witness;
    bool sensitivity_recommended = false;
    std::vector<std::string> notes;

    double coverage() const { return required == 0 ? 0.0 : static_cast<double>(derived) / required; }
};

/// Memoized strict up/down sets of stored terms. Valid only while the store it
/// was built on is unchanged; not thread-safe.
class OrderIndex {
public:
    explicit OrderIndex(const SimilarityStore& store) : store_(&store) {}

    /// Order of `lhs` relative to `rhs`; ids may be absent for unregistered terms.
    Order order(const SimilarityTerm& lhs, std::optional<int> lhs_id, const SimilarityTerm& rhs,
                std::optional<int> rhs_id);
    Order order(const SimilarityTerm& lhs, const SimilarityTerm& rhs);

    const SimilarityStore& store() const { return *store_; }

private:
    struct Sets {
        std::vector<std::uint64_t> above;
        std::vector<std::uint64_t> below;
    };
    const Sets& sets(int id);

    const SimilarityStore* store_;
    std::unordered_map<int, Sets> cache_;
};

/// S(A, R(lambda)) for a probe under a reasoning method.
SimilarityTerm probe_term(const Probe& probe, const ReferenceSet& refset, double lambda,
                          const std::string& method = "direct");

/// F beats G when some G-probe term lies strictly below every F-probe term.
StrengthVerdict internal_strength(const ProbeFamily& f, const ProbeFamily& g, const SimilarityStore& store,
                                  const ReferenceSet& refset = ReferenceSet::continuous(),
                                  const std::string& method = "direct", OrderIndex* index = nullptr);

/// Best-method worst F term against best-method best G term. Methods without any
/// registered term for a family are reported and skipped.
StrengthVerdict external_strength(const ProbeFamily& f, const ProbeFamily& g, const SimilarityStore& store,
                                  const std::vector<std::string>& methods_a,
                                  const std::vector<std::string>& methods_b,
                                  const ReferenceSet& refset = ReferenceSet::continuous());

StrengthVerdict compare_representativeness(const ProbeFamily& f, const ProbeFamily& g, const SimilarityStore& store,
                                           const ReferenceSet& refset = ReferenceSet::continuous());

/// Both families must describe the same variable. Sets the sensitivity flag when
/// neither law is favoured.
StrengthVerdict choose_best_derivation(const ProbeFamily& f, const ProbeFamily& g, const SimilarityStore& store,
                                       const ReferenceSet& refset = ReferenceSet::continuous());

/// Stronger when the worst term of `f` under `m0` dominates its best term under `m1`.
StrengthVerdict best_reasoning_method(const ProbeFamily& f, const SimilarityStore& store, const std::string& m0,
                                      const std::string& m1,
                                      const ReferenceSet& refset = ReferenceSet::continuous());

enum class ComparisonKind { Internal, External, Representativeness, BestDerivation, ReasoningMethod };

std::string to_string(ComparisonKind k);
ComparisonKind comparison_kind_from_string(const std::string& s);

/// Everything needed to rebuild a verdict at any resolution.
struct ComparisonSpec {
    ComparisonKind kind = ComparisonKind::Internal;
    Distribution f;
    Distribution g;  // unused for ReasoningMethod
    std::string method = "direct";
    std::vector<std::string> methods_a;
    std::vector<std::string> methods_b;
    ReferenceSet refset = ReferenceSet::continuous();
    ProbeConfig probes;
};

StrengthVerdict run_comparison(const ComparisonSpec& spec, double lambda, const SimilarityStore& store);

struct VerdictFlip {
    double from_lambda = 0.0;
    double to_lambda = 0.0;
    Verdict from = Verdict::Indeterminate;
    Verdict to = Verdict::Indeterminate;
};

struct SensitivityReport {
    std::vector<StrengthVerdict> rows;
    std::vector<VerdictFlip> flips;
    bool stable() const { return flips.empty(); }
};

/// {0.05, 0.10, ..., 0.95}
std::vector<double> default_lambda_grid();

SensitivityReport sensitivity_scan(const ComparisonSpec& spec, const SimilarityStore& store,
                                   std::vector<double> grid = default_lambda_grid());

void to_json(nlohmann::json& j, const ProbeConfig& c);
void from_json(const nlohmann::json& j, ProbeConfig& c);
void to_json(nlohmann::json& j, const Probe& p);
void to_json(nlohmann::json& j, const ProbeFamily& f);
void to_json(nlohmann::json& j, const StrengthVerdict& v);
void to_json(nlohmann::json& j, const SensitivityReport& r);
void to_json(nlohmann::json& j, const ComparisonSpec& s);
void from_json(const nlohmann::json& j, ComparisonSpec& s);

}  // namespace strengthlab
