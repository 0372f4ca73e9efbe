#include <strengthlab/strength.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include <strengthlab/errors.hpp>
#include <strengthlab/rng.hpp>

namespace strengthlab {

namespace {

constexpr double kEps = 1e-12;

void check_level(double a) {
    if (!(a >= 0.0 && a <= 1.0)) throw OutOfRange("probe level must lie in [0,1], got " + format_number(a));
}

struct ProbeSink {
    ProbeFamily family;
    std::unordered_set<std::string> seen;

    void add(EventRef event, std::string shape, double mass) {
        if (!seen.insert(event.key()).second) return;
        family.probes.push_back({std::move(event), std::move(shape), mass});
    }
};

EventRef interval_event(const std::string& variable, std::vector<ValueInterval> pieces) {
    VariableEvent v;
    v.variable = variable;
    v.intervals = std::move(pieces);
    return EventRef(std::move(v));
}

double interval_mass(const Distribution& dist, const std::vector<ValueInterval>& pieces) {
    double total = 0.0;
    for (const auto& p : pieces) total += dist.probability(p.lo, p.hi);
    return total;
}

/// Known ids for a family of terms; unknown terms stay nullopt.
struct TermSet {
    std::vector<SimilarityTerm> terms;
    std::vector<std::optional<int>> ids;

    TermSet(const ProbeFamily& family, const SimilarityStore& store, const ReferenceSet& refset,
            const std::string& method) {
        for (const auto& p : family.probes) {
            terms.push_back(probe_term(p, refset, family.level, method));
            ids.push_back(store.id_of(terms.back()));
        }
    }
    bool any_known() const {
        return std::any_of(ids.begin(), ids.end(), [](const auto& id) { return id.has_value(); });
    }
};

struct WitnessSink {
    std::vector<Judgment>& out;
    std::unordered_set<std::string> seen;

    void add_chain(const SimilarityStore& store, const SimilarityTerm& lo, const SimilarityTerm& hi) {
        for (auto& j : store.explain(lo, hi)) {
            const auto k = j.lhs.key() + " " + to_string(j.relation) + " " + j.rhs.key();
            if (seen.insert(k).second) out.push_back(std::move(j));
        }
    }
};

void require_same_level(const ProbeFamily& f, const ProbeFamily& g) {
    if (std::abs(f.level - g.level) > kEps) {
        throw InvalidArgument("probe families sit at different resolutions (" + format_number(f.level) + " vs " +
                              format_number(g.level) + ")");
    }
}

void require_methods(const SimilarityStore& store, const std::vector<std::string>& methods, const char* side) {
    if (methods.empty()) throw InvalidArgument(std::string("method set ") + side + " is empty");
    for (const auto& m : methods) {
        if (!store.has_method(m)) throw UnknownMethod("unregistered reasoning method '" + m + "'");
    }
}

}  // namespace

// ---------------------------------------------------------------------------

bool admissible_weights(const std::vector<double>& b) {
    int fractional = 0;
    for (double x : b) {
        if (!(x >= -kEps && x <= 1.0 + kEps)) return false;
        if (std::abs(x) > kEps && std::abs(x - 1.0) > kEps) ++fractional;
    }
    return fractional <= 1;
}

EventRef weight_event(const std::string& variable, const std::vector<double>& b) {
    if (!admissible_weights(b)) {
        throw InvalidArgument("weight vector needs entries in [0,1] with at most one outside {0,1}");
    }
    VariableEvent v;
    v.variable = variable;
    v.weights = b;
    v.discrete = true;
    return EventRef(std::move(v));
}

ProbeFamily build_probes_continuous(const Distribution& dist, double a, const ProbeConfig& config) {
    check_level(a);
    if (!dist.is_continuous()) throw KindMismatch("continuous probes need a proper continuous law");
    ProbeSink sink;
    sink.family.variable = dist.variable();
    sink.family.level = a;
    const auto& var = dist.variable();
    auto q = [&](double u) { return dist.quantile_closed(u); };
    auto emit = [&](std::vector<ValueInterval> pieces, const char* shape) {
        const double mass = interval_mass(dist, pieces);
        sink.add(interval_event(var, std::move(pieces)), shape, mass);
    };

    if (a == 0.0) {
        sink.add(interval_event(var, {}), "empty", 0.0);
        return std::move(sink.family);
    }
    if (a == 1.0) {
        emit({{q(0.0), q(1.0)}}, "full");
        return std::move(sink.family);
    }
    if (config.tails) {
        emit({{q(0.0), q(a)}}, "left-tail");
        emit({{q(1.0 - a), q(1.0)}}, "right-tail");
    }
    if (config.centered) emit({{q((1.0 - a) / 2.0), q((1.0 + a) / 2.0)}}, "centered");
    if (config.two_tail) emit({{q(0.0), q(a / 2.0)}, {q(1.0 - a / 2.0), q(1.0)}}, "two-tail");
    const int w = config.windows;
    for (int i = 0; i < w; ++i) {
        double lo = w == 1 ? (1.0 - a) / 2.0 : (1.0 - a) * i / (w - 1);
        double hi = lo + a;
        if (w > 1 && i == w - 1) {
            lo = 1.0 - a;
            hi = 1.0;
        }
        emit({{q(lo), q(hi)}}, "window");
    }
    return std::move(sink.family);
}

ProbeFamily build_probes_discrete(const Distribution& dist, double a, const ProbeConfig& config) {
    check_level(a);
    const auto& pmf = dist.as_pmf();
    const auto& f = pmf.masses;
    const std::size_t m = f.size();
    ProbeSink sink;
    sink.family.variable = dist.variable();
    sink.family.level = a;

    auto emit = [&](const std::vector<double>& b) {
        double mass = 0.0;
        for (std::size_t i = 0; i < m; ++i) mass += b[i] * f[i];
        const bool none = std::all_of(b.begin(), b.end(), [](double x) { return x == 0.0; });
        sink.add(weight_event(dist.variable(), b), none ? "empty" : "b-vector", mass);
    };

    if (static_cast<int>(m) <= config.exhaustive_limit) {
        std::vector<double> b(m);
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                b[i] = (mask >> i) & 1U ? 1.0 : 0.0;
                s += b[i] * f[i];
            }
            if (std::abs(s - a) <= kEps) {
                emit(b);
            } else if (s < a) {
                for (std::size_t j = 0; j < m; ++j) {
                    if (b[j] != 0.0 || f[j] <= 0.0) continue;
                    const double r = (a - s) / f[j];
                    if (r > kEps && r < 1.0 - kEps) {
                        b[j] = r;
                        emit(b);
                        b[j] = 0.0;
                    }
                }
            }
        }
        return std::move(sink.family);
    }

    // Large supports: greedy fills along shuffled orders, then deterministic ones.
    auto fill = [&](const std::vector<std::size_t>& order) {
        std::vector<double> b(m, 0.0);
        double s = 0.0;
        for (std::size_t i : order) {
            if (f[i] <= 0.0) continue;
            if (s + f[i] <= a + kEps) {
                b[i] = 1.0;
                s += f[i];
                if (std::abs(s - a) <= kEps) break;
            } else {
                const double r = (a - s) / f[i];
                if (r > kEps) b[i] = r;
                break;
            }
        }
        emit(b);
    };
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    fill(order);
    std::reverse(order.begin(), order.end());
    fill(order);
    CounterRng rng(config.seed, m);
    for (int s = 0; s < config.samples; ++s) {
        for (std::size_t i = m - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
        fill(order);
    }
    return std::move(sink.family);
}

ProbeFamily build_probes(const Distribution& dist, double a, const ProbeConfig& config) {
    return dist.is_discrete() ? build_probes_discrete(dist, a, config) : build_probes_continuous(dist, a, config);
}

// ---------------------------------------------------------------------------

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Stronger: return "stronger";
        case Verdict::Weaker: return "weaker";
        case Verdict::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

Verdict verdict_from_string(const std::string& s) {
    if (s == "stronger") return Verdict::Stronger;
    if (s == "weaker") return Verdict::Weaker;
    if (s == "indeterminate") return Verdict::Indeterminate;
    throw InvalidArgument("unknown verdict '" + s + "'");
}

Verdict mirror(Verdict v) {
    if (v == Verdict::Stronger) return Verdict::Weaker;
    if (v == Verdict::Weaker) return Verdict::Stronger;
    return v;
}

const OrderIndex::Sets& OrderIndex::sets(int id) {
    auto it = cache_.find(id);
    if (it != cache_.end()) return it->second;
    const std::size_t words = (store_->term_count() + 63) / 64;
    Sets s{std::vector<std::uint64_t>(words, 0), std::vector<std::uint64_t>(words, 0)};
    for (int x : store_->strictly_above(id)) s.above[static_cast<std::size_t>(x) / 64] |= 1ULL << (x % 64);
    for (int x : store_->strictly_below(id)) s.below[static_cast<std::size_t>(x) / 64] |= 1ULL << (x % 64);
    return cache_.emplace(id, std::move(s)).first->second;
}

Order OrderIndex::order(const SimilarityTerm& lhs, std::optional<int> lhs_id, const SimilarityTerm& rhs,
                        std::optional<int> rhs_id) {
    if (lhs.key() == rhs.key()) return Order::Equal;
    if (!lhs_id || !rhs_id) return Order::Incomparable;
    if (*lhs_id == *rhs_id || store_->same_class(*lhs_id, *rhs_id)) return Order::Equal;
    const auto& s = sets(*rhs_id);
    const auto x = static_cast<std::size_t>(*lhs_id);
    if ((s.above[x / 64] >> (x % 64)) & 1U) return Order::Greater;
    if ((s.below[x / 64] >> (x % 64)) & 1U) return Order::Less;
    return Order::Incomparable;
}

Order OrderIndex::order(const SimilarityTerm& lhs, const SimilarityTerm& rhs) {
    return order(lhs, store_->id_of(lhs), rhs, store_->id_of(rhs));
}

SimilarityTerm probe_term(const Probe& probe, const ReferenceSet& refset, double lambda, const std::string& method) {
    return SimilarityTerm(probe.event, EventRef::reference(refset, lambda), method);
}

StrengthVerdict internal_strength(const ProbeFamily& f, const ProbeFamily& g, const SimilarityStore& store,
                                  const ReferenceSet& refset, const std::string& method, OrderIndex* index) {
    require_same_level(f, g);
    std::optional<OrderIndex> local;
    if (!index) index = &local.emplace(store);
    if (!store.has_method(method)) throw UnknownMethod("unregistered reasoning method '" + method + "'");
    StrengthVerdict v;
    v.kind = "internal";
    v.lambda = f.level;
    v.refset = refset;
    v.probes_f = f;
    v.probes_g = g;
    v.methods_a = v.methods_b = {method};

    const TermSet tf(f, store, refset, method);
    const TermSet tg(g, store, refset, method);
    v.required = tf.terms.size() * tg.terms.size();

    std::optional<std::size_t> floor_g;                       // a G term below every F term
    std::vector<char> below_all_g(tf.terms.size(), 1);        // F terms below every G term
    for (std::size_t gi = 0; gi < tg.terms.size(); ++gi) {
        bool under_all_f = true;
        for (std::size_t fi = 0; fi < tf.terms.size(); ++fi) {
            const auto o = index->order(tf.terms[fi], tf.ids[fi], tg.terms[gi], tg.ids[gi]);
            if (o != Order::Incomparable) ++v.derived;
            if (o != Order::Greater) under_all_f = false;
            if (o != Order::Less) below_all_g[fi] = 0;
        }
        if (under_all_f && !floor_g && !tf.terms.empty()) floor_g = gi;
    }

    WitnessSink witness{v.witness, {}};
    if (floor_g) {
        v.relation = Verdict::Stronger;
        for (const auto& t : tf.terms) witness.add_chain(store, tg.terms[*floor_g], t);
    } else if (!tg.terms.empty()) {
        const auto it = std::find(below_all_g.begin(), below_all_g.end(), 1);
        if (it != below_all_g.end()) {
            v.relation = Verdict::Weaker;
            const auto fi = static_cast<std::size_t>(it - below_all_g.begin());
            for (const auto& t : tg.terms) witness.add_chain(store, tf.terms[fi], t);
        }
    }
    if (v.relation == Verdict::Indeterminate && v.derived < v.required) {
        v.notes.push_back("coverage incomplete: " + std::to_string(v.required - v.derived) +
                          " probe comparisons are not derivable");
    }
    return v;
}

StrengthVerdict external_strength(const ProbeFamily& f, const ProbeFamily& g, const SimilarityStore& store,
                                  const std::vector<std::string>& methods_a,
                                  const std::vector<std::string>& methods_b, const ReferenceSet& refset) {
    require_same_level(f, g);
    require_methods(store, methods_a, "A");
    require_methods(store, methods_b, "B");
    StrengthVerdict v;
    v.kind = "external";
    v.lambda = f.level;
    v.refset = refset;
    v.probes_f = f;
    v.probes_g = g;
    v.methods_a = methods_a;
    v.methods_b = methods_b;

    std::vector<TermSet> fa;
    std::vector<std::string> fa_names;
    for (const auto& m : std::set<std::string>(methods_a.begin(), methods_a.end())) {
        TermSet ts(f, store, refset, m);
        if (ts.any_known()) {
            fa.push_back(std::move(ts));
            fa_names.push_back(m);
        } else {
            v.notes.push_back("method " + m + " has no recorded terms for " + f.variable);
        }
    }
    std::vector<TermSet> gb;
    std::vector<std::string> gb_names;
    for (const auto& m : std::set<std::string>(methods_b.begin(), methods_b.end())) {
        TermSet ts(g, store, refset, m);
        if (ts.any_known()) {
            gb.push_back(std::move(ts));
            gb_names.push_back(m);
        } else {
            v.notes.push_back("method " + m + " has no recorded terms for " + g.variable);
        }
    }
    for (const auto& ts : fa)
        for (const auto& us : gb) v.required += ts.terms.size() * us.terms.size();
    if (fa.empty() || gb.empty()) {
        v.notes.push_back("no applicable method on one side; nothing to compare");
        return v;
    }

    // stronger_via[a]: every G term (any B method) lies below every F term under method a.
    // weaker_via[b]: every F term (any A method) lies below every G term under method b.
    std::vector<char> stronger_via(fa.size(), 1);
    std::vector<char> weaker_via(gb.size(), 1);
    OrderIndex index(store);
    for (std::size_t bi = 0; bi < gb.size(); ++bi) {
        const auto& us = gb[bi];
        for (std::size_t gi = 0; gi < us.terms.size(); ++gi) {
            for (std::size_t ai = 0; ai < fa.size(); ++ai) {
                const auto& ts = fa[ai];
                for (std::size_t fi = 0; fi < ts.terms.size(); ++fi) {
                    const auto o = index.order(ts.terms[fi], ts.ids[fi], us.terms[gi], us.ids[gi]);
                    if (o != Order::Incomparable) ++v.derived;
                    if (o != Order::Greater) stronger_via[ai] = 0;
                    if (o != Order::Less) weaker_via[bi] = 0;
                }
            }
        }
    }

    WitnessSink witness{v.witness, {}};
    const auto s = std::find(stronger_via.begin(), stronger_via.end(), 1);
    const auto w = std::find(weaker_via.begin(), weaker_via.end(), 1);
    if (s != stronger_via.end()) {
        v.relation = Verdict::Stronger;
        const auto& ts = fa[static_cast<std::size_t>(s - stronger_via.begin())];
        for (const auto& us : gb)
            for (const auto& gt : us.terms)
                for (const auto& ft : ts.terms) witness.add_chain(store, gt, ft);
        v.notes.push_back("best method for " + f.variable + ": " + fa_names[static_cast<std::size_t>(s - stronger_via.begin())]);
    } else if (w != weaker_via.end()) {
        v.relation = Verdict::Weaker;
        const auto& us = gb[static_cast<std::size_t>(w - weaker_via.begin())];
        for (const auto& ts : fa)
            for (const auto& ft : ts.terms)
                for (const auto& gt : us.terms) witness.add_chain(store, ft, gt);
        v.notes.push_back("best method for " + g.variable + ": " + gb_names[static_cast<std::size_t>(w - weaker_via.begin())]);
    } else if (v.derived < v.required) {
        v.notes.push_back("coverage incomplete: " + std::to_string(v.required - v.derived) +
                          " cross-family comparisons are not derivable");
    }
    return v;
}

StrengthVerdict compare_representativeness(const ProbeFamily& f, const ProbeFamily& g, const SimilarityStore& store,
                                           const ReferenceSet& refset) {
    const std::vector<std::string> all(store.methods().begin(), store.methods().end());
    auto v = external_strength(f, g, store, all, all, refset);
    v.kind = "representativeness";
    return v;
}

StrengthVerdict choose_best_derivation(const ProbeFamily& f, const ProbeFamily& g, const SimilarityStore& store,
                                       const ReferenceSet& refset) {
    if (f.variable != g.variable) {
        throw InvalidArgument("derivations must describe the same variable (" + f.variable + " vs " + g.variable + ")");
    }
    auto v = compare_representativeness(f, g, store, refset);
    v.kind = "best-derivation";
    if (v.relation == Verdict::Indeterminate) {
        v.sensitivity_recommended = true;
        v.notes.push_back("neither derivation is favoured; carry both into a sensitivity analysis");
    }
    return v;
}

StrengthVerdict best_reasoning_method(const ProbeFamily& f, const SimilarityStore& store, const std::string& m0,
                                      const std::string& m1, const ReferenceSet& refset) {
    auto v = external_strength(f, f, store, {m0}, {m1}, refset);
    v.kind = "reasoning-method";
    return v;
}

// ---------------------------------------------------------------------------

std::string to_string(ComparisonKind k) {
    switch (k) {
        case ComparisonKind::Internal: return "internal";
        case ComparisonKind::External: return "external";
        case ComparisonKind::Representativeness: return "representativeness";
        case ComparisonKind::BestDerivation: return "best-derivation";
        case ComparisonKind::ReasoningMethod: return "reasoning-method";
    }
    return "internal";
}

ComparisonKind comparison_kind_from_string(const std::string& s) {
    for (auto k : {ComparisonKind::Internal, ComparisonKind::External, ComparisonKind::Representativeness,
                   ComparisonKind::BestDerivation, ComparisonKind::ReasoningMethod}) {
        if (to_string(k) == s) return k;
    }
    throw InvalidArgument("unknown comparison kind '" + s + "'");
}

StrengthVerdict run_comparison(const ComparisonSpec& spec, double lambda, const SimilarityStore& store) {
    const auto pf = build_probes(spec.f, lambda, spec.probes);
    switch (spec.kind) {
        case ComparisonKind::Internal:
            return internal_strength(pf, build_probes(spec.g, lambda, spec.probes), store, spec.refset, spec.method);
        case ComparisonKind::External:
            return external_strength(pf, build_probes(spec.g, lambda, spec.probes), store, spec.methods_a,
                                     spec.methods_b, spec.refset);
        case ComparisonKind::Representativeness:
            return compare_representativeness(pf, build_probes(spec.g, lambda, spec.probes), store, spec.refset);
        case ComparisonKind::BestDerivation:
            return choose_best_derivation(pf, build_probes(spec.g, lambda, spec.probes), store, spec.refset);
        case ComparisonKind::ReasoningMethod:
            if (spec.methods_a.size() != 1 || spec.methods_b.size() != 1) {
                throw InvalidArgument("reasoning-method comparison takes exactly one method on each side");
            }
            return best_reasoning_method(pf, store, spec.methods_a.front(), spec.methods_b.front(), spec.refset);
    }
    throw InvalidArgument("unknown comparison kind");
}

std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) grid.push_back(i / 20.0);
    return grid;
}

SensitivityReport sensitivity_scan(const ComparisonSpec& spec, const SimilarityStore& store,
                                   std::vector<double> grid) {
    if (grid.empty()) throw InvalidArgument("sensitivity scan needs at least one resolution");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    SensitivityReport report;
    for (double lambda : grid) report.rows.push_back(run_comparison(spec, lambda, store));
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        const auto& a = report.rows[i - 1];
        const auto& b = report.rows[i];
        if (a.relation != b.relation) report.flips.push_back({a.lambda, b.lambda, a.relation, b.relation});
    }
    return report;
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const ProbeConfig& c) {
    j = {{"tails", c.tails},     {"centered", c.centered},
         {"two_tail", c.two_tail}, {"windows", c.windows},
         {"exhaustive_limit", c.exhaustive_limit}, {"samples", c.samples},
         {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, ProbeConfig& c) {
    ProbeConfig d;
    c.tails = j.value("tails", d.tails);
    c.centered = j.value("centered", d.centered);
    c.two_tail = j.value("two_tail", d.two_tail);
    c.windows = j.value("windows", d.windows);
    c.exhaustive_limit = j.value("exhaustive_limit", d.exhaustive_limit);
    c.samples = j.value("samples", d.samples);
    c.seed = j.value("seed", d.seed);
    if (c.windows < 0 || c.samples < 0 || c.exhaustive_limit < 0 || c.exhaustive_limit > 24) {
        throw InvalidArgument("probe config counts out of range");
    }
}

void to_json(nlohmann::json& j, const Probe& p) { j = {{"event", p.event}, {"shape", p.shape}, {"mass", p.mass}}; }

void to_json(nlohmann::json& j, const ProbeFamily& f) {
    j = {{"variable", f.variable}, {"level", f.level}, {"probes", f.probes}};
}

void to_json(nlohmann::json& j, const StrengthVerdict& v) {
    j = {{"kind", v.kind},
         {"relation", to_string(v.relation)},
         {"lambda", v.lambda},
         {"refset", v.refset},
         {"probes_f", v.probes_f},
         {"probes_g", v.probes_g},
         {"methods_a", v.methods_a},
         {"methods_b", v.methods_b},
         {"required", v.required},
         {"derived", v.derived},
         {"coverage", v.coverage()},
         {"witness", v.witness},
         {"sensitivity_recommended", v.sensitivity_recommended},
         {"notes", v.notes}};
}

void to_json(nlohmann::json& j, const SensitivityReport& r) {
    auto rows = nlohmann::json::array();
    for (const auto& v : r.rows) {
        rows.push_back({{"lambda", v.lambda},
                        {"relation", to_string(v.relation)},
                        {"coverage", v.coverage()},
                        {"probes_f", v.probes_f.probes.size()},
                        {"probes_g", v.probes_g.probes.size()}});
    }
    auto flips = nlohmann::json::array();
    for (const auto& f : r.flips) {
        flips.push_back({{"from_lambda", f.from_lambda},
                         {"to_lambda", f.to_lambda},
                         {"from", to_string(f.from)},
                         {"to", to_string(f.to)}});
    }
    j = {{"rows", std::move(rows)}, {"flips", std::move(flips)}, {"stable", r.stable()}};
}

void to_json(nlohmann::json& j, const ComparisonSpec& s) {
    j = {{"kind", to_string(s.kind)}, {"f", s.f},           {"method", s.method},
         {"methods_a", s.methods_a},  {"methods_b", s.methods_b}, {"refset", s.refset},
         {"probes", s.probes}};
    if (s.kind != ComparisonKind::ReasoningMethod) j["g"] = s.g;
}

void from_json(const nlohmann::json& j, ComparisonSpec& s) {
    s.kind = comparison_kind_from_string(j.value("kind", std::string("internal")));
    s.f = j.at("f").get<Distribution>();
    if (s.kind != ComparisonKind::ReasoningMethod) s.g = j.at("g").get<Distribution>();
    s.method = j.value("method", std::string("direct"));
    s.methods_a = j.value("methods_a", std::vector<std::string>{});
    s.methods_b = j.value("methods_b", std::vector<std::string>{});
    s.refset = j.contains("refset") ? j.at("refset").get<ReferenceSet>() : ReferenceSet::continuous();
    s.probes = j.contains("probes") ? j.at("probes").get<ProbeConfig>() : ProbeConfig{};
}

}  // namespace strengthlab
