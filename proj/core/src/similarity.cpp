#include <strengthlab/similarity.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace strengthlab {

namespace {

// Breadth-first search scratch space, reused across queries on the same thread.
struct Scratch {
    std::vector<unsigned> stamp;
    std::vector<int> parent_state;
    std::vector<int> parent_judgment;
    std::vector<int> queue;
    unsigned generation = 0;

    void prepare(std::size_t states) {
        if (stamp.size() < states) {
            stamp.resize(states, 0);
            parent_state.resize(states, -1);
            parent_judgment.resize(states, -1);
        }
        if (++generation == 0) {
            std::fill(stamp.begin(), stamp.end(), 0u);
            generation = 1;
        }
        queue.clear();
    }
    bool seen(int s) const { return stamp[static_cast<std::size_t>(s)] == generation; }
    void mark(int s, int from, int judgment) {
        stamp[static_cast<std::size_t>(s)] = generation;
        parent_state[static_cast<std::size_t>(s)] = from;
        parent_judgment[static_cast<std::size_t>(s)] = judgment;
        queue.push_back(s);
    }
};

thread_local Scratch scratch;

std::string interval_text(const std::vector<ValueInterval>& pieces) {
    std::string out;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (i) out += "u";
        out += "[" + format_number(pieces[i].lo) + "," + format_number(pieces[i].hi) + ")";
    }
    return out.empty() ? "{}" : out;
}

std::string compute_key(const EventRef::Payload& p) {
    if (const auto* r = std::get_if<ReferenceEvent>(&p)) {
        return "R[" + r->refset.name() + "](" + format_number(r->lambda) + ")";
    }
    if (const auto* v = std::get_if<VariableEvent>(&p)) {
        if (v->discrete) {
            std::string out = v->variable + " b=(";
            for (std::size_t i = 0; i < v->weights.size(); ++i) {
                if (i) out += ",";
                out += format_number(v->weights[i]);
            }
            return out + ")";
        }
        return v->variable + " in " + interval_text(v->intervals);
    }
    return "E:" + std::get<NamedEvent>(p).name;
}

double number_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw InvalidArgument("expected a number, got '" + s + "'");
    }
    return j.get<double>();
}

nlohmann::json number_to_json(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

}  // namespace

std::string format_number(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

EventRef::EventRef(Payload payload) : payload_(std::move(payload)), key_(compute_key(payload_)) {}

EventRef EventRef::reference(const ReferenceSet& refset, double lambda) {
    if (!refset.admits(lambda, true)) {
        throw OutOfRange("resolution " + format_number(lambda) + " is not on the " + refset.name() + " grid");
    }
    return EventRef(ReferenceEvent{refset, lambda});
}

EventRef EventRef::named(std::string name) { return EventRef(NamedEvent{std::move(name)}); }

std::string SimilarityTerm::key() const {
    const auto& ka = a.key();
    const auto& kb = b.key();
    return method + "|S(" + (ka < kb ? ka + ";" + kb : kb + ";" + ka) + ")";
}

bool SimilarityTerm::shares_event_with(const SimilarityTerm& o) const {
    return a == o.a || a == o.b || b == o.a || b == o.b;
}

Relation flip(Relation r) {
    switch (r) {
        case Relation::Greater: return Relation::Less;
        case Relation::Less: return Relation::Greater;
        default: return Relation::Equal;
    }
}

Order flip(Order o) {
    switch (o) {
        case Order::Greater: return Order::Less;
        case Order::Less: return Order::Greater;
        default: return o;
    }
}

std::string to_string(Relation r) {
    switch (r) {
        case Relation::Greater: return "gt";
        case Relation::Less: return "lt";
        default: return "eq";
    }
}

std::string to_string(Order o) {
    switch (o) {
        case Order::Greater: return "gt";
        case Order::Less: return "lt";
        case Order::Equal: return "eq";
        default: return "incomparable";
    }
}

Relation relation_from_string(const std::string& s) {
    if (s == "gt" || s == "Greater" || s == ">") return Relation::Greater;
    if (s == "lt" || s == "Less" || s == "<") return Relation::Less;
    if (s == "eq" || s == "Equal" || s == "=") return Relation::Equal;
    throw InvalidArgument("unknown relation '" + s + "'");
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& SimilarityStore::default_methods() {
    static const std::vector<std::string> methods{"direct", "bayesian", "fiducial"};
    return methods;
}

SimilarityStore::SimilarityStore() : methods_(default_methods().begin(), default_methods().end()) {}

void SimilarityStore::register_method(const std::string& method) {
    if (method.empty()) throw InvalidArgument("method tag must be non-empty");
    methods_.insert(method);
}

int SimilarityStore::register_term(const SimilarityTerm& t) {
    if (!has_method(t.method)) throw UnknownMethod("unregistered reasoning method '" + t.method + "'");
    return intern(t);
}

std::optional<int> SimilarityStore::id_of(const SimilarityTerm& t) const { return id_of_key(t.key()); }

std::optional<int> SimilarityStore::id_of_key(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

int SimilarityStore::intern(const SimilarityTerm& t) {
    auto key = t.key();
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    const int id = static_cast<int>(terms_.size());
    terms_.push_back(t);
    index_.emplace(std::move(key), id);
    up_.emplace_back();
    down_.emplace_back();
    eq_.emplace_back();
    parent_.push_back(id);
    return id;
}

int SimilarityStore::find(int x) const {
    while (parent_[static_cast<std::size_t>(x)] != x) x = parent_[static_cast<std::size_t>(x)];
    return x;
}

bool SimilarityStore::same_class(int a, int b) const { return find(a) == find(b); }

void SimilarityStore::validate(const Judgment& j) const {
    for (const auto* t : {&j.lhs, &j.rhs}) {
        if (!has_method(t->method)) throw UnknownMethod("unregistered reasoning method '" + t->method + "'");
    }
    if (!j.extended && !j.lhs.shares_event_with(j.rhs)) {
        throw SharedArgumentError("terms " + j.lhs.key() + " and " + j.rhs.key() +
                                  " share no event; mark the judgment as extended to compare them");
    }
}

std::optional<std::vector<int>> SimilarityStore::path(int from, int to, bool need_strict) const {
    const std::size_t n = terms_.size();
    scratch.prepare(2 * n);
    const int start = 2 * from;
    scratch.mark(start, -1, -1);
    int found = -1;
    for (std::size_t head = 0; head < scratch.queue.size() && found < 0; ++head) {
        const int s = scratch.queue[head];
        const int node = s / 2;
        const int strict = s % 2;
        auto visit = [&](int next_node, int next_strict, int judgment) {
            const int ns = 2 * next_node + next_strict;
            if (scratch.seen(ns)) return;
            scratch.mark(ns, s, judgment);
            if (next_node == to && (next_strict || !need_strict)) found = ns;
        };
        for (const auto& e : eq_[static_cast<std::size_t>(node)]) visit(e.to, strict, e.judgment);
        for (const auto& e : up_[static_cast<std::size_t>(node)]) visit(e.to, 1, e.judgment);
    }
    if (found < 0) return std::nullopt;
    std::vector<int> judgments;
    for (int s = found; scratch.parent_state[static_cast<std::size_t>(s)] >= 0;
         s = scratch.parent_state[static_cast<std::size_t>(s)]) {
        judgments.push_back(scratch.parent_judgment[static_cast<std::size_t>(s)]);
    }
    std::reverse(judgments.begin(), judgments.end());
    return judgments;
}

std::vector<int> SimilarityStore::reach(int id, bool upward) const {
    const std::size_t n = terms_.size();
    scratch.prepare(2 * n);
    scratch.mark(2 * id, -1, -1);
    std::vector<int> out;
    const auto& strict_edges = upward ? up_ : down_;
    for (std::size_t head = 0; head < scratch.queue.size(); ++head) {
        const int s = scratch.queue[head];
        const int node = s / 2;
        const int strict = s % 2;
        if (strict) out.push_back(node);
        for (const auto& e : eq_[static_cast<std::size_t>(node)]) {
            const int ns = 2 * e.to + strict;
            if (!scratch.seen(ns)) scratch.mark(ns, s, e.judgment);
        }
        for (const auto& e : strict_edges[static_cast<std::size_t>(node)]) {
            const int ns = 2 * e.to + 1;
            if (!scratch.seen(ns)) scratch.mark(ns, s, e.judgment);
        }
    }
    return out;
}

std::vector<int> SimilarityStore::strictly_above(int id) const { return reach(id, true); }
std::vector<int> SimilarityStore::strictly_below(int id) const { return reach(id, false); }

std::optional<ConflictError> SimilarityStore::check(const Judgment& j) const {
    validate(j);
    const auto lhs = id_of(j.lhs);
    const auto rhs = id_of(j.rhs);
    if (j.lhs.key() == j.rhs.key()) {
        if (j.relation == Relation::Equal) return std::nullopt;
        return ConflictError("a term cannot be strictly more or less similar than itself", {j});
    }
    if (!lhs || !rhs) return std::nullopt;  // a fresh term cannot close a cycle

    auto witness = [&](const std::vector<int>& path_judgments, const std::string& why) {
        std::vector<Judgment> cycle;
        for (int idx : path_judgments) cycle.push_back(judgments_[static_cast<std::size_t>(idx)]);
        cycle.push_back(j);
        return ConflictError(why, std::move(cycle));
    };

    // lhs > rhs adds rhs < lhs; it conflicts with any existing path lhs <= rhs.
    switch (j.relation) {
        case Relation::Greater:
            if (auto p = path(*lhs, *rhs, false)) return witness(*p, "judgment contradicts a derived ordering");
            break;
        case Relation::Less:
            if (auto p = path(*rhs, *lhs, false)) return witness(*p, "judgment contradicts a derived ordering");
            break;
        case Relation::Equal:
            if (auto p = path(*lhs, *rhs, true)) return witness(*p, "equality contradicts a derived strict ordering");
            if (auto p = path(*rhs, *lhs, true)) return witness(*p, "equality contradicts a derived strict ordering");
            break;
    }
    return std::nullopt;
}

void SimilarityStore::apply(int lhs, int rhs, Relation rel, int judgment_index) {
    const auto L = static_cast<std::size_t>(lhs);
    const auto R = static_cast<std::size_t>(rhs);
    switch (rel) {
        case Relation::Greater:
            up_[R].push_back({lhs, judgment_index});
            down_[L].push_back({rhs, judgment_index});
            break;
        case Relation::Less:
            up_[L].push_back({rhs, judgment_index});
            down_[R].push_back({lhs, judgment_index});
            break;
        case Relation::Equal: {
            eq_[L].push_back({rhs, judgment_index});
            eq_[R].push_back({lhs, judgment_index});
            int a = find(lhs);
            int b = find(rhs);
            if (a != b) parent_[static_cast<std::size_t>(std::min(a, b))] = std::max(a, b);
            for (int x : {lhs, rhs}) {
                const int root = find(x);
                while (parent_[static_cast<std::size_t>(x)] != root) {
                    const int next = parent_[static_cast<std::size_t>(x)];
                    parent_[static_cast<std::size_t>(x)] = root;
                    x = next;
                }
            }
            break;
        }
    }
}

void SimilarityStore::record(const Judgment& j) {
    if (auto conflict = check(j)) throw std::move(*conflict);
    const int lhs = intern(j.lhs);
    const int rhs = intern(j.rhs);
    const int idx = static_cast<int>(judgments_.size());
    judgments_.push_back(j);
    if (lhs != rhs) apply(lhs, rhs, j.relation, idx);
}

void SimilarityStore::rebuild() {
    for (auto& v : up_) v.clear();
    for (auto& v : down_) v.clear();
    for (auto& v : eq_) v.clear();
    for (std::size_t i = 0; i < parent_.size(); ++i) parent_[i] = static_cast<int>(i);
    for (std::size_t i = 0; i < judgments_.size(); ++i) {
        const auto& j = judgments_[i];
        const int lhs = *id_of(j.lhs);
        const int rhs = *id_of(j.rhs);
        if (lhs != rhs) apply(lhs, rhs, j.relation, static_cast<int>(i));
    }
}

void SimilarityStore::record_all(std::span<const Judgment> batch) {
    const auto judgments_before = judgments_.size();
    const auto terms_before = terms_.size();
    try {
        for (const auto& j : batch) record(j);
    } catch (...) {
        judgments_.resize(judgments_before);
        for (std::size_t i = terms_before; i < terms_.size(); ++i) index_.erase(terms_[i].key());
        terms_.resize(terms_before);
        up_.resize(terms_before);
        down_.resize(terms_before);
        eq_.resize(terms_before);
        parent_.resize(terms_before);
        rebuild();
        throw;
    }
}

Order SimilarityStore::compare_ids(int lhs, int rhs) const {
    if (lhs == rhs || same_class(lhs, rhs)) return Order::Equal;
    if (path(lhs, rhs, true)) return Order::Less;
    if (path(rhs, lhs, true)) return Order::Greater;
    return Order::Incomparable;
}

Order SimilarityStore::compare(const SimilarityTerm& lhs, const SimilarityTerm& rhs) const {
    const auto lk = lhs.key();
    const auto rk = rhs.key();
    if (lk == rk) return Order::Equal;
    const auto l = id_of_key(lk);
    const auto r = id_of_key(rk);
    if (!l || !r) return Order::Incomparable;
    return compare_ids(*l, *r);
}

Order SimilarityStore::query(const SimilarityTerm& lhs, const SimilarityTerm& rhs) const {
    for (const auto* t : {&lhs, &rhs}) {
        if (!knows(*t)) throw UnknownTerm("term " + t->key() + " is not registered");
    }
    return compare(lhs, rhs);
}

std::vector<Judgment> SimilarityStore::explain(const SimilarityTerm& lhs, const SimilarityTerm& rhs) const {
    const auto l = id_of(lhs);
    const auto r = id_of(rhs);
    if (!l || !r || *l == *r) return {};
    std::optional<std::vector<int>> p;
    if (same_class(*l, *r)) {
        p = path(*l, *r, false);
    } else {
        p = path(*l, *r, true);
        if (!p) p = path(*r, *l, true);
    }
    std::vector<Judgment> out;
    if (p) {
        for (int idx : *p) out.push_back(judgments_[static_cast<std::size_t>(idx)]);
    }
    return out;
}

SimilarityStore record_judgment(const SimilarityStore& store, const Judgment& j) {
    SimilarityStore next = store;
    next.record(j);
    return next;
}

Order query_order(const SimilarityStore& store, const SimilarityTerm& lhs, const SimilarityTerm& rhs) {
    return store.query(lhs, rhs);
}

// ---------------------------------------------------------------------------

std::vector<double> unit_grid(double step, bool include_extremes) {
    if (!(step > 0.0) || step > 1.0) throw InvalidArgument("grid step must lie in (0, 1]");
    const auto count = static_cast<int>(std::lround(1.0 / step));
    if (std::abs(count * step - 1.0) > 1e-9) throw InvalidArgument("grid step must divide 1");
    std::vector<double> out;
    for (int i = include_extremes ? 0 : 1; i <= (include_extremes ? count : count - 1); ++i) {
        out.push_back(static_cast<double>(i) / count);
    }
    return out;
}

ArgmaxResult argmax_similarity(const SimilarityStore& store, const EventRef& event, const ReferenceSet& refset,
                               std::vector<double> grid, const ImprecisionConfig& config) {
    if (grid.empty()) throw InvalidArgument("argmax needs a non-empty grid");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (double lambda : grid) {
        if (!refset.admits(lambda, true)) {
            throw OutOfRange("resolution " + format_number(lambda) + " is not on the " + refset.name() + " grid");
        }
    }

    auto term_at = [&](double lambda) {
        return SimilarityTerm(event, EventRef::reference(refset, lambda), config.method);
    };
    std::vector<SimilarityTerm> terms;
    terms.reserve(grid.size());
    for (double lambda : grid) terms.push_back(term_at(lambda));

    ArgmaxResult result;
    bool any_relation = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            if (i == j) continue;
            const auto order = store.compare(terms[j], terms[i]);
            if (order != Order::Incomparable) any_relation = true;
            if (order == Order::Greater) {
                dominated = true;
                break;
            }
        }
        if (!dominated) result.maximizers.push_back(grid[i]);
    }
    if (!any_relation) {
        result.unjudged = true;
        result.notes.push_back("no judgments relate the grid terms; every resolution is returned");
    }
    result.imprecise = result.maximizers.size() > 1;

    const double step = grid.size() > 1 ? grid[1] - grid[0] : 0.0;
    const double below = config.offset_below > 0.0 ? config.offset_below : step;
    const double above = config.offset_above > 0.0 ? config.offset_above : step;
    for (double lambda : result.maximizers) {
        const auto here = term_at(lambda);
        const auto self = SimilarityTerm(EventRef::reference(refset, lambda), EventRef::reference(refset, lambda),
                                         config.method);
        if (store.compare(here, self) == Order::Less) {
            result.weak_analogy = true;
            result.notes.push_back("S(E,R(" + format_number(lambda) + ")) is below the self-similarity of R(" +
                                   format_number(lambda) + ")");
        }
        for (double neighbour : {lambda - below, lambda + above}) {
            if (!refset.admits(neighbour, true)) continue;
            const auto shifted = SimilarityTerm(EventRef::reference(refset, neighbour),
                                                EventRef::reference(refset, lambda), config.method);
            if (store.compare(here, shifted) == Order::Less) {
                result.weak_analogy = true;
                result.notes.push_back("S(E,R(" + format_number(lambda) + ")) is below S(R(" +
                                       format_number(neighbour) + "),R(" + format_number(lambda) + "))");
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const EventRef& e) {
    if (const auto* r = e.as_reference()) {
        j = {{"refset", r->refset}, {"lambda", r->lambda}};
    } else if (const auto* v = e.as_variable()) {
        if (v->discrete) {
            j = {{"var", v->variable}, {"b", v->weights}};
        } else {
            auto arr = nlohmann::json::array();
            for (const auto& p : v->intervals) arr.push_back({number_to_json(p.lo), number_to_json(p.hi)});
            j = {{"var", v->variable}, {"intervals", std::move(arr)}};
        }
    } else {
        j = {{"name", e.as_named()->name}};
    }
}

void from_json(const nlohmann::json& j, EventRef& e) {
    if (j.contains("refset")) {
        e = EventRef::reference(j.at("refset").get<ReferenceSet>(), j.at("lambda").get<double>());
    } else if (j.contains("var")) {
        VariableEvent v;
        v.variable = j.at("var").get<std::string>();
        if (j.contains("b")) {
            v.discrete = true;
            v.weights = j.at("b").get<std::vector<double>>();
        } else {
            for (const auto& p : j.at("intervals")) {
                if (!p.is_array() || p.size() != 2) throw InvalidArgument("interval must be a [lo, hi] pair");
                v.intervals.push_back({number_from_json(p[0]), number_from_json(p[1])});
            }
        }
        e = EventRef(std::move(v));
    } else if (j.contains("name")) {
        e = EventRef::named(j.at("name").get<std::string>());
    } else {
        throw InvalidArgument("event reference needs one of refset/var/name");
    }
}

void to_json(nlohmann::json& j, const SimilarityTerm& t) { j = {{"a", t.a}, {"b", t.b}, {"method", t.method}}; }

void from_json(const nlohmann::json& j, SimilarityTerm& t) {
    t.a = j.at("a").get<EventRef>();
    t.b = j.at("b").get<EventRef>();
    t.method = j.value("method", std::string("direct"));
}

void to_json(nlohmann::json& j, const Judgment& jd) {
    j = {{"lhs", jd.lhs}, {"rhs", jd.rhs}, {"rel", to_string(jd.relation)}, {"source", jd.source}};
    if (!jd.timestamp.empty()) j["timestamp"] = jd.timestamp;
    if (jd.extended) j["extended"] = true;
}

void from_json(const nlohmann::json& j, Judgment& jd) {
    jd.lhs = j.at("lhs").get<SimilarityTerm>();
    jd.rhs = j.at("rhs").get<SimilarityTerm>();
    jd.relation = relation_from_string(j.at("rel").get<std::string>());
    jd.source = j.value("source", std::string("human"));
    jd.timestamp = j.value("timestamp", std::string());
    jd.extended = j.value("extended", false);
}

nlohmann::json export_store(const SimilarityStore& store) { return store.judgments(); }

SimilarityStore import_store(const nlohmann::json& judgments) {
    SimilarityStore store;
    for (const auto& item : judgments) {
        auto j = item.get<Judgment>();
        store.register_method(j.lhs.method);
        store.register_method(j.rhs.method);
        store.record(j);
    }
    return store;
}

}  // namespace strengthlab
