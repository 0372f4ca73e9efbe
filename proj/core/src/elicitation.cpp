#include <strengthlab/elicitation.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include <strengthlab/errors.hpp>

namespace strengthlab {

namespace {

std::string pair_key(const std::string& a, const std::string& b) { return a + "\n" + b; }

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ProposalOutcome outcome_from_string(const std::string& s) {
    for (auto o : {ProposalOutcome::Accepted, ProposalOutcome::Rejected, ProposalOutcome::NeedsAnswers,
                   ProposalOutcome::JoinedFrontier}) {
        if (to_string(o) == s) return o;
    }
    throw InvalidArgument("unknown proposal outcome '" + s + "'");
}

std::vector<std::string> term_keys(const std::vector<SimilarityTerm>& terms) {
    std::vector<std::string> keys;
    for (const auto& t : terms) keys.push_back(t.key());
    std::sort(keys.begin(), keys.end());
    return keys;
}

nlohmann::json records_json(const std::vector<CandidateRecord>& records) {
    auto arr = nlohmann::json::array();
    for (const auto& r : records) arr.push_back({{"id", r.id}, {"dist", r.dist}});
    return arr;
}

std::vector<CandidateRecord> records_from(const nlohmann::json& arr) {
    std::vector<CandidateRecord> out;
    for (const auto& r : arr) out.push_back({r.at("id").get<std::string>(), r.at("dist").get<Distribution>()});
    return out;
}

}  // namespace

std::string to_string(SessionStatus s) {
    switch (s) {
        case SessionStatus::AwaitingAnswers: return "awaiting-answers";
        case SessionStatus::AwaitingCandidate: return "awaiting-candidate";
        case SessionStatus::Converged: return "converged";
    }
    return "awaiting-answers";
}

std::string to_string(ProposalOutcome o) {
    switch (o) {
        case ProposalOutcome::Accepted: return "accepted";
        case ProposalOutcome::Rejected: return "rejected";
        case ProposalOutcome::NeedsAnswers: return "needs-answers";
        case ProposalOutcome::JoinedFrontier: return "joined-frontier";
    }
    return "needs-answers";
}

std::string question_id(const SimilarityTerm& lhs, const SimilarityTerm& rhs) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "q%016llx",
                  static_cast<unsigned long long>(fnv1a(pair_key(lhs.key(), rhs.key()))));
    return buf;
}

ElicitationSession ElicitationSession::start(std::string id, SessionConfig config, Distribution initial) {
    if (initial.is_improper()) throw InvalidArgument("an elicitation needs a proper initial proposal");
    if (config.variable.empty()) config.variable = initial.variable();
    if (initial.variable() != config.variable) {
        throw InvalidArgument("initial proposal describes " + initial.variable() + ", not " + config.variable);
    }
    if (!(config.lambda > 0.0 && config.lambda < 1.0) || !config.refset.admits(config.lambda)) {
        throw OutOfRange("session resolution " + format_number(config.lambda) + " is not on the " +
                         config.refset.name() + " grid");
    }
    ElicitationSession s;
    s.id_ = std::move(id);
    s.config_ = std::move(config);
    s.store_.register_method(s.config_.method);
    s.initial_ = initial;
    s.current_ = initial;
    s.frontier_.push_back({"c0", std::move(initial)});
    s.advance();
    return s;
}

std::vector<SimilarityTerm> ElicitationSession::terms_of(const Distribution& d) const {
    std::vector<SimilarityTerm> out;
    for (const auto& p : build_probes(d, config_.lambda, config_.probes).probes) {
        out.push_back(probe_term(p, config_.refset, config_.lambda, config_.method));
    }
    return out;
}

std::vector<std::string> ElicitationSession::shapes_of(const Distribution& d) const {
    std::vector<std::string> out;
    for (const auto& p : build_probes(d, config_.lambda, config_.probes).probes) out.push_back(p.shape);
    return out;
}

void ElicitationSession::index_direct(const Judgment& j) {
    direct_[pair_key(j.lhs.key(), j.rhs.key())] = j.relation;
    direct_[pair_key(j.rhs.key(), j.lhs.key())] = flip(j.relation);
}

SessionStatus ElicitationSession::status() const {
    if (!pending_.empty() || !queue_.empty()) return SessionStatus::AwaitingAnswers;
    return evaluated_since_accept_ > 0 ? SessionStatus::Converged : SessionStatus::AwaitingCandidate;
}

double ElicitationSession::coverage() const {
    return needed_ == 0 ? 1.0 : static_cast<double>(settled_) / static_cast<double>(needed_);
}

std::vector<Question> ElicitationSession::next_questions(std::size_t batch) const {
    if (batch == 0 || batch >= pending_.size()) return pending_;
    return {pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(batch)};
}

void ElicitationSession::validate_candidate(const Distribution& d) const {
    if (d.variable() != config_.variable) {
        throw InvalidArgument("candidate describes " + d.variable() + ", not " + config_.variable);
    }
    if (d.is_improper()) throw InvalidArgument("candidate must be a proper distribution");
    if (d.is_discrete() != current_.is_discrete()) {
        throw KindMismatch("candidate and proposal must both be pmfs or both be continuous");
    }
    if (d.is_discrete() && d.as_pmf().values != current_.as_pmf().values) {
        throw InvalidArgument("candidate pmf must share the proposal's support points");
    }
}

ProposalResult ElicitationSession::propose_candidate(Distribution candidate) {
    validate_candidate(candidate);
    ProposalResult result;
    result.candidate_id = "c" + std::to_string(next_candidate_++);
    queue_.push_back({result.candidate_id, std::move(candidate)});
    advance();
    result.outcome = outcome_of(result.candidate_id).value_or(ProposalOutcome::NeedsAnswers);
    return result;
}

std::optional<ProposalOutcome> ElicitationSession::outcome_of(const std::string& candidate_id) const {
    for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
        if (it->candidate_id == candidate_id) return it->outcome;
    }
    return std::nullopt;
}

void ElicitationSession::submit_answers(const std::vector<Answer>& answers) {
    std::unordered_map<std::string, const Question*> open;
    for (const auto& q : pending_) open[q.id] = &q;
    std::vector<Judgment> batch;
    for (const auto& a : answers) {
        auto it = open.find(a.question_id);
        if (it == open.end()) throw UnknownQuestion("question " + a.question_id + " is not open in this session");
        Judgment j;
        j.lhs = it->second->lhs;
        j.rhs = it->second->rhs;
        j.relation = a.relation;
        j.source = a.source;
        batch.push_back(std::move(j));
    }
    store_.record_all(batch);
    for (const auto& j : batch) index_direct(j);
    advance();
}

void ElicitationSession::advance() {
    for (;;) {
        pending_.clear();
        needed_ = settled_ = 0;
        if (!floor_ && !locate_floor()) return;
        if (queue_.empty()) return;
        if (!settle_front()) return;
    }
}

// Knockout tournament for the lowest probe term of the current proposal. Each
// round needs all its pairings ordered before the next round can be drawn.
bool ElicitationSession::locate_floor() {
    const auto terms = terms_of(current_);
    const auto shapes = shapes_of(current_);
    std::vector<std::size_t> alive(terms.size());
    for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;
    while (alive.size() > 1) {
        std::vector<std::size_t> next;
        bool blocked = false;
        for (std::size_t k = 0; k + 1 < alive.size(); k += 2) {
            const auto a = alive[k];
            const auto b = alive[k + 1];
            ++needed_;
            Order o;
            if (auto it = direct_.find(pair_key(terms[a].key(), terms[b].key())); it != direct_.end()) {
                o = it->second == Relation::Greater ? Order::Greater
                    : it->second == Relation::Less  ? Order::Less
                                                    : Order::Equal;
            } else {
                o = store_.compare(terms[a], terms[b]);
            }
            if (o == Order::Incomparable) {
                blocked = true;
                pending_.push_back(
                    {question_id(terms[a], terms[b]), terms[a], terms[b], shapes[a], shapes[b], "floor"});
                next.push_back(a);
                continue;
            }
            ++settled_;
            next.push_back(o == Order::Greater ? b : a);
        }
        if (alive.size() % 2 == 1) next.push_back(alive.back());
        if (blocked) return false;
        alive = std::move(next);
    }
    if (alive.empty()) throw InconsistentStore("proposal has no probes at the session resolution");
    floor_ = terms[alive.front()];
    pending_.clear();
    needed_ = settled_ = 0;
    return true;
}

// Compares every candidate probe with the proposal's floor term. Any probe below
// the floor settles the candidate as weaker at once.
bool ElicitationSession::settle_front() {
    const auto candidate = queue_.front();
    const auto terms = terms_of(candidate.dist);
    const auto shapes = shapes_of(candidate.dist);

    HistoryEntry entry;
    entry.candidate_id = candidate.id;
    entry.from = current_;
    entry.to = candidate.dist;

    const auto current_keys = term_keys(terms_of(current_));
    bool duplicate = term_keys(terms) == current_keys;
    for (const auto& m : frontier_) duplicate = duplicate || term_keys(terms_of(m.dist)) == term_keys(terms);

    bool below = false;
    bool all_above = true;
    if (!duplicate) {
        OrderIndex index(store_);
        const auto floor_id = store_.id_of(*floor_);
        std::vector<Question> open;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            ++needed_;
            const auto o = index.order(terms[i], store_.id_of(terms[i]), *floor_, floor_id);
            if (o == Order::Incomparable) {
                all_above = false;
                open.push_back({question_id(terms[i], *floor_), terms[i], *floor_, shapes[i], "floor-probe", "candidate"});
                continue;
            }
            ++settled_;
            if (o == Order::Less) below = true;
            if (o != Order::Greater) all_above = false;
        }
        if (!below && !open.empty()) {
            pending_ = std::move(open);
            return false;
        }
    }

    entry.coverage = coverage();
    if (duplicate) {
        entry.outcome = ProposalOutcome::Rejected;
        entry.verdict = Verdict::Indeterminate;
    } else if (below) {
        entry.outcome = ProposalOutcome::Rejected;
        entry.verdict = Verdict::Weaker;
    } else if (all_above) {
        entry.outcome = ProposalOutcome::Accepted;
        entry.verdict = Verdict::Stronger;
    } else {
        entry.outcome = ProposalOutcome::JoinedFrontier;
        entry.verdict = Verdict::Indeterminate;
    }
    history_.push_back(entry);
    queue_.erase(queue_.begin());

    switch (entry.outcome) {
        case ProposalOutcome::Accepted: {
            std::vector<CandidateRecord> kept{candidate};
            for (const auto& m : frontier_) {
                if (!dominates(terms, m.dist)) kept.push_back(m);
            }
            frontier_ = std::move(kept);
            current_ = candidate.dist;
            floor_.reset();
            evaluated_since_accept_ = 0;
            break;
        }
        case ProposalOutcome::JoinedFrontier:
            frontier_.push_back(candidate);
            ++evaluated_since_accept_;
            break;
        default: ++evaluated_since_accept_; break;
    }
    pending_.clear();
    needed_ = settled_ = 0;
    return true;
}

// True when some probe of `member` lies strictly below every term in `winner`.
bool ElicitationSession::dominates(const std::vector<SimilarityTerm>& winner, const Distribution& member) const {
    OrderIndex index(store_);
    auto member_terms = terms_of(member);
    const auto floor_id = floor_ ? store_.id_of(*floor_) : std::nullopt;
    std::stable_partition(member_terms.begin(), member_terms.end(), [&](const SimilarityTerm& t) {
        const auto id = store_.id_of(t);
        return id && floor_id && store_.same_class(*id, *floor_id);
    });
    for (const auto& m : member_terms) {
        const auto mid = store_.id_of(m);
        if (!mid) continue;
        const bool under_all = std::all_of(winner.begin(), winner.end(), [&](const SimilarityTerm& w) {
            return index.order(w, store_.id_of(w), m, mid) == Order::Greater;
        });
        if (under_all) return true;
    }
    return false;
}

FrontierReport ElicitationSession::frontier_report() const {
    FrontierReport r;
    r.members = frontier_;
    r.status = status();
    r.sensitivity_recommended = frontier_.size() > 1;
    std::vector<ProbeFamily> families;
    for (const auto& m : frontier_) families.push_back(build_probes(m.dist, config_.lambda, config_.probes));
    OrderIndex index(store_);
    r.matrix.assign(frontier_.size(), std::vector<Verdict>(frontier_.size(), Verdict::Indeterminate));
    for (std::size_t i = 0; i < families.size(); ++i) {
        for (std::size_t j = i + 1; j < families.size(); ++j) {
            const auto v =
                internal_strength(families[i], families[j], store_, config_.refset, config_.method, &index).relation;
            r.matrix[i][j] = v;
            r.matrix[j][i] = mirror(v);
        }
    }
    return r;
}

nlohmann::json ElicitationSession::to_json() const {
    auto history = nlohmann::json::array();
    for (const auto& h : history_) {
        history.push_back({{"candidate", h.candidate_id},
                           {"outcome", to_string(h.outcome)},
                           {"verdict", to_string(h.verdict)},
                           {"coverage", h.coverage},
                           {"from", h.from},
                           {"to", h.to}});
    }
    return {{"id", id_},
            {"config", config_},
            {"initial", initial_},
            {"current", current_},
            {"queue", records_json(queue_)},
            {"frontier", records_json(frontier_)},
            {"history", std::move(history)},
            {"judgments", export_store(store_)},
            {"next_candidate", next_candidate_},
            {"evaluated_since_accept", evaluated_since_accept_}};
}

ElicitationSession ElicitationSession::from_json(const nlohmann::json& doc) {
    ElicitationSession s;
    s.id_ = doc.at("id").get<std::string>();
    s.config_ = doc.at("config").get<SessionConfig>();
    s.initial_ = doc.at("initial").get<Distribution>();
    s.current_ = doc.at("current").get<Distribution>();
    s.queue_ = records_from(doc.at("queue"));
    s.frontier_ = records_from(doc.at("frontier"));
    for (const auto& h : doc.at("history")) {
        HistoryEntry e;
        e.candidate_id = h.at("candidate").get<std::string>();
        e.outcome = outcome_from_string(h.at("outcome").get<std::string>());
        e.verdict = verdict_from_string(h.at("verdict").get<std::string>());
        e.coverage = h.at("coverage").get<double>();
        e.from = h.at("from").get<Distribution>();
        e.to = h.at("to").get<Distribution>();
        s.history_.push_back(std::move(e));
    }
    s.store_ = import_store(doc.at("judgments"));
    s.store_.register_method(s.config_.method);
    for (const auto& j : s.store_.judgments()) s.index_direct(j);
    s.next_candidate_ = doc.at("next_candidate").get<std::uint64_t>();
    s.evaluated_since_accept_ = doc.at("evaluated_since_accept").get<int>();
    s.advance();
    return s;
}

// ---------------------------------------------------------------------------

std::vector<Distribution> simplex_neighbours(const Distribution& pmf, double step) {
    const auto& p = pmf.as_pmf();
    const auto units = static_cast<std::int64_t>(std::llround(1.0 / step));
    if (units <= 0 || std::abs(units * step - 1.0) > 1e-9) throw InvalidArgument("step must divide 1");
    std::vector<std::int64_t> h;
    std::int64_t total = 0;
    for (double m : p.masses) {
        const auto q = static_cast<std::int64_t>(std::llround(m * units));
        if (std::abs(q - m * units) > 1e-6) throw InvalidArgument("pmf masses are not on the step grid");
        h.push_back(q);
        total += q;
    }
    if (total != units) throw InvalidArgument("pmf masses are not on the step grid");

    const std::size_t m = h.size();
    std::vector<Distribution> out;
    std::set<std::vector<std::int64_t>> seen{h};
    auto emit = [&](const std::vector<std::int64_t>& next) {
        if (!seen.insert(next).second) return;
        std::vector<Rational> masses;
        for (auto q : next) masses.emplace_back(q, units);
        out.push_back(Distribution::pmf_exact(pmf.variable(), p.values, std::move(masses), pmf.mode()));
    };
    // One step from outcome i to outcome j, then one step from each outcome of a
    // group into a single outcome (or back out of it). Group moves let the climb
    // leave plateaus where every pairwise move keeps some probe's worst term.
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j || h[i] == 0) continue;
            auto next = h;
            --next[i];
            ++next[j];
            emit(next);
        }
    }
    if (m > 30) return out;
    for (std::size_t j = 0; j < m; ++j) {
        for (std::uint64_t group = 1; group < (std::uint64_t{1} << m); ++group) {
            if ((group >> j) & 1U || std::popcount(group) < 2) continue;
            auto into = h;
            auto from = h;
            bool into_ok = true;
            for (std::size_t i = 0; i < m; ++i) {
                if (!((group >> i) & 1U)) continue;
                into_ok = into_ok && h[i] > 0;
                --into[i];
                ++into[j];
                ++from[i];
                --from[j];
            }
            if (into_ok) emit(into);
            if (from[j] >= 0) emit(from);
        }
    }
    return out;
}

Distribution snap_to_grid(const Distribution& pmf, double step) {
    const auto& p = pmf.as_pmf();
    const auto units = static_cast<std::int64_t>(std::llround(1.0 / step));
    if (units <= 0 || std::abs(units * step - 1.0) > 1e-9) throw InvalidArgument("step must divide 1");
    std::vector<std::int64_t> h;
    std::vector<std::pair<double, std::size_t>> rest;
    std::int64_t total = 0;
    for (std::size_t i = 0; i < p.masses.size(); ++i) {
        const double scaled = p.masses[i] * units;
        h.push_back(static_cast<std::int64_t>(std::floor(scaled + 1e-9)));
        total += h.back();
        rest.emplace_back(scaled - h.back(), i);
    }
    std::stable_sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; total < units; ++k, ++total) ++h[rest[k % rest.size()].second];
    std::vector<Rational> masses;
    for (auto q : h) masses.emplace_back(q, units);
    return Distribution::pmf_exact(pmf.variable(), p.values, std::move(masses), pmf.mode());
}

std::vector<Distribution> normal_neighbours(const Distribution& normal, double step) {
    const auto* n = std::get_if<NormalForm>(&normal.form());
    if (!n) throw KindMismatch("normal neighbours need a normal proposal");
    const double sd = std::sqrt(n->variance);
    std::vector<Distribution> out;
    for (double dm : {step * sd, -step * sd}) {
        out.push_back(Distribution::normal(normal.variable(), n->mean + dm, n->variance, normal.mode()));
    }
    for (double f : {1.0 + step, 1.0 - step}) {
        out.push_back(Distribution::normal(normal.variable(), n->mean, sd * f * sd * f, normal.mode()));
    }
    return out;
}

double total_variation(const Distribution& a, const Distribution& b) {
    const auto& pa = a.as_pmf();
    const auto& pb = b.as_pmf();
    if (pa.values != pb.values) throw InvalidArgument("total variation needs a shared support");
    double d = 0.0;
    for (std::size_t i = 0; i < pa.masses.size(); ++i) d += std::abs(pa.masses[i] - pb.masses[i]);
    return d / 2.0;
}

AgentRunReport run_agent_session(ElicitationSession& session, const SyntheticAgent& agent,
                                 const AgentRunConfig& config) {
    AgentRunReport report;
    auto answer_all = [&] {
        while (session.status() == SessionStatus::AwaitingAnswers) {
            const auto qs = session.next_questions(config.batch);
            if (qs.empty()) break;
            std::vector<Answer> answers;
            for (const auto& q : qs) answers.push_back({q.id, agent.answer(q.lhs, q.rhs), "synthetic-agent"});
            session.submit_answers(answers);
            report.questions += qs.size();
        }
    };
    auto key = [](const Distribution& d) { return nlohmann::json(d).dump(); };

    answer_all();
    std::unordered_set<std::string> visited{key(session.current())};
    while (report.accepted < config.max_accepts) {
        const auto& g = session.current();
        const auto neighbours = g.is_discrete() ? simplex_neighbours(g, config.step) : normal_neighbours(g, config.step);
        bool moved = false;
        for (const auto& cand : neighbours) {
            if (visited.count(key(cand))) continue;
            const auto proposal = session.propose_candidate(cand);
            ++report.proposed;
            answer_all();
            if (session.outcome_of(proposal.candidate_id) == ProposalOutcome::Accepted) {
                ++report.accepted;
                visited.insert(key(cand));
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    report.final = session.current();
    report.converged = session.status() == SessionStatus::Converged;
    report.frontier_size = session.frontier().size();
    return report;
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const Question& q) {
    const auto* ref = q.lhs.b.as_reference();
    j = {{"id", q.id},
         {"lhs", q.lhs},
         {"rhs", q.rhs},
         {"purpose", q.purpose},
         {"hints",
          {{"lhs_shape", q.lhs_shape},
           {"rhs_shape", q.rhs_shape},
           {"refset", ref ? nlohmann::json(ref->refset) : nlohmann::json()},
           {"lambda", ref ? nlohmann::json(ref->lambda) : nlohmann::json()}}}};
}

void to_json(nlohmann::json& j, const FrontierReport& r) {
    auto matrix = nlohmann::json::array();
    for (const auto& row : r.matrix) {
        auto out = nlohmann::json::array();
        for (auto v : row) out.push_back(to_string(v));
        matrix.push_back(std::move(out));
    }
    j = {{"members", records_json(r.members)},
         {"matrix", std::move(matrix)},
         {"sensitivity_recommended", r.sensitivity_recommended},
         {"status", to_string(r.status)}};
}

void to_json(nlohmann::json& j, const ProposalResult& r) {
    j = {{"candidate", r.candidate_id}, {"outcome", to_string(r.outcome)}};
}

void to_json(nlohmann::json& j, const AgentRunReport& r) {
    j = {{"final", r.final},
         {"accepted", r.accepted},
         {"proposed", r.proposed},
         {"questions", r.questions},
         {"converged", r.converged},
         {"frontier_size", r.frontier_size}};
}

void to_json(nlohmann::json& j, const SessionConfig& c) {
    j = {{"variable", c.variable},
         {"lambda", c.lambda},
         {"refset", c.refset},
         {"method", c.method},
         {"probes", c.probes}};
}

void from_json(const nlohmann::json& j, SessionConfig& c) {
    c.variable = j.value("variable", std::string());
    c.lambda = j.value("lambda", 0.5);
    c.refset = j.contains("refset") ? j.at("refset").get<ReferenceSet>() : ReferenceSet::continuous();
    c.method = j.value("method", std::string("direct"));
    c.probes = j.contains("probes") ? j.at("probes").get<ProbeConfig>() : ProbeConfig{};
}

void from_json(const nlohmann::json& j, Answer& a) {
    a.question_id = j.at("question").get<std::string>();
    a.relation = relation_from_string(j.at("rel").get<std::string>());
    a.source = j.value("source", std::string("human"));
}

}  // namespace strengthlab
