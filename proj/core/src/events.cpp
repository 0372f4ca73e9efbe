#include <strengthlab/events.hpp>

#include <algorithm>
#include <cmath>
#include <thread>

#include <nlohmann/json.hpp>

#include <strengthlab/errors.hpp>
#include <strengthlab/rng.hpp>

namespace strengthlab {

namespace {

constexpr double kEndpointTol = 1e-12;

void require_same_experiment(const Event& a, const Event& b) {
    if (a.kind() != b.kind()) throw KindMismatch("events belong to different experiment kinds");
    if (a.is_discrete() && a.k() != b.k())
        throw KindMismatch("urn events over k=" + std::to_string(a.k()) + " and k=" + std::to_string(b.k()));
}

// Sort, clip to [0,1], drop empty pieces and merge pieces that touch within tolerance.
std::vector<Interval> normalize(std::vector<Interval> pieces) {
    for (const auto& p : pieces) {
        if (!std::isfinite(p.lo) || !std::isfinite(p.hi))
            throw InvalidArgument("wheel interval endpoints must be finite");
        if (p.lo < -kEndpointTol || p.hi > 1.0 + kEndpointTol)
            throw OutOfRange("wheel interval [" + std::to_string(p.lo) + "," + std::to_string(p.hi) +
                             ") leaves [0,1]");
        if (p.hi < p.lo - kEndpointTol) throw InvalidArgument("wheel interval has hi < lo");
    }
    std::sort(pieces.begin(), pieces.end(), [](const Interval& x, const Interval& y) {
        return x.lo < y.lo || (x.lo == y.lo && x.hi < y.hi);
    });
    std::vector<Interval> out;
    for (auto p : pieces) {
        p.lo = std::clamp(p.lo, 0.0, 1.0);
        p.hi = std::clamp(p.hi, 0.0, 1.0);
        if (p.hi - p.lo <= kEndpointTol) continue;
        if (!out.empty() && p.lo <= out.back().hi + kEndpointTol) {
            out.back().hi = std::max(out.back().hi, p.hi);
        } else {
            out.push_back(p);
        }
    }
    return out;
}

}  // namespace

DiscreteExperiment::DiscreteExperiment(int k_) : k(k_) {
    if (k < 1) throw InvalidArgument("urn needs k >= 1, got " + std::to_string(k_));
}

Event Event::discrete(int k, std::vector<int> outcomes) {
    if (k < 1) throw InvalidArgument("urn needs k >= 1");
    std::sort(outcomes.begin(), outcomes.end());
    if (std::adjacent_find(outcomes.begin(), outcomes.end()) != outcomes.end())
        throw InvalidArgument("duplicate outcome index in urn event");
    for (int o : outcomes)
        if (o < 1 || o > k)
            throw OutOfRange("outcome index " + std::to_string(o) + " outside 1.." + std::to_string(k));
    Event e;
    e.continuous_ = false;
    e.k_ = k;
    e.outcomes_ = std::move(outcomes);
    return e;
}

Event Event::continuous(std::vector<Interval> intervals) {
    Event e;
    e.continuous_ = true;
    e.intervals_ = normalize(std::move(intervals));
    return e;
}

Event Event::empty_like(const Event& other) {
    return other.is_discrete() ? discrete(other.k(), {}) : continuous({});
}

Event Event::full(const Experiment& experiment) {
    if (const auto* urn = std::get_if<DiscreteExperiment>(&experiment)) {
        std::vector<int> all(static_cast<std::size_t>(urn->k));
        for (int i = 0; i < urn->k; ++i) all[static_cast<std::size_t>(i)] = i + 1;
        return discrete(urn->k, std::move(all));
    }
    return continuous({{0.0, 1.0}});
}

bool Event::subset_of(const Event& other) const {
    require_same_experiment(*this, other);
    return event_intersect(*this, other) == *this;
}

Rational exact_probability(const Event& event) {
    if (!event.is_discrete()) throw KindMismatch("exact probability is only defined for urn events");
    return Rational(static_cast<std::int64_t>(event.outcomes().size()), event.k());
}

double physical_probability(const Event& event) {
    if (event.is_discrete()) return boost::rational_cast<double>(exact_probability(event));
    double total = 0.0;
    for (const auto& p : event.intervals()) total += p.length();
    return total;
}

double physical_probability(const Experiment& experiment, const Event& event) {
    if (const auto* urn = std::get_if<DiscreteExperiment>(&experiment)) {
        if (!event.is_discrete()) throw KindMismatch("wheel event evaluated on an urn");
        if (event.k() != urn->k) throw KindMismatch("urn event built for a different k");
    } else if (event.is_discrete()) {
        throw KindMismatch("urn event evaluated on the wheel");
    }
    return physical_probability(event);
}

Event event_union(const Event& a, const Event& b) {
    require_same_experiment(a, b);
    if (a.is_discrete()) {
        std::vector<int> out;
        std::set_union(a.outcomes().begin(), a.outcomes().end(), b.outcomes().begin(), b.outcomes().end(),
                       std::back_inserter(out));
        return Event::discrete(a.k(), std::move(out));
    }
    auto pieces = a.intervals();
    pieces.insert(pieces.end(), b.intervals().begin(), b.intervals().end());
    return Event::continuous(std::move(pieces));
}

Event event_intersect(const Event& a, const Event& b) {
    require_same_experiment(a, b);
    if (a.is_discrete()) {
        std::vector<int> out;
        std::set_intersection(a.outcomes().begin(), a.outcomes().end(), b.outcomes().begin(),
                              b.outcomes().end(), std::back_inserter(out));
        return Event::discrete(a.k(), std::move(out));
    }
    std::vector<Interval> out;
    std::size_t i = 0, j = 0;
    const auto& x = a.intervals();
    const auto& y = b.intervals();
    while (i < x.size() && j < y.size()) {
        const double lo = std::max(x[i].lo, y[j].lo);
        const double hi = std::min(x[i].hi, y[j].hi);
        if (lo < hi) out.push_back({lo, hi});
        if (x[i].hi < y[j].hi) ++i; else ++j;
    }
    return Event::continuous(std::move(out));
}

Event event_complement(const Event& a) {
    if (a.is_discrete()) {
        std::vector<int> out;
        std::size_t cursor = 0;
        for (int o = 1; o <= a.k(); ++o) {
            if (cursor < a.outcomes().size() && a.outcomes()[cursor] == o) { ++cursor; continue; }
            out.push_back(o);
        }
        return Event::discrete(a.k(), std::move(out));
    }
    std::vector<Interval> out;
    double start = 0.0;
    for (const auto& p : a.intervals()) {
        if (p.lo > start) out.push_back({start, p.lo});
        start = p.hi;
    }
    if (start < 1.0) out.push_back({start, 1.0});
    return Event::continuous(std::move(out));
}

Event event_algebra(SetOp op, const Event& a, const std::optional<Event>& b) {
    switch (op) {
        case SetOp::Complement:
            return event_complement(a);
        case SetOp::Union:
        case SetOp::Intersect:
            if (!b) throw InvalidArgument("binary set operation needs two events");
            return op == SetOp::Union ? event_union(a, *b) : event_intersect(a, *b);
    }
    throw InvalidArgument("unknown set operation");
}

ReferenceSet ReferenceSet::discrete(int k) {
    if (k < 2) throw InvalidArgument("a discrete reference set needs k >= 2");
    ReferenceSet r;
    r.k_ = k;
    return r;
}

ReferenceSet ReferenceSet::continuous() { return ReferenceSet{}; }

bool ReferenceSet::admits(double lambda, bool extended) const {
    if (!std::isfinite(lambda)) return false;
    if (extended && (lambda == 0.0 || lambda == 1.0)) return true;
    if (!is_discrete()) return lambda > 0.0 && lambda < 1.0;
    const double scaled = lambda * k_;
    const double nearest = std::round(scaled);
    return std::abs(scaled - nearest) <= 1e-9 && nearest >= 1.0 && nearest <= k_ - 1;
}

Event ReferenceSet::event(double lambda, bool extended) const {
    if (!admits(lambda, extended)) {
        throw OutOfRange("resolution " + std::to_string(lambda) + " is not on the " + name() + " grid");
    }
    if (is_discrete()) {
        const int count = static_cast<int>(std::lround(lambda * k_));
        std::vector<int> outcomes(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) outcomes[static_cast<std::size_t>(i)] = i + 1;
        return Event::discrete(k_, std::move(outcomes));
    }
    return Event::continuous({{0.0, lambda}});
}

std::vector<double> ReferenceSet::grid() const {
    std::vector<double> out;
    for (int i = 1; i < k_; ++i) out.push_back(static_cast<double>(i) / k_);
    return out;
}

std::string ReferenceSet::name() const { return is_discrete() ? "urn" + std::to_string(k_) : "wheel"; }

std::string experiment_name(const Experiment& experiment) {
    if (const auto* urn = std::get_if<DiscreteExperiment>(&experiment)) return "urn" + std::to_string(urn->k);
    return "wheel";
}

Experiment experiment_of(const Event& event) {
    if (event.is_discrete()) return DiscreteExperiment(event.k());
    return Wheel{};
}

TrialRecord run_trials(const Experiment& experiment, const Event& event, std::uint64_t n_trials,
                       std::uint64_t seed, unsigned workers) {
    if (n_trials == 0) throw InvalidArgument("n_trials must be >= 1");
    physical_probability(experiment, event);  // validates the pairing

    std::vector<char> hit_table;
    if (event.is_discrete()) {
        hit_table.assign(static_cast<std::size_t>(event.k()), 0);
        for (int o : event.outcomes()) hit_table[static_cast<std::size_t>(o - 1)] = 1;
    }
    const CounterRng rng(seed);

    auto count_range = [&](std::uint64_t begin, std::uint64_t end) {
        std::uint64_t hits = 0;
        if (event.is_discrete()) {
            const auto k = static_cast<std::uint64_t>(event.k());
            for (std::uint64_t i = begin; i < end; ++i) {
                const auto idx = CounterRng::scale(rng.at(i), k);
                hits += static_cast<std::uint64_t>(hit_table[idx]);
            }
        } else {
            const auto& pieces = event.intervals();
            for (std::uint64_t i = begin; i < end; ++i) {
                const double v = rng.uniform_at(i);
                auto it = std::upper_bound(pieces.begin(), pieces.end(), v,
                                           [](double x, const Interval& p) { return x < p.hi; });
                if (it != pieces.end() && v >= it->lo) ++hits;
            }
        }
        return hits;
    };

    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, (n_trials + 65535) / 65536));
    workers = std::max(1u, workers);

    std::vector<std::uint64_t> partial(workers, 0);
    if (workers == 1) {
        partial[0] = count_range(0, n_trials);
    } else {
        std::vector<std::thread> threads;
        const std::uint64_t chunk = (n_trials + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::uint64_t begin = std::min(n_trials, chunk * w);
            const std::uint64_t end = std::min(n_trials, begin + chunk);
            threads.emplace_back([&, w, begin, end] { partial[w] = count_range(begin, end); });
        }
        for (auto& t : threads) t.join();
    }

    TrialRecord rec;
    rec.experiment = experiment_name(experiment);
    rec.n = n_trials;
    rec.seed = seed;
    for (auto p : partial) rec.count += p;
    return rec;
}

void to_json(nlohmann::json& j, const Event& e) {
    if (e.is_discrete()) {
        j = {{"kind", "discrete"}, {"k", e.k()}, {"outcomes", e.outcomes()}};
        return;
    }
    auto arr = nlohmann::json::array();
    for (const auto& p : e.intervals()) arr.push_back({p.lo, p.hi});
    j = {{"kind", "continuous"}, {"intervals", std::move(arr)}};
}

void from_json(const nlohmann::json& j, Event& e) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "discrete") {
        e = Event::discrete(j.at("k").get<int>(), j.at("outcomes").get<std::vector<int>>());
    } else if (kind == "continuous") {
        std::vector<Interval> pieces;
        for (const auto& p : j.at("intervals")) {
            if (!p.is_array() || p.size() != 2) throw InvalidArgument("interval must be a [lo, hi] pair");
            pieces.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        e = Event::continuous(std::move(pieces));
    } else {
        throw InvalidArgument("unknown event kind '" + kind + "'");
    }
}

void to_json(nlohmann::json& j, const TrialRecord& r) {
    j = {{"n", r.n}, {"count", r.count}, {"freq", r.frequency()}, {"seed", r.seed}, {"experiment", r.experiment}};
}

void to_json(nlohmann::json& j, const ReferenceSet& r) {
    if (r.is_discrete()) {
        j = {{"kind", "discrete"}, {"k", r.k()}};
    } else {
        j = {{"kind", "continuous"}};
    }
}

void from_json(const nlohmann::json& j, ReferenceSet& r) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "discrete") {
        r = ReferenceSet::discrete(j.at("k").get<int>());
    } else if (kind == "continuous") {
        r = ReferenceSet::continuous();
    } else {
        throw InvalidArgument("unknown reference set kind '" + kind + "'");
    }
}

}  // namespace strengthlab
