#include <strengthlab/agent.hpp>

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include <strengthlab/errors.hpp>

namespace strengthlab {

namespace {

std::int64_t quantize(double score) { return static_cast<std::int64_t>(std::llround(score * 1e12)); }

double distance_to(double x, std::pair<double, double> span) {
    if (x < span.first) return span.first - x;
    if (x > span.second) return x - span.second;
    return 0.0;
}

}  // namespace

SyntheticAgent::SyntheticAgent(Distribution latent, double band) : latent_(std::move(latent)), band_(band) {
    if (!(band >= 0.0 && band < 1.0)) throw InvalidArgument("indifference band must lie in [0,1)");
}

SyntheticAgent& SyntheticAgent::with_named(const std::string& name, double lo, double hi) {
    if (!(0.0 <= lo && lo <= hi && hi <= 1.0)) throw InvalidArgument("latent interval must satisfy 0 <= lo <= hi <= 1");
    named_[name] = {lo, hi};
    return *this;
}

std::pair<double, double> SyntheticAgent::latent_probability(const EventRef& e) const {
    if (const auto* r = e.as_reference()) return {r->lambda, r->lambda};
    if (const auto* n = e.as_named()) {
        auto it = named_.find(n->name);
        if (it == named_.end()) throw InvalidArgument("agent has no latent view of event " + n->name);
        return it->second;
    }
    const auto* v = e.as_variable();
    if (v->variable != latent_.variable()) {
        throw InvalidArgument("agent holds beliefs about " + latent_.variable() + ", not " + v->variable);
    }
    double p = 0.0;
    if (v->discrete) {
        const auto& masses = latent_.as_pmf().masses;
        if (v->weights.size() != masses.size()) throw InvalidArgument("weight vector does not match the latent support");
        for (std::size_t i = 0; i < masses.size(); ++i) p += v->weights[i] * masses[i];
    } else {
        for (const auto& piece : v->intervals) p += latent_.probability(piece.lo, piece.hi);
    }
    return {p, p};
}

std::int64_t SyntheticAgent::score(const SimilarityTerm& t) const {
    const auto* ra = t.a.as_reference();
    const auto* rb = t.b.as_reference();
    if (ra && rb) return quantize(-std::abs(ra->lambda - rb->lambda));
    if (ra || rb) {
        const double lambda = ra ? ra->lambda : rb->lambda;
        const auto span = latent_probability(ra ? t.b : t.a);
        return quantize(-std::max(0.0, distance_to(lambda, span) - band_));
    }
    const auto pa = latent_probability(t.a);
    const auto pb = latent_probability(t.b);
    return quantize(-std::abs((pa.first + pa.second) / 2.0 - (pb.first + pb.second) / 2.0));
}

Relation SyntheticAgent::answer(const SimilarityTerm& lhs, const SimilarityTerm& rhs) const {
    const auto l = score(lhs);
    const auto r = score(rhs);
    if (l > r) return Relation::Greater;
    if (l < r) return Relation::Less;
    return Relation::Equal;
}

Judgment SyntheticAgent::judge(const SimilarityTerm& lhs, const SimilarityTerm& rhs) const {
    Judgment j;
    j.lhs = lhs;
    j.rhs = rhs;
    j.relation = answer(lhs, rhs);
    j.source = "synthetic-agent";
    j.extended = !lhs.shares_event_with(rhs);
    return j;
}

void to_json(nlohmann::json& j, const SyntheticAgent& a) {
    j = {{"latent", a.latent()}, {"band", a.band()}};
    if (!a.named().empty()) {
        auto named = nlohmann::json::object();
        for (const auto& [name, span] : a.named()) named[name] = {span.first, span.second};
        j["named"] = std::move(named);
    }
}

void from_json(const nlohmann::json& j, SyntheticAgent& a) {
    a = SyntheticAgent(j.at("latent").get<Distribution>(), j.value("band", 0.0));
    if (j.contains("named")) {
        for (const auto& [name, span] : j.at("named").items()) {
            a.with_named(name, span.at(0).get<double>(), span.at(1).get<double>());
        }
    }
}

}  // namespace strengthlab
