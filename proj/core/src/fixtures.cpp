#include <strengthlab/fixtures.hpp>

#include <strengthlab/errors.hpp>

namespace strengthlab {

namespace {

constexpr const char* source = "fixture";

std::vector<SimilarityTerm> terms_for(const ScenarioFixture& fx, const std::string& role, double lambda,
                                      const std::string& method) {
    std::vector<SimilarityTerm> out;
    for (const auto& p : fx.family(role, lambda).probes) out.push_back(probe_term(p, fx.refset, lambda, method));
    return out;
}

SimilarityTerm self_term(const ReferenceSet& refset, double lambda) {
    const auto r = EventRef::reference(refset, lambda);
    return SimilarityTerm(r, r, "direct");
}

Judgment judged(const SimilarityTerm& lhs, Relation rel, const SimilarityTerm& rhs) {
    Judgment j;
    j.lhs = lhs;
    j.rhs = rhs;
    j.relation = rel;
    j.source = source;
    j.extended = !lhs.shares_event_with(rhs);
    return j;
}

void record(ScenarioFixture& fx, const std::vector<Judgment>& batch) { fx.store.record_all(batch); }

}  // namespace

ProbeFamily ScenarioFixture::family(const std::string& role, double lambda) const {
    const auto it = laws.find(role);
    if (it == laws.end()) throw NotFound("fixture " + name + " has no law '" + role + "'");
    return build_probes(it->second, lambda, probes);
}

ScenarioFixture generator_vs_clinician_fixture() {
    ScenarioFixture fx;
    fx.name = "generator-vs-clinician";
    fx.grid = default_lambda_grid();
    fx.laws.emplace("generator", Distribution::uniform("generator-output", 0.0, 1.0));
    fx.laws.emplace("clinician", Distribution::normal("survival-change", 1.5, 4.0));

    std::vector<Judgment> batch;
    for (double lambda : fx.grid) {
        const auto anchor = self_term(fx.refset, lambda);
        for (const auto& t : terms_for(fx, "generator", lambda, "direct")) batch.push_back(judged(t, Relation::Equal, anchor));
        for (const auto& t : terms_for(fx, "clinician", lambda, "direct")) batch.push_back(judged(t, Relation::Less, anchor));
    }
    record(fx, batch);
    return fx;
}

ScenarioFixture urns_and_election_fixture() {
    ScenarioFixture fx;
    fx.name = "urns-and-election";
    fx.grid = default_lambda_grid();
    const Rational half(1, 2);
    fx.laws.emplace("unknown-urn", Distribution::pmf_exact("unknown-urn-colour", {0, 1}, {half, half}));
    fx.laws.emplace("known-urn", Distribution::pmf_exact("known-urn-colour", {0, 1}, {half, half}));
    fx.laws.emplace("election", Distribution::pmf_exact("governor", {1, 2, 3, 4, 5},
                                                        {Rational(30, 100), Rational(25, 100), Rational(20, 100),
                                                         Rational(15, 100), Rational(10, 100)}));

    std::vector<Judgment> batch;
    for (double lambda : fx.grid) {
        const auto anchor = self_term(fx.refset, lambda);
        const auto known = terms_for(fx, "known-urn", lambda, "direct");
        for (const auto& t : known) batch.push_back(judged(t, Relation::Equal, anchor));
        for (const auto& t : terms_for(fx, "unknown-urn", lambda, "direct"))
            batch.push_back(judged(t, Relation::Less, known.front()));
        for (const auto& t : terms_for(fx, "election", lambda, "direct"))
            batch.push_back(judged(t, Relation::Less, known.front()));
    }
    record(fx, batch);
    return fx;
}

LedgerFixture build_ledger_fixture(LedgerVariant variant, bool swap_methods) {
    LedgerFixture fx;
    fx.name = variant == LedgerVariant::Plain ? "ledger" : "ledger-smiled";
    fx.grid = default_lambda_grid();
    fx.laws.emplace("prior", Distribution::normal("mu", fx.prior.mean, fx.prior.variance));
    fx.laws.emplace("posterior", bayes_posterior(fx.prior, fx.model, fx.xbar));
    fx.laws.emplace("fiducial", fiducial_distribution(fx.model, fx.xbar));
    fx.laws.emplace("selector", Distribution::pmf_exact("cup-ball-red", {0, 1}, {Rational(3, 10), Rational(7, 10)}));
    fx.laws.emplace("forecast", Distribution::pmf_exact("forecast", {1, 2, 3, 4},
                                                        {Rational(1, 10), Rational(2, 10), Rational(3, 10),
                                                         Rational(4, 10)}));

    const std::string fiducial = swap_methods ? "bayesian" : "fiducial";
    const std::string bayesian = swap_methods ? "fiducial" : "bayesian";

    std::vector<Judgment> all;
    auto entry = [&](const std::string& role, const std::string& method, double lambda) -> LedgerEntry& {
        fx.entries.push_back({role, method, lambda, {}});
        return fx.entries.back();
    };

    for (double lambda : fx.grid) {
        const auto anchor = self_term(fx.refset, lambda);

        const auto selector = terms_for(fx, "selector", lambda, "direct");
        auto& sel = entry("selector", "direct", lambda);
        if (variant == LedgerVariant::Plain) {
            for (const auto& t : selector) sel.judgments.push_back(judged(t, Relation::Equal, anchor));
        } else {
            sel.judgments.push_back(judged(selector.front(), Relation::Less, anchor));
            for (std::size_t i = 1; i < selector.size(); ++i)
                sel.judgments.push_back(judged(selector[i], Relation::Equal, selector.front()));
        }

        auto& fid = entry("fiducial", fiducial, lambda);
        for (const auto& t : terms_for(fx, "fiducial", lambda, fiducial))
            fid.judgments.push_back(judged(t, Relation::Equal, selector.front()));

        const auto forecast = terms_for(fx, "forecast", lambda, "direct");
        auto& fc = entry("forecast", "direct", lambda);
        fc.judgments.push_back(judged(forecast.front(), Relation::Less, selector.front()));
        for (std::size_t i = 1; i < forecast.size(); ++i)
            fc.judgments.push_back(judged(forecast[i], Relation::Equal, forecast.front()));

        const auto flat = terms_for(fx, "fiducial", lambda, bayesian);
        const auto& low = flat.front();
        auto& fb = entry("fiducial", bayesian, lambda);
        fb.judgments.push_back(judged(low, Relation::Less, forecast.front()));
        for (std::size_t i = 1; i < flat.size(); ++i) fb.judgments.push_back(judged(flat[i], Relation::Equal, low));

        auto& post = entry("posterior", bayesian, lambda);
        for (const auto& t : terms_for(fx, "posterior", lambda, bayesian))
            post.judgments.push_back(judged(t, Relation::Equal, low));

        auto& prior = entry("prior", "direct", lambda);
        for (const auto& t : terms_for(fx, "prior", lambda, "direct"))
            prior.judgments.push_back(judged(t, Relation::Equal, low));
    }
    for (const auto& e : fx.entries) all.insert(all.end(), e.judgments.begin(), e.judgments.end());
    record(fx, all);
    return fx;
}

}  // namespace strengthlab
