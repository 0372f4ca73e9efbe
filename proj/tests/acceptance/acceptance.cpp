// One PASS/FAIL line per acceptance criterion; exit status is the failure count.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include <strengthlab/canonical.hpp>
#include <strengthlab/elicitation.hpp>
#include <strengthlab/events.hpp>
#include <strengthlab/fiducial.hpp>
#include <strengthlab/fixtures.hpp>
#include <strengthlab/gateway/api.hpp>
#include <strengthlab/gateway/cli.hpp>
#include <strengthlab/gateway/repository.hpp>

#include "oracles.hpp"

using namespace strengthlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& why) {
        if (!ok && pass) {
            pass = false;
            detail = why;
        }
    }
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.require(false, std::string("exception: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0 && dt > budget_s) o.require(false, "over time budget");
    if (!o.pass) ++failures;
    std::printf("%s  %-34s %8.3fs%s%s\n", o.pass ? "PASS" : "FAIL", name.c_str(), dt, o.detail.empty() ? "" : "  ",
                o.detail.c_str());
    std::fflush(stdout);
}

std::string str(double x) {
    std::ostringstream s;
    s << x;
    return s.str();
}

// -------------------------------------------------------------------------

void physical_exactness(Outcome& o) {
    std::mt19937_64 gen(1);
    for (int t = 0; t < 1000; ++t) {
        const int k = std::uniform_int_distribution<int>(1, 1000)(gen);
        std::vector<int> a, b;
        for (int i = 1; i <= k; ++i) {
            const auto pick = gen() % 3;
            if (pick == 0) a.push_back(i);
            if (pick == 1) b.push_back(i);
        }
        const auto ea = Event::discrete(k, a);
        const auto eb = Event::discrete(k, b);
        o.require(exact_probability(ea) + exact_probability(event_complement(ea)) == Rational(1), "complement");
        o.require(exact_probability(event_union(ea, eb)) == exact_probability(ea) + exact_probability(eb),
                  "additivity");
        o.require(exact_probability(ea) == Rational(static_cast<std::int64_t>(a.size()), k), "count over k");
    }
}

void frequency_convergence(Outcome& o) {
    const auto e = Event::continuous({{0.0, 0.3}});
    int ok = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
        ok += std::abs(run_trials(Wheel{}, e, 1000000, seed).frequency() - 0.3) <= 0.0014;
    o.require(ok >= 19, std::to_string(ok) + "/20 seeds within tolerance");
}

void discrete_oracle(Outcome& o) {
    for (int m = 1; m <= 4; ++m) {
        for (const auto& units : oracle::compositions(10, m)) {
            std::vector<double> values, masses;
            for (int i = 0; i < m; ++i) {
                values.push_back(i + 1);
                masses.push_back(units[static_cast<std::size_t>(i)] / 10.0);
            }
            const auto dist = Distribution::pmf("x", values, masses);
            for (int a = 0; a <= 10; ++a) {
                const auto fam = build_probes_discrete(dist, a / 10.0);
                auto want = oracle::discrete_family(units, a);
                o.require(fam.probes.size() == want.size(), "probe count differs from oracle");
                for (const auto& p : fam.probes) {
                    const auto& b = p.event.as_variable()->weights;
                    o.require(admissible_weights(b), "more than one fractional entry");
                    double mass = 0.0;
                    for (int i = 0; i < m; ++i) mass += b[static_cast<std::size_t>(i)] * masses[static_cast<std::size_t>(i)];
                    o.require(std::abs(mass - a / 10.0) <= 1e-12, "mass differs from level");
                    bool found = false;
                    for (auto it = want.begin(); it != want.end(); ++it) {
                        bool eq = true;
                        for (int i = 0; i < m && eq; ++i) eq = std::abs((*it)[static_cast<std::size_t>(i)].value() - b[static_cast<std::size_t>(i)]) < 1e-12;
                        if (eq) {
                            want.erase(it);
                            found = true;
                            break;
                        }
                    }
                    o.require(found, "engine vector missing from oracle family");
                }
                o.require(want.empty(), "oracle vector missing from engine family");
            }
        }
    }
}

void continuous_probes(Outcome& o) {
    const std::vector<Distribution> laws{Distribution::normal("x", 1.5, 4.0), Distribution::uniform("x", -1.0, 2.0),
                                         Distribution::piecewise("x", {0, 1, 3, 4}, {0, 0.2, 0.9, 1})};
    for (const auto& d : laws) {
        for (double a : default_lambda_grid()) {
            for (const auto& p : build_probes_continuous(d, a).probes) {
                double mass = 0.0;
                for (const auto& piece : p.event.as_variable()->intervals) {
                    std::vector<double> cuts{std::max(piece.lo, d.quantile(1e-13))};
                    if (const auto* pw = std::get_if<PiecewiseLinearCdf>(&d.form()))
                        for (double k : pw->x)
                            if (k > cuts.front() && k < piece.hi) cuts.push_back(k);
                    cuts.push_back(std::min(piece.hi, d.quantile(1 - 1e-13)));
                    for (std::size_t c = 0; c + 1 < cuts.size(); ++c)
                        mass += oracle::integrate([&](double x) { return d.density(x); }, cuts[c], cuts[c + 1], 2000);
                }
                o.require(std::abs(mass - a) <= 1e-6, p.shape + " probe at a=" + str(a) + " has mass " + str(mass));
            }
        }
    }
}

SimilarityTerm node(int i) { return {EventRef::named("e" + std::to_string(i)), EventRef::named("x")}; }

void partial_order(Outcome& o) {
    std::mt19937_64 gen(4);
    int contradictions = 0;
    for (int graph = 0; graph < 200; ++graph) {
        const int n = std::uniform_int_distribution<int>(2, 20)(gen);
        SimilarityStore store;
        for (int i = 0; i < n; ++i) store.register_term(node(i));
        oracle::Closure accepted(n);
        for (int e = 0; e < 2 * n; ++e) {
            const int a = static_cast<int>(gen() % n);
            const int b = static_cast<int>((a + 1 + gen() % (n - 1)) % n);
            const auto r = static_cast<int>(gen() % 3);
            const Relation rel = r == 0 ? Relation::Less : r == 1 ? Relation::Greater : Relation::Equal;
            const oracle::Rel orel = r == 0 ? oracle::Rel::Less : r == 1 ? oracle::Rel::Greater : oracle::Rel::Equal;
            auto trial = accepted;
            trial.add({a, b, orel});
            trial.solve();
            const Judgment j{node(a), node(b), rel};
            if (trial.consistent()) {
                store.record(j);
                accepted = trial;
                continue;
            }
            ++contradictions;
            try {
                store.record(j);
                o.require(false, "contradiction accepted");
            } catch (const ConflictError& err) {
                // the witness alone must be contradictory
                oracle::Closure w(n);
                for (const auto& x : err.cycle()) {
                    const int xa = std::stoi(x.lhs.a.as_named()->name.substr(1));
                    const int xb = std::stoi(x.rhs.a.as_named()->name.substr(1));
                    w.add({xa, xb, x.relation == Relation::Less ? oracle::Rel::Less
                                   : x.relation == Relation::Greater ? oracle::Rel::Greater
                                                                     : oracle::Rel::Equal});
                }
                w.solve();
                o.require(!w.consistent(), "witness is not a cycle");
            }
        }
        accepted.solve();
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                const auto c = accepted.order(i, k);
                const Order want = c == oracle::Cmp::Less      ? Order::Less
                                   : c == oracle::Cmp::Greater ? Order::Greater
                                   : c == oracle::Cmp::Equal   ? Order::Equal
                                                               : Order::Incomparable;
                o.require(query_order(store, node(i), node(k)) == want, "order differs from reachability");
            }
    }
    o.require(contradictions > 0, "no contradictions injected");
}

ProbeFamily named_family(const std::string& prefix, int count, double level) {
    ProbeFamily fam;
    fam.variable = prefix;
    fam.level = level;
    for (int i = 0; i < count; ++i) fam.probes.push_back({EventRef::named(prefix + std::to_string(i)), "named", level});
    return fam;
}

void strength_laws(Outcome& o) {
    std::mt19937_64 gen(6);
    const auto refset = ReferenceSet::continuous();
    const std::vector<std::string> methods{"bayesian", "direct", "fiducial"};
    const double level = 0.4;
    for (int t = 0; t < 300; ++t) {
        const int nf = 1 + static_cast<int>(gen() % 3);
        const int ng = 1 + static_cast<int>(gen() % 3);
        const auto f = named_family("f", nf, level);
        const auto g = named_family("g", ng, level);
        const int per = nf + ng;
        const int n = per * 3;
        std::vector<SimilarityTerm> terms;
        for (const auto& m : methods) {
            for (const auto& p : f.probes) terms.push_back(probe_term(p, refset, level, m));
            for (const auto& p : g.probes) terms.push_back(probe_term(p, refset, level, m));
        }
        SimilarityStore store;
        for (const auto& x : terms) store.register_term(x);
        oracle::Closure cl(n);
        for (int e = 0; e < 3 * n; ++e) {
            const int a = static_cast<int>(gen() % n);
            const int b = static_cast<int>((a + 1 + gen() % (n - 1)) % n);
            const bool less = gen() % 2;
            const Judgment j{terms[a], terms[b], less ? Relation::Less : Relation::Greater};
            if (store.check(j)) continue;
            store.record(j);
            cl.add({a, b, less ? oracle::Rel::Less : oracle::Rel::Greater});
        }
        cl.solve();

        const auto internal = internal_strength(f, g, store, refset);
        o.require(internal_strength(g, f, store, refset).relation == mirror(internal.relation), "antisymmetry");

        bool lower_above_upper = false;
        for (int ma = 0; ma < 3 && !lower_above_upper; ++ma) {
            bool all = true;
            for (int fi = 0; fi < nf; ++fi)
                for (int mb = 0; mb < 3; ++mb)
                    for (int gi = 0; gi < ng; ++gi)
                        all = all && cl.order(ma * per + fi, mb * per + nf + gi) == oracle::Cmp::Greater;
            lower_above_upper = all;
        }
        const auto ext = external_strength(f, g, store, methods, methods, refset);
        o.require((ext.relation == Verdict::Stronger) == lower_above_upper, "external reduction");
        for (const auto& m : methods)
            o.require(best_reasoning_method(f, store, m, m, refset).relation != Verdict::Stronger,
                      "method stronger than itself");
    }
}

void elicitation_convergence(Outcome& o) {
    std::mt19937_64 gen(12);
    for (int t = 0; t < 8; ++t) {
        const int m = 2 + t % 4;
        std::vector<std::int64_t> h(static_cast<std::size_t>(m), 0);
        for (int u = 0; u < 100; ++u) ++h[gen() % static_cast<std::size_t>(m)];
        std::vector<double> values;
        std::vector<Rational> masses;
        for (int i = 0; i < m; ++i) {
            values.push_back(i + 1);
            masses.emplace_back(h[static_cast<std::size_t>(i)], 100);
        }
        const auto latent = Distribution::pmf_exact("Z", values, masses);
        SessionConfig cfg;
        cfg.variable = "Z";
        auto s = ElicitationSession::start("a", cfg, snap_to_grid(Distribution::uniform_pmf("Z", m)));
        const auto r = run_agent_session(s, SyntheticAgent(latent));
        const double tv = total_variation(r.final, latent);
        o.require(r.converged && tv <= 0.02 + 1e-12, "total variation " + str(tv));
    }
    const auto latent = Distribution::pmf_exact("Z", {1, 2, 3}, {Rational(2, 10), Rational(3, 10), Rational(5, 10)});
    SessionConfig cfg;
    cfg.variable = "Z";
    auto s = ElicitationSession::start("b", cfg, snap_to_grid(Distribution::uniform_pmf("Z", 3)));
    const auto r = run_agent_session(s, SyntheticAgent(latent, 0.03));
    o.require(r.frontier_size >= 2, "flat band frontier size " + std::to_string(r.frontier_size));
}

void non_additivity(Outcome& o) {
    const auto grid = unit_grid(0.1);
    const auto refset = ReferenceSet::continuous();
    SimilarityStore store;
    // ambiguity-averse judge: flat similarity on an interval, falling away outside
    auto assess = [&](const EventRef& e, double lo, double hi) {
        auto score = [&](double l) { return l < lo - 1e-12 ? l - lo : (l > hi + 1e-12 ? hi - l : 0.0); };
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            const double d = score(grid[i]) - score(grid[i + 1]);
            const auto rel = std::abs(d) < 1e-12 ? Relation::Equal : d < 0 ? Relation::Less : Relation::Greater;
            store.record({SimilarityTerm(e, EventRef::reference(refset, grid[i])),
                          SimilarityTerm(e, EventRef::reference(refset, grid[i + 1])), rel});
        }
    };
    const auto e = EventRef::named("E");
    const auto ec = EventRef::named("not-E");
    assess(e, 0.3, 0.4);
    assess(ec, 0.6, 0.7);
    const auto re = argmax_similarity(store, e, refset, grid);
    const auto rc = argmax_similarity(store, ec, refset, grid);
    o.require(re.imprecise && rc.imprecise, "maximizer sets are not intervals");
    o.require(re.lower() + rc.lower() < 1.0 - 1e-9, "lower assignments sum to " + str(re.lower() + rc.lower()));
}

void fiducial_numbers(Outcome& o) {
    const FiducialModel model(25, 4.0);
    const auto fid = fiducial_distribution(model, 10.0);
    const auto& n = std::get<NormalForm>(fid.form());
    o.require(n.mean == 10.0 && n.variance == 0.16, "fiducial law is not normal(10, 0.16)");
    const auto [lo, hi] = central_interval(fid, 0.95);
    o.require(std::abs(lo - 9.2160) <= 1e-4 && std::abs(hi - 10.7840) <= 1e-4,
              "interval (" + str(lo) + ", " + str(hi) + ")");
    const auto post = bayes_posterior({0.0, 1e6 * model.sigma2}, model, 10.0);
    const auto& p = std::get<NormalForm>(post.form());
    const double gap = oracle::grid_sup(
        [&](double x) { return oracle::std_normal_cdf((x - p.mean) / std::sqrt(p.variance)); },
        [&](double x) { return oracle::std_normal_cdf((x - 10.0) / 0.4); }, 8.0, 12.0, 4001);
    o.require(gap <= 1e-4 && max_cdf_difference(post, fid) <= 1e-4, "posterior gap " + str(gap));
    const auto cov = coverage_check(model, 3.0, 0.95, 10000, 2024);
    o.require(std::abs(cov.coverage() - 0.95) <= 0.007, "coverage " + str(cov.coverage()));
}

void fixture_replays(Outcome& o) {
    const auto ex1 = generator_vs_clinician_fixture();
    for (double l : ex1.grid)
        o.require(compare_representativeness(ex1.family("generator", l), ex1.family("clinician", l), ex1.store)
                          .relation == Verdict::Stronger,
                  "generator not stronger at " + str(l));
    const auto ex2 = urns_and_election_fixture();
    o.require(compare_representativeness(ex2.family("known-urn", 0.5), ex2.family("unknown-urn", 0.5), ex2.store)
                      .relation == Verdict::Stronger,
              "known urn not stronger");
    o.require(compare_representativeness(ex2.family("election", 0.5), ex2.family("known-urn", 0.5), ex2.store)
                      .relation == Verdict::Weaker,
              "election not weaker");
    for (auto variant : {LedgerVariant::Plain, LedgerVariant::Smiled}) {
        const auto fx = build_ledger_fixture(variant);
        for (double l : fx.grid)
            o.require(best_reasoning_method(fx.family("fiducial", l), fx.store, "fiducial", "bayesian").relation ==
                          Verdict::Stronger,
                      "fiducial method not favoured at " + str(l));
    }

    // grep: scenario vocabulary stays out of the engine, verdicts stay out of fixtures
    const fs::path core = fs::path(STRENGTHLAB_SOURCE_DIR) / "core";
    const std::vector<std::string> tokens{"clinician", "unknown-urn", "known-urn", "election", "selector", "ledger"};
    for (const auto& entry : fs::recursive_directory_iterator(core)) {
        if (!entry.is_regular_file() || entry.path().stem() == "fixtures") continue;
        std::ifstream in(entry.path());
        const std::string text((std::istreambuf_iterator<char>(in)), {});
        for (const auto& t : tokens)
            o.require(text.find(t) == std::string::npos, t + " appears in " + entry.path().filename().string());
    }
    std::ifstream in(core / "src" / "fixtures.cpp");
    const std::string text((std::istreambuf_iterator<char>(in)), {});
    o.require(!text.empty() && text.find("Verdict") == std::string::npos, "fixture source names a verdict");
}

int cli(std::vector<std::string> args, std::string& out) {
    args.insert(args.begin(), "strengthlab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream o, e;
    const int code = gateway::run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
    out = o.str();
    return code;
}

void gateway_round_trip(Outcome& o) {
    const auto dir = fs::temp_directory_path() / ("strengthlab-acceptance-" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
    {
        gateway::SessionRepository repo(dir / "a");
        SessionConfig cfg;
        cfg.variable = "Z";
        const auto latent = Distribution::pmf("Z", {1, 2, 3}, {0.2, 0.3, 0.5});
        const SyntheticAgent agent(latent);
        const auto id = repo.create(cfg, Distribution::uniform_pmf("Z", 3)).id;
        repo.update(id, std::nullopt, [&](ElicitationSession& s) {
            for (int i = 0; i < 5 && !s.next_questions().empty(); ++i) {
                std::vector<Answer> answers;
                for (const auto& q : s.next_questions()) answers.push_back({q.id, agent.answer(q.lhs, q.rhs), "agent"});
                s.submit_answers(answers);
            }
            s.propose_candidate(snap_to_grid(latent));
        });
        const auto first = repo.export_text(id);
        gateway::SessionRepository other(dir / "b");
        other.import_text(first);
        o.require(other.export_text(id) == first, "export -> import -> export differs");
    }

    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        const auto f = Distribution::normal("x", 4 * u(gen) - 2, 0.5 + u(gen));
        const auto g = Distribution::uniform("x", -1 - u(gen), 1 + u(gen));
        const double lambda = 0.5;
        const SyntheticAgent agent(Distribution::normal("x", u(gen), 1.0));
        std::vector<SimilarityTerm> terms;
        for (const auto* d : {&f, &g})
            for (const auto& p : build_probes(*d, lambda).probes) terms.push_back(probe_term(p, ReferenceSet::continuous(), lambda));
        SimilarityStore store;
        for (std::size_t a = 0; a + 1 < terms.size(); ++a) {
            auto j = agent.judge(terms[a], terms[(a * 7 + 3) % terms.size()]);
            j.extended = true;
            if (j.lhs.key() != j.rhs.key() && !store.check(j)) store.record(j);
        }
        const std::string kind = i % 2 ? "internal" : "representativeness";
        const json req = {{"kind", kind}, {"f", f}, {"g", g}, {"lambda", lambda}, {"judgments", export_store(store)}};
        const auto api = canonical_dump(gateway::compare(req));
        auto put = [&](const std::string& name, const json& doc) {
            std::ofstream(dir / name) << doc.dump();
            return (dir / name).string();
        };
        std::string out;
        const int code = cli({"compare", "--" + kind, put("f.json", f), put("g.json", g), "--judgments",
                              put("j.json", req.at("judgments")), "--lambda", "0.5", "--json"},
                             out);
        o.require(code == 0 && out == api + "\n", "CLI and API verdicts differ on case " + std::to_string(i));
    }
    fs::remove_all(dir);
}

}  // namespace

int main() {
    criterion("physical-probability exactness", 1.0, physical_exactness);
    criterion("frequency convergence", 10.0, frequency_convergence);
    criterion("discrete probe oracle equivalence", 30.0, discrete_oracle);
    criterion("continuous probe validity", 0, continuous_probes);
    criterion("partial-order correctness", 0, partial_order);
    criterion("strength laws", 0, strength_laws);
    criterion("elicitation convergence", 60.0, elicitation_convergence);
    criterion("non-additivity realized", 0, non_additivity);
    criterion("fiducial numbers", 30.0, fiducial_numbers);
    criterion("fixture replays", 0, fixture_replays);
    criterion("gateway round trip", 0, gateway_round_trip);
    std::printf("%d of 11 criteria failed\n", failures);
    return failures;
}
