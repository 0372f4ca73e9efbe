#include <strengthlab/gateway/api.hpp>

#include <cmath>

#include <strengthlab/agent.hpp>
#include <strengthlab/elicitation.hpp>
#include <strengthlab/errors.hpp>
#include <strengthlab/events.hpp>
#include <strengthlab/fiducial.hpp>
#include <strengthlab/gateway/repository.hpp>
#include <strengthlab/similarity.hpp>
#include <strengthlab/strength.hpp>

namespace strengthlab::gateway {

using nlohmann::json;

namespace {

SimilarityStore store_of(const json& request) {
    auto store = import_store(request.value("judgments", json::array()));
    for (const auto& m : request.value("methods", std::vector<std::string>{})) store.register_method(m);
    return store;
}

std::optional<std::uint64_t> version_of(const json& request) {
    if (!request.contains("version") || request.at("version").is_null()) return std::nullopt;
    return request.at("version").get<std::uint64_t>();
}

json summary(const SessionRecord& r) {
    return {{"id", r.id},
            {"version", r.version},
            {"status", to_string(r.session.status())},
            {"coverage", r.session.coverage()}};
}

Distribution uniform_like(const Distribution& latent) {
    const auto& p = latent.as_pmf();
    std::vector<double> masses(p.values.size(), 1.0 / static_cast<double>(p.values.size()));
    return Distribution::pmf(latent.variable(), p.values, masses);
}

}  // namespace

json compare(const json& request) {
    const auto spec = request.get<ComparisonSpec>();
    const auto store = store_of(request);
    return run_comparison(spec, request.at("lambda").get<double>(), store);
}

json sensitivity(const json& request) {
    const auto spec = request.get<ComparisonSpec>();
    const auto store = store_of(request);
    auto grid = request.contains("grid") ? request.at("grid").get<std::vector<double>>() : default_lambda_grid();
    return sensitivity_scan(spec, store, std::move(grid));
}

json simulate_trials(const json& request) {
    const auto event = request.at("event").get<Event>();
    const auto n = request.at("n").get<std::uint64_t>();
    const auto seed = request.value("seed", std::uint64_t{0});
    const auto workers = request.value("workers", 1u);
    const auto experiment = experiment_of(event);
    json out = run_trials(experiment, event, n, seed, workers);
    out["event"] = event;
    out["probability"] = physical_probability(experiment, event);
    return out;
}

json fiducial_demo(const json& request) {
    const double sigma = request.at("sigma").get<double>();
    if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
    const FiducialModel model(request.at("n").get<int>(), sigma * sigma);
    const double xbar = request.at("xbar").get<double>();
    const double level = request.value("level", 0.95);
    const auto fid = fiducial_distribution(model, xbar);
    const auto [lo, hi] = central_interval(fid, level);

    std::vector<double> ladder;
    for (double m : request.value("ladder", std::vector<double>{10.0, 1e3, 1e6})) ladder.push_back(m * model.sigma2);

    json out = {{"model", model},
                {"xbar", xbar},
                {"level", level},
                {"fiducial", fid},
                {"interval", {lo, hi}},
                {"flat_limit", flat_limit(model, xbar)},
                {"ladder", improper_limit_check(model, xbar, ladder, request.value("prior_mean", 0.0))}};
    const auto reps = request.value("replications", std::uint64_t{0});
    if (reps > 0) {
        out["coverage"] = coverage_check(model, request.value("mu_true", xbar), level, reps,
                                         request.value("seed", std::uint64_t{1}));
    }
    return out;
}

json agent_run(const json& request) {
    const auto latent = request.at("latent").get<Distribution>();
    const SyntheticAgent agent(latent, request.value("band", 0.0));

    const double step = request.value("step", 0.01);
    Distribution start;
    const auto start_doc = request.value("start", json("uniform"));
    if (start_doc.is_string()) {
        if (start_doc.get<std::string>() != "uniform") throw InvalidArgument("start must be \"uniform\" or a distribution");
        if (!latent.is_discrete()) throw InvalidArgument("a uniform start needs a finite latent law");
        start = snap_to_grid(uniform_like(latent), step);
    } else {
        start = start_doc.get<Distribution>();
        if (start.is_discrete()) start = snap_to_grid(start, step);
    }

    SessionConfig config;
    config.variable = latent.variable();
    config.lambda = request.value("lambda", 0.5);
    if (request.contains("probes")) config.probes = request.at("probes").get<ProbeConfig>();
    auto session = ElicitationSession::start(request.value("id", std::string("agent")), config, start);

    AgentRunConfig run;
    run.step = step;
    run.max_accepts = request.value("max_accepts", run.max_accepts);
    const auto report = run_agent_session(session, agent, run);

    json out = {{"report", report}, {"status", to_string(session.status())}};
    if (latent.is_discrete()) {
        const double tv = total_variation(report.final, latent);
        out["tv"] = tv;
        if (request.contains("tv_tol")) out["within_tolerance"] = tv <= request.at("tv_tol").get<double>() + 1e-12;
    }
    return out;
}

json session_create(SessionRepository& repo, const json& request) {
    auto config = request.value("config", json::object()).get<SessionConfig>();
    auto initial = request.at("initial").get<Distribution>();
    return summary(repo.create(std::move(config), std::move(initial)));
}

json session_get(SessionRepository& repo, const std::string& id) {
    const auto r = repo.get(id);
    auto out = summary(r);
    out["created"] = r.created;
    out["updated"] = r.updated;
    out["session"] = r.session.to_json();
    return out;
}

json session_questions(SessionRepository& repo, const std::string& id, std::size_t batch) {
    const auto r = repo.get(id);
    auto out = summary(r);
    out["questions"] = r.session.next_questions(batch);
    return out;
}

json session_answers(SessionRepository& repo, const std::string& id, const json& request) {
    const auto answers = request.at("answers").get<std::vector<Answer>>();
    const auto r = repo.update(id, version_of(request), [&](ElicitationSession& s) { s.submit_answers(answers); });
    auto out = summary(r);
    out["recorded"] = answers.size();
    return out;
}

json session_candidate(SessionRepository& repo, const std::string& id, const json& request) {
    const auto candidate = request.at("candidate").get<Distribution>();
    ProposalResult result;
    const auto r =
        repo.update(id, version_of(request), [&](ElicitationSession& s) { result = s.propose_candidate(candidate); });
    auto out = summary(r);
    out["candidate"] = result.candidate_id;
    out["outcome"] = to_string(result.outcome);
    return out;
}

json session_frontier(SessionRepository& repo, const std::string& id) {
    const auto r = repo.get(id);
    auto out = summary(r);
    out["frontier"] = r.session.frontier_report();
    return out;
}

ErrorReply describe_error(std::exception_ptr error) {
    auto reply = [](int status, std::string code, std::string message, json detail = json::object()) {
        return ErrorReply{status, {{"code", std::move(code)}, {"message", std::move(message)}, {"detail", std::move(detail)}}};
    };
    try {
        std::rethrow_exception(error);
    } catch (const ConflictError& e) {
        return reply(409, e.code(), e.what(), {{"cycle", e.cycle()}});
    } catch (const StaleVersion& e) {
        return reply(409, e.code(), e.what());
    } catch (const NotFound& e) {
        return reply(404, e.code(), e.what());
    } catch (const StorageError& e) {
        return reply(500, e.code(), e.what());
    } catch (const InvalidArgument& e) {
        return reply(400, e.code(), e.what());
    } catch (const OutOfRange& e) {
        return reply(400, e.code(), e.what());
    } catch (const KindMismatch& e) {
        return reply(400, e.code(), e.what());
    } catch (const UnknownMethod& e) {
        return reply(400, e.code(), e.what());
    } catch (const Error& e) {
        return reply(422, e.code(), e.what());
    } catch (const json::exception& e) {
        return reply(400, "bad_request", e.what());
    } catch (const std::exception& e) {
        return reply(500, "internal", e.what());
    } catch (...) {
        return reply(500, "internal", "unknown failure");
    }
}

}  // namespace strengthlab::gateway
