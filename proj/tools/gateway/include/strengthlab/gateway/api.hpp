#pragma once

#include <exception>
#include <string>

#include <nlohmann/json.hpp>

namespace strengthlab::gateway {

class SessionRepository;

/// Request documents in, response documents out. The HTTP service and the CLI
/// both go through these, so equal requests give equal canonical output.

/// {kind, f, g, method, methods_a, methods_b, refset, probes, lambda, judgments}
nlohmann::json compare(const nlohmann::json& request);
/// As compare, with an optional "grid" of resolutions instead of "lambda".
nlohmann::json sensitivity(const nlohmann::json& request);
/// {event, n, seed, workers}
nlohmann::json simulate_trials(const nlohmann::json& request);
/// {n, sigma, xbar, level, ladder, prior_mean, replications, mu_true, seed}
nlohmann::json fiducial_demo(const nlohmann::json& request);
/// {latent, band, start, lambda, step, tv_tol, max_accepts, probes}
nlohmann::json agent_run(const nlohmann::json& request);

nlohmann::json session_create(SessionRepository& repo, const nlohmann::json& request);
nlohmann::json session_get(SessionRepository& repo, const std::string& id);
nlohmann::json session_questions(SessionRepository& repo, const std::string& id, std::size_t batch);
nlohmann::json session_answers(SessionRepository& repo, const std::string& id, const nlohmann::json& request);
nlohmann::json session_candidate(SessionRepository& repo, const std::string& id, const nlohmann::json& request);
nlohmann::json session_frontier(SessionRepository& repo, const std::string& id);

struct ErrorReply {
    int status = 500;
    nlohmann::json body;  // {code, message, detail}
};

/// Maps the exception in flight onto a status and a structured body.
ErrorReply describe_error(std::exception_ptr error);

}  // namespace strengthlab::gateway
