#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include <nlohmann/json_fwd.hpp>

#include <strengthlab/distributions.hpp>
#include <strengthlab/similarity.hpp>

namespace strengthlab {

/// Deterministic stand-in for a human judge. Every event gets a latent probability
/// interval; a term S(A, R(lambda)) scores minus the distance from lambda to that
/// interval, less an indifference band. Scores are quantized, so answers always
/// follow one weak order and can never conflict.
class SyntheticAgent {
public:
    SyntheticAgent() = default;
    explicit SyntheticAgent(Distribution latent, double band = 0.0);

    /// Latent interval [lo, hi] for a free-standing named event.
    SyntheticAgent& with_named(const std::string& name, double lo, double hi);

    const Distribution& latent() const { return latent_; }
    double band() const { return band_; }
    const std::map<std::string, std::pair<double, double>>& named() const { return named_; }

    /// Latent probability interval of an event; throws InvalidArgument for events
    /// the agent knows nothing about.
    std::pair<double, double> latent_probability(const EventRef& e) const;

    /// Quantized score in units of 1e-12; higher means more similar.
    std::int64_t score(const SimilarityTerm& t) const;

    Relation answer(const SimilarityTerm& lhs, const SimilarityTerm& rhs) const;
    Judgment judge(const SimilarityTerm& lhs, const SimilarityTerm& rhs) const;

private:
    Distribution latent_;
    double band_ = 0.0;
    std::map<std::string, std::pair<double, double>> named_;
};

void to_json(nlohmann::json& j, const SyntheticAgent& a);
void from_json(const nlohmann::json& j, SyntheticAgent& a);

}  // namespace strengthlab
