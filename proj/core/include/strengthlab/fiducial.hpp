#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include <strengthlab/distributions.hpp>

namespace strengthlab {

/// Normal mean with known variance. The sample mean is the fiducial statistic and
/// the primary variable is standard normal; the pre-data function is flat.
struct FiducialModel {
    int n = 1;
    double sigma2 = 1.0;

    FiducialModel() = default;
    FiducialModel(int n_, double sigma2_);

    /// sigma / sqrt(n)
    double standard_error() const;
};

struct DgaDraw {
    double gamma = 0.0;
    double xbar = 0.0;
    std::vector<double> data;
};

/// Draws the primary variable, sets xbar = mu + se * gamma, then a data set with
/// that mean (residuals drawn iid N(0, sigma2) and recentred).
DgaDraw simulate_dga(const FiducialModel& model, double mu_true, std::uint64_t seed);

/// Same with the primary variable fixed to `gamma`.
DgaDraw simulate_dga_given(const FiducialModel& model, double mu_true, double gamma, std::uint64_t seed);

/// normal(xbar, sigma2 / n), derivation "fiducial".
Distribution fiducial_distribution(const FiducialModel& model, double xbar, const std::string& variable = "mu");

struct NormalPrior {
    double mean = 0.0;
    double variance = 1.0;
};

/// Conjugate posterior of the mean; derivation "bayesian".
Distribution bayes_posterior(const NormalPrior& prior, const FiducialModel& model, double xbar,
                             const std::string& variable = "mu");

/// Limit of the conjugate posterior as the prior variance grows without bound.
Distribution flat_limit(const FiducialModel& model, double xbar, const std::string& variable = "mu");

/// Posterior from the constant prior c(mu) = const; same law as the fiducial one
/// but tagged as a flat-prior Bayesian result.
Distribution flat_prior_posterior(const FiducialModel& model, double xbar, const std::string& variable = "mu");

/// Largest |F(x) - G(x)| between two normal laws.
double max_cdf_difference(const Distribution& a, const Distribution& b);

/// Equal-tailed interval holding `level` of a normal law.
std::pair<double, double> central_interval(const Distribution& normal, double level);

struct LimitRow {
    double tau2 = 0.0;
    double max_cdf_difference = 0.0;
};

struct LimitReport {
    std::vector<LimitRow> rows;
    bool decreasing = true;  // along the ladder as given
};

/// Posterior against fiducial law for each prior variance in `ladder`.
LimitReport improper_limit_check(const FiducialModel& model, double xbar, const std::vector<double>& ladder,
                                 double prior_mean = 0.0);

struct CoverageReport {
    double level = 0.0;
    std::uint64_t replications = 0;
    std::uint64_t hits = 0;
    double coverage() const { return replications == 0 ? 0.0 : static_cast<double>(hits) / replications; }
};

/// Share of simulated data sets whose fiducial central interval covers mu_true.
/// Replication r uses stream r of `seed`, so the count is independent of `workers`.
CoverageReport coverage_check(const FiducialModel& model, double mu_true, double level, std::uint64_t replications,
                              std::uint64_t seed, unsigned workers = 1);

void to_json(nlohmann::json& j, const FiducialModel& m);
void from_json(const nlohmann::json& j, FiducialModel& m);
void to_json(nlohmann::json& j, const DgaDraw& d);
void to_json(nlohmann::json& j, const LimitReport& r);
void to_json(nlohmann::json& j, const CoverageReport& r);

}  // namespace strengthlab
