#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include <strengthlab/events.hpp>

namespace strengthlab {

enum class AdditivityMode { FullyAdditive, SemiAdditive };

std::string to_string(AdditivityMode m);
AdditivityMode additivity_from_string(const std::string& s);

struct FinitePmf {
    std::vector<double> values;  // strictly increasing support points
    std::vector<double> masses;
    std::optional<std::vector<Rational>> exact;  // set when built from numerator/denominator pairs
};

struct NormalForm {
    double mean = 0.0;
    double variance = 1.0;
};

struct UniformForm {
    double lo = 0.0;
    double hi = 1.0;
};

/// CDF interpolated linearly between knots (x_i, p_i); p runs from 0 to 1.
struct PiecewiseLinearCdf {
    std::vector<double> x;
    std::vector<double> p;
};

/// The constant "density" c(mu) = const. Carries no probability law; it only
/// tags the input of a flat-prior posterior.
struct ImproperFlat {};

/// A candidate probability law for one named variable.
class Distribution {
public:
    using Form = std::variant<FinitePmf, NormalForm, UniformForm, PiecewiseLinearCdf, ImproperFlat>;

    /// Placeholder with an empty support; assign before use.
    Distribution() = default;

    static Distribution pmf(std::string variable, std::vector<double> values, std::vector<double> masses,
                            AdditivityMode mode = AdditivityMode::FullyAdditive);
    static Distribution pmf_exact(std::string variable, std::vector<double> values, std::vector<Rational> masses,
                                  AdditivityMode mode = AdditivityMode::FullyAdditive);
    /// Uniform masses over support points 1..m.
    static Distribution uniform_pmf(std::string variable, int m);
    static Distribution normal(std::string variable, double mean, double variance,
                               AdditivityMode mode = AdditivityMode::FullyAdditive);
    static Distribution uniform(std::string variable, double lo, double hi,
                                AdditivityMode mode = AdditivityMode::FullyAdditive);
    static Distribution piecewise(std::string variable, std::vector<double> x, std::vector<double> p,
                                  AdditivityMode mode = AdditivityMode::FullyAdditive);
    static Distribution improper_flat(std::string variable);

    const std::string& variable() const { return variable_; }
    const Form& form() const { return form_; }
    AdditivityMode mode() const { return mode_; }

    bool is_discrete() const { return std::holds_alternative<FinitePmf>(form_); }
    bool is_improper() const { return std::holds_alternative<ImproperFlat>(form_); }
    bool is_continuous() const { return !is_discrete() && !is_improper(); }

    const FinitePmf& as_pmf() const;
    std::size_t support_size() const { return as_pmf().values.size(); }

    /// Density for continuous forms, point mass for pmfs.
    double density(double x) const;
    double cdf(double x) const;
    /// Generalized inverse; u must lie in (0,1). For pmfs, the smallest support
    /// point whose cdf reaches u.
    double quantile(double u) const;
    /// Quantile extended to the closed unit interval with the support bounds.
    double quantile_closed(double u) const;
    /// Probability of the half-open set [lo, hi).
    double probability(double lo, double hi) const;
    std::pair<double, double> support() const;

    /// Reasoning method that produced this law (free-form tag, may be empty).
    std::string derivation;
    std::string note;

    /// Same law, relabelled.
    Distribution with_variable(std::string name) const;

private:
    Distribution(std::string variable, Form form, AdditivityMode mode)
        : variable_(std::move(variable)), form_(std::move(form)), mode_(mode) {}
    void require_proper(const char* what) const;

    std::string variable_;
    Form form_;
    AdditivityMode mode_ = AdditivityMode::FullyAdditive;
};

enum class EvalKind { DensityOrMass, Cdf, Quantile };

double evaluate(const Distribution& dist, EvalKind kind, double argument);

struct PiecewiseExportConfig {
    int knots = 512;
    double lo_quantile = 0.001;
    double hi_quantile = 0.999;
};

/// Piecewise-linear interchange form of a continuous law. Knots sit at evenly
/// spaced quantile levels; the end knots are pinned to cdf 0 and 1.
Distribution to_piecewise(const Distribution& dist, const PiecewiseExportConfig& config = {});

struct JointPmf {
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<std::vector<double>> table;  // table[i][j] = p(X = xs[i], Y = ys[j])
};

struct BivariateNormal {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double var_x = 1.0;
    double var_y = 1.0;
    double cov = 0.0;
};

class JointDistribution {
public:
    using Form = std::variant<JointPmf, BivariateNormal>;

    JointDistribution() = default;

    static JointDistribution pmf(std::string x, std::string y, std::vector<double> xs, std::vector<double> ys,
                                 std::vector<std::vector<double>> table,
                                 AdditivityMode mode = AdditivityMode::FullyAdditive);
    static JointDistribution bivariate_normal(std::string x, std::string y, BivariateNormal params,
                                              AdditivityMode mode = AdditivityMode::FullyAdditive);
    /// Independent product of two pmfs.
    static JointDistribution product(const Distribution& fx, const Distribution& fy);

    const std::string& x_name() const { return x_; }
    const std::string& y_name() const { return y_; }
    const Form& form() const { return form_; }
    AdditivityMode mode() const { return mode_; }

private:
    JointDistribution(std::string x, std::string y, Form form, AdditivityMode mode)
        : x_(std::move(x)), y_(std::move(y)), form_(std::move(form)), mode_(mode) {}

    std::string x_;
    std::string y_;
    Form form_;
    AdditivityMode mode_ = AdditivityMode::FullyAdditive;
};

/// Explicit permission to marginalize a semi-additive joint.
struct MarginalOverride {};
/// Explicit permission to apply the ratio formula p(X, Y=y) / p(Y=y).
struct ConditioningAuthorization {};

Distribution marginalize(const JointDistribution& joint, const std::string& keep,
                         std::optional<MarginalOverride> override_token = std::nullopt);

/// Conditional law of the other variable given `observed = value`.
Distribution condition(const JointDistribution& joint, const std::string& observed, double value,
                       std::optional<ConditioningAuthorization> authorization);

/// Side-by-side view of a joint's implied marginal and a directly assigned one.
struct ConsistencyReport {
    std::string variable;
    double max_cdf_difference = 0.0;
    bool consistent = false;  // within 1e-9
};

ConsistencyReport consistency_report(const JointDistribution& joint, const Distribution& direct_marginal);

void to_json(nlohmann::json& j, const Distribution& d);
void from_json(const nlohmann::json& j, Distribution& d);
void to_json(nlohmann::json& j, const JointDistribution& d);
void from_json(const nlohmann::json& j, JointDistribution& d);

}  // namespace strengthlab
