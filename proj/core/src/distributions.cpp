#include <strengthlab/distributions.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <nlohmann/json.hpp>

#include <strengthlab/errors.hpp>

namespace strengthlab {

namespace {

constexpr double kMassTol = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_pmf(const std::vector<double>& values, const std::vector<double>& masses) {
    if (values.empty()) throw InvalidArgument("pmf needs at least one support point");
    if (values.size() != masses.size()) throw InvalidArgument("pmf values and masses differ in length");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw InvalidArgument("pmf support points must be finite");
        if (i && !(values[i] > values[i - 1])) throw InvalidArgument("pmf support points must be strictly increasing");
    }
    double total = 0.0;
    for (double m : masses) {
        if (!(m >= 0.0) || !std::isfinite(m)) throw InvalidArgument("pmf masses must be finite and nonnegative");
        total += m;
    }
    if (std::abs(total - 1.0) > kMassTol) {
        throw InvalidArgument("pmf masses sum to " + std::to_string(total) + ", not 1");
    }
}

double normal_cdf(double x, double mean, double sd) { return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0))); }

double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

std::vector<double> marginal_rows(const JointPmf& p) {
    std::vector<double> out;
    for (const auto& row : p.table) out.push_back(std::accumulate(row.begin(), row.end(), 0.0));
    return out;
}

std::vector<double> marginal_cols(const JointPmf& p) {
    std::vector<double> out(p.ys.size(), 0.0);
    for (const auto& row : p.table)
        for (std::size_t j = 0; j < row.size(); ++j) out[j] += row[j];
    return out;
}

}  // namespace

std::string to_string(AdditivityMode m) { return m == AdditivityMode::FullyAdditive ? "additive" : "semi-additive"; }

AdditivityMode additivity_from_string(const std::string& s) {
    if (s == "additive" || s == "fully-additive") return AdditivityMode::FullyAdditive;
    if (s == "semi-additive" || s == "semi") return AdditivityMode::SemiAdditive;
    throw InvalidArgument("unknown additivity mode '" + s + "'");
}

Distribution Distribution::pmf(std::string variable, std::vector<double> values, std::vector<double> masses,
                               AdditivityMode mode) {
    check_pmf(values, masses);
    return Distribution(std::move(variable), FinitePmf{std::move(values), std::move(masses), std::nullopt}, mode);
}

Distribution Distribution::pmf_exact(std::string variable, std::vector<double> values, std::vector<Rational> masses,
                                     AdditivityMode mode) {
    Rational total(0);
    std::vector<double> approx;
    for (const auto& m : masses) {
        if (m < Rational(0)) throw InvalidArgument("pmf masses must be nonnegative");
        total += m;
        approx.push_back(boost::rational_cast<double>(m));
    }
    if (total != Rational(1)) throw InvalidArgument("exact pmf masses must sum to exactly 1");
    check_pmf(values, approx);
    return Distribution(std::move(variable), FinitePmf{std::move(values), std::move(approx), std::move(masses)}, mode);
}

Distribution Distribution::uniform_pmf(std::string variable, int m) {
    if (m < 1) throw InvalidArgument("uniform pmf needs m >= 1");
    std::vector<double> values;
    std::vector<Rational> masses;
    for (int i = 1; i <= m; ++i) {
        values.push_back(i);
        masses.emplace_back(1, m);
    }
    return pmf_exact(std::move(variable), std::move(values), std::move(masses));
}

Distribution Distribution::normal(std::string variable, double mean, double variance, AdditivityMode mode) {
    if (!std::isfinite(mean)) throw InvalidArgument("normal mean must be finite");
    if (!(variance > 0.0) || !std::isfinite(variance)) throw InvalidArgument("normal variance must be positive");
    return Distribution(std::move(variable), NormalForm{mean, variance}, mode);
}

Distribution Distribution::uniform(std::string variable, double lo, double hi, AdditivityMode mode) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) throw InvalidArgument("uniform needs finite lo < hi");
    return Distribution(std::move(variable), UniformForm{lo, hi}, mode);
}

Distribution Distribution::piecewise(std::string variable, std::vector<double> x, std::vector<double> p,
                                     AdditivityMode mode) {
    if (x.size() < 2 || x.size() != p.size()) throw InvalidArgument("piecewise cdf needs >= 2 matching knots");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(p[i])) throw InvalidArgument("piecewise knots must be finite");
        if (i && !(x[i] > x[i - 1])) throw InvalidArgument("piecewise knot positions must be strictly increasing");
        if (i && p[i] < p[i - 1]) throw InvalidArgument("piecewise cdf values must be nondecreasing");
    }
    if (std::abs(p.front()) > kMassTol || std::abs(p.back() - 1.0) > kMassTol) {
        throw InvalidArgument("piecewise cdf must run from 0 to 1");
    }
    p.front() = 0.0;
    p.back() = 1.0;
    return Distribution(std::move(variable), PiecewiseLinearCdf{std::move(x), std::move(p)}, mode);
}

Distribution Distribution::improper_flat(std::string variable) {
    Distribution d(std::move(variable), ImproperFlat{}, AdditivityMode::FullyAdditive);
    d.note = "improper flat density; not evaluable";
    return d;
}

Distribution Distribution::with_variable(std::string name) const {
    Distribution d = *this;
    d.variable_ = std::move(name);
    return d;
}

const FinitePmf& Distribution::as_pmf() const {
    if (const auto* p = std::get_if<FinitePmf>(&form_)) return *p;
    throw KindMismatch("distribution of " + variable_ + " is not a finite pmf");
}

void Distribution::require_proper(const char* what) const {
    if (is_improper()) throw UnsupportedOperation(std::string("improper flat density supports no ") + what);
}

double Distribution::density(double x) const {
    require_proper("density");
    return std::visit(
        overloaded{
            [&](const FinitePmf& p) {
                auto it = std::lower_bound(p.values.begin(), p.values.end(), x);
                return (it != p.values.end() && *it == x) ? p.masses[static_cast<std::size_t>(it - p.values.begin())]
                                                          : 0.0;
            },
            [&](const NormalForm& n) { return normal_pdf(x, n.mean, std::sqrt(n.variance)); },
            [&](const UniformForm& u) { return (x >= u.lo && x < u.hi) ? 1.0 / (u.hi - u.lo) : 0.0; },
            [&](const PiecewiseLinearCdf& c) {
                if (x < c.x.front() || x >= c.x.back()) return 0.0;
                auto it = std::upper_bound(c.x.begin(), c.x.end(), x);
                const auto i = static_cast<std::size_t>(it - c.x.begin()) - 1;
                return (c.p[i + 1] - c.p[i]) / (c.x[i + 1] - c.x[i]);
            },
            [](const ImproperFlat&) { return 0.0; },
        },
        form_);
}

double Distribution::cdf(double x) const {
    require_proper("cdf");
    return std::visit(
        overloaded{
            [&](const FinitePmf& p) {
                double total = 0.0;
                for (std::size_t i = 0; i < p.values.size() && p.values[i] <= x; ++i) total += p.masses[i];
                return std::min(total, 1.0);
            },
            [&](const NormalForm& n) { return normal_cdf(x, n.mean, std::sqrt(n.variance)); },
            [&](const UniformForm& u) { return std::clamp((x - u.lo) / (u.hi - u.lo), 0.0, 1.0); },
            [&](const PiecewiseLinearCdf& c) {
                if (x <= c.x.front()) return 0.0;
                if (x >= c.x.back()) return 1.0;
                auto it = std::upper_bound(c.x.begin(), c.x.end(), x);
                const auto i = static_cast<std::size_t>(it - c.x.begin()) - 1;
                const double t = (x - c.x[i]) / (c.x[i + 1] - c.x[i]);
                return c.p[i] + t * (c.p[i + 1] - c.p[i]);
            },
            [](const ImproperFlat&) { return 0.0; },
        },
        form_);
}

double Distribution::quantile(double u) const {
    require_proper("quantile");
    if (!(u > 0.0 && u < 1.0)) throw OutOfRange("quantile level must lie in (0,1)");
    return std::visit(
        overloaded{
            [&](const FinitePmf& p) {
                double total = 0.0;
                for (std::size_t i = 0; i < p.values.size(); ++i) {
                    total += p.masses[i];
                    if (total >= u - kMassTol && p.masses[i] > 0.0) return p.values[i];
                }
                return p.values.back();
            },
            [&](const NormalForm& n) {
                return boost::math::quantile(boost::math::normal_distribution<double>(n.mean, std::sqrt(n.variance)),
                                             u);
            },
            [&](const UniformForm& f) { return f.lo + u * (f.hi - f.lo); },
            [&](const PiecewiseLinearCdf& c) {
                // first segment whose upper cdf value reaches u
                auto it = std::lower_bound(c.p.begin(), c.p.end(), u);
                auto i = static_cast<std::size_t>(it - c.p.begin());
                if (i == 0) i = 1;
                const double span = c.p[i] - c.p[i - 1];
                if (span <= 0.0) return c.x[i - 1];
                return c.x[i - 1] + (u - c.p[i - 1]) / span * (c.x[i] - c.x[i - 1]);
            },
            [](const ImproperFlat&) { return 0.0; },
        },
        form_);
}

std::pair<double, double> Distribution::support() const {
    require_proper("support");
    return std::visit(overloaded{
                          [](const FinitePmf& p) { return std::pair{p.values.front(), p.values.back()}; },
                          [](const NormalForm&) { return std::pair{-kInf, kInf}; },
                          [](const UniformForm& u) { return std::pair{u.lo, u.hi}; },
                          [](const PiecewiseLinearCdf& c) { return std::pair{c.x.front(), c.x.back()}; },
                          [](const ImproperFlat&) { return std::pair{-kInf, kInf}; },
                      },
                      form_);
}

double Distribution::quantile_closed(double u) const {
    if (u <= 0.0) return support().first;
    if (u >= 1.0) return support().second;
    return quantile(u);
}

double Distribution::probability(double lo, double hi) const {
    if (!(hi > lo)) return 0.0;
    if (is_discrete()) {
        const auto& p = as_pmf();
        double total = 0.0;
        for (std::size_t i = 0; i < p.values.size(); ++i)
            if (p.values[i] >= lo && p.values[i] < hi) total += p.masses[i];
        return total;
    }
    if (const auto* n = std::get_if<NormalForm>(&form_)) {
        // difference of upper tails keeps precision in the right tail
        const double sd = std::sqrt(n->variance);
        if (lo > n->mean) {
            const double up_lo = 0.5 * std::erfc((lo - n->mean) / (sd * std::sqrt(2.0)));
            const double up_hi = 0.5 * std::erfc((hi - n->mean) / (sd * std::sqrt(2.0)));
            return up_lo - up_hi;
        }
    }
    const double c_hi = std::isinf(hi) ? 1.0 : cdf(hi);
    const double c_lo = std::isinf(lo) ? 0.0 : cdf(lo);
    return c_hi - c_lo;
}

double evaluate(const Distribution& dist, EvalKind kind, double argument) {
    switch (kind) {
        case EvalKind::DensityOrMass: return dist.density(argument);
        case EvalKind::Cdf: return dist.cdf(argument);
        case EvalKind::Quantile: return dist.quantile(argument);
    }
    throw InvalidArgument("unknown evaluation kind");
}

Distribution to_piecewise(const Distribution& dist, const PiecewiseExportConfig& config) {
    if (!dist.is_continuous()) throw KindMismatch("only continuous laws export to a piecewise cdf");
    if (config.knots < 2) throw InvalidArgument("piecewise export needs >= 2 knots");
    if (!(config.lo_quantile > 0.0 && config.lo_quantile < config.hi_quantile && config.hi_quantile < 1.0)) {
        throw InvalidArgument("piecewise export quantile span must satisfy 0 < lo < hi < 1");
    }
    if (const auto* c = std::get_if<PiecewiseLinearCdf>(&dist.form())) {
        return Distribution::piecewise(dist.variable(), c->x, c->p, dist.mode());
    }
    std::vector<double> x;
    std::vector<double> p;
    const int n = config.knots;
    for (int i = 0; i < n; ++i) {
        const double u = config.lo_quantile + (config.hi_quantile - config.lo_quantile) * i / (n - 1);
        x.push_back(dist.quantile(u));
        p.push_back(u);
    }
    p.front() = 0.0;
    p.back() = 1.0;
    auto out = Distribution::piecewise(dist.variable(), std::move(x), std::move(p), dist.mode());
    out.derivation = dist.derivation;
    return out;
}

// ---------------------------------------------------------------------------

JointDistribution JointDistribution::pmf(std::string x, std::string y, std::vector<double> xs,
                                         std::vector<double> ys, std::vector<std::vector<double>> table,
                                         AdditivityMode mode) {
    if (x == y) throw InvalidArgument("joint variables must differ");
    if (table.size() != xs.size()) throw InvalidArgument("joint table rows must match X support");
    double total = 0.0;
    for (const auto& row : table) {
        if (row.size() != ys.size()) throw InvalidArgument("joint table columns must match Y support");
        for (double m : row) {
            if (!(m >= 0.0)) throw InvalidArgument("joint masses must be nonnegative");
            total += m;
        }
    }
    if (std::abs(total - 1.0) > kMassTol) throw InvalidArgument("joint masses must sum to 1");
    return JointDistribution(std::move(x), std::move(y), JointPmf{std::move(xs), std::move(ys), std::move(table)},
                             mode);
}

JointDistribution JointDistribution::bivariate_normal(std::string x, std::string y, BivariateNormal params,
                                                      AdditivityMode mode) {
    if (x == y) throw InvalidArgument("joint variables must differ");
    if (!(params.var_x > 0.0) || !(params.var_y > 0.0) || params.cov * params.cov >= params.var_x * params.var_y) {
        throw InvalidArgument("bivariate normal covariance must be positive definite");
    }
    return JointDistribution(std::move(x), std::move(y), params, mode);
}

JointDistribution JointDistribution::product(const Distribution& fx, const Distribution& fy) {
    const auto& px = fx.as_pmf();
    const auto& py = fy.as_pmf();
    std::vector<std::vector<double>> table(px.values.size(), std::vector<double>(py.values.size()));
    for (std::size_t i = 0; i < px.values.size(); ++i)
        for (std::size_t j = 0; j < py.values.size(); ++j) table[i][j] = px.masses[i] * py.masses[j];
    // products of masses summing to 1 can drift by a few ulps; renormalize
    double total = 0.0;
    for (const auto& row : table) total += std::accumulate(row.begin(), row.end(), 0.0);
    for (auto& row : table)
        for (double& m : row) m /= total;
    const auto mode = (fx.mode() == AdditivityMode::SemiAdditive || fy.mode() == AdditivityMode::SemiAdditive)
                          ? AdditivityMode::SemiAdditive
                          : AdditivityMode::FullyAdditive;
    return pmf(fx.variable(), fy.variable(), px.values, py.values, std::move(table), mode);
}

Distribution marginalize(const JointDistribution& joint, const std::string& keep,
                         std::optional<MarginalOverride> override_token) {
    if (keep != joint.x_name() && keep != joint.y_name()) {
        throw InvalidArgument("variable '" + keep + "' is not part of the joint");
    }
    if (joint.mode() == AdditivityMode::SemiAdditive && !override_token) {
        throw SemiAdditiveRefusal("joint over (" + joint.x_name() + "," + joint.y_name() +
                                  ") is semi-additive; assign the marginal of " + keep +
                                  " directly or pass an explicit override");
    }
    const bool keep_x = keep == joint.x_name();
    return std::visit(overloaded{
                          [&](const JointPmf& p) {
                              return keep_x ? Distribution::pmf(keep, p.xs, marginal_rows(p), joint.mode())
                                            : Distribution::pmf(keep, p.ys, marginal_cols(p), joint.mode());
                          },
                          [&](const BivariateNormal& n) {
                              return keep_x ? Distribution::normal(keep, n.mean_x, n.var_x, joint.mode())
                                            : Distribution::normal(keep, n.mean_y, n.var_y, joint.mode());
                          },
                      },
                      joint.form());
}

Distribution condition(const JointDistribution& joint, const std::string& observed, double value,
                       std::optional<ConditioningAuthorization> authorization) {
    if (observed != joint.x_name() && observed != joint.y_name()) {
        throw InvalidArgument("variable '" + observed + "' is not part of the joint");
    }
    if (!authorization) {
        throw UnauthorizedConditioning("conditioning on " + observed +
                                       " requires explicit authorization to apply the ratio formula");
    }
    const bool on_y = observed == joint.y_name();
    const auto& target = on_y ? joint.x_name() : joint.y_name();
    return std::visit(
        overloaded{
            [&](const JointPmf& p) {
                const auto& observed_support = on_y ? p.ys : p.xs;
                auto it = std::find(observed_support.begin(), observed_support.end(), value);
                if (it == observed_support.end()) {
                    throw ZeroMassConditioning("value is outside the support of " + observed);
                }
                const auto idx = static_cast<std::size_t>(it - observed_support.begin());
                std::vector<double> slice;
                if (on_y) {
                    for (const auto& row : p.table) slice.push_back(row[idx]);
                } else {
                    slice = p.table[idx];
                }
                const double norm = std::accumulate(slice.begin(), slice.end(), 0.0);
                if (norm <= 0.0) throw ZeroMassConditioning(observed + " has zero mass at the observed value");
                for (double& m : slice) m /= norm;
                return Distribution::pmf(target, on_y ? p.xs : p.ys, std::move(slice), joint.mode());
            },
            [&](const BivariateNormal& n) {
                if (on_y) {
                    return Distribution::normal(target, n.mean_x + n.cov / n.var_y * (value - n.mean_y),
                                                n.var_x - n.cov * n.cov / n.var_y, joint.mode());
                }
                return Distribution::normal(target, n.mean_y + n.cov / n.var_x * (value - n.mean_x),
                                            n.var_y - n.cov * n.cov / n.var_x, joint.mode());
            },
        },
        joint.form());
}

ConsistencyReport consistency_report(const JointDistribution& joint, const Distribution& direct_marginal) {
    ConsistencyReport report;
    report.variable = direct_marginal.variable();
    const auto implied = marginalize(joint, direct_marginal.variable(), MarginalOverride{});
    std::vector<double> probes;
    if (implied.is_discrete()) {
        probes = implied.as_pmf().values;
        if (direct_marginal.is_discrete()) {
            const auto& extra = direct_marginal.as_pmf().values;
            probes.insert(probes.end(), extra.begin(), extra.end());
        }
    } else {
        for (int i = 1; i < 1000; ++i) probes.push_back(implied.quantile(i / 1000.0));
    }
    for (double x : probes) {
        report.max_cdf_difference = std::max(report.max_cdf_difference, std::abs(implied.cdf(x) - direct_marginal.cdf(x)));
    }
    report.consistent = report.max_cdf_difference <= 1e-9;
    return report;
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const Distribution& d) {
    j = nlohmann::json::object();
    j["variable"] = d.variable();
    j["mode"] = to_string(d.mode());
    if (!d.derivation.empty()) j["derivation"] = d.derivation;
    if (!d.note.empty()) j["note"] = d.note;
    std::visit(overloaded{
                   [&](const FinitePmf& p) {
                       j["form"] = "pmf";
                       j["values"] = p.values;
                       if (p.exact) {
                           auto arr = nlohmann::json::array();
                           for (const auto& r : *p.exact) arr.push_back({r.numerator(), r.denominator()});
                           j["masses"] = std::move(arr);
                       } else {
                           j["masses"] = p.masses;
                       }
                   },
                   [&](const NormalForm& n) {
                       j["form"] = "normal";
                       j["mean"] = n.mean;
                       j["var"] = n.variance;
                   },
                   [&](const UniformForm& u) {
                       j["form"] = "uniform";
                       j["lo"] = u.lo;
                       j["hi"] = u.hi;
                   },
                   [&](const PiecewiseLinearCdf& c) {
                       j["form"] = "piecewise";
                       j["x"] = c.x;
                       j["p"] = c.p;
                   },
                   [&](const ImproperFlat&) { j["form"] = "improper-flat"; },
               },
               d.form());
}

void from_json(const nlohmann::json& j, Distribution& d) {
    const auto form = j.at("form").get<std::string>();
    const auto variable = j.value("variable", std::string("X"));
    const auto mode = additivity_from_string(j.value("mode", std::string("additive")));
    if (form == "pmf") {
        const auto values = j.at("values").get<std::vector<double>>();
        const auto& masses = j.at("masses");
        const bool exact = !masses.empty() && masses.front().is_array();
        if (exact) {
            std::vector<Rational> rs;
            for (const auto& m : masses) {
                if (m.size() != 2) throw InvalidArgument("exact mass must be a [numerator, denominator] pair");
                const auto den = m[1].get<std::int64_t>();
                if (den <= 0) throw InvalidArgument("mass denominator must be positive");
                rs.emplace_back(m[0].get<std::int64_t>(), den);
            }
            d = Distribution::pmf_exact(variable, values, std::move(rs), mode);
        } else {
            d = Distribution::pmf(variable, values, masses.get<std::vector<double>>(), mode);
        }
    } else if (form == "normal") {
        d = Distribution::normal(variable, j.at("mean").get<double>(), j.at("var").get<double>(), mode);
    } else if (form == "uniform") {
        d = Distribution::uniform(variable, j.at("lo").get<double>(), j.at("hi").get<double>(), mode);
    } else if (form == "piecewise") {
        d = Distribution::piecewise(variable, j.at("x").get<std::vector<double>>(), j.at("p").get<std::vector<double>>(),
                                    mode);
    } else if (form == "improper-flat") {
        d = Distribution::improper_flat(variable);
    } else {
        throw InvalidArgument("unknown distribution form '" + form + "'");
    }
    d.derivation = j.value("derivation", std::string());
    if (j.contains("note")) d.note = j.at("note").get<std::string>();
}

void to_json(nlohmann::json& j, const JointDistribution& d) {
    j = {{"x", d.x_name()}, {"y", d.y_name()}, {"mode", to_string(d.mode())}};
    std::visit(overloaded{
                   [&](const JointPmf& p) {
                       j["form"] = "joint-pmf";
                       j["xs"] = p.xs;
                       j["ys"] = p.ys;
                       j["table"] = p.table;
                   },
                   [&](const BivariateNormal& n) {
                       j["form"] = "bivariate-normal";
                       j["mean_x"] = n.mean_x;
                       j["mean_y"] = n.mean_y;
                       j["var_x"] = n.var_x;
                       j["var_y"] = n.var_y;
                       j["cov"] = n.cov;
                   },
               },
               d.form());
}

void from_json(const nlohmann::json& j, JointDistribution& d) {
    const auto form = j.at("form").get<std::string>();
    const auto mode = additivity_from_string(j.value("mode", std::string("additive")));
    if (form == "joint-pmf") {
        d = JointDistribution::pmf(j.at("x").get<std::string>(), j.at("y").get<std::string>(),
                                   j.at("xs").get<std::vector<double>>(), j.at("ys").get<std::vector<double>>(),
                                   j.at("table").get<std::vector<std::vector<double>>>(), mode);
    } else if (form == "bivariate-normal") {
        BivariateNormal n{j.at("mean_x").get<double>(), j.at("mean_y").get<double>(), j.at("var_x").get<double>(),
                          j.at("var_y").get<double>(), j.at("cov").get<double>()};
        d = JointDistribution::bivariate_normal(j.at("x").get<std::string>(), j.at("y").get<std::string>(), n, mode);
    } else {
        throw InvalidArgument("unknown joint form '" + form + "'");
    }
}

}  // namespace strengthlab
