#include <strengthlab/fiducial.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include <boost/math/distributions/normal.hpp>
#include <boost/random/normal_distribution.hpp>
#include <nlohmann/json.hpp>

#include <strengthlab/errors.hpp>
#include <strengthlab/rng.hpp>

namespace strengthlab {

namespace {

const NormalForm& normal_of(const Distribution& d) {
    const auto* n = std::get_if<NormalForm>(&d.form());
    if (n == nullptr) throw KindMismatch("expected a normal law");
    return *n;
}

double phi_cdf(double x, const NormalForm& n) {
    return 0.5 * std::erfc(-(x - n.mean) / std::sqrt(2.0 * n.variance));
}

// streams of one replication seed
constexpr std::uint64_t gamma_stream = 0;
constexpr std::uint64_t residual_stream = 1;

std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t r) { return CounterRng(seed, r + 2)(); }

}  // namespace

FiducialModel::FiducialModel(int n_, double sigma2_) : n(n_), sigma2(sigma2_) {
    if (n < 1) throw InvalidArgument("sample size must be at least 1");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InvalidArgument("known variance must be positive");
}

double FiducialModel::standard_error() const { return std::sqrt(sigma2 / n); }

DgaDraw simulate_dga_given(const FiducialModel& model, double mu_true, double gamma, std::uint64_t seed) {
    FiducialModel checked(model.n, model.sigma2);
    DgaDraw draw;
    draw.gamma = gamma;
    draw.xbar = mu_true + checked.standard_error() * gamma;

    CounterRng rng(seed, residual_stream);
    boost::random::normal_distribution<double> noise(0.0, std::sqrt(checked.sigma2));
    std::vector<double> e(static_cast<std::size_t>(checked.n));
    for (auto& v : e) v = noise(rng);
    double centre = 0.0;
    for (double v : e) centre += v;
    centre /= checked.n;
    draw.data.reserve(e.size());
    for (double v : e) draw.data.push_back(draw.xbar + (v - centre));
    return draw;
}

DgaDraw simulate_dga(const FiducialModel& model, double mu_true, std::uint64_t seed) {
    CounterRng rng(seed, gamma_stream);
    boost::random::normal_distribution<double> standard(0.0, 1.0);
    return simulate_dga_given(model, mu_true, standard(rng), seed);
}

Distribution fiducial_distribution(const FiducialModel& model, double xbar, const std::string& variable) {
    FiducialModel checked(model.n, model.sigma2);
    auto d = Distribution::normal(variable, xbar, checked.sigma2 / checked.n);
    d.derivation = "fiducial";
    d.note = "strong-fiducial-argument";
    return d;
}

Distribution bayes_posterior(const NormalPrior& prior, const FiducialModel& model, double xbar,
                             const std::string& variable) {
    if (!(prior.variance > 0.0)) throw InvalidArgument("prior variance must be positive");
    FiducialModel checked(model.n, model.sigma2);
    const double prior_precision = 1.0 / prior.variance;
    const double data_precision = checked.n / checked.sigma2;
    const double precision = prior_precision + data_precision;
    const double mean = (prior_precision * prior.mean + data_precision * xbar) / precision;
    auto d = Distribution::normal(variable, mean, 1.0 / precision);
    d.derivation = "bayesian";
    return d;
}

Distribution flat_limit(const FiducialModel& model, double xbar, const std::string& variable) {
    FiducialModel checked(model.n, model.sigma2);
    // prior precision -> 0 leaves the data precision and the sample mean
    const double data_precision = checked.n / checked.sigma2;
    auto d = Distribution::normal(variable, xbar, 1.0 / data_precision);
    d.derivation = "bayesian";
    return d;
}

Distribution flat_prior_posterior(const FiducialModel& model, double xbar, const std::string& variable) {
    auto d = flat_limit(model, xbar, variable);
    d.note = "improper flat prior";
    return d;
}

double max_cdf_difference(const Distribution& a, const Distribution& b) {
    const auto& p = normal_of(a);
    const auto& q = normal_of(b);
    // the difference peaks where the two densities cross
    std::vector<double> points;
    if (p.variance == q.variance) {
        if (p.mean == q.mean) return 0.0;
        points.push_back(0.5 * (p.mean + q.mean));
    } else {
        const double qa = 1.0 / q.variance - 1.0 / p.variance;
        const double qb = 2.0 * (p.mean / p.variance - q.mean / q.variance);
        const double qc = q.mean * q.mean / q.variance - p.mean * p.mean / p.variance - std::log(p.variance / q.variance);
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc >= 0.0) {
            const double root = std::sqrt(disc);
            points.push_back((-qb + root) / (2.0 * qa));
            points.push_back((-qb - root) / (2.0 * qa));
        }
    }
    double best = 0.0;
    for (double x : points) best = std::max(best, std::abs(phi_cdf(x, p) - phi_cdf(x, q)));
    return best;
}

std::pair<double, double> central_interval(const Distribution& normal, double level) {
    if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("level must lie in (0, 1)");
    const auto& n = normal_of(normal);
    const double z = boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + level / 2.0);
    const double half = z * std::sqrt(n.variance);
    return {n.mean - half, n.mean + half};
}

LimitReport improper_limit_check(const FiducialModel& model, double xbar, const std::vector<double>& ladder,
                                 double prior_mean) {
    const auto fid = fiducial_distribution(model, xbar);
    LimitReport report;
    for (double tau2 : ladder) {
        const auto post = bayes_posterior({prior_mean, tau2}, model, xbar);
        report.rows.push_back({tau2, max_cdf_difference(post, fid)});
    }
    for (std::size_t i = 1; i < report.rows.size(); ++i)
        if (!(report.rows[i].max_cdf_difference < report.rows[i - 1].max_cdf_difference)) report.decreasing = false;
    return report;
}

CoverageReport coverage_check(const FiducialModel& model, double mu_true, double level, std::uint64_t replications,
                              std::uint64_t seed, unsigned workers) {
    if (replications == 0) throw InvalidArgument("coverage needs at least one replication");
    if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("level must lie in (0, 1)");
    FiducialModel checked(model.n, model.sigma2);

    auto count = [&](std::uint64_t begin, std::uint64_t end) {
        std::uint64_t hits = 0;
        for (std::uint64_t r = begin; r < end; ++r) {
            const auto draw = simulate_dga(checked, mu_true, replication_seed(seed, r));
            const auto [lo, hi] = central_interval(fiducial_distribution(checked, draw.xbar), level);
            if (lo <= mu_true && mu_true <= hi) ++hits;
        }
        return hits;
    };

    CoverageReport report{level, replications, 0};
    if (workers <= 1 || replications < 2 * workers) {
        report.hits = count(0, replications);
        return report;
    }
    std::vector<std::uint64_t> partial(workers, 0);
    std::vector<std::thread> threads;
    const std::uint64_t chunk = (replications + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t begin = std::min(replications, w * chunk);
        const std::uint64_t end = std::min(replications, begin + chunk);
        threads.emplace_back([&, w, begin, end] { partial[w] = count(begin, end); });
    }
    for (auto& t : threads) t.join();
    for (auto h : partial) report.hits += h;
    return report;
}

void to_json(nlohmann::json& j, const FiducialModel& m) { j = {{"n", m.n}, {"sigma2", m.sigma2}}; }

void from_json(const nlohmann::json& j, FiducialModel& m) {
    m = FiducialModel(j.at("n").get<int>(), j.at("sigma2").get<double>());
}

void to_json(nlohmann::json& j, const DgaDraw& d) { j = {{"gamma", d.gamma}, {"xbar", d.xbar}, {"data", d.data}}; }

void to_json(nlohmann::json& j, const LimitReport& r) {
    j = nlohmann::json::object();
    j["decreasing"] = r.decreasing;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows) j["rows"].push_back({{"tau2", row.tau2}, {"max_cdf_difference", row.max_cdf_difference}});
}

void to_json(nlohmann::json& j, const CoverageReport& r) {
    j = {{"level", r.level}, {"replications", r.replications}, {"hits", r.hits}, {"coverage", r.coverage()}};
}

}  // namespace strengthlab
