#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include <strengthlab/errors.hpp>
#include <strengthlab/fiducial.hpp>

#include "oracles.hpp"

using namespace strengthlab;

namespace {

double normal_cdf(double x, double mean, double var) { return oracle::std_normal_cdf((x - mean) / std::sqrt(var)); }

const NormalForm& normal_of(const Distribution& d) { return std::get<NormalForm>(d.form()); }

}  // namespace

TEST(FiducialLaw, NormalMeanCase) {
    const FiducialModel model(25, 4.0);
    EXPECT_DOUBLE_EQ(model.standard_error(), 0.4);
    const auto d = fiducial_distribution(model, 10.0);
    EXPECT_EQ(normal_of(d).mean, 10.0);
    EXPECT_EQ(normal_of(d).variance, 0.16);
    EXPECT_EQ(d.derivation, "fiducial");
    EXPECT_EQ(d.variable(), "mu");

    const auto [lo, hi] = central_interval(d, 0.95);
    EXPECT_NEAR(lo, 9.2160, 1e-4);
    EXPECT_NEAR(hi, 10.7840, 1e-4);
    // independent route: bisection quantile of the quadrature cdf
    const double z = oracle::std_normal_quantile(0.975);
    EXPECT_NEAR(lo, 10.0 - 0.4 * z, 1e-9);
    EXPECT_NEAR(hi, 10.0 + 0.4 * z, 1e-9);
}

TEST(FiducialLaw, Refusals) {
    EXPECT_THROW(FiducialModel(0, 1.0), InvalidArgument);
    EXPECT_THROW(FiducialModel(3, 0.0), InvalidArgument);
    EXPECT_THROW(central_interval(fiducial_distribution({4, 1.0}, 0.0), 1.0), InvalidArgument);
    EXPECT_THROW(bayes_posterior({0.0, 0.0}, {4, 1.0}, 0.0), InvalidArgument);
    EXPECT_THROW(max_cdf_difference(Distribution::uniform("mu", 0, 1), fiducial_distribution({4, 1.0}, 0.0)),
                 KindMismatch);
}

TEST(Posterior, ConjugatePrecisionAdds) {
    const FiducialModel model(25, 4.0);
    const NormalPrior prior{1.0, 2.0};
    const auto post = bayes_posterior(prior, model, 10.0);
    const double prec = 1.0 / 2.0 + 25.0 / 4.0;
    EXPECT_NEAR(normal_of(post).variance, 1.0 / prec, 1e-15);
    EXPECT_NEAR(normal_of(post).mean, (1.0 / 2.0 * 1.0 + 25.0 / 4.0 * 10.0) / prec, 1e-12);
    EXPECT_EQ(post.derivation, "bayesian");
}

TEST(Posterior, ApproachesFiducialLawAsPriorFlattens) {
    const FiducialModel model(25, 4.0);
    const auto fid = fiducial_distribution(model, 10.0);
    const auto report = improper_limit_check(model, 10.0, {4e1, 4e3, 4e6});
    ASSERT_EQ(report.rows.size(), 3u);
    EXPECT_TRUE(report.decreasing);
    EXPECT_LT(report.rows.back().max_cdf_difference, 1e-4);

    // closed form against a dense grid
    for (double tau2 : {0.5, 4.0, 40.0, 4e6}) {
        const auto post = bayes_posterior({0.0, tau2}, model, 10.0);
        const auto& p = normal_of(post);
        const double grid = oracle::grid_sup([&](double x) { return normal_cdf(x, p.mean, p.variance); },
                                             [&](double x) { return normal_cdf(x, 10.0, 0.16); }, 0.0, 14.0, 40001);
        EXPECT_NEAR(max_cdf_difference(post, fid), grid, 1e-4) << tau2;
        EXPECT_GE(max_cdf_difference(post, fid), grid - 1e-9);
    }
    const auto flat = flat_limit(model, 10.0);
    EXPECT_EQ(normal_of(flat).mean, 10.0);
    EXPECT_EQ(normal_of(flat).variance, 0.16);
    EXPECT_EQ(max_cdf_difference(flat, fid), 0.0);
    const auto fp = flat_prior_posterior(model, 10.0);
    EXPECT_EQ(fp.derivation, "bayesian");
    EXPECT_EQ(max_cdf_difference(fp, fid), 0.0);
}

TEST(Dga, ReconstructsTheStatistic) {
    const FiducialModel model(25, 4.0);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto draw = simulate_dga(model, 3.0, seed);
        ASSERT_EQ(draw.data.size(), 25u);
        EXPECT_NEAR(draw.xbar, 3.0 + 0.4 * draw.gamma, 1e-12);
        const double mean = std::accumulate(draw.data.begin(), draw.data.end(), 0.0) / 25.0;
        EXPECT_NEAR(mean, draw.xbar, 1e-12);
    }
    const auto fixed = simulate_dga_given(model, 3.0, 1.5, 9);
    EXPECT_EQ(fixed.gamma, 1.5);
    EXPECT_NEAR(fixed.xbar, 3.6, 1e-12);
    EXPECT_EQ(simulate_dga(model, 3.0, 4).data, simulate_dga(model, 3.0, 4).data);
}

TEST(Dga, PrimaryVariableMoments) {
    const FiducialModel model(4, 1.0);
    const int reps = 20000;
    double s = 0.0, s2 = 0.0;
    for (int r = 0; r < reps; ++r) {
        const double g = simulate_dga(model, 0.0, static_cast<std::uint64_t>(r)).gamma;
        s += g;
        s2 += g * g;
    }
    const double mean = s / reps;
    const double var = s2 / reps - mean * mean;
    EXPECT_NEAR(mean, 0.0, 4.0 / std::sqrt(reps));
    EXPECT_NEAR(var, 1.0, 4.0 * std::sqrt(2.0 / reps));
}

TEST(Coverage, NominalLevelAndWorkerIndependence) {
    const FiducialModel model(25, 4.0);
    const auto one = coverage_check(model, 3.0, 0.95, 10000, 11, 1);
    EXPECT_NEAR(one.coverage(), 0.95, 0.007);
    const auto four = coverage_check(model, 3.0, 0.95, 10000, 11, 4);
    EXPECT_EQ(one.hits, four.hits);
    EXPECT_THROW(coverage_check(model, 3.0, 0.95, 0, 11), InvalidArgument);
}

TEST(FiducialJson, Reports) {
    const nlohmann::json m = FiducialModel(25, 4.0);
    EXPECT_EQ(m.get<FiducialModel>().n, 25);
    const nlohmann::json c = coverage_check({25, 4.0}, 0.0, 0.9, 100, 1);
    EXPECT_TRUE(c.contains("coverage"));
    const nlohmann::json l = improper_limit_check({25, 4.0}, 10.0, {4.0, 40.0});
    EXPECT_EQ(l.at("rows").size(), 2u);
    const nlohmann::json d = simulate_dga({3, 1.0}, 0.0, 1);
    EXPECT_EQ(d.at("data").size(), 3u);
}
