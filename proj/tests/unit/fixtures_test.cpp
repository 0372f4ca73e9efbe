#include <gtest/gtest.h>

#include <strengthlab/fixtures.hpp>

using namespace strengthlab;

TEST(GeneratorVsClinician, GeneratorStrongerAtEveryResolution) {
    const auto fx = generator_vs_clinician_fixture();
    ASSERT_EQ(fx.grid.size(), 19u);
    for (double lambda : fx.grid) {
        const auto f = fx.family("generator", lambda);
        const auto g = fx.family("clinician", lambda);
        EXPECT_EQ(internal_strength(f, g, fx.store, fx.refset).relation, Verdict::Stronger) << lambda;
        EXPECT_EQ(compare_representativeness(f, g, fx.store, fx.refset).relation, Verdict::Stronger) << lambda;
        EXPECT_EQ(compare_representativeness(g, f, fx.store, fx.refset).relation, Verdict::Weaker) << lambda;
    }
    for (const auto& j : fx.store.judgments()) EXPECT_EQ(j.source, "fixture");
}

TEST(UrnsAndElection, KnownUrnStrongestElectionWeaker) {
    const auto fx = urns_and_election_fixture();
    const auto f = fx.family("unknown-urn", 0.5);
    const auto g = fx.family("known-urn", 0.5);
    const auto h = fx.family("election", 0.5);
    EXPECT_EQ(compare_representativeness(g, f, fx.store, fx.refset).relation, Verdict::Stronger);
    EXPECT_EQ(compare_representativeness(h, g, fx.store, fx.refset).relation, Verdict::Weaker);
    // never compared with each other
    EXPECT_EQ(compare_representativeness(h, f, fx.store, fx.refset).relation, Verdict::Indeterminate);
    EXPECT_THROW(fx.family("no-such-role", 0.5), NotFound);
}

TEST(Ledger, FiducialMethodBetterJustified) {
    for (auto variant : {LedgerVariant::Plain, LedgerVariant::Smiled}) {
        const auto fx = build_ledger_fixture(variant);
        for (double lambda : fx.grid) {
            const auto fid = fx.family("fiducial", lambda);
            EXPECT_EQ(best_reasoning_method(fid, fx.store, "fiducial", "bayesian", fx.refset).relation,
                      Verdict::Stronger)
                << lambda;
            EXPECT_EQ(best_reasoning_method(fid, fx.store, "bayesian", "fiducial", fx.refset).relation,
                      Verdict::Weaker)
                << lambda;
        }
    }
}

TEST(Ledger, VerdictFollowsTheData) {
    // trading the method tags in the judgments trades the verdict
    const auto fx = build_ledger_fixture(LedgerVariant::Plain, true);
    for (double lambda : fx.grid) {
        const auto fid = fx.family("fiducial", lambda);
        EXPECT_EQ(best_reasoning_method(fid, fx.store, "fiducial", "bayesian", fx.refset).relation, Verdict::Weaker);
    }
}

TEST(Ledger, EntriesCoverEveryRoleAndResolution) {
    const auto fx = build_ledger_fixture();
    EXPECT_EQ(fx.entries.size(), 6u * fx.grid.size());
    std::size_t total = 0;
    for (const auto& e : fx.entries) total += e.judgments.size();
    EXPECT_EQ(total, fx.store.size());
    const auto& posterior = std::get<NormalForm>(fx.laws.at("posterior").form());
    EXPECT_NEAR(posterior.mean, 10.0 * 6.25 / (6.25 + 0.01), 1e-12);
    // the prior-led laws sit below the forecast under direct and bayesian evaluation
    for (double lambda : fx.grid)
        EXPECT_EQ(compare_representativeness(fx.family("prior", lambda), fx.family("forecast", lambda), fx.store,
                                             fx.refset)
                      .relation,
                  Verdict::Weaker);
}
