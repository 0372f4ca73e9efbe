#include <gtest/gtest.h>

#include <random>

#include <nlohmann/json.hpp>

#include <strengthlab/similarity.hpp>

#include "oracles.hpp"

using namespace strengthlab;

namespace {

// Terms S(e_i, x): every pair shares the event x, so no judgment needs the
// extended flag.
SimilarityTerm term(int i) { return {EventRef::named("e" + std::to_string(i)), EventRef::named("x")}; }

Judgment judge(int a, int b, Relation r) { return Judgment{term(a), term(b), r}; }

oracle::Rel to_oracle(Relation r) {
    switch (r) {
        case Relation::Less: return oracle::Rel::Less;
        case Relation::Greater: return oracle::Rel::Greater;
        default: return oracle::Rel::Equal;
    }
}

Order expected(oracle::Cmp c) {
    switch (c) {
        case oracle::Cmp::Less: return Order::Less;
        case oracle::Cmp::Greater: return Order::Greater;
        case oracle::Cmp::Equal: return Order::Equal;
        default: return Order::Incomparable;
    }
}

int index_of(const SimilarityTerm& t) { return std::stoi(t.a.as_named()->name.substr(1)); }

bool oracle_consistent(int n, const std::vector<Judgment>& js) {
    oracle::Closure c(n);
    for (const auto& j : js) c.add({index_of(j.lhs), index_of(j.rhs), to_oracle(j.relation)});
    c.solve();
    return c.consistent();
}

}  // namespace

TEST(SimilarityStore, MatchesClosureOracleOnRandomGraphs) {
    std::mt19937_64 gen(2024);
    int conflicts = 0;
    for (int graph = 0; graph < 200; ++graph) {
        const int n = std::uniform_int_distribution<int>(3, 20)(gen);
        const int m = std::uniform_int_distribution<int>(1, 2 * n)(gen);
        SimilarityStore store;
        for (int i = 0; i < n; ++i) store.register_term(term(i));
        oracle::Closure accepted(n);
        for (int e = 0; e < m; ++e) {
            const int a = std::uniform_int_distribution<int>(0, n - 1)(gen);
            int b = std::uniform_int_distribution<int>(0, n - 2)(gen);
            if (b >= a) ++b;
            const auto rel = static_cast<Relation>(std::uniform_int_distribution<int>(0, 2)(gen));

            oracle::Closure trial = accepted;
            trial.add({a, b, to_oracle(rel)});
            trial.solve();
            if (trial.consistent()) {
                ASSERT_NO_THROW(store.record(judge(a, b, rel)));
                accepted = trial;
            } else {
                ++conflicts;
                const auto before = store.size();
                ASSERT_THROW(store.record(judge(a, b, rel)), ConflictError);
                ASSERT_EQ(store.size(), before);
            }
        }
        accepted.solve();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                ASSERT_EQ(store.query(term(i), term(j)), expected(accepted.order(i, j)))
                    << "graph " << graph << " pair " << i << "," << j;
    }
    EXPECT_GT(conflicts, 20);
}

TEST(SimilarityStore, ConflictWitnessIsAMinimalCycle) {
    std::mt19937_64 gen(99);
    int checked = 0;
    for (int graph = 0; graph < 300; ++graph) {
        const int n = std::uniform_int_distribution<int>(3, 8)(gen);
        SimilarityStore store;
        for (int e = 0; e < 3 * n; ++e) {
            const int a = std::uniform_int_distribution<int>(0, n - 1)(gen);
            int b = std::uniform_int_distribution<int>(0, n - 2)(gen);
            if (b >= a) ++b;
            const auto rel = static_cast<Relation>(std::uniform_int_distribution<int>(0, 2)(gen));
            const auto j = judge(a, b, rel);
            try {
                store.record(j);
            } catch (const ConflictError& err) {
                const auto& cycle = err.cycle();
                ASSERT_GE(cycle.size(), 2u);
                EXPECT_EQ(cycle.back().lhs.key(), j.lhs.key());
                EXPECT_EQ(cycle.back().rhs.key(), j.rhs.key());
                EXPECT_FALSE(oracle_consistent(n, cycle));
                for (std::size_t drop = 0; drop < cycle.size(); ++drop) {
                    auto fewer = cycle;
                    fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(drop));
                    EXPECT_TRUE(oracle_consistent(n, fewer)) << "witness not minimal";
                }
                const auto check = store.check(j);
                ASSERT_TRUE(check.has_value());
                EXPECT_EQ(check->cycle().size(), cycle.size());
                ++checked;
            }
        }
    }
    EXPECT_GT(checked, 50);
}

TEST(SimilarityStore, TransitivityExample) {
    SimilarityStore store;
    store.record(judge(0, 1, Relation::Greater));
    store.record(judge(1, 2, Relation::Greater));
    EXPECT_EQ(store.query(term(0), term(2)), Order::Greater);
    EXPECT_EQ(store.query(term(2), term(0)), Order::Less);
    const auto why = store.explain(term(0), term(2));
    EXPECT_EQ(why.size(), 2u);

    try {
        store.record(judge(2, 0, Relation::Greater));
        FAIL() << "cycle accepted";
    } catch (const ConflictError& err) {
        EXPECT_EQ(err.cycle().size(), 3u);
        EXPECT_EQ(err.code(), "conflict");
    }
    EXPECT_EQ(store.size(), 2u);
}

TEST(SimilarityStore, EqualityClassesAndStrictness) {
    SimilarityStore store;
    store.record(judge(0, 1, Relation::Equal));
    store.record(judge(1, 2, Relation::Equal));
    EXPECT_EQ(store.query(term(0), term(2)), Order::Equal);
    store.record(judge(2, 3, Relation::Less));
    EXPECT_EQ(store.query(term(0), term(3)), Order::Less);
    EXPECT_THROW(store.record(judge(3, 0, Relation::Equal)), ConflictError);
    EXPECT_THROW(store.record(judge(3, 1, Relation::Less)), ConflictError);
    EXPECT_TRUE(store.same_class(*store.id_of(term(0)), *store.id_of(term(2))));
}

TEST(SimilarityStore, RecordAllIsAtomic) {
    SimilarityStore store;
    store.record(judge(0, 1, Relation::Less));
    const std::vector<Judgment> batch{judge(5, 6, Relation::Less), judge(6, 7, Relation::Less),
                                      judge(1, 0, Relation::Less)};
    EXPECT_THROW(store.record_all(batch), ConflictError);
    EXPECT_EQ(store.size(), 1u);
    EXPECT_FALSE(store.knows(term(5)));
    EXPECT_FALSE(store.knows(term(7)));
    EXPECT_EQ(store.query(term(0), term(1)), Order::Less);

    store.record_all(std::vector<Judgment>{judge(5, 6, Relation::Less), judge(6, 7, Relation::Less)});
    EXPECT_EQ(store.query(term(5), term(7)), Order::Less);
}

TEST(SimilarityStore, Refusals) {
    SimilarityStore store;
    EXPECT_THROW(store.query(term(0), term(1)), UnknownTerm);
    EXPECT_EQ(store.compare(term(0), term(1)), Order::Incomparable);
    EXPECT_EQ(store.compare(term(0), term(0)), Order::Equal);

    const SimilarityTerm odd(EventRef::named("a"), EventRef::named("x"), "astrology");
    EXPECT_THROW(store.record(Judgment{odd, term(0), Relation::Less}), UnknownMethod);
    store.register_method("astrology");
    EXPECT_NO_THROW(store.record(Judgment{odd, term(0), Relation::Less}));

    const SimilarityTerm p(EventRef::named("p"), EventRef::named("q"));
    const SimilarityTerm r(EventRef::named("r"), EventRef::named("s"));
    EXPECT_THROW(store.record(Judgment{p, r, Relation::Less}), SharedArgumentError);
    Judgment cross{p, r, Relation::Less};
    cross.extended = true;
    EXPECT_NO_THROW(store.record(cross));
}

TEST(SimilarityStore, TermsAreUnorderedInTheirArguments) {
    SimilarityStore store;
    const SimilarityTerm ab(EventRef::named("a"), EventRef::named("b"));
    const SimilarityTerm ba(EventRef::named("b"), EventRef::named("a"));
    EXPECT_EQ(ab.key(), ba.key());
    store.register_term(ab);
    EXPECT_TRUE(store.knows(ba));
    EXPECT_NE(SimilarityTerm(EventRef::named("a"), EventRef::named("b"), "bayesian").key(), ab.key());
}

TEST(SimilarityStore, FunctionalRecordLeavesOriginalUntouched) {
    SimilarityStore base;
    base.record(judge(0, 1, Relation::Less));
    const auto next = record_judgment(base, judge(1, 2, Relation::Less));
    EXPECT_EQ(base.size(), 1u);
    EXPECT_EQ(query_order(next, term(0), term(2)), Order::Less);
    EXPECT_FALSE(base.knows(term(2)));
}

TEST(SimilarityStore, ExportImportPreservesEveryOrder) {
    std::mt19937_64 gen(5);
    SimilarityStore store;
    const int n = 12;
    for (int e = 0; e < 40; ++e) {
        const int a = std::uniform_int_distribution<int>(0, n - 1)(gen);
        const int b = (a + std::uniform_int_distribution<int>(1, n - 1)(gen)) % n;
        const auto rel = static_cast<Relation>(std::uniform_int_distribution<int>(0, 2)(gen));
        if (!store.check(judge(a, b, rel))) store.record(judge(a, b, rel));
    }
    const auto text = export_store(store).dump();
    const auto back = import_store(nlohmann::json::parse(text));
    EXPECT_EQ(back.size(), store.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) EXPECT_EQ(back.compare(term(i), term(j)), store.compare(term(i), term(j)));
    EXPECT_EQ(export_store(back).dump(), text);
}

TEST(SimilarityJson, TermAndJudgmentRoundTrip) {
    const SimilarityTerm t(EventRef::named("rain"), EventRef::reference(ReferenceSet::discrete(10), 0.3), "bayesian");
    const nlohmann::json j = t;
    const auto back = j.get<SimilarityTerm>();
    EXPECT_EQ(back.key(), t.key());
    Judgment jd{t, SimilarityTerm(EventRef::named("rain"), EventRef::named("x")), Relation::Greater, "agent"};
    const nlohmann::json jj = jd;
    const auto jd2 = jj.get<Judgment>();
    EXPECT_EQ(jd2.relation, Relation::Greater);
    EXPECT_EQ(jd2.source, "agent");
    EXPECT_EQ(jd2.lhs.key(), t.key());
}

// ---------------------------------------------------------------------------
// argmax over a reference grid

namespace {

/// Ambiguity-averse assessor: S(E, R(l)) is flat on [lo, hi] and falls away
/// linearly outside it. Adjacent grid terms are compared by that score.
void assess_flat(SimilarityStore& store, const EventRef& e, double lo, double hi, const std::vector<double>& grid) {
    const auto score = [&](double l) { return l < lo - 1e-12 ? l - lo : (l > hi + 1e-12 ? hi - l : 0.0); };
    const auto refset = ReferenceSet::continuous();
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double s0 = score(grid[i]);
        const double s1 = score(grid[i + 1]);
        const auto rel = std::abs(s0 - s1) < 1e-12 ? Relation::Equal : (s0 < s1 ? Relation::Less : Relation::Greater);
        store.record(Judgment{SimilarityTerm(e, EventRef::reference(refset, grid[i])),
                              SimilarityTerm(e, EventRef::reference(refset, grid[i + 1])), rel});
    }
}

}  // namespace

TEST(Argmax, AmbiguityAverseAgentIsNonAdditive) {
    const auto grid = unit_grid(0.1);
    SimilarityStore store;
    const auto e = EventRef::named("E");
    const auto ec = EventRef::named("not-E");
    assess_flat(store, e, 0.3, 0.4, grid);
    assess_flat(store, ec, 0.6, 0.7, grid);

    const auto re = argmax_similarity(store, e, ReferenceSet::continuous(), grid);
    const auto rc = argmax_similarity(store, ec, ReferenceSet::continuous(), grid);
    ASSERT_EQ(re.maximizers.size(), 2u);
    ASSERT_EQ(rc.maximizers.size(), 2u);
    EXPECT_TRUE(re.imprecise);
    EXPECT_NEAR(re.lower(), 0.3, 1e-12);
    EXPECT_NEAR(re.upper(), 0.4, 1e-12);
    EXPECT_NEAR(rc.lower(), 0.6, 1e-12);
    EXPECT_NEAR(rc.upper(), 0.7, 1e-12);
    // lower probabilities sum below one and upper ones above
    EXPECT_LT(re.lower() + rc.lower(), 1.0 - 1e-9);
    EXPECT_GT(re.upper() + rc.upper(), 1.0 + 1e-9);
    EXPECT_FALSE(re.unjudged);
}

TEST(Argmax, PreciseMaximizerOnDiscreteGrid) {
    const auto refset = ReferenceSet::discrete(10);
    const auto grid = refset.grid();
    SimilarityStore store;
    const auto e = EventRef::named("coin-lands-heads");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const auto rel = grid[i + 1] <= 0.5 + 1e-12 ? Relation::Less : Relation::Greater;
        store.record(Judgment{SimilarityTerm(e, EventRef::reference(refset, grid[i])),
                              SimilarityTerm(e, EventRef::reference(refset, grid[i + 1])), rel});
    }
    const auto r = argmax_similarity(store, e, refset, grid);
    ASSERT_EQ(r.maximizers.size(), 1u);
    EXPECT_NEAR(r.maximizers[0], 0.5, 1e-12);
    EXPECT_FALSE(r.imprecise);
    EXPECT_FALSE(r.weak_analogy);
}

TEST(Argmax, UnjudgedGridReturnsEverything) {
    SimilarityStore store;
    const auto grid = unit_grid(0.25);
    const auto r = argmax_similarity(store, EventRef::named("E"), ReferenceSet::continuous(), grid);
    EXPECT_TRUE(r.unjudged);
    EXPECT_EQ(r.maximizers.size(), grid.size());
    EXPECT_FALSE(r.notes.empty());
}

TEST(Argmax, WeakAnalogyAgainstSelfSimilarity) {
    const auto grid = unit_grid(0.1);
    const auto refset = ReferenceSet::continuous();
    SimilarityStore store;
    const auto e = EventRef::named("E");
    assess_flat(store, e, 0.5, 0.5, grid);
    auto r = argmax_similarity(store, e, refset, grid);
    ASSERT_EQ(r.maximizers.size(), 1u);
    EXPECT_FALSE(r.weak_analogy);

    const auto r5 = EventRef::reference(refset, grid[5]);
    store.record(Judgment{SimilarityTerm(e, r5), SimilarityTerm(r5, r5), Relation::Less});
    r = argmax_similarity(store, e, refset, grid);
    EXPECT_TRUE(r.weak_analogy);
}

TEST(Argmax, WeakAnalogyAgainstNeighbouringReference) {
    const auto grid = unit_grid(0.1);
    const auto refset = ReferenceSet::continuous();
    SimilarityStore store;
    const auto e = EventRef::named("E");
    assess_flat(store, e, 0.5, 0.5, grid);
    const auto r5 = EventRef::reference(refset, grid[5]);
    const auto r6 = EventRef::reference(refset, grid[6]);
    store.record(Judgment{SimilarityTerm(e, r5), SimilarityTerm(r6, r5), Relation::Less});
    EXPECT_TRUE(argmax_similarity(store, e, refset, grid).weak_analogy);
}

TEST(Argmax, RejectsOffGridResolutions) {
    SimilarityStore store;
    EXPECT_THROW(argmax_similarity(store, EventRef::named("E"), ReferenceSet::discrete(10), {0.35}), OutOfRange);
    EXPECT_THROW(argmax_similarity(store, EventRef::named("E"), ReferenceSet::continuous(), {}), InvalidArgument);
    EXPECT_THROW(unit_grid(0.3), InvalidArgument);
}
