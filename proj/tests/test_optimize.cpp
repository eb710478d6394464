#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "brute_force.hpp"
#include "wordeff/optimize.hpp"
#include "wordeff/synthetic.hpp"

using namespace wordeff;

namespace {

Treebank example() {
    std::ifstream in(WORDEFF_DATA_DIR "/when_i_left.tsv");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_conllx(ss.str());
}

SyntheticSpec spec(std::size_t n_types) {
    SyntheticSpec s;
    s.vocabulary = {"ba", "de", "fi", "go", "hu", "ja", "ke", "lo"};
    const std::vector<SyntheticType> all{{"A", 0.7, -0.5, {}}, {"B", 0.6, 0.3, {}}, {"C", 0.5, 0.6, {}},
                                         {"D", 0.4, -0.2, {}}};
    s.types.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_types));
    s.max_depth = 2;
    s.max_arity = 3;
    return s;
}

WeightedGrammar grammar(std::initializer_list<std::pair<const std::string, double>> w) {
    WeightedGrammar g;
    g.weights = w;
    return g;
}

}  // namespace

TEST(Interactions, Example) {
    const InteractionTable t = build_interaction_table(example());
    EXPECT_EQ(t.at("SBAR>S"), std::set<std::string>{"SBJ>S"});
    EXPECT_EQ(t.at("SBJ>S"), std::set<std::string>{"SBAR>S"});
    EXPECT_TRUE(t.at("DT>NN").empty());
    EXPECT_TRUE(t.at("S>SBAR").empty());
}

TEST(Interactions, SelfAndSymmetry) {
    const InteractionTable t = build_interaction_table(
        parse_conllx("1\tx\t3\tA\n2\ty\t3\tA\n3\th\t0\tROOT\n4\tz\t3\tB\n"));
    EXPECT_EQ(t.at("A"), (std::set<std::string>{"A", "B"}));
    const InteractionTable big = build_interaction_table(generate_synthetic(spec(4), 100, 1));
    for (const auto& [a, others] : big) {
        for (const auto& b : others) EXPECT_TRUE(big.at(b).count(a)) << a << " " << b;
    }
    const InteractionTable none = build_interaction_table(parse_conllx("1\tx\t2\tA\n2\th\t0\tROOT\n"));
    EXPECT_TRUE(none.at("A").empty());
}

TEST(Candidates, MidpointsOfInteractingWeights) {
    const InteractionTable t{{"T", {"P", "Q"}}, {"P", {"T"}}, {"Q", {"T"}}, {"R", {"S"}}, {"S", {"R"}}, {"L", {}}};
    const auto g = grammar({{"T", 0.9}, {"P", -0.4}, {"Q", 0.2}, {"R", 0.1}, {"S", 0.5}, {"L", -0.3}});
    const auto c = candidate_values("T", g, t);
    ASSERT_EQ(c.size(), 3u);
    EXPECT_NEAR(c[0], -0.7, 1e-15);
    EXPECT_NEAR(c[1], -0.1, 1e-15);
    EXPECT_NEAR(c[2], 0.6, 1e-15);
    EXPECT_EQ(candidate_values("L", g, t), std::vector<double>{-0.3});
    const auto r = candidate_values("R", g, t);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_NEAR(r[0], -0.25, 1e-15);
    EXPECT_NEAR(r[1], 0.75, 1e-15);
}

TEST(Candidates, HeadPolicies) {
    const InteractionTable t{{"T", {"P"}}, {"P", {"T"}}, {"L", {}}};
    const auto g = grammar({{"T", 0.9}, {"P", 0.4}, {"L", -0.3}});
    const auto cross = candidate_values("T", g, t, HeadPolicy::crossable);
    ASSERT_EQ(cross.size(), 3u);
    EXPECT_NEAR(cross[0], -0.5, 1e-15);
    EXPECT_NEAR(cross[1], 0.2, 1e-15);
    EXPECT_NEAR(cross[2], 0.7, 1e-15);
    const auto frozen = candidate_values("T", g, t, HeadPolicy::frozen);
    ASSERT_EQ(frozen.size(), 2u);
    EXPECT_NEAR(frozen[0], 0.2, 1e-15);
    EXPECT_NEAR(frozen[1], 0.7, 1e-15);
    const auto lone = candidate_values("L", g, t, HeadPolicy::crossable);
    ASSERT_EQ(lone.size(), 2u);
    EXPECT_NEAR(lone[0], -0.5, 1e-15);
    EXPECT_NEAR(lone[1], 0.5, 1e-15);
    EXPECT_EQ(candidate_values("L", g, t, HeadPolicy::frozen), std::vector<double>{-0.3});
    for (double c : candidate_values("T", grammar({{"T", 0.1}, {"P", 0.4}, {"Q", -0.4}}), {{"T", {"P", "Q"}}, {"Q", {"T"}}, {"P", {"T"}}})) {
        EXPECT_NE(c, 0.0);
    }
}

TEST(Objective, Endpoints) {
    EfficiencyPoint p;
    p.dl = 2.0;
    p.h_char = 0.4;
    p.h_word = 7.0;
    EXPECT_EQ(objective_value(p, Objective::joint(0.0)), 2.0);
    EXPECT_EQ(objective_value(p, Objective::joint(1.0)), 0.4);
    EXPECT_NEAR(objective_value(p, Objective::joint(0.5)), 1.2, 1e-15);
    EXPECT_NEAR(objective_value(p, Objective::joint(0.5, Metric::h_word)), 4.5, 1e-15);
    EXPECT_THROW(Objective::joint(1.5), Error);
    Objective bad = Objective::dl();
    bad.alpha = 0.5;
    EXPECT_THROW(bad.validate(), Error);
}

TEST(Objective, FullEvaluationMatchesPoint) {
    const PreparedCorpus corpus(generate_synthetic(spec(3), 80, 5), SplitSpec{});
    const WeightedGrammar g = sample_weights(corpus.types(), 3);
    const EfficiencyPoint p = efficiency_point(corpus, FixedOrder{g});
    EXPECT_EQ(evaluate_objective(corpus, g, Objective::dl()), p.dl);
    EXPECT_EQ(evaluate_objective(corpus, g, Objective::id_char()), p.h_char);
    EXPECT_EQ(evaluate_objective(corpus, g, Objective::id_word()), p.h_word);
    EXPECT_EQ(evaluate_objective(corpus, g, Objective::joint(0.0)), p.dl);
    EXPECT_EQ(evaluate_objective(corpus.full(), SplitSpec{}, g, Objective::joint(0.7)),
              0.3 * p.dl + 0.7 * p.h_char);
}

TEST(DlShortcut, MatchesFullRecomputation) {
    const PreparedCorpus corpus(generate_synthetic(spec(4), 150, 6), SplitSpec{});
    WeightedGrammar g = sample_weights(corpus.types(), 1);
    DlEvaluator inc(corpus.test(), g);
    Rng rng(4);
    for (int step = 0; step < 40; ++step) {
        const std::string& t = corpus.types()[rng.below(corpus.types().size())];
        double w = rng.uniform(-1.0, 1.0);
        if (w == 0.0) w = 0.5;
        WeightedGrammar trial = g;
        trial.weights.at(t) = w;
        const double full = avg_dependency_length(reorder_corpus(corpus.test(), FixedOrder{trial}));
        EXPECT_NEAR(inc.value_with(t, w), full, 1e-12);
        if (step % 2 == 0) {
            inc.commit(t, w);
            g = trial;
            EXPECT_NEAR(inc.value(), full, 1e-12);
        }
    }
}

TEST(Optimize, NoInteractionsConvergesInOneSweep) {
    std::string text;
    for (int i = 0; i < 20; ++i) text += "1\tx\t2\tA\n2\ty\t3\tB\n3\th\t0\tROOT\n\n";
    const PreparedCorpus corpus(parse_conllx(text), SplitSpec{});
    // Each head has one dependent, so no weight can change the objective under
    // the literal rule; with the head as a breakpoint, only side flips remain.
    OptimizeConfig cfg;
    cfg.freeze_headedness = true;
    const auto r = optimize(corpus, Objective::dl(), sample_weights(corpus.types(), 2), cfg);
    EXPECT_TRUE(r.trace.converged);
    EXPECT_EQ(r.trace.passes, 1u);
    EXPECT_TRUE(r.trace.steps.empty());
}

TEST(Optimize, DlReachesBruteForceMinimum) {
    for (std::uint64_t corpus_seed : {1, 2, 3}) {
        const PreparedCorpus corpus(generate_synthetic(spec(4), 60, corpus_seed), SplitSpec{});
        const auto ex = oracle::enumerate(corpus);
        const double best = oracle::minimum(ex, [](const EfficiencyPoint& p) { return p.dl; }).first;
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            const auto r = optimize(corpus, Objective::dl(), sample_weights(corpus.types(), seed));
            EXPECT_NEAR(r.trace.final_objective, best, 1e-12) << corpus_seed << "/" << seed;
            EXPECT_TRUE(r.trace.converged);
        }
    }
}

TEST(Optimize, TraceStrictlyDecreases) {
    const PreparedCorpus corpus(generate_synthetic(spec(4), 80, 9), SplitSpec{});
    for (const Objective& obj : {Objective::dl(), Objective::id_char(), Objective::joint(0.5)}) {
        const auto init = sample_weights(corpus.types(), 17);
        const auto r = optimize(corpus, obj, init);
        double prev = r.trace.initial_objective;
        for (const auto& s : r.trace.steps) {
            EXPECT_LT(s.objective, prev);
            EXPECT_EQ(init.contains(s.type), true);
            prev = s.objective;
        }
        EXPECT_LE(r.trace.final_objective, r.trace.initial_objective);
        EXPECT_EQ(r.grammar, r.trace.final_grammar);
        EXPECT_NEAR(evaluate_objective(corpus, r.grammar, obj), r.trace.final_objective, 1e-12);
    }
}

TEST(Optimize, CandidatesCoverDenseGrid) {
    const PreparedCorpus corpus(generate_synthetic(spec(4), 60, 4), SplitSpec{});
    const InteractionTable table = build_interaction_table(corpus.full());
    const WeightedGrammar g = sample_weights(corpus.types(), 8);
    for (const auto& t : corpus.types()) {
        auto dl_at = [&](double w) {
            WeightedGrammar trial = g;
            trial.weights.at(t) = w;
            return avg_dependency_length(reorder_corpus(corpus.test(), FixedOrder{trial}));
        };
        double grid_best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 1000; ++i) {
            const double w = -1.0 + (i + 0.5) * 2.0 / 1000.0;
            grid_best = std::min(grid_best, dl_at(w));
        }
        double cand_best = std::numeric_limits<double>::infinity();
        for (double c : candidate_values(t, g, table, HeadPolicy::crossable)) cand_best = std::min(cand_best, dl_at(c));
        EXPECT_EQ(cand_best, grid_best) << t;
    }
}

TEST(Optimize, FrozenHeadednessKeepsSigns) {
    const PreparedCorpus corpus(generate_synthetic(spec(4), 60, 7), SplitSpec{});
    const WeightedGrammar init = sample_weights(corpus.types(), 21);
    OptimizeConfig cfg;
    cfg.freeze_headedness = true;
    const auto r = optimize(corpus, Objective::dl(), init, cfg);
    for (const auto& [t, w] : init.weights) EXPECT_EQ(w < 0.0, r.grammar.at(t) < 0.0) << t;
}

TEST(Optimize, MaxPassesReturnsBestSoFar) {
    const PreparedCorpus corpus(generate_synthetic(spec(4), 80, 3), SplitSpec{});
    std::optional<OptimizeResult> full;
    WeightedGrammar init;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        init = sample_weights(corpus.types(), seed);
        auto r = optimize(corpus, Objective::dl(), init);
        if (r.trace.passes >= 2) {
            full = std::move(r);
            break;
        }
    }
    ASSERT_TRUE(full.has_value()) << "no start needed more than one improving pass";
    OptimizeConfig cfg;
    cfg.max_passes = 1;
    const auto cut = optimize(corpus, Objective::dl(), init, cfg);
    EXPECT_FALSE(cut.trace.converged);
    EXPECT_EQ(cut.trace.passes, 1u);
    ASSERT_FALSE(cut.trace.steps.empty());
    EXPECT_EQ(cut.trace.final_objective, cut.trace.steps.back().objective);
    EXPECT_GE(cut.trace.final_objective, full->trace.final_objective);
}

TEST(Optimize, RejectsPartialGrammar) {
    const PreparedCorpus corpus(generate_synthetic(spec(3), 40, 3), SplitSpec{});
    EXPECT_THROW(optimize(corpus, Objective::dl(), grammar({{"A", 0.5}})), Error);
}

TEST(Optimize, ParallelCandidatesAndCacheDoNotChangeResult) {
    const PreparedCorpus corpus(generate_synthetic(spec(3), 60, 12), SplitSpec{});
    const auto init = sample_weights(corpus.types(), 5);
    const auto plain = optimize(corpus, Objective::id_word(), init);
    OptimizeConfig cfg;
    cfg.threads = 3;
    cfg.cache_dir = (std::filesystem::temp_directory_path() / "wordeff-cache-test").string();
    std::filesystem::remove_all(cfg.cache_dir);
    const auto a = optimize(corpus, Objective::id_word(), init, cfg);
    const auto b = optimize(corpus, Objective::id_word(), init, cfg);
    for (const auto* r : {&a, &b}) {
        EXPECT_EQ(r->grammar, plain.grammar);
        EXPECT_EQ(r->trace.final_objective, plain.trace.final_objective);
        EXPECT_EQ(r->trace.steps.size(), plain.trace.steps.size());
    }
    std::filesystem::remove_all(cfg.cache_dir);
}

TEST(GrammarHash, OrderEquivalence) {
    EXPECT_EQ(grammar_hash(grammar({{"A", -0.5}, {"B", 0.2}})), grammar_hash(grammar({{"A", -0.9}, {"B", 0.7}})));
    EXPECT_NE(grammar_hash(grammar({{"A", -0.5}, {"B", 0.2}})), grammar_hash(grammar({{"A", 0.5}, {"B", 0.2}})));
}

TEST(Restarts, IdenticalSeedsHaveZeroVariance) {
    const PreparedCorpus corpus(generate_synthetic(spec(3), 50, 2), SplitSpec{});
    const auto r = restart_variance(corpus, Objective::dl(), {7, 7});
    EXPECT_EQ(r.variance, 0.0);
    EXPECT_THROW(restart_variance(corpus, Objective::dl(), {7}), Error);
}

TEST(Frontier, EndpointsMatchSeparateRuns) {
    const PreparedCorpus corpus(generate_synthetic(spec(3), 60, 6), SplitSpec{});
    InitPolicy init;
    init.seed = 4;
    const auto pts = frontier_sweep(corpus, default_alphas(), init);
    ASSERT_EQ(pts.size(), 7u);
    const auto g0 = sample_weights(corpus.types(), 4);
    const auto dl = optimize(corpus, Objective::dl(), g0);
    const auto id = optimize(corpus, Objective::id_char(), g0);
    EXPECT_EQ(pts.front().grammar, dl.grammar);
    EXPECT_EQ(pts.front().point.dl, dl.trace.final_objective);
    EXPECT_EQ(pts.back().grammar, id.grammar);
    EXPECT_EQ(pts.back().point.h_char, id.trace.final_objective);
    EXPECT_TRUE(std::isnan(pts.front().z_dl));
    EXPECT_THROW(frontier_sweep(corpus, {1.5}, init), Error);
}
