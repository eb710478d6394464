#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "wordeff/linearize.hpp"
#include "wordeff/synthetic.hpp"

using namespace wordeff;

namespace {

Treebank example() {
    std::ifstream in(WORDEFF_DATA_DIR "/when_i_left.tsv");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_conllx(ss.str());
}

std::string words(const Sentence& s) {
    std::string out;
    for (const auto& t : s.tokens()) out += (out.empty() ? "" : " ") + t.form;
    return out;
}

SyntheticSpec branching_spec() {
    SyntheticSpec spec;
    spec.vocabulary = {"a", "b", "c", "d", "e"};
    spec.types = {{"A", 0.7, -0.6, {}}, {"B", 0.6, 0.2, {}}, {"C", 0.5, 0.5, {}}, {"D", 0.4, -0.1, {}}};
    spec.max_depth = 3;
    spec.max_arity = 3;
    return spec;
}

}  // namespace

TEST(Linearize, ReweightedOrder) {
    const Treebank tb = example();
    const Sentence& s = tb.sentences()[0];
    WeightedGrammar g;
    g.weights = {{"SBAR>S", -0.7}, {"DT>NN", -0.5}, {"S>SBAR", 0.3}, {"SBJ>S", 0.5}};
    const Sentence out = apply_linearization(s, linearize_fixed(s, g));
    EXPECT_EQ(words(out), "When arrived the man left I");
}

TEST(Linearize, AttestedGrammarIsIdentity) {
    const Treebank tb = example();
    const Sentence& s = tb.sentences()[0];
    WeightedGrammar g;
    g.weights = {{"SBAR>S", -0.9}, {"SBJ>S", -0.1}, {"S>SBAR", 0.3}, {"DT>NN", -0.5}};
    EXPECT_TRUE(linearize_fixed(s, g).is_identity());
}

TEST(Linearize, MissingTypeNamesIt) {
    const Treebank tb = example();
    const Sentence& s = tb.sentences()[0];
    WeightedGrammar g;
    g.weights = {{"SBAR>S", -0.9}};
    try {
        linearize_fixed(s, g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("SBJ>S"), std::string::npos);
    }
}

TEST(Linearize, EqualWeightsKeepOriginalOrder) {
    const Treebank tb = parse_conllx("1\tx\t3\tA\n2\ty\t3\tA\n3\th\t0\tROOT\n");
    WeightedGrammar g;
    g.weights = {{"A", 0.4}};
    EXPECT_EQ(words(apply_linearization(tb.sentences()[0], linearize_fixed(tb.sentences()[0], g))), "h x y");
}

TEST(Linearize, HeadednessKeepsSides) {
    const Treebank tb = example();
    const Sentence& s = tb.sentences()[0];
    const HeadednessMap sides{{"SBAR>S", Side::left}, {"SBJ>S", Side::left}, {"S>SBAR", Side::right},
                              {"DT>NN", Side::left}};
    std::set<std::string> seen;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        Rng rng(seed);
        const Linearization lin = linearize_fixed_headedness(s, sides, rng);
        // "When" block and "I" both precede "left".
        EXPECT_LT(lin.position[0], lin.position[5]);
        EXPECT_LT(lin.position[4], lin.position[5]);
        seen.insert(words(apply_linearization(s, lin)));
    }
    EXPECT_EQ(seen.size(), 2u);
    EXPECT_TRUE(seen.count("When the man arrived I left"));
    EXPECT_TRUE(seen.count("I When the man arrived left"));
}

TEST(Linearize, FreeReachesEveryOrderOfOneHead) {
    const Treebank tb = parse_conllx("1\tx\t2\tA\n2\th\t0\tROOT\n3\ty\t2\tB\n");
    std::set<std::string> seen;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(seed);
        seen.insert(words(apply_linearization(tb.sentences()[0], linearize_free(tb.sentences()[0], rng))));
    }
    EXPECT_EQ(seen.size(), 6u);
}

TEST(Linearize, AllModesProjectiveAndPreserving) {
    const Treebank tb = generate_synthetic(branching_spec(), 200, 5);
    const auto types = dep_type_inventory(tb);
    const WeightedGrammar g = sample_weights(types, 11);
    Rng side_rng(3);
    const HeadednessMap sides = sample_headedness(types, side_rng);
    Rng rng(9);
    for (const auto& s : tb.sentences()) {
        for (const Linearization& lin : {linearize_fixed(s, g), linearize_free(s, rng),
                                         linearize_fixed_headedness(s, sides, rng)}) {
            ASSERT_TRUE(lin.is_bijection());
            ASSERT_TRUE(is_projective(s, lin));
            const Sentence out = apply_linearization(s, lin);
            auto forms = [](const Sentence& x) {
                std::vector<std::string> f;
                for (const auto& t : x.tokens()) f.push_back(t.form);
                std::sort(f.begin(), f.end());
                return f;
            };
            EXPECT_EQ(forms(out), forms(s));
            for (std::size_t i = 1; i <= s.size(); ++i) {
                const std::size_t p = lin.position[i - 1];
                EXPECT_EQ(out.arc(p).dep_type, s.arc(i).dep_type);
                EXPECT_EQ(out.head(p), s.head(i) == kRoot ? kRoot : lin.position[s.head(i) - 1]);
            }
        }
    }
}

TEST(Linearize, ProjectivityCheckRejectsCrossing) {
    // a<-c, b<-d crossing when read as 1 2 3 4 with heads 3,4,0,3.
    const Treebank tb = parse_conllx("1\ta\t3\tX\n2\tb\t4\tX\n3\tc\t0\tROOT\n4\td\t3\tX\n");
    Linearization lin;
    lin.position = {1, 2, 3, 4};
    EXPECT_FALSE(is_projective(tb.sentences()[0], lin));
}

TEST(Weights, SampleWeightsContract) {
    const std::vector<std::string> types{"c", "a", "b", "a"};
    const WeightedGrammar g = sample_weights(types, 42);
    EXPECT_EQ(g.size(), 3u);
    std::set<double> values;
    for (const auto& [t, w] : g.weights) {
        EXPECT_GT(w, -1.0);
        EXPECT_LT(w, 1.0);
        EXPECT_NE(w, 0.0);
        values.insert(w);
    }
    EXPECT_EQ(values.size(), 3u);
    EXPECT_EQ(sample_weights(types, 42), g);
    EXPECT_NE(sample_weights(types, 43), g);
}

TEST(Reorder, DeterministicAndIdentity) {
    const Treebank tb = generate_synthetic(branching_spec(), 50, 1);
    EXPECT_EQ(reorder_corpus(tb, IdentityOrder{}), tb);
    EXPECT_EQ(reorder_corpus(tb, FreeOrder{7}), reorder_corpus(tb, FreeOrder{7}));
    EXPECT_NE(reorder_corpus(tb, FreeOrder{7}), reorder_corpus(tb, FreeOrder{8}));
    const OrderingMode m = FreeOrder{7};
    EXPECT_NE(reorder_corpus(tb, reseed(m, 1)), reorder_corpus(tb, reseed(m, 2)));
}

TEST(Synthetic, GrammarOrderIsReproducible) {
    const SyntheticSpec spec = branching_spec();
    const Treebank tb = generate_synthetic(spec, 100, 3);
    EXPECT_EQ(tb, generate_synthetic(spec, 100, 3));
    WeightedGrammar native;
    for (const auto& t : spec.types) native.weights[t.name] = t.weight;
    for (const auto& s : tb.sentences()) EXPECT_TRUE(linearize_fixed(s, native).is_identity());
}
