#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "wordeff/treebank.hpp"

using namespace wordeff;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Treebank example() { return parse_conllx(read_file(WORDEFF_DATA_DIR "/when_i_left.tsv")); }

std::string tree_line(std::size_t id, const char* form, const char* head, const char* label) {
    return std::to_string(id) + "\t" + form + "\t" + head + "\t" + label + "\n";
}

Treebank numbered(std::size_t n) {
    std::string text;
    for (std::size_t i = 0; i < n; ++i) text += "1\tw" + std::to_string(i) + "\t0\tROOT\n\n";
    return parse_conllx(text);
}

}  // namespace

TEST(Parse, Example) {
    const Treebank tb = example();
    ASSERT_EQ(tb.size(), 1u);
    const Sentence& s = tb.sentences()[0];
    EXPECT_EQ(s.size(), 6u);
    EXPECT_EQ(s.non_root_arc_count(), 5u);
    EXPECT_EQ(s.root(), 6u);
    EXPECT_EQ(s.token(1).form, "When");
    EXPECT_EQ(s.head(4), 1u);
    EXPECT_EQ(s.arc(3).dep_type, "SBJ>S");
    EXPECT_EQ(tb.arc_count(), 5u);
}

TEST(Parse, SingleToken) {
    const Treebank tb = parse_conllx("1\ta\t0\tROOT\n");
    ASSERT_EQ(tb.size(), 1u);
    EXPECT_EQ(tb.sentences()[0].non_root_arc_count(), 0u);
    EXPECT_EQ(tb.charset_size(), 1u);
}

TEST(Parse, SelfHeadIsStructuralError) {
    const std::string text = tree_line(1, "a", "0", "ROOT") + tree_line(2, "b", "2", "X");
    EXPECT_THROW(parse_conllx(text), StructureError);
}

TEST(Parse, CycleNamesSentence) {
    const std::string ok = tree_line(1, "a", "0", "ROOT") + "\n";
    const std::string bad = tree_line(1, "a", "0", "ROOT") + tree_line(2, "b", "3", "X") +
                            tree_line(3, "c", "2", "X");
    try {
        parse_conllx(ok + bad);
        FAIL() << "expected a structural error";
    } catch (const StructureError& e) {
        EXPECT_EQ(e.sentence(), 2u);
        EXPECT_NE(std::string(e.what()).find("cycle"), std::string::npos);
    }
}

TEST(Parse, MultipleAndMissingRoots) {
    EXPECT_THROW(parse_conllx(tree_line(1, "a", "0", "ROOT") + tree_line(2, "b", "0", "ROOT")),
                 StructureError);
    EXPECT_THROW(parse_conllx(tree_line(1, "a", "2", "X") + tree_line(2, "b", "1", "X")),
                 StructureError);
}

TEST(Parse, MalformedLineCarriesLineNumber) {
    const std::string text = "# comment\n" + tree_line(1, "a", "0", "ROOT") + "2\tb\tx\tX\n";
    try {
        parse_conllx(text);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(parse_conllx("1\ta\t0\n"), ParseError);
    EXPECT_THROW(parse_conllx("1\ta\t0\tROOT\n3\tb\t1\tX\n"), ParseError);
}

TEST(Parse, OrphansErrorOrAttach) {
    const std::string text = tree_line(1, "a", "0", "ROOT") + tree_line(2, "b", "_", "X") +
                             tree_line(3, "c", "9", "X");
    EXPECT_THROW(parse_conllx(text), StructureError);
    ParseOptions opts;
    opts.attach_orphans = true;
    const Treebank tb = parse_conllx(text, opts);
    const Sentence& s = tb.sentences()[0];
    EXPECT_EQ(s.head(2), 1u);
    EXPECT_EQ(s.arc(3).dep_type, kStrayType);
    EXPECT_EQ(dep_type_inventory(tb), std::vector<std::string>{std::string(kStrayType)});
}

TEST(Parse, ConllxColumnsAndSkippedRows) {
    const std::string text =
        "# sent_id = 1\n"
        "1-2\tdu\t_\t_\t_\t_\t_\t_\t_\t_\n"
        "1\tde\tde\tADP\t_\t_\t2\tcase\t_\t_\n"
        "2\tle\tle\tDET\t_\t_\t0\troot\t_\t_\n"
        "2.1\tx\t_\t_\t_\t_\t_\t_\t_\t_\n";
    const Treebank tb = parse_conllx(text);
    ASSERT_EQ(tb.size(), 1u);
    EXPECT_EQ(tb.sentences()[0].size(), 2u);
    EXPECT_EQ(tb.sentences()[0].arc(1).raw_label, "case");
}

TEST(Parse, TsvRoundTrip) {
    const Treebank tb = example();
    EXPECT_EQ(parse_conllx(to_tsv(tb)), tb);
}

TEST(Parse, Utf8Lengths) {
    const Treebank tb = parse_conllx("1\tdéjà\t0\tROOT\n2\t中国\t1\tX\n");
    EXPECT_EQ(tb.sentences()[0].token(1).char_len, 4u);
    EXPECT_EQ(tb.sentences()[0].token(2).char_len, 2u);
    EXPECT_EQ(tb.charset_size(), 6u);
    EXPECT_THROW(parse_conllx("1\t\xff\t0\tROOT\n"), ParseError);
}

TEST(Types, ChildParentPair) {
    const std::string text = tree_line(1, "When", "6", "SBAR") + tree_line(2, "the", "3", "DT") +
                             tree_line(3, "man", "4", "SBJ") + tree_line(4, "arrived", "1", "S") +
                             tree_line(5, "I", "6", "SBJ") + tree_line(6, "left", "0", "Pred");
    const Treebank raw = parse_conllx(text);
    const Treebank pair = derive_dependency_types(raw, TypeScheme::child_parent_pair);
    const Sentence& s = pair.sentences()[0];
    EXPECT_EQ(s.arc(2).dep_type, "DT>SBJ");
    EXPECT_EQ(s.arc(6).dep_type, "Pred>ROOT");
    EXPECT_EQ(s.arc(1).dep_type, "SBAR>Pred");

    const Treebank self = derive_dependency_types(pair, TypeScheme::self_label);
    for (const auto& a : self.sentences()[0].arcs()) EXPECT_EQ(a.dep_type, a.raw_label);
}

TEST(Split, DefaultIsEveryTenth) {
    const Treebank tb = numbered(100);
    const TrainTest tt = split(tb, SplitSpec{});
    ASSERT_EQ(tt.test.size(), 10u);
    ASSERT_EQ(tt.train.size(), 90u);
    for (std::size_t k = 0; k < 10; ++k) {
        EXPECT_EQ(tt.test.sentences()[k].token(1).form, "w" + std::to_string(10 * k + 9));
    }
}

TEST(Split, SizesAndErrors) {
    EXPECT_EQ(split(numbered(10), SplitSpec{}).test.size(), 1u);
    EXPECT_EQ(split(numbered(15), SplitSpec{}).test.size(), 2u);  // 1.5 rounds up
    EXPECT_EQ(split(numbered(14), SplitSpec{}).test.size(), 1u);
    EXPECT_THROW(split(numbered(5), SplitSpec{}), Error);
    SplitSpec bad;
    bad.train_num = 10;
    EXPECT_THROW(split(numbered(20), bad), Error);
}

TEST(Split, SeededRandomIsDeterministicPartition) {
    const Treebank tb = numbered(50);
    SplitSpec spec;
    spec.strategy = SplitStrategy::seeded_random;
    spec.seed = 17;
    const TrainTest a = split(tb, spec), b = split(tb, spec);
    EXPECT_EQ(a.test, b.test);
    EXPECT_EQ(a.train.size() + a.test.size(), 50u);
    std::set<std::string> seen;
    for (const auto* part : {&a.train, &a.test}) {
        for (const auto& s : part->sentences()) EXPECT_TRUE(seen.insert(s.token(1).form).second);
    }
    EXPECT_EQ(seen.size(), 50u);
}

TEST(Subsample, KeepsOrder) {
    const Treebank tb = numbered(30);
    const Treebank sub = subsample(tb, 12, 3);
    EXPECT_EQ(sub.size(), 12u);
    EXPECT_EQ(sub, subsample(tb, 12, 3));
    EXPECT_EQ(subsample(tb, 30, 9), tb);
    EXPECT_THROW(subsample(tb, 31, 0), Error);
}

TEST(Chars, Inventory) {
    const CharInventory ci = char_inventory(parse_conllx("1\tab\t0\tROOT\n2\tba\t1\tX\n3\tc\t1\tX\n"));
    EXPECT_EQ(ci.count, 3u);
    EXPECT_DOUBLE_EQ(ci.bits, std::log2(3.0));
    EXPECT_THROW(char_inventory(Treebank{}), Error);
}
