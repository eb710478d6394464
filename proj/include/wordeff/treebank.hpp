#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "wordeff/error.hpp"
#include "wordeff/rng.hpp"

namespace wordeff {

/// Head index of the arc attaching a sentence's root word.
inline constexpr std::size_t kRoot = 0;

inline constexpr std::string_view kRootLabel = "ROOT";
/// Raw label given to orphan tokens attached to the root on request.
inline constexpr std::string_view kStrayLabel = "STRAY";
inline constexpr std::string_view kStrayType = "STRAY>ROOT";

namespace utf8 {

/// Decodes `text` into scalar values. Returns false on malformed input
/// (overlong forms, surrogates, truncated sequences).
inline bool decode(std::string_view text, std::vector<char32_t>& out) {
    out.clear();
    std::size_t i = 0;
    while (i < text.size()) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        std::size_t len;
        char32_t cp;
        if (b0 < 0x80) {
            len = 1;
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        } else {
            return false;
        }
        if (i + len > text.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            const auto b = static_cast<unsigned char>(text[i + k]);
            if ((b & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (b & 0x3F);
        }
        static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
        if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            return false;
        }
        out.push_back(cp);
        i += len;
    }
    return true;
}

/// Unicode White_Space property.
inline constexpr bool is_space(char32_t c) noexcept {
    return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 ||
           c == 0x1680 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 ||
           c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

}  // namespace utf8

struct Token {
    std::size_t index = 0;  ///< 1-based position in the sentence
    std::string form;
    std::size_t char_len = 0;  ///< non-whitespace scalar values in `form`

    friend bool operator==(const Token&, const Token&) = default;
};

/// Builds a token, enforcing a nonempty whitespace-free UTF-8 form.
inline Token make_token(std::size_t index, std::string form) {
    std::vector<char32_t> cps;
    if (!utf8::decode(form, cps)) throw Error("form is not valid UTF-8: " + form);
    if (cps.empty()) throw Error("empty form");
    if (std::any_of(cps.begin(), cps.end(), utf8::is_space)) {
        throw Error("form contains whitespace: '" + form + "'");
    }
    return Token{index, std::move(form), cps.size()};
}

struct DependencyArc {
    std::size_t dependent = 0;
    std::size_t head = kRoot;
    std::string raw_label;
    std::string dep_type;

    friend bool operator==(const DependencyArc&, const DependencyArc&) = default;
};

/// One dependency tree over its tokens in their current linear order.
///
/// Token i (1-based) sits at position i; `arc(i)` is its incoming arc.
/// Construction validates the tree: tokens are numbered 1..n, every token
/// has exactly one arc, exactly one arc attaches to ROOT, and every token is
/// reachable from the root.
class Sentence {
public:
    Sentence(std::vector<Token> tokens, std::vector<DependencyArc> arcs)
        : tokens_(std::move(tokens)), arcs_(std::move(arcs)) {
        validate();
        index_children();
    }

    std::size_t size() const noexcept { return tokens_.size(); }
    const std::vector<Token>& tokens() const noexcept { return tokens_; }
    const std::vector<DependencyArc>& arcs() const noexcept { return arcs_; }
    const Token& token(std::size_t index) const { return tokens_.at(index - 1); }
    const DependencyArc& arc(std::size_t dependent) const {
        return arcs_.at(dependent - 1);
    }
    std::size_t head(std::size_t dependent) const { return arc(dependent).head; }
    std::size_t root() const noexcept { return root_; }

    /// Dependents of `head` in ascending index order; `children(kRoot)`
    /// holds only the root word.
    std::span<const std::size_t> children(std::size_t head) const {
        return {child_list_.data() + child_offsets_[head],
                child_offsets_[head + 1] - child_offsets_[head]};
    }

    std::size_t non_root_arc_count() const noexcept { return tokens_.size() - 1; }

    friend bool operator==(const Sentence& a, const Sentence& b) {
        return a.tokens_ == b.tokens_ && a.arcs_ == b.arcs_;
    }

private:
    void validate() {
        const std::size_t n = tokens_.size();
        if (n == 0) throw StructureError(0, "empty sentence");
        if (arcs_.size() != n) {
            throw StructureError(0, "expected " + std::to_string(n) + " arcs, got " +
                                        std::to_string(arcs_.size()));
        }
        std::sort(arcs_.begin(), arcs_.end(),
                  [](const auto& a, const auto& b) { return a.dependent < b.dependent; });
        root_ = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const Token& t = tokens_[i];
            if (t.index != i + 1) {
                throw StructureError(0, "token indices must be 1.." + std::to_string(n));
            }
            if (t.char_len == 0) throw StructureError(0, "token " + std::to_string(i + 1) + " has empty form");
            const DependencyArc& a = arcs_[i];
            if (a.dependent != i + 1) {
                throw StructureError(0, "token " + std::to_string(i + 1) +
                                            " needs exactly one incoming arc");
            }
            if (a.head == a.dependent) {
                throw StructureError(0, "cycle: token " + std::to_string(a.dependent) +
                                            " is its own head");
            }
            if (a.head > n) {
                throw StructureError(0, "orphan token " + std::to_string(a.dependent) +
                                            ": head " + std::to_string(a.head) +
                                            " does not exist");
            }
            if (a.head == kRoot) {
                if (root_ != 0) {
                    throw StructureError(0, "multiple roots (tokens " +
                                                std::to_string(root_) + " and " +
                                                std::to_string(a.dependent) + ")");
                }
                root_ = a.dependent;
            }
        }
        if (root_ == 0) throw StructureError(0, "no token attaches to ROOT");
    }

    void index_children() {
        const std::size_t n = tokens_.size();
        child_offsets_.assign(n + 2, 0);
        for (const auto& a : arcs_) ++child_offsets_[a.head + 1];
        std::partial_sum(child_offsets_.begin(), child_offsets_.end(),
                         child_offsets_.begin());
        child_list_.resize(n);
        std::vector<std::size_t> fill(child_offsets_.begin(), child_offsets_.end() - 1);
        for (const auto& a : arcs_) child_list_[fill[a.head]++] = a.dependent;

        // Every token must be reachable from the root; anything else sits on
        // a cycle detached from it.
        std::vector<std::size_t> stack{root_};
        std::size_t seen = 0;
        while (!stack.empty()) {
            const std::size_t h = stack.back();
            stack.pop_back();
            ++seen;
            for (std::size_t c : children(h)) stack.push_back(c);
        }
        if (seen != n) {
            throw StructureError(0, "cycle: " + std::to_string(n - seen) +
                                        " token(s) unreachable from the root");
        }
    }

    std::vector<Token> tokens_;
    std::vector<DependencyArc> arcs_;
    std::size_t root_ = 0;
    std::vector<std::size_t> child_offsets_;
    std::vector<std::size_t> child_list_;
};

/// Immutable corpus. Vocabulary and character inventory are always
/// recomputed from the sentences at construction.
class Treebank {
public:
    Treebank() = default;
    explicit Treebank(std::vector<Sentence> sentences, std::string language_tag = {})
        : sentences_(std::move(sentences)), language_tag_(std::move(language_tag)) {
        std::unordered_set<char32_t> chars;
        std::vector<char32_t> cps;
        for (const auto& s : sentences_) {
            token_count_ += s.size();
            for (const auto& t : s.tokens()) {
                if (vocabulary_.insert(t.form).second) {
                    utf8::decode(t.form, cps);
                    chars.insert(cps.begin(), cps.end());
                }
            }
        }
        charset_size_ = chars.size();
    }

    const std::vector<Sentence>& sentences() const noexcept { return sentences_; }
    std::size_t size() const noexcept { return sentences_.size(); }
    bool empty() const noexcept { return sentences_.empty(); }
    const std::set<std::string>& vocabulary() const noexcept { return vocabulary_; }
    /// K: distinct character scalar values over all forms.
    std::size_t charset_size() const noexcept { return charset_size_; }
    const std::string& language_tag() const noexcept { return language_tag_; }
    std::size_t token_count() const noexcept { return token_count_; }
    std::size_t arc_count() const noexcept { return token_count_ - sentences_.size(); }

    friend bool operator==(const Treebank& a, const Treebank& b) {
        return a.language_tag_ == b.language_tag_ && a.sentences_ == b.sentences_;
    }

private:
    std::vector<Sentence> sentences_;
    std::string language_tag_;
    std::set<std::string> vocabulary_;
    std::size_t charset_size_ = 0;
    std::size_t token_count_ = 0;
};

// ---------------------------------------------------------------------------
// Reading and writing

struct ParseOptions {
    /// Attach tokens whose head is missing to the root word as STRAY>ROOT
    /// instead of failing.
    bool attach_orphans = false;
    std::string language_tag;
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        out.push_back(line.substr(start, tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    return out;
}

inline bool parse_index(std::string_view s, std::size_t& out) {
    if (s.empty()) return false;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && p == end;
}

inline std::string initial_dep_type(const std::string& raw_label) {
    return raw_label == kStrayLabel ? std::string(kStrayType) : raw_label;
}

}  // namespace detail

/// Parses a tab-separated dependency file.
///
/// Rows with 4 to 7 fields are read as (ID, FORM, HEAD, DEPREL, ...); rows
/// with 8 or more fields use the CoNLL-X/U column positions (HEAD in field 7,
/// DEPREL in field 8). Blank lines separate sentences, `#` lines are
/// comments, and CoNLL-U multiword ranges (`1-2`) and empty nodes (`1.1`) are
/// skipped. HEAD 0 is ROOT. Each arc's dep_type starts as its raw label.
inline Treebank parse_conllx(std::string_view text, const ParseOptions& options = {}) {
    struct Row {
        std::size_t line;
        std::string form;
        std::string head;
        std::string label;
    };
    std::vector<Sentence> sentences;
    std::vector<Row> rows;

    auto flush = [&] {
        if (rows.empty()) return;
        const std::size_t sentence_no = sentences.size() + 1;
        const std::size_t n = rows.size();
        std::vector<Token> tokens;
        std::vector<DependencyArc> arcs;
        std::vector<std::size_t> orphans;
        std::size_t root = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const Row& r = rows[i];
            try {
                tokens.push_back(make_token(i + 1, r.form));
            } catch (const Error& e) {
                throw ParseError(r.line, e.what());
            }
            // "_" or an index past the sentence end marks an orphan.
            std::size_t head = 0;
            bool known = false;
            if (r.head != "_") {
                if (!detail::parse_index(r.head, head)) {
                    throw ParseError(r.line, "HEAD is not a non-negative integer: '" + r.head + "'");
                }
                known = head <= n;
            }
            if (known && head == kRoot && root == 0) root = i + 1;
            if (!known) orphans.push_back(i + 1);
            arcs.push_back(DependencyArc{i + 1, known ? head : n + 1, r.label,
                                         detail::initial_dep_type(r.label)});
        }
        if (options.attach_orphans && root != 0) {
            for (std::size_t dep : orphans) {
                auto& a = arcs[dep - 1];
                a.head = root;
                a.raw_label = std::string(kStrayLabel);
                a.dep_type = std::string(kStrayType);
            }
        }
        try {
            sentences.emplace_back(std::move(tokens), std::move(arcs));
        } catch (const StructureError& e) {
            throw StructureError(sentence_no, e.detail());
        }
        rows.clear();
    };

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        if (line.find_first_not_of(" \t") == std::string_view::npos) {
            flush();
            continue;
        }
        if (line.front() == '#') continue;

        const auto fields = detail::split_tabs(line);
        if (fields.size() < 4) {
            throw ParseError(line_no, "expected at least 4 tab-separated fields, got " +
                                          std::to_string(fields.size()));
        }
        const std::string_view id = fields[0];
        if (id.find_first_of("-.") != std::string_view::npos) continue;

        const bool conll = fields.size() >= 8;
        const std::string_view head = conll ? fields[6] : fields[2];
        const std::string_view label = conll ? fields[7] : fields[3];
        std::size_t index = 0;
        if (!detail::parse_index(id, index)) {
            throw ParseError(line_no, "ID is not a positive integer: '" + std::string(id) + "'");
        }
        if (index != rows.size() + 1) {
            throw ParseError(line_no, "expected ID " + std::to_string(rows.size() + 1) +
                                          ", got " + std::string(id));
        }
        if (label.empty()) throw ParseError(line_no, "empty DEPREL");
        rows.push_back(Row{line_no, std::string(fields[1]), std::string(head),
                           std::string(label)});
    }
    flush();
    return Treebank(std::move(sentences), options.language_tag);
}

/// Canonical 4-column serialization (ID, FORM, HEAD, DEPREL); each sentence
/// is followed by a blank line.
inline std::string to_tsv(const Treebank& tb) {
    std::string out;
    for (const auto& s : tb.sentences()) {
        for (const auto& t : s.tokens()) {
            const auto& a = s.arc(t.index);
            out += std::to_string(t.index);
            out += '\t';
            out += t.form;
            out += '\t';
            out += std::to_string(a.head);
            out += '\t';
            out += a.raw_label;
            out += '\n';
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dependency types

enum class TypeScheme {
    self_label,         ///< dep_type = raw label
    child_parent_pair,  ///< dep_type = raw label + ">" + parent's raw label (or ROOT)
};

inline Sentence with_dep_types(const Sentence& s, const std::vector<std::string>& types) {
    std::vector<DependencyArc> arcs = s.arcs();
    for (std::size_t i = 0; i < arcs.size(); ++i) arcs[i].dep_type = types[i];
    return Sentence(s.tokens(), std::move(arcs));
}

inline Treebank derive_dependency_types(const Treebank& tb, TypeScheme scheme) {
    std::vector<Sentence> out;
    out.reserve(tb.size());
    std::vector<std::string> types;
    for (const auto& s : tb.sentences()) {
        types.clear();
        for (const auto& a : s.arcs()) {
            if (a.raw_label == kStrayLabel) {
                types.emplace_back(kStrayType);
            } else if (scheme == TypeScheme::self_label) {
                types.push_back(a.raw_label);
            } else {
                const std::string_view parent =
                    a.head == kRoot ? kRootLabel : std::string_view(s.arc(a.head).raw_label);
                types.push_back(a.raw_label + ">" + std::string(parent));
            }
        }
        out.push_back(with_dep_types(s, types));
    }
    return Treebank(std::move(out), tb.language_tag());
}

/// Sorted inventory of dep_types used by non-root arcs.
inline std::vector<std::string> dep_type_inventory(const Treebank& tb) {
    std::set<std::string> types;
    for (const auto& s : tb.sentences()) {
        for (const auto& a : s.arcs()) {
            if (a.head != kRoot) types.insert(a.dep_type);
        }
    }
    return {types.begin(), types.end()};
}

// ---------------------------------------------------------------------------
// Splitting and sampling

enum class SplitStrategy { interleaved, seeded_random };

/// Train/test partition rule. train_fraction = train_num / train_den.
struct SplitSpec {
    std::uint32_t train_num = 9;
    std::uint32_t train_den = 10;
    SplitStrategy strategy = SplitStrategy::interleaved;
    std::uint64_t seed = 0;

    double train_fraction() const noexcept {
        return static_cast<double>(train_num) / train_den;
    }
};

struct TrainTest {
    Treebank train;
    Treebank test;
};

/// Disjoint, exhaustive, deterministic partition.
///
/// |test| = round((1 - f) * N). The interleaved strategy picks test sentence
/// k (1-based) at position ceil(k * N / |test|), which is every 10th sentence
/// when f = 9/10 and N is a multiple of 10. Requires N * (1 - f) >= 1.
inline TrainTest split(const Treebank& tb, const SplitSpec& spec) {
    if (spec.train_den == 0 || spec.train_num == 0 || spec.train_num >= spec.train_den) {
        throw Error("train fraction must lie strictly between 0 and 1");
    }
    const std::uint64_t n = tb.size();
    const std::uint64_t test_part = spec.train_den - spec.train_num;
    if (n * test_part < spec.train_den) {
        throw Error("too few sentences to split: " + std::to_string(n) + " sentences at train fraction " +
                    std::to_string(spec.train_num) + "/" + std::to_string(spec.train_den));
    }
    const std::uint64_t n_test = (2 * test_part * n + spec.train_den) / (2 * spec.train_den);

    std::vector<bool> is_test(n, false);
    if (spec.strategy == SplitStrategy::interleaved) {
        for (std::uint64_t k = 1; k <= n_test; ++k) {
            const std::uint64_t pos = (k * n + n_test - 1) / n_test;
            is_test[pos - 1] = true;
        }
    } else {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        Rng rng(spec.seed);
        rng.shuffle(std::span(idx));
        for (std::uint64_t k = 0; k < n_test; ++k) is_test[idx[k]] = true;
    }

    std::vector<Sentence> train, test;
    for (std::size_t i = 0; i < n; ++i) {
        (is_test[i] ? test : train).push_back(tb.sentences()[i]);
    }
    return {Treebank(std::move(train), tb.language_tag()),
            Treebank(std::move(test), tb.language_tag())};
}

/// Uniform sample of `n` sentences without replacement, kept in corpus order.
inline Treebank subsample(const Treebank& tb, std::size_t n, std::uint64_t seed) {
    if (n > tb.size()) {
        throw Error("cannot subsample " + std::to_string(n) + " of " +
                    std::to_string(tb.size()) + " sentences");
    }
    std::vector<std::size_t> idx(tb.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    std::vector<Sentence> out;
    out.reserve(n);
    for (std::size_t i : idx) out.push_back(tb.sentences()[i]);
    return Treebank(std::move(out), tb.language_tag());
}

struct CharInventory {
    std::size_t count = 0;  ///< K
    double bits = 0.0;      ///< log2 K
};

inline CharInventory char_inventory(const Treebank& tb) {
    if (tb.empty()) throw Error("character inventory of an empty treebank");
    const std::size_t k = tb.charset_size();
    return {k, std::log2(static_cast<double>(k))};
}

}  // namespace wordeff
