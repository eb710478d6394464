#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "wordeff/error.hpp"
#include "wordeff/treebank.hpp"

namespace wordeff {

/// Sentence-boundary symbol; two of them pad the start of every sentence.
/// It is never predicted and may not appear as a word form.
inline const std::string kBos = "<s>";

using WordId = std::uint32_t;

struct Discounts {
    double unigram = 0.75;
    double bigram = 0.75;
    double trigram = 0.75;
};

/// Absolute discount from count-of-counts, n1 / (n1 + 2 n2), or 0.75 when
/// either count is zero.
inline double count_of_counts_discount(std::uint64_t n1, std::uint64_t n2) {
    if (n1 == 0 || n2 == 0) return 0.75;
    return static_cast<double>(n1) / static_cast<double>(n1 + 2 * n2);
}

/// Interpolated Kneser-Ney trigram model over a closed vocabulary.
///
///   p3(w|u,v) = (max(c(uvw) - D3, 0) + D3 N1+(uv.) p2(w|v)) / c(uv.)
///   p2(w|v)   = (max(N1+(.vw) - D2, 0) + D2 N1+(v.) p1(w)) / N1+(.v.)
///   p1(w)     = (max(N1+(.w) - D1, 0) + D1 N1+(.) / |V|) / N1+(..)
///
/// N1+(.vw) counts distinct u preceding bigram (v,w) in the trigram types;
/// N1+(.w) counts distinct v preceding w in the bigram types. A context never
/// seen at some order falls through to the next lower order.
class TrigramModel {
public:
    static constexpr WordId kBosId = 0;
    static constexpr WordId kMaxWords = (1u << 21) - 2;

    static TrigramModel train(const Treebank& corpus, const std::set<std::string>& vocabulary) {
        if (corpus.empty() || corpus.token_count() == 0) {
            throw Error("cannot train a language model on an empty corpus");
        }
        TrigramModel m(vocabulary);
        std::unordered_map<std::uint64_t, std::uint32_t> counts;
        counts.reserve(corpus.token_count());
        for (const auto& s : corpus.sentences()) {
            WordId u = kBosId, v = kBosId;
            for (const auto& t : s.tokens()) {
                const WordId w = m.id(t.form);
                ++counts[pack3(u, v, w)];
                u = v;
                v = w;
            }
        }
        m.build(counts);
        return m;
    }

    /// Reads a model written by save(); probabilities are bit-identical.
    static TrigramModel load(std::istream& in) {
        auto read_u64 = [&] {
            std::uint64_t x = 0;
            in.read(reinterpret_cast<char*>(&x), sizeof x);
            if (!in) throw Error("truncated language-model cache");
            return x;
        };
        char magic[8];
        in.read(magic, sizeof magic);
        if (!in || std::string_view(magic, sizeof magic) != kMagic) {
            throw Error("not a language-model cache");
        }
        std::set<std::string> vocab;
        const std::uint64_t nv = read_u64();
        for (std::uint64_t i = 0; i < nv; ++i) {
            std::string form(read_u64(), '\0');
            in.read(form.data(), static_cast<std::streamsize>(form.size()));
            vocab.insert(std::move(form));
        }
        TrigramModel m(vocab);
        std::unordered_map<std::uint64_t, std::uint32_t> counts;
        const std::uint64_t nt = read_u64();
        counts.reserve(nt);
        for (std::uint64_t i = 0; i < nt; ++i) {
            const std::uint64_t key = read_u64();
            counts[key] = static_cast<std::uint32_t>(read_u64());
        }
        if (!in) throw Error("truncated language-model cache");
        m.build(counts);
        return m;
    }

    /// Vocabulary and trigram counts, sorted, in native byte order.
    void save(std::ostream& out) const {
        auto write_u64 = [&](std::uint64_t x) {
            out.write(reinterpret_cast<const char*>(&x), sizeof x);
        };
        out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
        write_u64(words_.size() - 1);
        for (std::size_t i = 1; i < words_.size(); ++i) {
            write_u64(words_[i].size());
            out.write(words_[i].data(), static_cast<std::streamsize>(words_[i].size()));
        }
        std::vector<std::pair<std::uint64_t, std::uint32_t>> sorted(trigram_counts_.begin(),
                                                                    trigram_counts_.end());
        std::sort(sorted.begin(), sorted.end());
        write_u64(sorted.size());
        for (const auto& [k, c] : sorted) {
            write_u64(k);
            write_u64(c);
        }
    }

    /// |V|, excluding the boundary symbol.
    std::size_t vocab_size() const noexcept { return words_.size() - 1; }
    const Discounts& discounts() const noexcept { return discounts_; }

    std::optional<WordId> find(std::string_view form) const {
        if (form == kBos) return kBosId;
        const auto it = ids_.find(std::string(form));
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }

    WordId id(std::string_view form) const {
        const auto w = find(form);
        if (!w) throw Error("word not in the model vocabulary: '" + std::string(form) + "'");
        return *w;
    }

    const std::string& word(WordId id) const { return id == kBosId ? kBos : words_.at(id); }

    double prob_unigram(WordId w) const {
        check_predicted(w);
        const double lower = static_cast<double>(unigram_types_) / static_cast<double>(vocab_size());
        const double c = cont1_[w];
        return (std::max(c - discounts_.unigram, 0.0) + discounts_.unigram * lower) /
               static_cast<double>(unigram_total_);
    }

    double prob_bigram(WordId v, WordId w) const {
        const double lower = prob_unigram(w);
        const ContextStat& ctx = bigram_context_.at(v);
        if (ctx.total == 0) return lower;
        const auto it = cont2_.find(pack2(v, w));
        const double c = it == cont2_.end() ? 0.0 : it->second;
        return (std::max(c - discounts_.bigram, 0.0) +
                discounts_.bigram * static_cast<double>(ctx.types) * lower) /
               static_cast<double>(ctx.total);
    }

    /// p(w | u, v) in (0, 1].
    double prob(WordId u, WordId v, WordId w) const {
        const double lower = prob_bigram(v, w);
        const auto ctx = trigram_context_.find(pack2(u, v));
        if (ctx == trigram_context_.end()) return lower;
        const auto it = trigram_counts_.find(pack3(u, v, w));
        const double c = it == trigram_counts_.end() ? 0.0 : it->second;
        const double p = (std::max(c - discounts_.trigram, 0.0) +
                          discounts_.trigram * static_cast<double>(ctx->second.types) * lower) /
                         static_cast<double>(ctx->second.total);
        return std::min(p, 1.0);
    }

    double prob(std::string_view u, std::string_view v, std::string_view w) const {
        return prob(id(u), id(v), id(w));
    }

    /// Number of trigram tokens the model was trained on.
    std::uint64_t trigram_tokens() const noexcept { return trigram_tokens_; }

private:
    static constexpr std::string_view kMagic = "WEKN0001";

    struct ContextStat {
        std::uint64_t total = 0;  ///< sum of the counts under this context
        std::uint64_t types = 0;  ///< distinct continuations
    };

    explicit TrigramModel(const std::set<std::string>& vocabulary) {
        if (vocabulary.empty()) throw Error("empty language-model vocabulary");
        if (vocabulary.size() > kMaxWords) throw Error("vocabulary too large for the trigram model");
        if (vocabulary.contains(kBos)) throw Error("vocabulary contains the reserved boundary symbol " + kBos);
        words_.reserve(vocabulary.size() + 1);
        words_.push_back(kBos);
        ids_.reserve(vocabulary.size());
        for (const auto& f : vocabulary) {
            ids_.emplace(f, static_cast<WordId>(words_.size()));
            words_.push_back(f);
        }
    }

    static std::uint64_t pack2(WordId a, WordId b) {
        return (static_cast<std::uint64_t>(a) << 21) | b;
    }
    static std::uint64_t pack3(WordId a, WordId b, WordId c) {
        return (static_cast<std::uint64_t>(a) << 42) | (static_cast<std::uint64_t>(b) << 21) | c;
    }

    void check_predicted(WordId w) const {
        if (w == kBosId || w >= words_.size()) throw Error("word id outside the predicted vocabulary");
    }

    void build(std::unordered_map<std::uint64_t, std::uint32_t>& counts) {
        trigram_counts_ = std::move(counts);
        constexpr std::uint64_t kMask = (1u << 21) - 1;
        std::uint64_t n1 = 0, n2 = 0;
        for (const auto& [key, c] : trigram_counts_) {
            trigram_tokens_ += c;
            n1 += c == 1;
            n2 += c == 2;
            const std::uint64_t uv = key >> 21;
            const std::uint64_t vw = key & ((kMask << 21) | kMask);
            auto& ctx = trigram_context_[uv];
            ctx.total += c;
            ++ctx.types;
            ++cont2_[vw];
        }
        discounts_.trigram = count_of_counts_discount(n1, n2);

        bigram_context_.assign(words_.size(), ContextStat{});
        cont1_.assign(words_.size(), 0);
        n1 = n2 = 0;
        for (const auto& [key, c] : cont2_) {
            n1 += c == 1;
            n2 += c == 2;
            auto& ctx = bigram_context_[key >> 21];
            ctx.total += c;
            ++ctx.types;
            ++cont1_[key & kMask];
        }
        discounts_.bigram = count_of_counts_discount(n1, n2);

        n1 = n2 = 0;
        for (std::uint32_t c : cont1_) {
            if (c == 0) continue;
            n1 += c == 1;
            n2 += c == 2;
            unigram_total_ += c;
            ++unigram_types_;
        }
        discounts_.unigram = count_of_counts_discount(n1, n2);
    }

    std::vector<std::string> words_;
    std::unordered_map<std::string, WordId> ids_;
    std::unordered_map<std::uint64_t, std::uint32_t> trigram_counts_;
    std::unordered_map<std::uint64_t, ContextStat> trigram_context_;
    std::unordered_map<std::uint64_t, std::uint32_t> cont2_;
    std::vector<ContextStat> bigram_context_;
    std::vector<std::uint32_t> cont1_;
    std::uint64_t unigram_total_ = 0;
    std::uint64_t unigram_types_ = 0;
    std::uint64_t trigram_tokens_ = 0;
    Discounts discounts_;
};

/// Trains on `train`; `vocabulary` must cover every training form.
inline TrigramModel train_kn(const Treebank& train, const std::set<std::string>& vocabulary) {
    return TrigramModel::train(train, vocabulary);
}

/// -log2 p(w | u, v), in bits.
inline double surprisal(const TrigramModel& m, WordId u, WordId v, WordId w) {
    return -std::log2(m.prob(u, v, w));
}

inline double surprisal(const TrigramModel& m, std::string_view u, std::string_view v,
                        std::string_view w) {
    return -std::log2(m.prob(u, v, w));
}

// ---------------------------------------------------------------------------
// Coverage

struct CoverageReport {
    int order = 2;
    double fraction = 0.0;  ///< attested / eligible; 0 when nothing is eligible
    std::uint64_t attested = 0;
    std::uint64_t eligible = 0;
    bool defined = false;   ///< false when the denominator is zero
};

/// Share of test n-gram tokens (boundary-padded) seen in training, counting
/// only n-grams whose words all occur in the training vocabulary.
inline CoverageReport ngram_coverage(const Treebank& train, const Treebank& test, int order) {
    if (order != 2 && order != 3) throw Error("coverage order must be 2 or 3");
    if (train.empty() || test.empty()) throw Error("coverage needs nonempty corpora");
    std::unordered_map<std::string, std::uint64_t> ids;
    for (const auto& f : train.vocabulary()) ids.emplace(f, ids.size() + 1);

    auto key = [](std::uint64_t u, std::uint64_t v, std::uint64_t w) {
        return (u << 42) | (v << 21) | w;
    };
    std::unordered_set<std::uint64_t> seen;
    for (const auto& s : train.sentences()) {
        std::uint64_t u = 0, v = 0;
        for (const auto& t : s.tokens()) {
            const std::uint64_t w = ids.at(t.form);
            seen.insert(key(order == 3 ? u : 0, v, w));
            u = v;
            v = w;
        }
    }
    CoverageReport r;
    r.order = order;
    constexpr std::uint64_t kUnknown = std::numeric_limits<std::uint64_t>::max();
    for (const auto& s : test.sentences()) {
        std::uint64_t u = 0, v = 0;
        for (const auto& t : s.tokens()) {
            const auto it = ids.find(t.form);
            const std::uint64_t w = it == ids.end() ? kUnknown : it->second;
            const bool known = w != kUnknown && v != kUnknown && (order == 2 || u != kUnknown);
            if (known) {
                ++r.eligible;
                r.attested += seen.contains(key(order == 3 ? u : 0, v, w));
            }
            u = v;
            v = w;
        }
    }
    r.defined = r.eligible > 0;
    r.fraction = r.defined ? static_cast<double>(r.attested) / static_cast<double>(r.eligible) : 0.0;
    return r;
}

// ---------------------------------------------------------------------------
// Probe files: TSV rows (u, v, w, expected_p), boundary written as <s>.

struct Probe {
    std::string u, v, w;
    double p = 0.0;
};

inline std::vector<Probe> parse_probes(std::string_view text) {
    std::vector<Probe> out;
    std::size_t line_no = 0, pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto f = detail::split_tabs(line);
        if (f.size() != 4) throw ParseError(line_no, "probe rows need 4 fields");
        Probe p{std::string(f[0]), std::string(f[1]), std::string(f[2]), 0.0};
        const auto [end, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), p.p);
        if (ec != std::errc() || end != f[3].data() + f[3].size()) {
            throw ParseError(line_no, "probability is not a number");
        }
        out.push_back(std::move(p));
    }
    return out;
}

inline std::string to_probe_tsv(const std::vector<Probe>& probes) {
    std::string out;
    char buf[64];
    for (const auto& p : probes) {
        const auto r = std::to_chars(buf, buf + sizeof buf, p.p);
        out += p.u + '\t' + p.v + '\t' + p.w + '\t' + std::string(buf, r.ptr) + '\n';
    }
    return out;
}

}  // namespace wordeff
