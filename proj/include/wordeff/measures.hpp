#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wordeff/error.hpp"
#include "wordeff/linearize.hpp"
#include "wordeff/treebank.hpp"
#include "wordeff/trigram.hpp"

namespace wordeff {

/// Efficiency of one ordering of one corpus, measured on its test portion.
struct EfficiencyPoint {
    double h_word = 0.0;  ///< bits per word
    double h_char = 0.0;  ///< surprisal per character, in units of log2 K
    double dl = 0.0;      ///< mean dependency length in words
    std::size_t n_tokens = 0;
    std::size_t n_arcs = 0;

    friend bool operator==(const EfficiencyPoint&, const EfficiencyPoint&) = default;
};

enum class Metric { h_word, h_char, dl };

inline double metric_value(const EfficiencyPoint& p, Metric m) {
    switch (m) {
        case Metric::h_word: return p.h_word;
        case Metric::h_char: return p.h_char;
        case Metric::dl: return p.dl;
    }
    return 0.0;
}

inline const char* metric_name(Metric m) {
    switch (m) {
        case Metric::h_word: return "h_word";
        case Metric::h_char: return "h_char";
        case Metric::dl: return "dl";
    }
    return "?";
}

struct InfoDensity {
    double h_word = 0.0;
    double h_char = 0.0;
};

/// Both information densities in one pass. `charset_size` < 2 leaves h_char
/// at NaN (log2 K would be zero).
inline InfoDensity info_density(const TrigramModel& m, const Treebank& test,
                                std::size_t charset_size) {
    if (test.token_count() == 0) throw Error("information density of an empty test corpus");
    const double char_bits =
        charset_size >= 2 ? std::log2(static_cast<double>(charset_size)) : 0.0;
    double sum_word = 0.0, sum_char = 0.0;
    for (const auto& s : test.sentences()) {
        WordId u = TrigramModel::kBosId, v = TrigramModel::kBosId;
        for (const auto& t : s.tokens()) {
            const WordId w = m.id(t.form);
            const double h = surprisal(m, u, v, w);
            sum_word += h;
            sum_char += h / static_cast<double>(t.char_len);
            u = v;
            v = w;
        }
    }
    const double n = static_cast<double>(test.token_count());
    return {sum_word / n, charset_size >= 2 ? sum_char / (n * char_bits) : std::nan("")};
}

/// Mean per-word surprisal of `test` under `m`.
inline double info_density_word(const TrigramModel& m, const Treebank& test) {
    return info_density(m, test, 0).h_word;
}

/// Mean of h_i / (|w_i| log2 K) over the test tokens.
inline double info_density_char(const TrigramModel& m, const Treebank& test,
                                std::size_t charset_size) {
    if (charset_size < 2) throw Error("by-character density needs at least 2 distinct characters");
    return info_density(m, test, charset_size).h_char;
}

/// Sum of |position(head) - position(dependent)| over non-root arcs.
inline std::uint64_t total_dependency_length(const Sentence& s) {
    std::uint64_t total = 0;
    for (const auto& a : s.arcs()) {
        if (a.head == kRoot) continue;
        total += a.head > a.dependent ? a.head - a.dependent : a.dependent - a.head;
    }
    return total;
}

/// Mean length over all non-root arcs of the corpus.
inline double avg_dependency_length(const Treebank& tb) {
    if (tb.arc_count() == 0) throw Error("average dependency length needs at least one arc");
    std::uint64_t total = 0;
    for (const auto& s : tb.sentences()) total += total_dependency_length(s);
    return static_cast<double>(total) / static_cast<double>(tb.arc_count());
}

/// A corpus fixed for a study: its split, closed vocabulary, and K.
class PreparedCorpus {
public:
    PreparedCorpus(Treebank full, SplitSpec spec)
        : full_(std::move(full)), spec_(spec), parts_(split(full_, spec_)),
          types_(dep_type_inventory(full_)) {
        if (full_.charset_size() == 0) throw Error("corpus has no characters");
    }

    const Treebank& full() const noexcept { return full_; }
    const SplitSpec& split_spec() const noexcept { return spec_; }
    const Treebank& train() const noexcept { return parts_.train; }
    const Treebank& test() const noexcept { return parts_.test; }
    const std::set<std::string>& vocabulary() const noexcept { return full_.vocabulary(); }
    std::size_t charset_size() const noexcept { return full_.charset_size(); }
    /// Sorted dep_types of the full corpus.
    const std::vector<std::string>& types() const noexcept { return types_; }

private:
    Treebank full_;
    SplitSpec spec_;
    TrainTest parts_;
    std::vector<std::string> types_;
};

/// Streams of the ordering seed used for the two portions.
inline constexpr std::uint64_t kTrainStream = 1;
inline constexpr std::uint64_t kTestStream = 2;

using ReorderObserver = std::function<void(const Treebank& train, const Treebank& test)>;

/// Reorders train, trains the model, reorders test, and measures test.
///
/// `observer`, when set, sees the reordered train and test portions.
inline EfficiencyPoint efficiency_point(const PreparedCorpus& corpus, const OrderingMode& mode,
                                        const ReorderObserver& observer = {}) {
    if (corpus.charset_size() < 2) throw Error("by-character density needs at least 2 distinct characters");
    const Treebank train = reorder_corpus(corpus.train(), reseed(mode, kTrainStream));
    const TrigramModel model = train_kn(train, corpus.vocabulary());
    const Treebank test = reorder_corpus(corpus.test(), reseed(mode, kTestStream));
    if (observer) observer(train, test);
    const InfoDensity id = info_density(model, test, corpus.charset_size());
    return EfficiencyPoint{id.h_word, id.h_char, avg_dependency_length(test),
                           test.token_count(), test.arc_count()};
}

inline EfficiencyPoint efficiency_point(const Treebank& full, const SplitSpec& spec,
                                        const OrderingMode& mode) {
    return efficiency_point(PreparedCorpus(full, spec), mode);
}

/// Mean share of each type's instances on its modal side of the head,
/// averaged within each dependency set (dependents grouped by the head's own
/// incoming type, or ROOT for dependents of the root word) and then across
/// sets. Percent.
inline double headedness_consistency(const Treebank& tb) {
    if (tb.empty()) throw Error("headedness of an empty treebank");
    // set -> type -> (left, right)
    std::map<std::string, std::map<std::string, std::pair<std::uint64_t, std::uint64_t>>> sets;
    for (const auto& s : tb.sentences()) {
        for (const auto& a : s.arcs()) {
            if (a.head == kRoot) continue;
            const auto& head_arc = s.arc(a.head);
            const std::string& key =
                head_arc.head == kRoot ? std::string(kRootLabel) : head_arc.dep_type;
            auto& [left, right] = sets[key][a.dep_type];
            (a.dependent < a.head ? left : right) += 1;
        }
    }
    if (sets.empty()) throw Error("headedness needs at least one arc");
    double across = 0.0;
    for (const auto& [key, types] : sets) {
        double within = 0.0;
        for (const auto& [type, lr] : types) {
            const auto [left, right] = lr;
            within += static_cast<double>(std::max(left, right)) / static_cast<double>(left + right);
        }
        across += within / static_cast<double>(types.size());
    }
    return 100.0 * across / static_cast<double>(sets.size());
}

}  // namespace wordeff
