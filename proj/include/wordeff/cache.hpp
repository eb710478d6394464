#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "wordeff/hash.hpp"
#include "wordeff/linearize.hpp"
#include "wordeff/rng.hpp"
#include "wordeff/treebank.hpp"
#include "wordeff/trigram.hpp"

namespace wordeff {

inline std::string corpus_hash(const Treebank& tb) {
    return ContentHash{}.field(tb.language_tag()).add(to_tsv(tb)).hex();
}

/// Hash of the total order a grammar imposes on its types and the head.
/// Grammars that order every pair of types (and the head) alike produce
/// identical linearizations, so they share a hash.
inline std::string grammar_hash(const WeightedGrammar& g) {
    std::vector<std::pair<double, std::string>> ranked;
    ranked.emplace_back(0.0, std::string());
    for (const auto& [t, w] : g.weights) ranked.emplace_back(w, t);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    ContentHash h;
    for (const auto& [w, t] : ranked) h.field(t.empty() ? std::string_view("\x01", 1) : t);
    return h.hex();
}

/// On-disk cache of trained models keyed by (corpus hash, grammar hash).
/// Entries are written to a temporary file and renamed into place.
class ModelCache {
public:
    explicit ModelCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    TrigramModel get_or_train(const std::string& corpus_key, const std::string& grammar_key,
                              const std::function<TrigramModel()>& train) {
        const auto path = dir_ / (corpus_key + "-" + grammar_key + ".kn");
        if (std::ifstream in(path, std::ios::binary); in) {
            ++hits_;
            return TrigramModel::load(in);
        }
        ++misses_;
        TrigramModel m = train();
        const auto tmp = path.string() + ".tmp" + std::to_string(splitmix64(misses_.load()));
        {
            std::ofstream out(tmp, std::ios::binary);
            m.save(out);
        }
        std::filesystem::rename(tmp, path);
        return m;
    }

    std::size_t hits() const noexcept { return hits_; }
    std::size_t misses() const noexcept { return misses_; }

private:
    std::filesystem::path dir_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

}  // namespace wordeff
