#pragma once

// Exhaustive search over weighted grammars for corpora with few types.
//
// A fixed linearization depends only on the relative order of the type
// weights and the head's 0, so enumerating every permutation of
// (types + head) and assigning evenly spaced weights by rank covers every
// distinct grammar.

#include <algorithm>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "wordeff/linearize.hpp"
#include "wordeff/measures.hpp"

namespace oracle {

inline std::vector<wordeff::WeightedGrammar> all_grammars(const std::vector<std::string>& types) {
    std::vector<std::string> items = types;
    items.push_back("");  // head
    std::sort(items.begin(), items.end());
    std::vector<wordeff::WeightedGrammar> out;
    do {
        const auto head = static_cast<double>(std::find(items.begin(), items.end(), "") - items.begin());
        const double step = 1.0 / static_cast<double>(items.size() + 1);
        wordeff::WeightedGrammar g;
        for (std::size_t r = 0; r < items.size(); ++r) {
            if (items[r].empty()) continue;
            g.weights[items[r]] = (static_cast<double>(r) - head) * step;
        }
        out.push_back(std::move(g));
    } while (std::next_permutation(items.begin(), items.end()));
    return out;
}

struct Exhaustive {
    std::vector<wordeff::WeightedGrammar> grammars;
    std::vector<wordeff::EfficiencyPoint> points;  ///< one per grammar
};

/// Every grammar's efficiency point. Uses the full pipeline, no shortcuts.
inline Exhaustive enumerate(const wordeff::PreparedCorpus& corpus) {
    Exhaustive e;
    e.grammars = all_grammars(corpus.types());
    for (const auto& g : e.grammars) e.points.push_back(wordeff::efficiency_point(corpus, wordeff::FixedOrder{g}));
    return e;
}

/// Minimum of `value(point)` over the enumeration, and the argmin.
inline std::pair<double, std::size_t> minimum(const Exhaustive& e,
                                              const std::function<double(const wordeff::EfficiencyPoint&)>& value) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < e.points.size(); ++i) {
        const double v = value(e.points[i]);
        if (v < best) {
            best = v;
            arg = i;
        }
    }
    return {best, arg};
}

}  // namespace oracle
