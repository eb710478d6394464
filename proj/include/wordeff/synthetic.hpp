#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "wordeff/error.hpp"
#include "wordeff/linearize.hpp"
#include "wordeff/rng.hpp"
#include "wordeff/treebank.hpp"

namespace wordeff {

/// How generated trees are put into linear order.
enum class SyntheticOrder {
    grammar,    ///< the weighted grammar given by the types' `weight`s
    adjacency,  ///< per-instance placement minimizing dependency length
    free,       ///< random projective order
};

struct SyntheticType {
    std::string name;
    double attach_prob = 0.5;
    double weight = 0.0;             ///< used by SyntheticOrder::grammar
    std::vector<std::string> words;  ///< empty: draw from the shared vocabulary
};

/// Small generative grammar for desk-scale test corpora.
struct SyntheticSpec {
    std::vector<std::string> vocabulary;
    std::vector<SyntheticType> types;
    std::size_t max_depth = 2;
    std::size_t max_arity = 2;
    std::size_t max_per_type = 1;  ///< attachment attempts per type per head
    std::size_t max_tokens = 0;    ///< 0: unlimited
    SyntheticOrder order = SyntheticOrder::grammar;
    std::string language_tag = "synthetic";
};

namespace detail {

/// Alternates dependents across the two sides of each head, larger subtrees
/// farther out and the largest on the side away from the head's own parent.
inline Linearization linearize_adjacent(const Sentence& s) {
    const std::size_t n = s.size();
    std::vector<std::size_t> size(n + 1, 1);
    std::vector<std::size_t> order{s.root()};
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t c : s.children(order[i])) order.push_back(c);
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (s.head(*it) != kRoot) size[s.head(*it)] += size[*it];
    }

    Linearization lin;
    lin.position.assign(n, 0);
    std::size_t next = 0;
    // parent_side: -1 parent to the left, +1 to the right, 0 none.
    auto emit = [&](auto&& self, std::size_t h, int parent_side) -> void {
        std::vector<std::size_t> deps(s.children(h).begin(), s.children(h).end());
        std::stable_sort(deps.begin(), deps.end(),
                         [&](std::size_t a, std::size_t b) { return size[a] > size[b]; });
        std::vector<std::size_t> left, right;
        bool to_left = parent_side >= 0;
        for (std::size_t d : deps) {
            (to_left ? left : right).push_back(d);
            to_left = !to_left;
        }
        for (std::size_t d : left) self(self, d, +1);
        lin.position[h - 1] = ++next;
        for (auto it = right.rbegin(); it != right.rend(); ++it) self(self, *it, -1);
    };
    emit(emit, s.root(), 0);
    return lin;
}

}  // namespace detail

/// Generates `n_sentences` trees from `spec`. Sentence i draws from its own
/// generator seeded with derive_seed(seed, i).
///
/// Each head below `max_depth` tries every type in spec order up to
/// `max_per_type` times, attaching a dependent with the type's probability
/// while it has fewer than `max_arity` dependents.
inline Treebank generate_synthetic(const SyntheticSpec& spec, std::size_t n_sentences,
                                   std::uint64_t seed) {
    if (spec.vocabulary.empty()) throw Error("synthetic spec has an empty vocabulary");
    if (spec.types.empty()) throw Error("synthetic spec has no dependency types");
    WeightedGrammar native;
    for (const auto& t : spec.types) {
        if (t.name.empty()) throw Error("synthetic type with empty name");
        native.weights[t.name] = t.weight;
    }
    if (spec.order == SyntheticOrder::grammar) validate_grammar(native);

    std::vector<Sentence> sentences;
    sentences.reserve(n_sentences);
    for (std::size_t i = 0; i < n_sentences; ++i) {
        Rng rng(derive_seed(seed, i));
        auto draw = [&](const std::vector<std::string>& words) -> const std::string& {
            return words[rng.below(words.size())];
        };
        std::vector<Token> tokens;
        std::vector<DependencyArc> arcs;
        tokens.push_back(make_token(1, draw(spec.vocabulary)));
        arcs.push_back(DependencyArc{1, kRoot, std::string(kRootLabel), std::string(kRootLabel)});
        std::vector<std::size_t> depth{0};
        for (std::size_t h = 1; h <= tokens.size(); ++h) {
            if (depth[h - 1] >= spec.max_depth) continue;
            std::size_t arity = 0;
            for (const auto& t : spec.types) {
                for (std::size_t k = 0; k < spec.max_per_type; ++k) {
                    if (arity >= spec.max_arity) break;
                    if (spec.max_tokens != 0 && tokens.size() >= spec.max_tokens) break;
                    if (!rng.coin(t.attach_prob)) continue;
                    const std::size_t idx = tokens.size() + 1;
                    tokens.push_back(make_token(idx, draw(t.words.empty() ? spec.vocabulary : t.words)));
                    arcs.push_back(DependencyArc{idx, h, t.name, t.name});
                    depth.push_back(depth[h - 1] + 1);
                    ++arity;
                }
            }
        }
        Sentence tree(std::move(tokens), std::move(arcs));
        Linearization lin;
        switch (spec.order) {
            case SyntheticOrder::grammar: lin = linearize_fixed(tree, native); break;
            case SyntheticOrder::adjacency: lin = detail::linearize_adjacent(tree); break;
            case SyntheticOrder::free: lin = linearize_free(tree, rng); break;
        }
        sentences.push_back(apply_linearization(tree, lin));
    }
    return Treebank(std::move(sentences), spec.language_tag);
}

}  // namespace wordeff
