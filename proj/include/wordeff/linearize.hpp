#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wordeff/error.hpp"
#include "wordeff/rng.hpp"
#include "wordeff/treebank.hpp"

namespace wordeff {

/// Weight per dependency type; the head sits at weight 0. Sorting a head's
/// dependents and the head itself by weight gives their left-to-right order.
struct WeightedGrammar {
    std::map<std::string, double> weights;

    double at(const std::string& type) const {
        const auto it = weights.find(type);
        if (it == weights.end()) throw Error("grammar has no weight for dependency type '" + type + "'");
        return it->second;
    }
    bool contains(const std::string& type) const { return weights.contains(type); }
    std::size_t size() const noexcept { return weights.size(); }

    friend bool operator==(const WeightedGrammar&, const WeightedGrammar&) = default;
};

/// Throws unless every weight is in [-1, 1] and nonzero.
inline void validate_grammar(const WeightedGrammar& g) {
    for (const auto& [type, w] : g.weights) {
        if (!(w >= -1.0 && w <= 1.0) || w == 0.0) {
            throw Error("weight of '" + type + "' must lie in [-1,1] \\ {0}, got " +
                        std::to_string(w));
        }
    }
}

/// Draws each weight uniformly from [-1, 1], redrawing zeros and values
/// already taken by another type. Types are visited in sorted order so the
/// result depends only on the type set and the generator state.
inline WeightedGrammar sample_weights(std::vector<std::string> types, Rng& rng) {
    std::sort(types.begin(), types.end());
    types.erase(std::unique(types.begin(), types.end()), types.end());
    WeightedGrammar g;
    std::set<double> taken;
    for (const auto& t : types) {
        double w;
        do {
            w = rng.uniform(-1.0, 1.0);
        } while (w == 0.0 || taken.contains(w));
        taken.insert(w);
        g.weights.emplace(t, w);
    }
    return g;
}

inline WeightedGrammar sample_weights(const std::vector<std::string>& types, std::uint64_t seed) {
    Rng rng(seed);
    return sample_weights(types, rng);
}

enum class Side { left, right };
using HeadednessMap = std::map<std::string, Side>;

/// Random side per type, each with probability 1/2.
inline HeadednessMap sample_headedness(std::vector<std::string> types, Rng& rng) {
    std::sort(types.begin(), types.end());
    HeadednessMap sides;
    for (const auto& t : types) sides[t] = rng.coin(0.5) ? Side::left : Side::right;
    return sides;
}

/// position[i] is the new 1-based position of the token at original index i+1.
struct Linearization {
    std::vector<std::size_t> position;

    bool is_bijection() const {
        std::vector<bool> hit(position.size() + 1, false);
        for (std::size_t p : position) {
            if (p == 0 || p > position.size() || hit[p]) return false;
            hit[p] = true;
        }
        return true;
    }
    bool is_identity() const {
        for (std::size_t i = 0; i < position.size(); ++i) {
            if (position[i] != i + 1) return false;
        }
        return true;
    }
    friend bool operator==(const Linearization&, const Linearization&) = default;
};

/// True iff every subtree occupies a contiguous span of new positions.
inline bool is_projective(const Sentence& s, const Linearization& lin) {
    const std::size_t n = s.size();
    std::vector<std::size_t> lo(n + 1), hi(n + 1), count(n + 1);
    // Post-order over the tree: children before parents.
    std::vector<std::size_t> order;
    order.reserve(n);
    std::vector<std::size_t> stack{s.root()};
    while (!stack.empty()) {
        const std::size_t h = stack.back();
        stack.pop_back();
        order.push_back(h);
        for (std::size_t c : s.children(h)) stack.push_back(c);
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const std::size_t h = *it;
        lo[h] = hi[h] = lin.position[h - 1];
        count[h] = 1;
        for (std::size_t c : s.children(h)) {
            lo[h] = std::min(lo[h], lo[c]);
            hi[h] = std::max(hi[h], hi[c]);
            count[h] += count[c];
        }
        if (hi[h] - lo[h] + 1 != count[h]) return false;
    }
    return true;
}

namespace detail {

/// Projective placement driven by a per-head local order.
///
/// `local(head, children, items)` must fill `items` with a permutation of the
/// head's dependents plus the marker 0 standing for the head itself; every
/// dependent then expands into its own subtree block.
template <class LocalOrder>
Linearization place_projective(const Sentence& s, LocalOrder&& local) {
    Linearization lin;
    lin.position.assign(s.size(), 0);
    std::size_t next = 0;
    std::vector<std::size_t> items;
    // Frames: (head, its ordered items, cursor).
    struct Frame {
        std::size_t head;
        std::vector<std::size_t> items;
        std::size_t cursor;
    };
    std::vector<Frame> stack;
    auto open = [&](std::size_t h) {
        items.clear();
        local(h, s.children(h), items);
        stack.push_back(Frame{h, items, 0});
    };
    open(s.root());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.cursor == f.items.size()) {
            stack.pop_back();
            continue;
        }
        const std::size_t item = f.items[f.cursor++];
        if (item == 0) {
            lin.position[f.head - 1] = ++next;
        } else {
            open(item);
        }
    }
    return lin;
}

}  // namespace detail

/// Deterministic order under a weighted grammar. Same-weight siblings keep
/// their original relative order.
inline Linearization linearize_fixed(const Sentence& s, const WeightedGrammar& g) {
    std::vector<std::pair<double, std::size_t>> keyed;
    return detail::place_projective(
        s, [&](std::size_t, std::span<const std::size_t> children, std::vector<std::size_t>& items) {
            keyed.clear();
            keyed.emplace_back(0.0, 0);
            for (std::size_t c : children) keyed.emplace_back(g.at(s.arc(c).dep_type), c);
            std::stable_sort(keyed.begin(), keyed.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            for (const auto& [w, item] : keyed) items.push_back(item);
        });
}

/// Uniformly random interleaving of the head and its dependent blocks,
/// independently at every head.
inline Linearization linearize_free(const Sentence& s, Rng& rng) {
    return detail::place_projective(
        s, [&](std::size_t, std::span<const std::size_t> children, std::vector<std::size_t>& items) {
            items.push_back(0);
            items.insert(items.end(), children.begin(), children.end());
            rng.shuffle(std::span(items));
        });
}

/// Each dependent block on its type's side of the head, in uniformly random
/// order within each side.
inline Linearization linearize_fixed_headedness(const Sentence& s, const HeadednessMap& sides,
                                                Rng& rng) {
    std::vector<std::size_t> right;
    return detail::place_projective(
        s, [&](std::size_t, std::span<const std::size_t> children, std::vector<std::size_t>& items) {
            right.clear();
            for (std::size_t c : children) {
                const auto& type = s.arc(c).dep_type;
                const auto it = sides.find(type);
                if (it == sides.end()) throw Error("headedness map has no side for dependency type '" + type + "'");
                (it->second == Side::left ? items : right).push_back(c);
            }
            rng.shuffle(std::span(items));
            rng.shuffle(std::span(right));
            items.push_back(0);
            items.insert(items.end(), right.begin(), right.end());
        });
}

/// The sentence rewritten in the new order, with indices and arcs renumbered.
inline Sentence apply_linearization(const Sentence& s, const Linearization& lin) {
    const std::size_t n = s.size();
    std::vector<Token> tokens(n);
    std::vector<DependencyArc> arcs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t p = lin.position[i];
        const Token& t = s.tokens()[i];
        tokens[p - 1] = Token{p, t.form, t.char_len};
        const DependencyArc& a = s.arcs()[i];
        arcs[p - 1] = DependencyArc{p, a.head == kRoot ? kRoot : lin.position[a.head - 1],
                                    a.raw_label, a.dep_type};
    }
    return Sentence(std::move(tokens), std::move(arcs));
}

// ---------------------------------------------------------------------------
// Corpus reordering

struct IdentityOrder {};
struct FixedOrder {
    WeightedGrammar grammar;
};
struct FreeOrder {
    std::uint64_t seed = 0;
};
struct FixedHeadednessOrder {
    HeadednessMap sides;
    std::uint64_t seed = 0;
};
using OrderingMode = std::variant<IdentityOrder, FixedOrder, FreeOrder, FixedHeadednessOrder>;

inline const char* mode_tag(const OrderingMode& mode) {
    static constexpr const char* kTags[] = {"identity", "fixed", "free", "fixed_headedness"};
    return kTags[mode.index()];
}

/// Same mode with its seed moved to substream `stream`; used to give the
/// train and test portions independent draws.
inline OrderingMode reseed(OrderingMode mode, std::uint64_t stream) {
    std::visit(
        [stream](auto& m) {
            if constexpr (requires { m.seed; }) m.seed = derive_seed(m.seed, stream);
        },
        mode);
    return mode;
}

/// Linearizes every sentence under `mode`. Seeded modes give sentence i its
/// own generator seeded with derive_seed(seed, i), so the result does not
/// depend on processing order.
inline Treebank reorder_corpus(const Treebank& tb, const OrderingMode& mode) {
    if (std::holds_alternative<IdentityOrder>(mode)) return tb;
    std::vector<Sentence> out;
    out.reserve(tb.size());
    for (std::size_t i = 0; i < tb.size(); ++i) {
        const Sentence& s = tb.sentences()[i];
        const Linearization lin = std::visit(
            [&](const auto& m) -> Linearization {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, FixedOrder>) {
                    return linearize_fixed(s, m.grammar);
                } else if constexpr (std::is_same_v<M, FreeOrder>) {
                    Rng rng(derive_seed(m.seed, i));
                    return linearize_free(s, rng);
                } else if constexpr (std::is_same_v<M, FixedHeadednessOrder>) {
                    Rng rng(derive_seed(m.seed, i));
                    return linearize_fixed_headedness(s, m.sides, rng);
                } else {
                    return Linearization{};
                }
            },
            mode);
        out.push_back(apply_linearization(s, lin));
    }
    return Treebank(std::move(out), tb.language_tag());
}

}  // namespace wordeff
