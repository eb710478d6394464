#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wordeff/baseline.hpp"
#include "wordeff/cache.hpp"
#include "wordeff/error.hpp"
#include "wordeff/linearize.hpp"
#include "wordeff/measures.hpp"
#include "wordeff/parallel.hpp"

namespace wordeff {

enum class ObjectiveKind { id_word, id_char, dl, joint };

/// What the optimizer minimizes. `alpha` is set iff kind == joint, in which
/// case the value is (1 - alpha) d + alpha h with h measured by `joint_id`.
struct Objective {
    ObjectiveKind kind = ObjectiveKind::dl;
    std::optional<double> alpha;
    Metric joint_id = Metric::h_char;

    static Objective id_word() { return {ObjectiveKind::id_word, std::nullopt}; }
    static Objective id_char() { return {ObjectiveKind::id_char, std::nullopt}; }
    static Objective dl() { return {ObjectiveKind::dl, std::nullopt}; }
    static Objective joint(double alpha, Metric id = Metric::h_char) {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must lie in [0, 1]");
        if (id == Metric::dl) throw Error("joint objective needs an information-density metric");
        return {ObjectiveKind::joint, alpha, id};
    }
    /// Pure information-density objective for `m`.
    static Objective id(Metric m) { return m == Metric::h_word ? id_word() : id_char(); }

    void validate() const {
        if ((kind == ObjectiveKind::joint) != alpha.has_value()) {
            throw Error("alpha must be given exactly for the joint objective");
        }
    }
    bool needs_language_model() const {
        return kind != ObjectiveKind::dl && !(kind == ObjectiveKind::joint && *alpha == 0.0);
    }
    double default_tolerance() const { return kind == ObjectiveKind::dl ? 1e-12 : 1e-9; }
};

inline std::string objective_name(const Objective& o) {
    switch (o.kind) {
        case ObjectiveKind::id_word: return "id_word";
        case ObjectiveKind::id_char: return "id_char";
        case ObjectiveKind::dl: return "dl";
        case ObjectiveKind::joint: return "joint";
    }
    return "?";
}

/// Objective value of an already measured point.
inline double objective_value(const EfficiencyPoint& p, const Objective& o) {
    switch (o.kind) {
        case ObjectiveKind::id_word: return p.h_word;
        case ObjectiveKind::id_char: return p.h_char;
        case ObjectiveKind::dl: return p.dl;
        case ObjectiveKind::joint: {
            const double a = *o.alpha;
            if (a == 0.0) return p.dl;
            return (1.0 - a) * p.dl + a * metric_value(p, o.joint_id);
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Interactions and candidates

/// Types that share at least one head instance; a type interacts with itself
/// when two of its dependents share a head. Symmetric by construction.
using InteractionTable = std::map<std::string, std::set<std::string>>;

inline InteractionTable build_interaction_table(const Treebank& tb) {
    InteractionTable table;
    std::vector<const std::string*> types;
    for (const auto& s : tb.sentences()) {
        for (std::size_t h = 1; h <= s.size(); ++h) {
            types.clear();
            for (std::size_t c : s.children(h)) types.push_back(&s.arc(c).dep_type);
            for (const auto* t : types) table[*t];
            for (std::size_t i = 0; i < types.size(); ++i) {
                for (std::size_t j = i + 1; j < types.size(); ++j) {
                    table[*types[i]].insert(*types[j]);
                    table[*types[j]].insert(*types[i]);
                }
            }
        }
    }
    return table;
}

/// How the head's fixed weight 0 enters candidate enumeration.
enum class HeadPolicy {
    ignore,     ///< breakpoints are the interacting weights only
    crossable,  ///< 0 is a breakpoint; weights may change sign
    frozen,     ///< weights keep their sign; 0 bounds the search
};

namespace detail {

/// Sorted, deduplicated weights of the types interacting with `type`.
inline std::vector<double> interacting_weights(const std::string& type, const WeightedGrammar& g,
                                               const InteractionTable& table) {
    std::vector<double> s;
    if (const auto it = table.find(type); it != table.end()) {
        for (const auto& other : it->second) {
            if (other == type) continue;
            const double w = g.at(other);
            if (w >= -1.0 && w <= 1.0) s.push_back(w);
        }
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

/// Midpoints of consecutive distinct values of lo, s..., hi.
inline std::vector<double> midpoints(double lo, const std::vector<double>& s, double hi) {
    std::vector<double> pts{lo};
    for (double x : s) {
        if (x > pts.back() && x < hi) pts.push_back(x);
    }
    pts.push_back(hi);
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) out.push_back(0.5 * (pts[i] + pts[i + 1]));
    return out;
}

}  // namespace detail

/// One weight per objective-distinct segment of `type`'s coordinate, in
/// ascending order.
///
/// Segments are delimited by the weights of interacting types (and, unless
/// the policy is `ignore`, by the head at 0); each segment is represented by
/// its midpoint. With no breakpoint inside the searchable range the only
/// candidate is the current weight.
inline std::vector<double> candidate_values(const std::string& type, const WeightedGrammar& g,
                                            const InteractionTable& table,
                                            HeadPolicy policy = HeadPolicy::ignore) {
    const double current = g.at(type);
    std::vector<double> s = detail::interacting_weights(type, g, table);
    switch (policy) {
        case HeadPolicy::ignore: {
            if (s.empty()) return {current};
            auto out = detail::midpoints(-1.0, s, 1.0);
            // A midpoint may land on the head's weight; any other point of the
            // same segment orders the interacting types identically.
            for (double& c : out) {
                if (c == 0.0) {
                    const auto next = std::upper_bound(s.begin(), s.end(), 0.0);
                    c = 0.5 * (next == s.end() ? 1.0 : *next);
                }
            }
            return out;
        }
        case HeadPolicy::crossable: {
            s.insert(std::lower_bound(s.begin(), s.end(), 0.0), 0.0);
            s.erase(std::unique(s.begin(), s.end()), s.end());
            return detail::midpoints(-1.0, s, 1.0);
        }
        case HeadPolicy::frozen: {
            const bool left = current < 0.0;
            std::vector<double> side;
            for (double x : s) {
                if (left ? x < 0.0 : x > 0.0) side.push_back(x);
            }
            if (side.empty()) return {current};
            return left ? detail::midpoints(-1.0, side, 0.0) : detail::midpoints(0.0, side, 1.0);
        }
    }
    return {current};
}

namespace detail {

/// True when no breakpoint separates a and b, so both weights induce the
/// same orders. Only meaningful when every breakpoint is in `cuts`.
inline bool same_segment(double a, double b, const std::vector<double>& cuts) {
    const double lo = std::min(a, b), hi = std::max(a, b);
    for (double c : cuts) {
        if (c >= lo && c <= hi) return false;
    }
    return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Objective evaluation

/// Mean dependency length of `test` under grammar `g`, updated incrementally
/// when a single type's weight changes: only sentences containing that type
/// are re-linearized. Lengths are integers, so the result equals a full
/// recomputation exactly.
class DlEvaluator {
public:
    DlEvaluator(const Treebank& test, WeightedGrammar g) : test_(&test), grammar_(std::move(g)) {
        if (test.arc_count() == 0) throw Error("dependency length needs at least one arc");
        per_sentence_.resize(test.size());
        for (std::size_t i = 0; i < test.size(); ++i) {
            const Sentence& s = test.sentences()[i];
            per_sentence_[i] = sentence_total(s, grammar_);
            total_ += per_sentence_[i];
            std::set<std::string_view> seen;
            for (const auto& a : s.arcs()) {
                if (a.head != kRoot && seen.insert(a.dep_type).second) {
                    by_type_[a.dep_type].push_back(i);
                }
            }
        }
    }

    double value() const { return mean(total_); }
    const WeightedGrammar& grammar() const noexcept { return grammar_; }

    /// Mean length with `type` moved to `weight`, all else unchanged.
    double value_with(const std::string& type, double weight) const {
        WeightedGrammar g = grammar_;
        g.weights.at(type) = weight;
        std::uint64_t total = total_;
        for (std::size_t i : sentences_with(type)) {
            total -= per_sentence_[i];
            total += sentence_total(test_->sentences()[i], g);
        }
        return mean(total);
    }

    void commit(const std::string& type, double weight) {
        grammar_.weights.at(type) = weight;
        for (std::size_t i : sentences_with(type)) {
            total_ -= per_sentence_[i];
            per_sentence_[i] = sentence_total(test_->sentences()[i], grammar_);
            total_ += per_sentence_[i];
        }
    }

private:
    static std::uint64_t sentence_total(const Sentence& s, const WeightedGrammar& g) {
        const Linearization lin = linearize_fixed(s, g);
        std::uint64_t total = 0;
        for (const auto& a : s.arcs()) {
            if (a.head == kRoot) continue;
            const std::size_t p = lin.position[a.dependent - 1], q = lin.position[a.head - 1];
            total += p > q ? p - q : q - p;
        }
        return total;
    }

    const std::vector<std::size_t>& sentences_with(const std::string& type) const {
        static const std::vector<std::size_t> kNone;
        const auto it = by_type_.find(type);
        return it == by_type_.end() ? kNone : it->second;
    }

    double mean(std::uint64_t total) const {
        return static_cast<double>(total) / static_cast<double>(test_->arc_count());
    }

    const Treebank* test_;
    WeightedGrammar grammar_;
    std::vector<std::uint64_t> per_sentence_;
    std::uint64_t total_ = 0;
    std::map<std::string, std::vector<std::size_t>, std::less<>> by_type_;
};

/// Efficiency point of grammar `g`, reusing cached models when `cache` is set.
inline EfficiencyPoint grammar_point(const PreparedCorpus& corpus, const WeightedGrammar& g,
                                     ModelCache* cache = nullptr,
                                     const std::string& corpus_key = {}) {
    if (!cache) return efficiency_point(corpus, FixedOrder{g});
    if (corpus.charset_size() < 2) throw Error("by-character density needs at least 2 distinct characters");
    const TrigramModel model = cache->get_or_train(corpus_key, grammar_hash(g), [&] {
        return train_kn(reorder_corpus(corpus.train(), FixedOrder{g}), corpus.vocabulary());
    });
    const Treebank test = reorder_corpus(corpus.test(), FixedOrder{g});
    const InfoDensity id = info_density(model, test, corpus.charset_size());
    return {id.h_word, id.h_char, avg_dependency_length(test), test.token_count(), test.arc_count()};
}

/// Full recomputation of the objective for grammar `g`.
inline double evaluate_objective(const PreparedCorpus& corpus, const WeightedGrammar& g,
                                 const Objective& obj) {
    obj.validate();
    if (!obj.needs_language_model()) {
        return avg_dependency_length(reorder_corpus(corpus.test(), FixedOrder{g}));
    }
    return objective_value(efficiency_point(corpus, FixedOrder{g}), obj);
}

inline double evaluate_objective(const Treebank& full, const SplitSpec& spec,
                                 const WeightedGrammar& g, const Objective& obj) {
    return evaluate_objective(PreparedCorpus(full, spec), g, obj);
}

// ---------------------------------------------------------------------------
// Coordinate descent

struct OptimizeConfig {
    std::size_t max_passes = 50;
    std::optional<double> tolerance;  ///< default: Objective::default_tolerance()
    bool freeze_headedness = false;
    std::size_t threads = 1;          ///< concurrent candidate evaluations
    std::string cache_dir;            ///< model cache; empty disables it
};

struct TraceStep {
    std::size_t pass = 0;
    std::string type;
    double old_weight = 0.0;
    double new_weight = 0.0;
    double objective = 0.0;
};

struct OptimizationTrace {
    double initial_objective = 0.0;
    double final_objective = 0.0;
    std::vector<TraceStep> steps;  ///< accepted steps only
    WeightedGrammar final_grammar;
    bool converged = false;
    std::size_t passes = 0;
    std::size_t evaluations = 0;  ///< objective evaluations actually computed
};

struct OptimizeResult {
    WeightedGrammar grammar;
    OptimizationTrace trace;
};

/// Dependency types ordered by descending frequency in `tb`, ties by name.
inline std::vector<std::string> types_by_frequency(const Treebank& tb) {
    std::map<std::string, std::size_t> freq;
    for (const auto& s : tb.sentences()) {
        for (const auto& a : s.arcs()) {
            if (a.head != kRoot) ++freq[a.dep_type];
        }
    }
    std::vector<std::pair<std::string, std::size_t>> v(freq.begin(), freq.end());
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> out;
    for (auto& [t, n] : v) out.push_back(std::move(t));
    return out;
}

/// Minimizes `obj` one weight at a time.
///
/// Each pass visits the types by descending frequency. For a type, every
/// objective-distinct segment of its weight (see candidate_values) is
/// evaluated with the other weights held fixed, and the best is adopted if
/// it improves the objective by more than the tolerance. Converges when a
/// full pass adopts nothing; otherwise stops after `max_passes` with
/// converged = false. The result is a local optimum.
inline OptimizeResult optimize(const PreparedCorpus& corpus, const Objective& obj,
                               WeightedGrammar init, const OptimizeConfig& config = {}) {
    obj.validate();
    for (const auto& t : corpus.types()) {
        if (!init.contains(t)) throw Error("initial grammar has no weight for dependency type '" + t + "'");
    }
    validate_grammar(init);
    const double tol = config.tolerance.value_or(obj.default_tolerance());
    const HeadPolicy policy = config.freeze_headedness ? HeadPolicy::frozen : HeadPolicy::crossable;
    const InteractionTable table = build_interaction_table(corpus.full());
    const std::vector<std::string> order = types_by_frequency(corpus.full());

    std::unique_ptr<ModelCache> cache;
    std::string corpus_key;
    if (!config.cache_dir.empty() && obj.needs_language_model()) {
        cache = std::make_unique<ModelCache>(config.cache_dir);
        corpus_key = corpus_hash(corpus.full());
    }

    const bool dl_only = !obj.needs_language_model();
    std::optional<DlEvaluator> dl;
    if (dl_only) dl.emplace(corpus.test(), init);

    OptimizationTrace trace;
    WeightedGrammar g = std::move(init);
    auto evaluate = [&](const WeightedGrammar& candidate) {
        return objective_value(grammar_point(corpus, candidate, cache.get(), corpus_key), obj);
    };
    double current = dl_only ? dl->value() : evaluate(g);
    ++trace.evaluations;
    trace.initial_objective = current;

    while (trace.passes < config.max_passes) {
        ++trace.passes;
        bool changed = false;
        for (const auto& type : order) {
            const double old_weight = g.at(type);
            const std::vector<double> cands = candidate_values(type, g, table, policy);
            std::vector<double> cuts = detail::interacting_weights(type, g, table);
            cuts.push_back(0.0);

            std::vector<double> values(cands.size(), current);
            std::vector<std::size_t> todo;
            for (std::size_t i = 0; i < cands.size(); ++i) {
                if (!detail::same_segment(cands[i], old_weight, cuts)) todo.push_back(i);
            }
            parallel_for(todo.size(), config.threads, [&](std::size_t k) {
                const std::size_t i = todo[k];
                if (dl_only) {
                    values[i] = dl->value_with(type, cands[i]);
                } else {
                    WeightedGrammar trial = g;
                    trial.weights.at(type) = cands[i];
                    values[i] = evaluate(trial);
                }
            });
            trace.evaluations += todo.size();

            std::size_t best = 0;
            for (std::size_t i = 1; i < cands.size(); ++i) {
                if (values[i] < values[best]) best = i;
            }
            if (values[best] < current - tol) {
                g.weights.at(type) = cands[best];
                if (dl_only) dl->commit(type, cands[best]);
                current = values[best];
                trace.steps.push_back(TraceStep{trace.passes, type, old_weight, cands[best], current});
                changed = true;
            }
        }
        if (!changed) {
            trace.converged = true;
            break;
        }
    }
    trace.final_objective = current;
    trace.final_grammar = g;
    return {std::move(g), std::move(trace)};
}

inline OptimizeResult optimize(const Treebank& full, const SplitSpec& spec, const Objective& obj,
                               WeightedGrammar init, const OptimizeConfig& config = {}) {
    return optimize(PreparedCorpus(full, spec), obj, std::move(init), config);
}

struct RestartResult {
    std::vector<double> finals;
    std::vector<OptimizeResult> runs;
    double variance = 0.0;  ///< sample variance of `finals`
};

/// Optimizes from sample_weights(types, seeds[i]) for every seed. Restarts
/// run concurrently on `threads` workers; candidate evaluation inside each
/// run stays sequential.
inline RestartResult restart_variance(const PreparedCorpus& corpus, const Objective& obj,
                                      const std::vector<std::uint64_t>& seeds,
                                      OptimizeConfig config = {}, std::size_t threads = 1) {
    if (seeds.size() < 2) throw Error("restart variance needs at least 2 runs");
    RestartResult r;
    r.runs.resize(seeds.size());
    config.threads = 1;
    parallel_for(seeds.size(), threads, [&](std::size_t i) {
        r.runs[i] = optimize(corpus, obj, sample_weights(corpus.types(), seeds[i]), config);
    });
    for (const auto& run : r.runs) r.finals.push_back(run.trace.final_objective);
    const MetricSummary s = summarize(r.finals);
    r.variance = s.sd * s.sd;
    return r;
}

/// Starting grammar for frontier runs: either a given grammar or a draw
/// from sample_weights with `seed`.
struct InitPolicy {
    std::optional<WeightedGrammar> grammar;
    std::uint64_t seed = 0;

    WeightedGrammar make(const PreparedCorpus& corpus) const {
        return grammar ? *grammar : sample_weights(corpus.types(), seed);
    }
};

struct FrontierPoint {
    double alpha = 0.0;
    EfficiencyPoint point;
    WeightedGrammar grammar;
    double objective = 0.0;
    bool converged = false;
    double z_h = std::numeric_limits<double>::quiet_NaN();   ///< of the joint ID metric
    double z_dl = std::numeric_limits<double>::quiet_NaN();
};

inline const std::vector<double>& default_alphas() {
    static const std::vector<double> kAlphas{0.0, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    return kAlphas;
}

/// One optimization per alpha. alpha = 0 runs the pure DL objective and
/// alpha = 1 the pure ID objective; others run the joint objective. When a
/// baseline is supplied, points are also reported as z-scores against it.
inline std::vector<FrontierPoint> frontier_sweep(const PreparedCorpus& corpus,
                                                 const std::vector<double>& alphas,
                                                 const InitPolicy& init,
                                                 const OptimizeConfig& config = {},
                                                 const BaselineDistribution* baseline = nullptr,
                                                 Metric id_metric = Metric::h_char,
                                                 std::size_t threads = 1) {
    for (double a : alphas) {
        if (!(a >= 0.0 && a <= 1.0)) throw Error("alpha must lie in [0, 1]");
    }
    std::vector<FrontierPoint> out(alphas.size());
    OptimizeConfig run_config = config;
    if (threads > 1) run_config.threads = 1;
    parallel_for(alphas.size(), threads, [&](std::size_t i) {
        const double a = alphas[i];
        const Objective obj = a == 0.0   ? Objective::dl()
                              : a == 1.0 ? Objective::id(id_metric)
                                         : Objective::joint(a, id_metric);
        OptimizeResult r = optimize(corpus, obj, init.make(corpus), run_config);
        FrontierPoint& fp = out[i];
        fp.alpha = a;
        fp.point = efficiency_point(corpus, FixedOrder{r.grammar});
        fp.objective = r.trace.final_objective;
        fp.converged = r.trace.converged;
        fp.grammar = std::move(r.grammar);
        if (baseline) {
            fp.z_h = standardize(metric_value(fp.point, id_metric), *baseline, id_metric);
            fp.z_dl = standardize(fp.point.dl, *baseline, Metric::dl);
        }
    });
    return out;
}

}  // namespace wordeff
