#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wordeff/error.hpp"
#include "wordeff/linearize.hpp"
#include "wordeff/measures.hpp"
#include "wordeff/parallel.hpp"
#include "wordeff/rng.hpp"

namespace wordeff {

/// Kind of random pseudo-grammar drawn for the chance baseline.
enum class BaselineMode {
    fixed_per_type,    ///< one random weighted grammar for the whole corpus
    free,              ///< independent random order at every head instance
    fixed_headedness,  ///< random side per type, random order within sides
};

inline const char* baseline_mode_name(BaselineMode m) {
    switch (m) {
        case BaselineMode::fixed_per_type: return "fixed";
        case BaselineMode::free: return "free";
        case BaselineMode::fixed_headedness: return "fixed_headedness";
    }
    return "?";
}

inline BaselineMode parse_baseline_mode(std::string_view s) {
    if (s == "fixed" || s == "fixed_per_type") return BaselineMode::fixed_per_type;
    if (s == "free") return BaselineMode::free;
    if (s == "fixed_headedness") return BaselineMode::fixed_headedness;
    throw Error("unknown baseline mode '" + std::string(s) + "'");
}

struct BaselineSample {
    std::size_t id = 0;
    std::uint64_t seed = 0;
    BaselineMode mode = BaselineMode::fixed_per_type;
    EfficiencyPoint point;
};

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0;  ///< sample standard deviation (n - 1); 0 for one sample
};

inline MetricSummary summarize(std::span<const double> xs) {
    if (xs.empty()) return {};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
    return {mean, sd};
}

/// Samples plus per-metric summaries, always recomputed from the samples.
class BaselineDistribution {
public:
    BaselineDistribution() = default;
    explicit BaselineDistribution(std::vector<BaselineSample> samples)
        : samples_(std::move(samples)) {
        for (Metric m : {Metric::h_word, Metric::h_char, Metric::dl}) {
            const auto xs = values(m);
            summary_[static_cast<int>(m)] = summarize(xs);
        }
    }

    const std::vector<BaselineSample>& samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    const MetricSummary& summary(Metric m) const { return summary_[static_cast<int>(m)]; }

    std::vector<double> values(Metric m) const {
        std::vector<double> xs;
        xs.reserve(samples_.size());
        for (const auto& s : samples_) xs.push_back(metric_value(s.point, m));
        return xs;
    }

private:
    std::vector<BaselineSample> samples_;
    MetricSummary summary_[3];
};

/// Seed of sample `id` under `master_seed`.
inline std::uint64_t sample_seed(std::uint64_t master_seed, std::size_t id) {
    return derive_seed(master_seed, id);
}

/// The ordering mode a baseline sample with `seed` evaluates.
inline OrderingMode baseline_ordering(const PreparedCorpus& corpus, BaselineMode mode,
                                      std::uint64_t seed) {
    switch (mode) {
        case BaselineMode::fixed_per_type: return FixedOrder{sample_weights(corpus.types(), seed)};
        case BaselineMode::free: return FreeOrder{seed};
        case BaselineMode::fixed_headedness: {
            Rng rng(seed);
            return FixedHeadednessOrder{sample_headedness(corpus.types(), rng),
                                        derive_seed(seed, 0)};
        }
    }
    throw Error("unknown baseline mode");
}

/// Observer hook for run_baseline: (sample id, reordered train, reordered test).
/// Called from worker threads.
using SampleObserver =
    std::function<void(std::size_t id, const Treebank& train, const Treebank& test)>;

/// Evaluates `n` random pseudo-grammars, each through the full pipeline
/// including model retraining. Sample i is seeded with
/// sample_seed(master_seed, i), so the result does not depend on `threads`.
inline BaselineDistribution run_baseline(const PreparedCorpus& corpus, std::size_t n,
                                         BaselineMode mode, std::uint64_t master_seed,
                                         std::size_t threads = 1,
                                         const SampleObserver& observer = {}) {
    if (n == 0) throw Error("baseline needs at least one sample");
    std::vector<BaselineSample> samples(n);
    parallel_for(n, threads, [&](std::size_t i) {
        const std::uint64_t seed = sample_seed(master_seed, i);
        ReorderObserver hook;
        if (observer) hook = [&](const Treebank& tr, const Treebank& te) { observer(i, tr, te); };
        samples[i] = BaselineSample{i, seed, mode,
                                    efficiency_point(corpus, baseline_ordering(corpus, mode, seed), hook)};
    });
    return BaselineDistribution(std::move(samples));
}

/// Fraction of samples whose metric is strictly below the actual value,
/// i.e. the random grammars that beat the actual order. Ties do not count.
inline double empirical_p(const EfficiencyPoint& actual, const BaselineDistribution& dist,
                          Metric m) {
    if (dist.empty()) throw Error("empirical p-value against an empty distribution");
    const double a = metric_value(actual, m);
    std::size_t beats = 0;
    for (const auto& s : dist.samples()) beats += metric_value(s.point, m) < a;
    return static_cast<double>(beats) / static_cast<double>(dist.size());
}

/// Sample Pearson correlation.
inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error("pearson: length mismatch");
    if (x.size() < 3) throw Error("pearson needs at least 3 samples");
    const MetricSummary sx = summarize(x), sy = summarize(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - sx.mean, dy = y[i] - sy.mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error("pearson correlation undefined for a constant metric");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double pearson(const BaselineDistribution& dist, Metric a, Metric b) {
    const auto x = dist.values(a), y = dist.values(b);
    return pearson(x, y);
}

/// (value - mean) / sd against the distribution's summary for `m`.
inline double standardize(double value, const BaselineDistribution& dist, Metric m) {
    const MetricSummary& s = dist.summary(m);
    if (!(s.sd > 0.0)) throw Error(std::string("cannot standardize: zero spread in ") + metric_name(m));
    return (value - s.mean) / s.sd;
}

}  // namespace wordeff
