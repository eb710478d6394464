#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wordeff/baseline.hpp"
#include "wordeff/config.hpp"
#include "wordeff/io.hpp"
#include "wordeff/measures.hpp"
#include "wordeff/optimize.hpp"
#include "wordeff/synthetic.hpp"
#include "wordeff/treebank.hpp"

namespace wordeff {

// ---------------------------------------------------------------------------
// Stages

enum class Stage { ingest, describe, baseline, optimize, frontier, report };

inline const char* stage_name(Stage s) {
    static constexpr const char* kNames[] = {"ingest", "describe", "baseline", "optimize", "frontier", "report"};
    return kNames[static_cast<int>(s)];
}

/// Process exit code for a failure in `s`; 1 is left for usage and config errors.
inline int stage_exit_code(Stage s) { return 2 + static_cast<int>(s); }

class StageError : public Error {
public:
    StageError(Stage stage, const std::string& what)
        : Error(std::string("[") + stage_name(stage) + "] " + what), stage_(stage) {}
    Stage stage() const noexcept { return stage_; }

private:
    Stage stage_;
};

using StageSet = std::set<Stage>;

/// Stages a command runs, prerequisites included.
inline StageSet stages_for(Stage command) {
    switch (command) {
        case Stage::ingest: return {Stage::ingest};
        case Stage::describe: return {Stage::ingest, Stage::describe};
        case Stage::baseline: return {Stage::ingest, Stage::baseline};
        case Stage::optimize: return {Stage::ingest, Stage::optimize};
        case Stage::frontier: return {Stage::ingest, Stage::baseline, Stage::frontier};
        case Stage::report: break;
    }
    return {Stage::ingest, Stage::describe, Stage::baseline, Stage::optimize, Stage::frontier, Stage::report};
}

// ---------------------------------------------------------------------------
// Corpus description

struct CorpusStats {
    std::string language;
    std::size_t sentences = 0;
    std::size_t tokens = 0;
    double mean_length = 0.0;
    double sd_length = 0.0;  ///< sample standard deviation
    std::size_t min_length = 0;
    std::size_t max_length = 0;
    std::size_t vocabulary = 0;
    std::size_t charset = 0;  ///< K
    std::size_t dep_types = 0;
};

inline CorpusStats describe(const Treebank& tb) {
    if (tb.empty()) throw Error("cannot describe an empty corpus");
    CorpusStats s;
    s.language = tb.language_tag();
    s.sentences = tb.size();
    s.tokens = tb.token_count();
    std::vector<double> lengths;
    s.min_length = tb.sentences().front().size();
    for (const auto& sent : tb.sentences()) {
        lengths.push_back(static_cast<double>(sent.size()));
        s.min_length = std::min(s.min_length, sent.size());
        s.max_length = std::max(s.max_length, sent.size());
    }
    const MetricSummary m = summarize(lengths);
    s.mean_length = m.mean;
    s.sd_length = m.sd;
    s.vocabulary = tb.vocabulary().size();
    s.charset = tb.charset_size();
    s.dep_types = dep_type_inventory(tb).size();
    return s;
}

inline json to_json(const CorpusStats& s) {
    return json{{"language", s.language},       {"sentences", s.sentences},     {"tokens", s.tokens},
                {"mean_length", s.mean_length}, {"sd_length", s.sd_length},     {"min_length", s.min_length},
                {"max_length", s.max_length},   {"vocabulary", s.vocabulary},   {"charset", s.charset},
                {"dep_types", s.dep_types}};
}

// ---------------------------------------------------------------------------
// Loading

/// Directory-safe form of a language tag.
inline std::string safe_name(const std::string& tag) {
    std::string out;
    for (char c : tag) {
        out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' ? c : '_';
    }
    if (out.empty() || out == "." || out == "..") out = "corpus";
    return out;
}

/// Reads, types, and subsamples every corpus the config names.
inline std::vector<Treebank> load_corpora(const ExperimentConfig& c) {
    std::vector<Treebank> out;
    if (c.corpora.empty()) {
        const SyntheticSpec spec = synthetic_spec_from_json(json::parse(read_file(c.synthetic)));
        out.push_back(generate_synthetic(spec, c.synthetic_sentences, c.synthetic_seed));
    }
    for (const auto& path : c.corpora) {
        ParseOptions opts;
        opts.attach_orphans = c.attach_orphans;
        opts.language_tag = c.language.empty() || c.corpora.size() > 1
                                ? std::filesystem::path(path).stem().string()
                                : c.language;
        try {
            out.push_back(parse_conllx(read_file(path), opts));
        } catch (const Error& e) {
            throw Error(path + ": " + e.what());
        }
    }
    std::set<std::string> seen;
    for (auto& tb : out) {
        if (tb.empty()) throw Error("corpus '" + tb.language_tag() + "' has no sentences");
        if (!seen.insert(safe_name(tb.language_tag())).second) {
            throw Error("two corpora share the language tag '" + tb.language_tag() + "'");
        }
        tb = derive_dependency_types(tb, c.type_scheme);
        if (c.subsample > 0) tb = subsample(tb, c.subsample, c.subsample_seed);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report bundle

/// Column of the optimization table.
struct OptimizedColumn {
    std::string name;  ///< ID, ID&DL, or DL
    Objective objective;
    std::vector<OptimizeResult> restarts;
    std::vector<std::uint64_t> seeds;
    std::size_t best = 0;  ///< index of the restart with the lowest final objective
    EfficiencyPoint point;
};

struct LanguageReport {
    std::string language;
    std::optional<CorpusStats> stats;
    std::optional<EfficiencyPoint> actual;
    std::optional<BaselineDistribution> baseline;
    std::map<std::string, double> p_values;  ///< per metric; empty without a baseline
    std::map<std::string, double> pearson;   ///< "a~b"; missing when undefined
    std::optional<double> headedness;        ///< percent, on the full corpus
    std::vector<OptimizedColumn> optimized;
    std::vector<FrontierPoint> frontier;
};

struct ReportBundle {
    std::string config_hash;
    std::vector<LanguageReport> languages;
};

namespace detail {

inline const OptimizedColumn* find_column(const LanguageReport& r, const std::string& name) {
    for (const auto& c : r.optimized) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

inline json column_json(const OptimizedColumn& c) {
    json runs = json::array();
    for (std::size_t i = 0; i < c.restarts.size(); ++i) {
        const auto& t = c.restarts[i].trace;
        runs.push_back(json{{"seed", c.seeds[i]},
                            {"initial_objective", number(t.initial_objective)},
                            {"final_objective", number(t.final_objective)},
                            {"converged", t.converged},
                            {"passes", t.passes},
                            {"steps", t.steps.size()}});
    }
    json out{{"objective", objective_name(c.objective)}};
    if (c.objective.alpha) out["alpha"] = *c.objective.alpha;
    out["best_restart"] = c.best;
    out["point"] = to_json(c.point);
    out["grammar"] = grammar_to_json(c.restarts[c.best].grammar);
    out["restarts"] = std::move(runs);
    return out;
}

inline json frontier_json(const std::vector<FrontierPoint>& pts) {
    json out = json::array();
    for (const auto& f : pts) {
        out.push_back(json{{"alpha", f.alpha},
                           {"point", to_json(f.point)},
                           {"objective", number(f.objective)},
                           {"converged", f.converged},
                           {"z_h", number(f.z_h)},
                           {"z_dl", number(f.z_dl)}});
    }
    return out;
}

inline std::string cell(const std::optional<double>& x) { return x ? format_number(*x) : "NA"; }

}  // namespace detail

inline json to_json(const LanguageReport& r) {
    json out{{"language", r.language}};
    out["stats"] = r.stats ? to_json(*r.stats) : json(nullptr);
    out["actual"] = r.actual ? to_json(*r.actual) : json(nullptr);
    out["baseline"] = r.baseline ? summary_json(*r.baseline) : json(nullptr);
    json p = json::object();
    for (const auto& [k, v] : r.p_values) p[k] = v;
    out["p_values"] = std::move(p);
    json rho = json::object();
    for (const auto& [k, v] : r.pearson) rho[k] = v;
    out["pearson"] = std::move(rho);
    out["headedness"] = r.headedness ? json(*r.headedness) : json(nullptr);
    json opt = json::object();
    for (const auto& c : r.optimized) opt[c.name] = detail::column_json(c);
    out["optimized"] = std::move(opt);
    out["frontier"] = detail::frontier_json(r.frontier);
    return out;
}

inline json to_json(const ReportBundle& b) {
    json langs = json::array();
    for (const auto& r : b.languages) langs.push_back(to_json(r));
    return json{{"config_hash", b.config_hash}, {"languages", std::move(langs)}};
}

/// Separate and joint optimization results next to the actual language and
/// the random mean, one row per language and metric.
inline std::string optimization_table_tsv(const ReportBundle& b) {
    std::string out = "# config_hash=" + b.config_hash + "\n";
    out += "language\tmetric\tID\tID&DL\tDL\tactual\trandom_mean\n";
    for (const auto& r : b.languages) {
        for (Metric m : {Metric::h_word, Metric::h_char, Metric::dl}) {
            out += r.language + '\t' + metric_name(m);
            for (const char* col : {"ID", "ID&DL", "DL"}) {
                const OptimizedColumn* c = detail::find_column(r, col);
                out += '\t' + detail::cell(c ? std::optional(metric_value(c->point, m)) : std::nullopt);
            }
            out += '\t' + detail::cell(r.actual ? std::optional(metric_value(*r.actual, m)) : std::nullopt);
            out += '\t' + detail::cell(r.baseline ? std::optional(r.baseline->summary(m).mean) : std::nullopt);
            out += '\n';
        }
    }
    return out;
}

/// Actual value, random mean and sd, and empirical p per language and metric.
inline std::string random_table_tsv(const ReportBundle& b) {
    std::string out = "# config_hash=" + b.config_hash + "\n";
    out += "language\tmetric\tactual\trandom_mean\trandom_sd\tp\n";
    for (const auto& r : b.languages) {
        if (!r.actual || !r.baseline) continue;
        for (Metric m : {Metric::h_word, Metric::h_char, Metric::dl}) {
            const MetricSummary& s = r.baseline->summary(m);
            out += r.language + '\t' + metric_name(m) + '\t' + format_number(metric_value(*r.actual, m)) + '\t' +
                   format_number(s.mean) + '\t' + format_number(s.sd) + '\t' +
                   format_number(r.p_values.at(metric_name(m))) + '\n';
        }
    }
    return out;
}

inline std::string corpus_table_tsv(const ReportBundle& b) {
    std::string out = "# config_hash=" + b.config_hash + "\n";
    out += "language\tsentences\tmean_length\tsd_length\tmin_length\tmax_length\tvocabulary\tcharset\tdep_types\n";
    for (const auto& r : b.languages) {
        if (!r.stats) continue;
        const CorpusStats& s = *r.stats;
        out += r.language + '\t' + std::to_string(s.sentences) + '\t' + format_number(s.mean_length) + '\t' +
               format_number(s.sd_length) + '\t' + std::to_string(s.min_length) + '\t' +
               std::to_string(s.max_length) + '\t' + std::to_string(s.vocabulary) + '\t' +
               std::to_string(s.charset) + '\t' + std::to_string(s.dep_types) + '\n';
    }
    return out;
}

inline std::string correlation_table_tsv(const ReportBundle& b) {
    std::string out = "# config_hash=" + b.config_hash + "\n";
    out += "language\th_word~dl\th_char~dl\th_word~h_char\theadedness\n";
    for (const auto& r : b.languages) {
        out += r.language;
        for (const char* k : {"h_word~dl", "h_char~dl", "h_word~h_char"}) {
            const auto it = r.pearson.find(k);
            out += '\t' + detail::cell(it == r.pearson.end() ? std::nullopt : std::optional(it->second));
        }
        out += '\t' + detail::cell(r.headedness) + '\n';
    }
    return out;
}

inline std::string summary_text(const ReportBundle& b) {
    auto fixed = [](double x) {
        if (!std::isfinite(x)) return format_number(x);
        char buf[64];
        const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, 3);
        return std::string(buf, r.ptr);
    };
    std::string out = "config " + b.config_hash + "\n";
    for (const auto& r : b.languages) {
        out += "\n== " + r.language + " ==\n";
        if (r.stats) {
            out += std::to_string(r.stats->sentences) + " sentences, mean length " + fixed(r.stats->mean_length) +
                   ", vocabulary " + std::to_string(r.stats->vocabulary) + ", " + std::to_string(r.stats->charset) +
                   " characters, " + std::to_string(r.stats->dep_types) + " dependency types\n";
        }
        if (r.headedness) out += "headedness consistency " + fixed(*r.headedness) + "%\n";
        if (r.actual) {
            out += "actual: h_word " + fixed(r.actual->h_word) + "  h_char " + fixed(r.actual->h_char) + "  dl " +
                   fixed(r.actual->dl) + "\n";
        }
        if (r.baseline) {
            out += "random (" + std::to_string(r.baseline->size()) + " samples):";
            for (Metric m : {Metric::h_word, Metric::h_char, Metric::dl}) {
                const MetricSummary& s = r.baseline->summary(m);
                out += std::string("  ") + metric_name(m) + " " + fixed(s.mean) + " (sd " + fixed(s.sd) + ", p " +
                       fixed(r.p_values.at(metric_name(m))) + ")";
            }
            out += "\n";
        }
        for (const auto& c : r.optimized) {
            out += "optimized " + c.name + ": h_word " + fixed(c.point.h_word) + "  h_char " +
                   fixed(c.point.h_char) + "  dl " + fixed(c.point.dl) + "\n";
        }
        for (const auto& f : r.frontier) {
            out += "frontier alpha " + fixed(f.alpha) + ": h_word " + fixed(f.point.h_word) + "  h_char " +
                   fixed(f.point.h_char) + "  dl " + fixed(f.point.dl) + "  z_h " + fixed(f.z_h) + "  z_dl " +
                   fixed(f.z_dl) + "\n";
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Running

/// Replaces the output directory with $WORDEFF_OUTPUT_DIR when it is set.
inline void apply_env_overrides(ExperimentConfig& c) {
    if (const char* dir = std::getenv("WORDEFF_OUTPUT_DIR"); dir && *dir) c.output_dir = dir;
}

/// Objectives the config asks to optimize, as (column name, objective).
inline std::vector<std::pair<std::string, Objective>> configured_objectives(const ExperimentConfig& c) {
    const auto& o = c.optimize;
    std::vector<std::pair<std::string, Objective>> out;
    if (o.objective == "all" || o.objective == "id") out.emplace_back("ID", Objective::id(o.id_metric));
    if (o.objective == "all" || o.objective == "joint") {
        out.emplace_back("ID&DL", Objective::joint(o.joint_alpha, o.id_metric));
    }
    if (o.objective == "all" || o.objective == "dl") out.emplace_back("DL", Objective::dl());
    return out;
}

namespace detail {

inline std::string column_file(const std::string& name) {
    if (name == "ID") return "id";
    if (name == "ID&DL") return "joint";
    return "dl";
}

inline OptimizeConfig optimize_config(const ExperimentConfig& c, const Objective& obj) {
    OptimizeConfig oc;
    oc.max_passes = c.optimize.max_passes;
    oc.tolerance = obj.kind == ObjectiveKind::dl ? c.optimize.tolerance_dl : c.optimize.tolerance_id;
    oc.freeze_headedness = c.optimize.freeze_headedness;
    oc.threads = 1;
    if (c.cache) oc.cache_dir = (std::filesystem::path(c.output_dir) / "cache").string();
    return oc;
}

}  // namespace detail

/// Runs `stages` for every corpus in the config and writes their artifacts
/// under config.output_dir. Throws StageError naming the failing stage; the
/// INCOMPLETE marker then stays behind with the diagnostic.
inline ReportBundle run_experiment(const ExperimentConfig& c, const StageSet& stages) {
    namespace fs = std::filesystem;
    const fs::path root(c.output_dir);
    const fs::path marker = root / "INCOMPLETE";
    Stage current = Stage::ingest;
    auto has = [&](Stage s) { return stages.count(s) != 0; };

    ReportBundle bundle;
    bundle.config_hash = c.hash;
    try {
        fs::create_directories(root);
        write_file(marker, "running\n");
        write_file(root / "config.resolved", "# config_hash=" + c.hash + "\n" + c.resolved());

        const std::vector<Treebank> corpora = load_corpora(c);
        for (const Treebank& tb : corpora) {
            current = Stage::ingest;
            const std::string lang = safe_name(tb.language_tag());
            const fs::path dir = root / lang;
            LanguageReport r;
            r.language = tb.language_tag();
            write_file(dir / "corpus.tsv", to_tsv(tb));
            const Provenance base{c.hash, 0};

            if (has(Stage::describe)) {
                current = Stage::describe;
                r.stats = describe(tb);
                r.headedness = headedness_consistency(tb);
                json j = to_json(*r.stats);
                j["headedness"] = *r.headedness;
                j["provenance"] = provenance_json(base);
                write_file(dir / "stats.json", j.dump(2) + "\n");
            }

            // Splitting needs enough sentences, so only stages that measure do it.
            std::optional<PreparedCorpus> prepared;
            if (has(Stage::baseline) || has(Stage::optimize) || has(Stage::frontier)) prepared.emplace(tb, c.split);

            if (has(Stage::baseline)) {
                current = Stage::baseline;
                const PreparedCorpus& corpus = *prepared;
                r.actual = efficiency_point(corpus, IdentityOrder{});
                json a = to_json(*r.actual);
                a["provenance"] = provenance_json(base);
                write_file(dir / "actual.json", a.dump(2) + "\n");
            }

            if (has(Stage::baseline)) {
                current = Stage::baseline;
                const PreparedCorpus& corpus = *prepared;
                const Provenance prov{c.hash, c.baseline.master_seed};
                r.baseline = run_baseline(corpus, c.baseline.n, c.baseline.mode, c.baseline.master_seed, c.threads);
                for (Metric m : {Metric::h_word, Metric::h_char, Metric::dl}) {
                    r.p_values[metric_name(m)] = empirical_p(*r.actual, *r.baseline, m);
                }
                const std::pair<Metric, Metric> pairs[] = {
                    {Metric::h_word, Metric::dl}, {Metric::h_char, Metric::dl}, {Metric::h_word, Metric::h_char}};
                for (const auto& [a, b] : pairs) {
                    try {
                        r.pearson[std::string(metric_name(a)) + "~" + metric_name(b)] = pearson(*r.baseline, a, b);
                    } catch (const Error&) {
                        // Fewer than 3 samples or a constant metric: left out.
                    }
                }
                write_file(dir / "baseline.tsv", baseline_tsv(*r.baseline, prov));
                json s = summary_json(*r.baseline);
                s["p_values"] = r.p_values;
                s["pearson"] = r.pearson;
                s["provenance"] = provenance_json(prov);
                write_file(dir / "baseline_summary.json", s.dump(2) + "\n");
            }

            if (has(Stage::optimize)) {
                current = Stage::optimize;
                const PreparedCorpus& corpus = *prepared;
                for (const auto& [name, obj] : configured_objectives(c)) {
                    OptimizedColumn col{name, obj, {}, {}, 0, {}};
                    const std::size_t k = c.optimize.restarts;
                    for (std::size_t i = 0; i < k; ++i) col.seeds.push_back(derive_seed(c.optimize.init_seed, i));
                    col.restarts.resize(k);
                    const OptimizeConfig oc = detail::optimize_config(c, obj);
                    parallel_for(k, c.threads, [&](std::size_t i) {
                        col.restarts[i] = optimize(corpus, obj, sample_weights(corpus.types(), col.seeds[i]), oc);
                    });
                    for (std::size_t i = 1; i < k; ++i) {
                        if (col.restarts[i].trace.final_objective < col.restarts[col.best].trace.final_objective) {
                            col.best = i;
                        }
                    }
                    col.point = efficiency_point(corpus, FixedOrder{col.restarts[col.best].grammar});
                    const Provenance prov{c.hash, col.seeds[col.best]};
                    const std::string stem = detail::column_file(name);
                    write_file(dir / ("trace_" + stem + ".tsv"), trace_tsv(col.restarts[col.best].trace, prov));
                    json j = detail::column_json(col);
                    j["provenance"] = provenance_json(prov);
                    write_file(dir / ("optimize_" + stem + ".json"), j.dump(2) + "\n");
                    r.optimized.push_back(std::move(col));
                }
            }

            if (has(Stage::frontier)) {
                current = Stage::frontier;
                const PreparedCorpus& corpus = *prepared;
                const BaselineDistribution* dist = nullptr;
                if (r.baseline && r.baseline->summary(c.optimize.id_metric).sd > 0.0 &&
                    r.baseline->summary(Metric::dl).sd > 0.0) {
                    dist = &*r.baseline;
                }
                OptimizeConfig oc = detail::optimize_config(c, Objective::dl());
                oc.tolerance.reset();
                InitPolicy init;
                init.seed = derive_seed(c.optimize.init_seed, 0);
                r.frontier = frontier_sweep(corpus, c.optimize.alphas, init, oc, dist, c.optimize.id_metric, c.threads);
                write_file(dir / "frontier.tsv", frontier_tsv(r.frontier, Provenance{c.hash, init.seed}));
            }
            bundle.languages.push_back(std::move(r));
        }

        if (has(Stage::report)) {
            current = Stage::report;
            write_file(root / "report.json", to_json(bundle).dump(2) + "\n");
            write_file(root / "table_corpora.tsv", corpus_table_tsv(bundle));
            write_file(root / "table_random.tsv", random_table_tsv(bundle));
            write_file(root / "table_correlation.tsv", correlation_table_tsv(bundle));
            write_file(root / "table_optimization.tsv", optimization_table_tsv(bundle));
            write_file(root / "summary.txt", summary_text(bundle));
        }
        fs::remove(marker);
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        StageError err(current, e.what());
        try {
            write_file(marker, std::string(err.what()) + "\n");
        } catch (const std::exception&) {
            // The diagnostic still reaches the caller.
        }
        throw err;
    }
    return bundle;
}

}  // namespace wordeff
