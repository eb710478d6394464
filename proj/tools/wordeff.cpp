// Command-line runner for word order efficiency experiments.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wordeff/config.hpp"
#include "wordeff/experiment.hpp"
#include "wordeff/io.hpp"

namespace {

using namespace wordeff;

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

// Flags that map one-to-one onto config keys.
struct Flag {
    const char* name;
    const char* key;
    const char* help;
    bool is_string;
};

constexpr Flag kFlags[] = {
    {"--synthetic", "synthetic", "synthetic spec JSON used when no corpus is given", true},
    {"--sentences", "synthetic_sentences", "sentences to generate from the synthetic spec", false},
    {"--synthetic-seed", "synthetic_seed", "seed of the synthetic generator", false},
    {"--language", "language", "language tag of a single corpus", true},
    {"--type-scheme", "type_scheme", "self_label or child_parent_pair", true},
    {"--subsample", "subsample", "keep this many sentences (0: all)", false},
    {"--subsample-seed", "subsample_seed", "seed of the subsample", false},
    {"--train-fraction", "split.train_fraction", "training share, e.g. 9/10", true},
    {"--split-strategy", "split.strategy", "interleaved or seeded_random", true},
    {"--split-seed", "split.seed", "seed of the seeded_random split", false},
    {"--baseline-n", "baseline.n", "random pseudo-grammars to sample", false},
    {"--baseline-mode", "baseline.mode", "fixed, free, or fixed_headedness", true},
    {"--master-seed", "baseline.master_seed", "master seed of the baseline samples", false},
    {"--objective", "optimize.objective", "id, joint, dl, or all", true},
    {"--joint-alpha", "optimize.joint_alpha", "alpha of the joint column", false},
    {"--id-metric", "optimize.id_metric", "h_char or h_word", true},
    {"--restarts", "optimize.restarts", "random initializations per objective", false},
    {"--max-passes", "optimize.max_passes", "sweep limit per run", false},
    {"--tolerance-dl", "optimize.tolerance_dl", "improvement tolerance for DL", false},
    {"--tolerance-id", "optimize.tolerance_id", "improvement tolerance for ID and joint", false},
    {"--init-seed", "optimize.init_seed", "seed of the initial grammars", false},
    {"--output-dir,-o", "output_dir", "output directory", true},
    {"--threads,-j", "threads", "worker threads", false},
};

struct Options {
    std::string config_path;
    std::vector<std::string> corpora;
    std::vector<std::string> sets;
    std::vector<double> alphas;
    bool attach_orphans = false;
    bool freeze_headedness = false;
    bool cache = false;
    std::vector<std::string> values = std::vector<std::string>(std::size(kFlags));
};

void add_options(CLI::App& cmd, Options& o) {
    cmd.add_option("-c,--config", o.config_path, "config file")->check(CLI::ExistingFile);
    cmd.add_option("corpus", o.corpora, "dependency corpora (TSV or CoNLL-X)");
    cmd.add_option("--set", o.sets, "override a config key: key=value");
    cmd.add_option("--alphas", o.alphas, "frontier alphas")->delimiter(',');
    cmd.add_flag("--attach-orphans", o.attach_orphans, "attach orphaned tokens to the root word");
    cmd.add_flag("--freeze-headedness", o.freeze_headedness, "keep every type on its initial side of the head");
    cmd.add_flag("--cache", o.cache, "cache trained models in the output directory");
    for (std::size_t i = 0; i < std::size(kFlags); ++i) {
        cmd.add_option(kFlags[i].name, o.values[i], kFlags[i].help);
    }
}

ExperimentConfig resolve(const Options& o) {
    FlatConfig fc = o.config_path.empty() ? FlatConfig{} : FlatConfig::parse(read_file(o.config_path));
    if (!o.corpora.empty()) {
        std::string list = "[";
        for (std::size_t i = 0; i < o.corpora.size(); ++i) list += (i ? ", " : "") + quote(o.corpora[i]);
        fc.set("corpora", list + "]");
        fc = [&] {
            FlatConfig out;
            for (const auto& [k, v] : fc.raw()) {
                if (k != "corpus") out.set(k, v);
            }
            return out;
        }();
    }
    for (std::size_t i = 0; i < std::size(kFlags); ++i) {
        if (o.values[i].empty()) continue;
        fc.set(kFlags[i].key, kFlags[i].is_string ? quote(o.values[i]) : o.values[i]);
    }
    if (!o.alphas.empty()) {
        std::string list = "[";
        for (std::size_t i = 0; i < o.alphas.size(); ++i) list += (i ? ", " : "") + format_number(o.alphas[i]);
        fc.set("optimize.alphas", list + "]");
    }
    if (o.attach_orphans) fc.set("attach_orphans", "true");
    if (o.freeze_headedness) fc.set("optimize.freeze_headedness", "true");
    if (o.cache) fc.set("cache", "true");
    for (const auto& kv : o.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error("--set expects key=value, got '" + kv + "'");
        fc.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    ExperimentConfig c = ExperimentConfig::from(fc);
    apply_env_overrides(c);
    return c;
}

void print_stats(const ReportBundle& b) {
    std::cout << "language\tsentences\tmean_length\tsd_length\tmin\tmax\tvocabulary\tK\tdep_types\theadedness\n";
    for (const auto& r : b.languages) {
        if (!r.stats) continue;
        const CorpusStats& s = *r.stats;
        std::cout << s.language << '\t' << s.sentences << '\t' << format_number(s.mean_length) << '\t'
                  << format_number(s.sd_length) << '\t' << s.min_length << '\t' << s.max_length << '\t'
                  << s.vocabulary << '\t' << s.charset << '\t' << s.dep_types << '\t'
                  << (r.headedness ? format_number(*r.headedness) : "NA") << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Information density and dependency length of word orders"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "wordeff 1.0.0");

    struct Command {
        Stage stage;
        const char* help;
    };
    const Command commands[] = {
        {Stage::ingest, "read and type the corpora, write them as TSV"},
        {Stage::describe, "corpus statistics"},
        {Stage::baseline, "actual language against random pseudo-grammars"},
        {Stage::optimize, "coordinate descent on ID, DL, or the joint objective"},
        {Stage::frontier, "joint optimization over a list of alphas"},
        {Stage::report, "every stage plus the summary tables"},
    };
    std::vector<Options> options(std::size(commands));
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        CLI::App* sub = app.add_subcommand(stage_name(commands[i].stage), commands[i].help);
        add_options(*sub, options[i]);
        subs.push_back(sub);
    }
    CLI11_PARSE(app, argc, argv);

    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        ExperimentConfig config;
        try {
            config = resolve(options[i]);
        } catch (const std::exception& e) {
            std::cerr << "wordeff: [config] " << e.what() << '\n';
            return 1;
        }
        try {
            const ReportBundle bundle = run_experiment(config, stages_for(commands[i].stage));
            if (commands[i].stage == Stage::describe) {
                print_stats(bundle);
            } else if (commands[i].stage != Stage::ingest) {
                std::cout << summary_text(bundle);
            }
            std::cerr << "wordeff: wrote " << config.output_dir << '\n';
            return 0;
        } catch (const StageError& e) {
            std::cerr << "wordeff: " << e.what() << '\n';
            return stage_exit_code(e.stage());
        }
    }
    return 1;
}
