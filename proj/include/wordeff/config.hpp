#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wordeff/baseline.hpp"
#include "wordeff/error.hpp"
#include "wordeff/hash.hpp"
#include "wordeff/io.hpp"
#include "wordeff/optimize.hpp"
#include "wordeff/treebank.hpp"

namespace wordeff {

/// Flat TOML-style key/value file.
///
///   # comment
///   corpus = "data/wsj.tsv"
///   [baseline]
///   n = 1000            # stored as "baseline.n"
///   optimize.alphas = [0, 0.5, 1]
///
/// Values are strings (double-quoted), numbers, booleans, or one-line arrays
/// of those. Values are kept as raw text and typed on access.
class FlatConfig {
public:
    static FlatConfig parse(std::string_view text) {
        FlatConfig c;
        std::string section;
        std::size_t line_no = 0, pos = 0;
        while (pos <= text.size()) {
            std::size_t nl = text.find('\n', pos);
            if (nl == std::string_view::npos) nl = text.size();
            std::string_view line = strip(strip_comment(text.substr(pos, nl - pos)));
            pos = nl + 1;
            ++line_no;
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
                section = std::string(strip(line.substr(1, line.size() - 2)));
                if (!valid_key(section)) throw ParseError(line_no, "bad section name");
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
            const std::string_view key = strip(line.substr(0, eq));
            const std::string_view value = strip(line.substr(eq + 1));
            if (!valid_key(key)) throw ParseError(line_no, "bad key '" + std::string(key) + "'");
            if (value.empty()) throw ParseError(line_no, "missing value");
            const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
            if (c.values_.count(full)) throw ParseError(line_no, "duplicate key '" + full + "'");
            c.values_[full] = std::string(value);
        }
        return c;
    }

    /// Sets `key` from raw value text, as if written in the file.
    void set(const std::string& key, const std::string& raw) {
        if (!valid_key(key)) throw Error("bad key '" + key + "'");
        values_[key] = raw;
    }

    bool contains(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& raw() const noexcept { return values_; }

    std::optional<std::string> get_string(const std::string& key) const {
        const auto v = find(key);
        if (!v) return std::nullopt;
        return unquote(key, *v);
    }
    std::optional<double> get_double(const std::string& key) const {
        const auto v = find(key);
        if (!v) return std::nullopt;
        return to_double(key, *v);
    }
    std::optional<std::uint64_t> get_uint(const std::string& key) const {
        const auto v = find(key);
        if (!v) return std::nullopt;
        std::uint64_t x = 0;
        const auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), x);
        if (ec != std::errc() || end != v->data() + v->size()) throw Error(key + ": expected a non-negative integer");
        return x;
    }
    std::optional<bool> get_bool(const std::string& key) const {
        const auto v = find(key);
        if (!v) return std::nullopt;
        if (*v == "true") return true;
        if (*v == "false") return false;
        throw Error(key + ": expected true or false");
    }
    std::optional<std::vector<std::string>> get_strings(const std::string& key) const {
        const auto v = find(key);
        if (!v) return std::nullopt;
        std::vector<std::string> out;
        for (const auto& item : items(key, *v)) out.push_back(unquote(key, item));
        return out;
    }
    std::optional<std::vector<double>> get_doubles(const std::string& key) const {
        const auto v = find(key);
        if (!v) return std::nullopt;
        std::vector<double> out;
        for (const auto& item : items(key, *v)) out.push_back(to_double(key, item));
        return out;
    }

private:
    static std::string_view strip(std::string_view s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string_view::npos) return {};
        return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    }
    // Drops a '#' comment that is not inside a quoted string.
    static std::string_view strip_comment(std::string_view s) {
        bool quoted = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '\\' && quoted) {
                ++i;
            } else if (s[i] == '"') {
                quoted = !quoted;
            } else if (s[i] == '#' && !quoted) {
                return s.substr(0, i);
            }
        }
        return s;
    }
    static bool valid_key(std::string_view k) {
        if (k.empty()) return false;
        for (char c : k) {
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
        }
        return true;
    }
    const std::string* find(const std::string& key) const {
        const auto it = values_.find(key);
        return it == values_.end() ? nullptr : &it->second;
    }
    static std::string unquote(const std::string& key, std::string_view v) {
        if (v.size() < 2 || v.front() != '"' || v.back() != '"') throw Error(key + ": expected a quoted string");
        std::string out;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (v[i] == '\\' && i + 2 < v.size()) {
                const char e = v[++i];
                out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
            } else {
                out += v[i];
            }
        }
        return out;
    }
    static double to_double(const std::string& key, std::string_view v) {
        double x = 0.0;
        const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
        if (ec != std::errc() || end != v.data() + v.size()) throw Error(key + ": expected a number");
        return x;
    }
    static std::vector<std::string> items(const std::string& key, std::string_view v) {
        if (v.size() < 2 || v.front() != '[' || v.back() != ']') throw Error(key + ": expected an array");
        std::vector<std::string> out;
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            const char c = v[i];
            if (c == '"' && (i == 0 || v[i - 1] != '\\')) quoted = !quoted;
            if (c == ',' && !quoted) {
                out.emplace_back(strip(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!strip(cur).empty()) out.emplace_back(strip(cur));
        for (const auto& item : out) {
            if (item.empty()) throw Error(key + ": empty array element");
        }
        return out;
    }

    std::map<std::string, std::string> values_;
};

/// Everything a run depends on. Random draws derive only from the seeds here.
struct ExperimentConfig {
    std::vector<std::string> corpora;  ///< TSV paths, one language each
    std::string synthetic;             ///< synthetic spec JSON, used when no corpora are given
    std::size_t synthetic_sentences = 1000;
    std::uint64_t synthetic_seed = 0;
    std::string language;              ///< tag for a single corpus; default: file stem
    TypeScheme type_scheme = TypeScheme::self_label;
    bool attach_orphans = false;
    std::size_t subsample = 0;         ///< 0: use every sentence
    std::uint64_t subsample_seed = 0;
    SplitSpec split;

    struct Baseline {
        std::size_t n = 1000;
        BaselineMode mode = BaselineMode::fixed_per_type;
        std::uint64_t master_seed = 1;
    } baseline;

    struct Optimize {
        std::vector<double> alphas = default_alphas();
        std::string objective = "all";  ///< id, joint, dl, or all three
        double joint_alpha = 0.5;      ///< the ID&DL column
        Metric id_metric = Metric::h_char;
        std::size_t restarts = 1;
        std::size_t max_passes = 50;
        double tolerance_dl = 1e-12;
        double tolerance_id = 1e-9;
        bool freeze_headedness = false;
        std::uint64_t init_seed = 0;
    } optimize;

    std::string output_dir = "wordeff-out";
    std::size_t threads = 1;
    bool cache = false;

    /// Hash of canonical().
    std::string hash;

    static ExperimentConfig from(const FlatConfig& c) {
        static const std::set<std::string> kKeys{
            "corpus", "corpora", "synthetic", "synthetic_sentences", "synthetic_seed", "language",
            "type_scheme", "attach_orphans", "subsample", "subsample_seed", "split.train_fraction",
            "split.strategy", "split.seed", "baseline.n", "baseline.mode", "baseline.master_seed",
            "optimize.objective", "optimize.alphas", "optimize.joint_alpha", "optimize.id_metric", "optimize.restarts",
            "optimize.max_passes", "optimize.tolerance_dl", "optimize.tolerance_id",
            "optimize.freeze_headedness", "optimize.init_seed", "output_dir", "threads", "cache"};
        for (const auto& [k, v] : c.raw()) {
            if (!kKeys.count(k)) throw Error("unknown config key '" + k + "'");
        }
        ExperimentConfig e;
        if (auto v = c.get_string("corpus")) e.corpora.push_back(*v);
        if (auto v = c.get_strings("corpora")) e.corpora.insert(e.corpora.end(), v->begin(), v->end());
        if (auto v = c.get_string("synthetic")) e.synthetic = *v;
        if (auto v = c.get_uint("synthetic_sentences")) e.synthetic_sentences = *v;
        if (auto v = c.get_uint("synthetic_seed")) e.synthetic_seed = *v;
        if (auto v = c.get_string("language")) e.language = *v;
        if (auto v = c.get_string("type_scheme")) e.type_scheme = parse_type_scheme(*v);
        if (auto v = c.get_bool("attach_orphans")) e.attach_orphans = *v;
        if (auto v = c.get_uint("subsample")) e.subsample = *v;
        if (auto v = c.get_uint("subsample_seed")) e.subsample_seed = *v;
        if (auto v = c.get_string("split.train_fraction")) parse_fraction(*v, e.split);
        if (auto v = c.get_string("split.strategy")) {
            if (*v == "interleaved") {
                e.split.strategy = SplitStrategy::interleaved;
            } else if (*v == "seeded_random") {
                e.split.strategy = SplitStrategy::seeded_random;
            } else {
                throw Error("split.strategy must be interleaved or seeded_random");
            }
        }
        if (auto v = c.get_uint("split.seed")) e.split.seed = *v;
        if (auto v = c.get_uint("baseline.n")) e.baseline.n = *v;
        if (auto v = c.get_string("baseline.mode")) e.baseline.mode = parse_baseline_mode(*v);
        if (auto v = c.get_uint("baseline.master_seed")) e.baseline.master_seed = *v;
        if (auto v = c.get_string("optimize.objective")) {
            if (*v != "all" && *v != "id" && *v != "joint" && *v != "dl") {
                throw Error("optimize.objective must be id, joint, dl, or all");
            }
            e.optimize.objective = *v;
        }
        if (auto v = c.get_doubles("optimize.alphas")) e.optimize.alphas = *v;
        if (auto v = c.get_double("optimize.joint_alpha")) e.optimize.joint_alpha = *v;
        if (auto v = c.get_string("optimize.id_metric")) {
            if (*v == "h_char") {
                e.optimize.id_metric = Metric::h_char;
            } else if (*v == "h_word") {
                e.optimize.id_metric = Metric::h_word;
            } else {
                throw Error("optimize.id_metric must be h_char or h_word");
            }
        }
        if (auto v = c.get_uint("optimize.restarts")) e.optimize.restarts = *v;
        if (auto v = c.get_uint("optimize.max_passes")) e.optimize.max_passes = *v;
        if (auto v = c.get_double("optimize.tolerance_dl")) e.optimize.tolerance_dl = *v;
        if (auto v = c.get_double("optimize.tolerance_id")) e.optimize.tolerance_id = *v;
        if (auto v = c.get_bool("optimize.freeze_headedness")) e.optimize.freeze_headedness = *v;
        if (auto v = c.get_uint("optimize.init_seed")) e.optimize.init_seed = *v;
        if (auto v = c.get_string("output_dir")) e.output_dir = *v;
        if (auto v = c.get_uint("threads")) e.threads = *v;
        if (auto v = c.get_bool("cache")) e.cache = *v;

        if (e.corpora.empty() && e.synthetic.empty()) throw Error("config names no corpus and no synthetic spec");
        if (e.optimize.restarts == 0) throw Error("optimize.restarts must be at least 1");
        if (!(e.optimize.joint_alpha > 0.0 && e.optimize.joint_alpha < 1.0)) {
            throw Error("optimize.joint_alpha must lie strictly between 0 and 1");
        }
        for (double a : e.optimize.alphas) {
            if (!(a >= 0.0 && a <= 1.0)) throw Error("optimize.alphas must lie in [0, 1]");
        }
        if (e.threads == 0) e.threads = 1;
        e.hash = hash_hex(e.canonical());
        return e;
    }

    static ExperimentConfig parse(std::string_view text) { return from(FlatConfig::parse(text)); }

    /// Every field as key = value lines, defaults included, in a fixed order.
    std::string canonical() const {
        auto q = [](const std::string& s) {
            std::string out = "\"";
            for (char c : s) {
                if (c == '"' || c == '\\') out += '\\';
                out += c;
            }
            return out + "\"";
        };
        auto list = [&](const auto& xs, auto fmt) {
            std::string out = "[";
            for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + fmt(xs[i]);
            return out + "]";
        };
        std::string out;
        auto line = [&](const char* k, const std::string& v) { out += std::string(k) + " = " + v + "\n"; };
        line("corpora", list(corpora, q));
        line("synthetic", q(synthetic));
        line("synthetic_sentences", std::to_string(synthetic_sentences));
        line("synthetic_seed", std::to_string(synthetic_seed));
        line("language", q(language));
        line("type_scheme", q(type_scheme == TypeScheme::self_label ? "self_label" : "child_parent_pair"));
        line("attach_orphans", attach_orphans ? "true" : "false");
        line("subsample", std::to_string(subsample));
        line("subsample_seed", std::to_string(subsample_seed));
        line("split.train_fraction", q(std::to_string(split.train_num) + "/" + std::to_string(split.train_den)));
        line("split.strategy", q(split.strategy == SplitStrategy::interleaved ? "interleaved" : "seeded_random"));
        line("split.seed", std::to_string(split.seed));
        line("baseline.n", std::to_string(baseline.n));
        line("baseline.mode", q(baseline_mode_name(baseline.mode)));
        line("baseline.master_seed", std::to_string(baseline.master_seed));
        line("optimize.objective", q(optimize.objective));
        line("optimize.alphas", list(optimize.alphas, format_number));
        line("optimize.joint_alpha", format_number(optimize.joint_alpha));
        line("optimize.id_metric", q(metric_name(optimize.id_metric)));
        line("optimize.restarts", std::to_string(optimize.restarts));
        line("optimize.max_passes", std::to_string(optimize.max_passes));
        line("optimize.tolerance_dl", format_number(optimize.tolerance_dl));
        line("optimize.tolerance_id", format_number(optimize.tolerance_id));
        line("optimize.freeze_headedness", optimize.freeze_headedness ? "true" : "false");
        line("optimize.init_seed", std::to_string(optimize.init_seed));
        return out;
    }

    /// Full canonical form including where outputs go and how many threads
    /// run; neither is part of the hash since neither changes any number.
    std::string resolved() const {
        return canonical() + "output_dir = \"" + output_dir + "\"\nthreads = " + std::to_string(threads) +
               "\ncache = " + (cache ? "true" : "false") + "\n";
    }

    static TypeScheme parse_type_scheme(std::string_view s) {
        if (s == "self_label") return TypeScheme::self_label;
        if (s == "child_parent_pair") return TypeScheme::child_parent_pair;
        throw Error("type_scheme must be self_label or child_parent_pair");
    }

    /// "num/den" or a decimal such as "0.9".
    static void parse_fraction(std::string_view s, SplitSpec& spec) {
        const auto slash = s.find('/');
        std::uint64_t num = 0, den = 0;
        if (slash != std::string_view::npos) {
            const auto a = s.substr(0, slash), b = s.substr(slash + 1);
            auto r1 = std::from_chars(a.data(), a.data() + a.size(), num);
            auto r2 = std::from_chars(b.data(), b.data() + b.size(), den);
            if (r1.ec != std::errc() || r2.ec != std::errc() || r1.ptr != a.data() + a.size() ||
                r2.ptr != b.data() + b.size()) {
                throw Error("split.train_fraction: expected num/den");
            }
        } else {
            // Decimal: exact digits over a power of ten.
            const auto dot = s.find('.');
            std::string digits(s);
            den = 1;
            if (dot != std::string_view::npos) {
                digits.erase(dot, 1);
                for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
            }
            auto r = std::from_chars(digits.data(), digits.data() + digits.size(), num);
            if (r.ec != std::errc() || r.ptr != digits.data() + digits.size() || den > 1000000000) {
                throw Error("split.train_fraction: expected num/den or a decimal");
            }
        }
        if (num == 0 || den == 0 || num >= den || den > UINT32_MAX) {
            throw Error("split.train_fraction must lie strictly between 0 and 1");
        }
        spec.train_num = static_cast<std::uint32_t>(num);
        spec.train_den = static_cast<std::uint32_t>(den);
    }
};

}  // namespace wordeff
