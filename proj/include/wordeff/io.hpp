#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wordeff/baseline.hpp"
#include "wordeff/error.hpp"
#include "wordeff/linearize.hpp"
#include "wordeff/measures.hpp"
#include "wordeff/optimize.hpp"
#include "wordeff/synthetic.hpp"

namespace wordeff {

using json = nlohmann::ordered_json;

/// Shortest text that parses back to exactly `x`; "nan", "inf", "-inf" for
/// non-finite values.
inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes through a temporary file so readers never see a partial file.
inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".part";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path.string());
        out << content;
        if (!out) throw Error("write failed for " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

/// Identifies the run that produced an artifact.
struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
};

inline std::string provenance_header(const Provenance& p) {
    return "# config_hash=" + p.config_hash + "\tseed=" + std::to_string(p.seed) + "\n";
}

inline json provenance_json(const Provenance& p) {
    return json{{"config_hash", p.config_hash}, {"seed", p.seed}};
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {
inline json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
}  // namespace detail

inline json to_json(const EfficiencyPoint& p) {
    return json{{"h_word", detail::number(p.h_word)},
                {"h_char", detail::number(p.h_char)},
                {"dl", detail::number(p.dl)},
                {"n_tokens", p.n_tokens},
                {"n_arcs", p.n_arcs}};
}

inline json grammar_to_json(const WeightedGrammar& g) {
    json out = json::object();
    for (const auto& [t, w] : g.weights) out[t] = w;
    return out;
}

inline WeightedGrammar grammar_from_json(const json& j) {
    if (!j.is_object()) throw Error("grammar JSON must be an object of type: weight");
    WeightedGrammar g;
    for (const auto& [t, w] : j.items()) {
        if (!w.is_number()) throw Error("weight of '" + t + "' is not a number");
        g.weights[t] = w.get<double>();
    }
    validate_grammar(g);
    return g;
}

inline json summary_json(const BaselineDistribution& d) {
    json out = json::object();
    out["n"] = d.size();
    if (!d.empty()) out["mode"] = baseline_mode_name(d.samples().front().mode);
    for (Metric m : {Metric::h_word, Metric::h_char, Metric::dl}) {
        const MetricSummary& s = d.summary(m);
        out[metric_name(m)] = json{{"mean", detail::number(s.mean)}, {"sd", detail::number(s.sd)}};
    }
    return out;
}

inline SyntheticSpec synthetic_spec_from_json(const json& j) {
    SyntheticSpec s;
    s.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    for (const auto& t : j.at("types")) {
        SyntheticType st;
        st.name = t.at("name").get<std::string>();
        st.attach_prob = t.value("attach_prob", 0.5);
        st.weight = t.value("weight", 0.0);
        st.words = t.value("words", std::vector<std::string>{});
        s.types.push_back(std::move(st));
    }
    s.max_depth = j.value("max_depth", s.max_depth);
    s.max_arity = j.value("max_arity", s.max_arity);
    s.max_per_type = j.value("max_per_type", s.max_per_type);
    s.max_tokens = j.value("max_tokens", s.max_tokens);
    s.language_tag = j.value("language", s.language_tag);
    const std::string order = j.value("order", std::string("grammar"));
    if (order == "grammar") {
        s.order = SyntheticOrder::grammar;
    } else if (order == "adjacency") {
        s.order = SyntheticOrder::adjacency;
    } else if (order == "free") {
        s.order = SyntheticOrder::free;
    } else {
        throw Error("unknown synthetic order '" + order + "'");
    }
    return s;
}

// ---------------------------------------------------------------------------
// TSV

inline std::string baseline_tsv(const BaselineDistribution& d, const Provenance& p) {
    std::string out = provenance_header(p) + "id\tseed\th_word\th_char\tdl\n";
    for (const auto& s : d.samples()) {
        out += std::to_string(s.id) + '\t' + std::to_string(s.seed) + '\t' + format_number(s.point.h_word) +
               '\t' + format_number(s.point.h_char) + '\t' + format_number(s.point.dl) + '\n';
    }
    return out;
}

/// Reads rows written by baseline_tsv.
inline BaselineDistribution parse_baseline_tsv(std::string_view text, BaselineMode mode) {
    std::vector<BaselineSample> samples;
    std::size_t line_no = 0, pos = 0;
    bool header = false;
    auto num = [&](std::string_view f, auto& out) {
        const auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), out);
        if (ec != std::errc() || end != f.data() + f.size()) {
            throw ParseError(line_no, "not a number: '" + std::string(f) + "'");
        }
    };
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        const auto f = detail::split_tabs(line);
        if (f.size() != 5) throw ParseError(line_no, "baseline rows need 5 fields");
        BaselineSample s;
        s.mode = mode;
        num(f[0], s.id);
        num(f[1], s.seed);
        num(f[2], s.point.h_word);
        num(f[3], s.point.h_char);
        num(f[4], s.point.dl);
        samples.push_back(s);
    }
    return BaselineDistribution(std::move(samples));
}

inline std::string trace_tsv(const OptimizationTrace& t, const Provenance& p) {
    std::string out = provenance_header(p);
    out += "# initial_objective=" + format_number(t.initial_objective) +
           "\tconverged=" + (t.converged ? "true" : "false") + "\tpasses=" + std::to_string(t.passes) + "\n";
    out += "pass\ttype\told_weight\tnew_weight\tobjective\n";
    for (const auto& s : t.steps) {
        out += std::to_string(s.pass) + '\t' + s.type + '\t' + format_number(s.old_weight) + '\t' +
               format_number(s.new_weight) + '\t' + format_number(s.objective) + '\n';
    }
    return out;
}

inline std::string frontier_tsv(const std::vector<FrontierPoint>& pts, const Provenance& p) {
    std::string out = provenance_header(p) + "alpha\th_word\th_char\tdl\tz_h\tz_dl\n";
    for (const auto& f : pts) {
        out += format_number(f.alpha) + '\t' + format_number(f.point.h_word) + '\t' +
               format_number(f.point.h_char) + '\t' + format_number(f.point.dl) + '\t' + format_number(f.z_h) +
               '\t' + format_number(f.z_dl) + '\n';
    }
    return out;
}

}  // namespace wordeff
