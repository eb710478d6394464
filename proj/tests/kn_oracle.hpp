#pragma once

// Straightforward interpolated Kneser-Ney over string n-grams, written
// directly from the textbook recursion. Used only as a reference in tests.

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

class NaiveKn {
public:
    NaiveKn(const std::vector<std::vector<std::string>>& sentences, std::set<std::string> vocab)
        : vocab_(std::move(vocab)) {
        for (const auto& s : sentences) {
            std::vector<std::string> padded{"<s>", "<s>"};
            padded.insert(padded.end(), s.begin(), s.end());
            for (std::size_t i = 2; i < padded.size(); ++i) {
                ++tri_[{padded[i - 2], padded[i - 1], padded[i]}];
            }
        }
        for (const auto& [k, c] : tri_) {
            const auto& [u, v, w] = k;
            left_of_bigram_[{v, w}].insert(u);
        }
        for (const auto& [vw, us] : left_of_bigram_) left_of_word_[vw.second].insert(vw.first);
        d3_ = discount(count_of(tri_));
        std::map<int, int> bi;
        for (const auto& [k, us] : left_of_bigram_) ++bi[static_cast<int>(us.size())];
        d2_ = discount(bi);
        std::map<int, int> uni;
        for (const auto& [k, vs] : left_of_word_) ++uni[static_cast<int>(vs.size())];
        d1_ = discount(uni);
    }

    double p1(const std::string& w) const {
        double total = 0.0;
        for (const auto& [x, vs] : left_of_word_) total += static_cast<double>(vs.size());
        const double types = static_cast<double>(left_of_word_.size());
        const auto it = left_of_word_.find(w);
        const double c = it == left_of_word_.end() ? 0.0 : static_cast<double>(it->second.size());
        return (std::max(c - d1_, 0.0) + d1_ * types / static_cast<double>(vocab_.size())) / total;
    }

    double p2(const std::string& v, const std::string& w) const {
        double total = 0.0, types = 0.0, c = 0.0;
        for (const auto& [vw, us] : left_of_bigram_) {
            if (vw.first != v) continue;
            total += static_cast<double>(us.size());
            types += 1.0;
            if (vw.second == w) c = static_cast<double>(us.size());
        }
        if (total == 0.0) return p1(w);
        return (std::max(c - d2_, 0.0) + d2_ * types * p1(w)) / total;
    }

    double p3(const std::string& u, const std::string& v, const std::string& w) const {
        double total = 0.0, types = 0.0, c = 0.0;
        for (const auto& [k, n] : tri_) {
            if (std::get<0>(k) != u || std::get<1>(k) != v) continue;
            total += n;
            types += 1.0;
            if (std::get<2>(k) == w) c = n;
        }
        if (total == 0.0) return p2(v, w);
        return (std::max(c - d3_, 0.0) + d3_ * types * p2(v, w)) / total;
    }

    double d1() const { return d1_; }
    double d2() const { return d2_; }
    double d3() const { return d3_; }

private:
    template <class Map>
    static std::map<int, int> count_of(const Map& m) {
        std::map<int, int> out;
        for (const auto& [k, c] : m) ++out[c];
        return out;
    }
    static double discount(const std::map<int, int>& coc) {
        const auto n1 = coc.count(1) ? coc.at(1) : 0, n2 = coc.count(2) ? coc.at(2) : 0;
        if (n1 == 0 || n2 == 0) return 0.75;
        return static_cast<double>(n1) / (n1 + 2.0 * n2);
    }

    std::set<std::string> vocab_;
    std::map<std::tuple<std::string, std::string, std::string>, int> tri_;
    std::map<std::pair<std::string, std::string>, std::set<std::string>> left_of_bigram_;
    std::map<std::string, std::set<std::string>> left_of_word_;
    double d1_ = 0.75, d2_ = 0.75, d3_ = 0.75;
};

}  // namespace oracle
