// Independent brute-force oracles used by the unit and acceptance suites.
// Deliberately naive: straight from the metric definitions, sharing no code
// with the library paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "seo/fusion.hpp"
#include "seo/ontology.hpp"
#include "seo/state.hpp"
#include "seo/text_metrics.hpp"

namespace oracle {

// Deterministic test RNG with hand-rolled draws, independent of the library.
class TestRng {
  public:
    explicit TestRng(std::uint64_t seed) : eng_(seed) {}
    std::uint64_t raw() { return eng_(); }
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }
    bool coin(double p) { return uniform01() < p; }

  private:
    std::mt19937_64 eng_;
};

inline seo::Ternary random_ternary(TestRng& rng) {
    switch (rng.below(3)) {
        case 0: return seo::Ternary::Unknown;
        case 1: return seo::Ternary::Present;
        default: return seo::Ternary::Absent;
    }
}

inline seo::DialogueState random_state(TestRng& rng, std::size_t slots) {
    seo::DialogueState s(slots);
    for (int i = 0; i < static_cast<int>(slots); ++i) s.set(i, random_ternary(rng));
    return s;
}

// --- DST metrics by direct slot enumeration --------------------------------

struct DstOracle {
    double jga = 0, slot_accuracy = 0;
    double precision = 0, recall = 0, f1 = 0;
};

inline DstOracle dst_metrics(
    const std::map<std::string, std::vector<seo::DialogueState>>& pred,
    const std::map<std::string, std::vector<seo::DialogueState>>& gold) {
    std::int64_t turns = 0, exact = 0, slots = 0, correct = 0;
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (const auto& [id, gs] : gold) {
        const auto& ps = pred.at(id);
        for (std::size_t k = 0; k < gs.size(); ++k) {
            ++turns;
            bool all = true;
            for (int s = 0; s < static_cast<int>(gs[k].size()); ++s) {
                ++slots;
                if (ps[k].value(s) == gs[k].value(s))
                    ++correct;
                else
                    all = false;
            }
            if (all) ++exact;
        }
        for (int s = 0; s < static_cast<int>(gs.back().size()); ++s) {
            const bool g = gs.back().value(s) == seo::Ternary::Present;
            const bool p = ps.back().value(s) == seo::Ternary::Present;
            if (g && p) ++tp;
            if (!g && p) ++fp;
            if (g && !p) ++fn;
        }
    }
    DstOracle o;
    o.jga = turns ? static_cast<double>(exact) / static_cast<double>(turns) : 0;
    o.slot_accuracy = slots ? static_cast<double>(correct) / static_cast<double>(slots) : 0;
    o.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0;
    o.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0;
    o.f1 = o.precision + o.recall
               ? 2 * o.precision * o.recall / (o.precision + o.recall)
               : 0;
    return o;
}

// --- fusion by elementwise membership ---------------------------------------

inline seo::IntentSet union_of(const std::vector<seo::IntentSet>& sets) {
    seo::IntentSet all;
    for (const auto& s : sets) all.insert(s.begin(), s.end());
    seo::IntentSet out;
    for (const auto& id : all)
        for (const auto& s : sets)
            if (s.count(id)) {
                out.insert(id);
                break;
            }
    return out;
}

inline seo::IntentSet vote_of(const std::vector<seo::IntentSet>& sets,
                              std::size_t threshold) {
    seo::IntentSet all;
    for (const auto& s : sets) all.insert(s.begin(), s.end());
    seo::IntentSet out;
    for (const auto& id : all) {
        std::size_t votes = 0;
        for (const auto& s : sets)
            if (s.count(id)) ++votes;
        if (votes >= threshold) out.insert(id);
    }
    return out;
}

// --- text metrics, recounted from the formulas ------------------------------

inline std::map<std::vector<std::string>, int> ngrams_of(const seo::TokenSequence& t,
                                                         std::size_t n) {
    std::map<std::vector<std::string>, int> out;
    for (std::size_t i = 0; i + n <= t.size(); ++i)
        ++out[std::vector<std::string>(t.begin() + static_cast<std::ptrdiff_t>(i),
                                       t.begin() + static_cast<std::ptrdiff_t>(i + n))];
    return out;
}

inline double bleu2(const seo::TokenSequence& cand, const seo::TokenSequence& ref) {
    if (cand.empty()) return 0;
    double levels[2];
    for (std::size_t n = 1; n <= 2; ++n) {
        const auto c = ngrams_of(cand, n);
        const auto r = ngrams_of(ref, n);
        std::int64_t match = 0, total = 0;
        for (const auto& [gram, count] : c) {
            total += count;
            auto it = r.find(gram);
            if (it != r.end()) match += std::min(count, it->second);
        }
        levels[n - 1] = match == 0
                            ? static_cast<double>(match + 1) / static_cast<double>(total + 1)
                            : static_cast<double>(match) / static_cast<double>(total);
    }
    const double bp = std::exp(std::min(
        0.0, 1.0 - static_cast<double>(ref.size()) / static_cast<double>(cand.size())));
    return std::sqrt(levels[0] * levels[1]) * bp;
}

// Plain recursive LCS with memo, distinct from the library's iterative table.
inline std::size_t lcs_rec(const seo::TokenSequence& a, const seo::TokenSequence& b,
                           std::size_t i, std::size_t j,
                           std::map<std::pair<std::size_t, std::size_t>, std::size_t>& memo) {
    if (i == 0 || j == 0) return 0;
    const auto key = std::make_pair(i, j);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::size_t v;
    if (a[i - 1] == b[j - 1])
        v = lcs_rec(a, b, i - 1, j - 1, memo) + 1;
    else
        v = std::max(lcs_rec(a, b, i - 1, j, memo), lcs_rec(a, b, i, j - 1, memo));
    memo[key] = v;
    return v;
}

inline double rouge_l(const seo::TokenSequence& cand, const seo::TokenSequence& ref) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    const std::size_t lcs = (cand.empty() || ref.empty())
                                ? 0
                                : lcs_rec(cand, ref, cand.size(), ref.size(), memo);
    if (lcs == 0) return 0;
    const double p = static_cast<double>(lcs) / static_cast<double>(cand.size());
    const double r = static_cast<double>(lcs) / static_cast<double>(ref.size());
    return 2 * p * r / (p + r);
}

// Exhaustive alignment search: every matching of candidate positions to
// reference positions, maximizing matches then minimizing chunks.
struct MeteorSearch {
    const seo::TokenSequence& cand;
    const seo::TokenSequence& ref;
    std::vector<int> assignment; // cand index -> ref index or -1
    std::vector<bool> used;
    std::int64_t best_matches = -1;
    std::int64_t best_chunks = 0;

    void consider() {
        std::int64_t matches = 0, chunks = 0;
        int prev = -2;
        bool prev_matched = false;
        for (std::size_t i = 0; i < assignment.size(); ++i) {
            if (assignment[i] < 0) {
                prev_matched = false;
                continue;
            }
            ++matches;
            if (!(prev_matched && assignment[i] == prev + 1)) ++chunks;
            prev = assignment[i];
            prev_matched = true;
        }
        if (matches > best_matches ||
            (matches == best_matches && chunks < best_chunks)) {
            best_matches = matches;
            best_chunks = chunks;
        }
    }

    void recurse(std::size_t i) {
        if (i == cand.size()) {
            consider();
            return;
        }
        assignment[i] = -1;
        recurse(i + 1);
        for (std::size_t j = 0; j < ref.size(); ++j) {
            if (used[j] || ref[j] != cand[i]) continue;
            used[j] = true;
            assignment[i] = static_cast<int>(j);
            recurse(i + 1);
            assignment[i] = -1;
            used[j] = false;
        }
    }
};

inline double meteor_lite(const seo::TokenSequence& cand, const seo::TokenSequence& ref) {
    if (cand.empty() || ref.empty()) return 0;
    MeteorSearch search{cand, ref, std::vector<int>(cand.size(), -1),
                        std::vector<bool>(ref.size(), false)};
    search.recurse(0);
    if (search.best_matches <= 0) return 0;
    const double m = static_cast<double>(search.best_matches);
    const double p = m / static_cast<double>(cand.size());
    const double r = m / static_cast<double>(ref.size());
    const double f_mean = 10 * p * r / (r + 9 * p);
    const double frag = static_cast<double>(search.best_chunks) / m;
    return f_mean * (1 - 0.5 * frag * frag * frag);
}

inline double dist2(const std::vector<seo::TokenSequence>& candidates) {
    std::set<std::pair<std::string, std::string>> distinct;
    std::int64_t total = 0;
    for (const auto& c : candidates)
        for (std::size_t i = 0; i + 1 < c.size(); ++i) {
            distinct.emplace(c[i], c[i + 1]);
            ++total;
        }
    return total ? static_cast<double>(distinct.size()) / static_cast<double>(total) : 0;
}

inline seo::TokenSequence random_tokens(TestRng& rng, std::size_t max_len,
                                        std::size_t vocab) {
    static const char* words[] = {"a", "b", "c", "d", "e", "f", "g", "h"};
    seo::TokenSequence out;
    const std::size_t len = rng.below(max_len + 1);
    for (std::size_t i = 0; i < len; ++i)
        out.push_back(words[rng.below(std::min(vocab, std::size_t{8}))]);
    return out;
}

} // namespace oracle
