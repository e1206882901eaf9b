#include "seo/text_metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "seo/error.hpp"

namespace seo {

using nlohmann::json;

namespace {

bool is_cjk(char32_t cp) {
    return (cp >= 0x3400 && cp <= 0x4DBF) || (cp >= 0x4E00 && cp <= 0x9FFF) ||
           (cp >= 0xF900 && cp <= 0xFAFF) || (cp >= 0x20000 && cp <= 0x2EBEF);
}

bool is_space(char32_t cp) {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' ||
           cp == U'\v' || cp == U'\f' || cp == 0x3000;
}

bool is_ascii_alnum(char32_t cp) {
    return (cp >= U'0' && cp <= U'9') || (cp >= U'a' && cp <= U'z') ||
           (cp >= U'A' && cp <= U'Z');
}

// Run-forming alphanumerics: ASCII plus the common alphabetic blocks
// (Latin-1/Extended, Greek, Cyrillic). CJK is handled separately.
bool is_word_char(char32_t cp) {
    if (is_ascii_alnum(cp)) return true;
    if (cp >= 0xC0 && cp <= 0xFF && cp != 0xD7 && cp != 0xF7) return true;
    if (cp >= 0x100 && cp <= 0x24F) return true;
    if (cp >= 0x370 && cp <= 0x3FF) return true;
    if (cp >= 0x400 && cp <= 0x4FF) return true;
    return false;
}

// Decode one codepoint; on malformed input fall back to the single lead byte.
char32_t next_codepoint(std::string_view text, std::size_t& i) {
    const auto byte = [&](std::size_t k) {
        return static_cast<unsigned char>(text[k]);
    };
    const unsigned char b0 = byte(i);
    std::size_t len = 1;
    char32_t cp = b0;
    if ((b0 & 0x80u) == 0) {
        len = 1;
    } else if ((b0 & 0xE0u) == 0xC0u) {
        len = 2;
        cp = b0 & 0x1Fu;
    } else if ((b0 & 0xF0u) == 0xE0u) {
        len = 3;
        cp = b0 & 0x0Fu;
    } else if ((b0 & 0xF8u) == 0xF0u) {
        len = 4;
        cp = b0 & 0x07u;
    } else {
        ++i;
        return b0;
    }
    if (i + len > text.size()) {
        ++i;
        return b0;
    }
    for (std::size_t k = 1; k < len; ++k) {
        if ((byte(i + k) & 0xC0u) != 0x80u) {
            ++i;
            return b0;
        }
        cp = (cp << 6) | (byte(i + k) & 0x3Fu);
    }
    i += len;
    return cp;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

std::unordered_map<std::string, std::int64_t> ngram_counts(const TokenSequence& tokens,
                                                           std::size_t n) {
    std::unordered_map<std::string, std::int64_t> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (std::size_t k = 1; k < n; ++k) {
            key += '\x1f';
            key += tokens[i + k];
        }
        ++counts[key];
    }
    return counts;
}

struct ClippedLevel {
    std::int64_t matches = 0;
    std::int64_t total = 0;
};

ClippedLevel clipped_precision(const TokenSequence& cand, const TokenSequence& ref,
                               std::size_t n) {
    ClippedLevel level;
    auto cand_counts = ngram_counts(cand, n);
    auto ref_counts = ngram_counts(ref, n);
    for (const auto& [gram, count] : cand_counts) {
        level.total += count;
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) level.matches += std::min(count, it->second);
    }
    return level;
}

double smoothed(const ClippedLevel& level) {
    if (level.matches == 0)
        return static_cast<double>(level.matches + 1) /
               static_cast<double>(level.total + 1);
    return static_cast<double>(level.matches) / static_cast<double>(level.total);
}

double brevity_penalty(std::size_t cand_len, std::size_t ref_len) {
    const double ratio = static_cast<double>(ref_len) / static_cast<double>(cand_len);
    return std::exp(std::min(0.0, 1.0 - ratio));
}

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0), curr(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1])
                curr[j] = prev[j - 1] + 1;
            else
                curr[j] = std::max(prev[j], curr[j - 1]);
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

// --- METEOR alignment ------------------------------------------------------

// Minimal chunk count over all maximum exact matchings. Exact memoized search
// over (cand position, used-reference mask, run context); falls back to a
// deterministic greedy alignment when reference length or node budget rules
// the exact search out (far beyond realistic utterance sizes).
class ChunkMinimizer {
  public:
    ChunkMinimizer(const TokenSequence& cand, const TokenSequence& ref,
                   std::int64_t target_matches)
        : cand_(cand), ref_(ref), target_(target_matches) {}

    std::int64_t solve() {
        if (ref_.size() > 62) return greedy();
        best_ = target_ + 1; // never more chunks than matches
        search(0, 0, -1, 0);
        if (budget_exceeded_ || best_ > target_) return greedy();
        return best_;
    }

  private:
    static constexpr std::size_t kNodeBudget = 500'000;

    struct StateKey {
        std::uint64_t mask;
        std::uint32_t ctx; // (cand position << 8) | (prev_j + 1)
        friend bool operator==(const StateKey&, const StateKey&) = default;
    };
    struct StateKeyHash {
        std::size_t operator()(const StateKey& k) const {
            return std::hash<std::uint64_t>()(k.mask * 0x9E3779B97F4A7C15ull ^ k.ctx);
        }
    };

    // Upper bound on matches still achievable from cand position i with the
    // given used-reference mask.
    std::int64_t feasible_matches(std::size_t i, std::uint64_t mask) const {
        std::unordered_map<std::string, std::int64_t> avail;
        for (std::size_t j = 0; j < ref_.size(); ++j)
            if (!(mask >> j & 1)) ++avail[ref_[j]];
        std::int64_t total = 0;
        for (std::size_t k = i; k < cand_.size(); ++k) {
            auto it = avail.find(cand_[k]);
            if (it != avail.end() && it->second > 0) {
                --it->second;
                ++total;
            }
        }
        return total;
    }

    void search(std::size_t i, std::uint64_t mask, int prev_j, std::int64_t chunks) {
        if (budget_exceeded_ || chunks >= best_) return;
        const std::int64_t matched = std::popcount(mask);
        if (matched == target_) {
            best_ = chunks;
            return;
        }
        if (i == cand_.size()) return;
        if (nodes_++ > kNodeBudget) {
            budget_exceeded_ = true;
            return;
        }
        const StateKey key{mask, static_cast<std::uint32_t>((i << 8) | (prev_j + 1))};
        auto memo = memo_.find(key);
        if (memo != memo_.end() && memo->second <= chunks) return;
        memo_[key] = chunks;

        if (matched + feasible_matches(i, mask) < target_) return;

        for (std::size_t j = 0; j < ref_.size(); ++j) {
            if (mask >> j & 1) continue;
            if (ref_[j] != cand_[i]) continue;
            const bool continues = prev_j >= 0 && static_cast<int>(j) == prev_j + 1;
            search(i + 1, mask | (1ull << j), static_cast<int>(j),
                   chunks + (continues ? 0 : 1));
        }
        search(i + 1, mask, -1, chunks);
    }

    // Left-to-right first-available alignment; always reaches the maximum
    // match count for exact matching.
    std::int64_t greedy() const {
        std::unordered_map<std::string, std::vector<std::size_t>> positions;
        for (std::size_t j = 0; j < ref_.size(); ++j)
            positions[ref_[j]].push_back(j);
        std::unordered_map<std::string, std::size_t> cursor;
        std::int64_t chunks = 0;
        int prev_j = -2;
        bool prev_matched = false;
        for (std::size_t i = 0; i < cand_.size(); ++i) {
            auto it = positions.find(cand_[i]);
            bool matched = false;
            if (it != positions.end()) {
                auto& c = cursor[cand_[i]];
                if (c < it->second.size()) {
                    const int j = static_cast<int>(it->second[c++]);
                    if (!(prev_matched && j == prev_j + 1)) ++chunks;
                    prev_j = j;
                    matched = true;
                }
            }
            prev_matched = matched;
        }
        return chunks;
    }

    const TokenSequence& cand_;
    const TokenSequence& ref_;
    std::int64_t target_;
    std::int64_t best_ = 0;
    std::size_t nodes_ = 0;
    bool budget_exceeded_ = false;
    std::unordered_map<StateKey, std::int64_t, StateKeyHash> memo_;
};

} // namespace

TokenSequence tokenize(std::string_view text) {
    TokenSequence tokens;
    std::string run;
    auto flush_run = [&] {
        if (!run.empty()) {
            tokens.push_back(run);
            run.clear();
        }
    };
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t cp = next_codepoint(text, i);
        if (is_space(cp)) {
            flush_run();
        } else if (is_cjk(cp)) {
            flush_run();
            std::string tok;
            append_utf8(tok, cp);
            tokens.push_back(std::move(tok));
        } else if (is_word_char(cp)) {
            const char32_t folded = (cp >= U'A' && cp <= U'Z') ? cp + 32 : cp;
            append_utf8(run, folded);
        } else {
            flush_run();
            std::string tok;
            append_utf8(tok, cp);
            tokens.push_back(std::move(tok));
        }
    }
    flush_run();
    return tokens;
}

double bleu2(const TokenSequence& candidate, const TokenSequence& reference) {
    if (candidate.empty()) return 0.0;
    const double p1 = smoothed(clipped_precision(candidate, reference, 1));
    const double p2 = smoothed(clipped_precision(candidate, reference, 2));
    return std::sqrt(p1 * p2) * brevity_penalty(candidate.size(), reference.size());
}

double rouge_l(const TokenSequence& candidate, const TokenSequence& reference) {
    const std::size_t lcs = lcs_length(candidate, reference);
    if (lcs == 0) return 0.0;
    const double p = static_cast<double>(lcs) / static_cast<double>(candidate.size());
    const double r = static_cast<double>(lcs) / static_cast<double>(reference.size());
    return 2.0 * p * r / (p + r);
}

double meteor_lite(const TokenSequence& candidate, const TokenSequence& reference) {
    if (candidate.empty() || reference.empty()) return 0.0;
    std::unordered_map<std::string, std::int64_t> ref_counts;
    for (const auto& t : reference) ++ref_counts[t];
    std::unordered_map<std::string, std::int64_t> cand_counts;
    for (const auto& t : candidate) ++cand_counts[t];
    std::int64_t m = 0;
    for (const auto& [t, c] : cand_counts) {
        auto it = ref_counts.find(t);
        if (it != ref_counts.end()) m += std::min(c, it->second);
    }
    if (m == 0) return 0.0;

    const std::int64_t chunks = ChunkMinimizer(candidate, reference, m).solve();
    const double md = static_cast<double>(m);
    const double p = md / static_cast<double>(candidate.size());
    const double r = md / static_cast<double>(reference.size());
    const double f_mean = 10.0 * p * r / (r + 9.0 * p);
    const double frag = static_cast<double>(chunks) / md;
    const double penalty = 0.5 * frag * frag * frag;
    return f_mean * (1.0 - penalty);
}

double dist2(const std::vector<TokenSequence>& candidates) {
    std::unordered_set<std::string> distinct;
    std::int64_t total = 0;
    for (const auto& tokens : candidates) {
        for (std::size_t i = 0; i + 2 <= tokens.size(); ++i) {
            distinct.insert(tokens[i] + '\x1f' + tokens[i + 1]);
            ++total;
        }
    }
    if (total == 0) return 0.0;
    return static_cast<double>(distinct.size()) / static_cast<double>(total);
}

std::vector<TextPair> load_text_pairs(std::istream& in) {
    std::vector<TextPair> pairs;
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::SyntaxError,
                        "byte " + std::to_string(e.byte) + ": invalid JSON", lineno);
        }
        try {
            for (const char* key : {"dialogue_id", "turn_index", "candidate", "reference"})
                if (!obj.contains(key))
                    throw Error(ErrorCode::SchemaError,
                                std::string("row missing field '") + key + "'");
            TextPair p;
            p.dialogue_id = obj["dialogue_id"].get<std::string>();
            p.turn_index = obj["turn_index"].get<std::int64_t>();
            p.candidate = obj["candidate"].get<std::string>();
            p.reference = obj["reference"].get<std::string>();
            pairs.push_back(std::move(p));
        } catch (const Error& e) {
            if (e.line() != 0) throw;
            throw Error(e.code(), e.message(), lineno);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::SchemaError, e.what(), lineno);
        }
    }
    return pairs;
}

std::vector<TextPair> load_text_pairs_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open pairs file '" + path + "'");
    return load_text_pairs(in);
}

TextEvalReport evaluate_text(const std::vector<TextPair>& pairs) {
    TextEvalReport report;
    if (pairs.empty()) return report;

    ClippedLevel pooled1, pooled2;
    std::size_t pooled_cand_len = 0, pooled_ref_len = 0;
    std::size_t pooled_lcs = 0;
    std::vector<TokenSequence> candidates;
    candidates.reserve(pairs.size());

    for (const auto& pair : pairs) {
        const TokenSequence cand = tokenize(pair.candidate);
        const TokenSequence ref = tokenize(pair.reference);

        PairScores s;
        s.dialogue_id = pair.dialogue_id;
        s.turn_index = pair.turn_index;
        s.bleu2 = bleu2(cand, ref);
        s.rouge_l = rouge_l(cand, ref);
        s.meteor = meteor_lite(cand, ref);
        report.bleu2_mean += s.bleu2;
        report.rouge_l_mean += s.rouge_l;
        report.meteor_mean += s.meteor;
        report.pairs.push_back(std::move(s));

        const auto l1 = clipped_precision(cand, ref, 1);
        const auto l2 = clipped_precision(cand, ref, 2);
        pooled1.matches += l1.matches;
        pooled1.total += l1.total;
        pooled2.matches += l2.matches;
        pooled2.total += l2.total;
        pooled_cand_len += cand.size();
        pooled_ref_len += ref.size();
        pooled_lcs += lcs_length(cand, ref);
        candidates.push_back(cand);
    }

    const double n = static_cast<double>(pairs.size());
    report.bleu2_mean /= n;
    report.rouge_l_mean /= n;
    report.meteor_mean /= n;
    if (pooled_cand_len > 0)
        report.bleu2_pooled = std::sqrt(smoothed(pooled1) * smoothed(pooled2)) *
                              brevity_penalty(pooled_cand_len, pooled_ref_len);
    if (pooled_lcs > 0) {
        const double p = static_cast<double>(pooled_lcs) / static_cast<double>(pooled_cand_len);
        const double r = static_cast<double>(pooled_lcs) / static_cast<double>(pooled_ref_len);
        report.rouge_l_pooled = 2.0 * p * r / (p + r);
    }
    report.dist2_value = dist2(candidates);
    return report;
}

} // namespace seo
