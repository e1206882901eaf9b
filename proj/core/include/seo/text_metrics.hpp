#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace seo {

using TokenSequence = std::vector<std::string>;

/// CJK codepoints become single-character tokens; maximal ASCII alphanumeric
/// runs become one case-folded token; any other non-whitespace codepoint is a
/// token of its own; whitespace is dropped.
TokenSequence tokenize(std::string_view text);

/// Geometric mean of clipped unigram/bigram precision with add-one smoothing
/// on zero-count levels, times the brevity penalty exp(min(0, 1-|ref|/|cand|)).
/// 0 for an empty candidate.
double bleu2(const TokenSequence& candidate, const TokenSequence& reference);

/// LCS F1 with beta=1: P=LCS/|cand|, R=LCS/|ref|; 0 when the LCS is empty.
double rouge_l(const TokenSequence& candidate, const TokenSequence& reference);

/// Exact-match unigram alignment maximizing matches then minimizing chunks;
/// F_mean = 10PR/(R+9P), penalty = 0.5*(chunks/m)^3. 0 when nothing matches.
double meteor_lite(const TokenSequence& candidate, const TokenSequence& reference);

/// Distinct bigrams over total bigrams, pooled across all candidates;
/// 0 when no candidate has a bigram.
double dist2(const std::vector<TokenSequence>& candidates);

struct TextPair {
    std::string dialogue_id;
    std::int64_t turn_index = 0;
    std::string candidate;
    std::string reference;
};

/// Rows: {"dialogue_id": str, "turn_index": int, "candidate": str,
/// "reference": str}; file order is kept.
std::vector<TextPair> load_text_pairs(std::istream& in);
std::vector<TextPair> load_text_pairs_file(const std::string& path);

struct PairScores {
    std::string dialogue_id;
    std::int64_t turn_index = 0;
    double bleu2 = 0, rouge_l = 0, meteor = 0;
};

struct TextEvalReport {
    double bleu2_mean = 0;
    double bleu2_pooled = 0; // corpus BLEU over pooled n-gram counts
    double rouge_l_mean = 0;
    double rouge_l_pooled = 0;
    double meteor_mean = 0;
    double dist2_value = 0; // pooled over candidates
    std::vector<PairScores> pairs;
};

TextEvalReport evaluate_text(const std::vector<TextPair>& pairs);

} // namespace seo
