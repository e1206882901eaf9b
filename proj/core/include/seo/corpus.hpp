#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seo/ontology.hpp"
#include "seo/state.hpp"

namespace seo {

enum class Speaker { Doctor, Patient };
enum class RiskLabel { None, Mild, Moderate, Severe };

const char* speaker_name(Speaker s);
const char* risk_label_name(RiskLabel r);
RiskLabel parse_risk_label(const std::string& text); // throws SchemaError
int risk_rank(RiskLabel r);                          // none=0 .. severe=3

/// One utterance record. Doctor records may carry an intent set (absence
/// means the record is unlabeled, which matters for the per-utterance
/// averages); patient records may carry a state delta and an emotion tag.
struct Turn {
    Speaker speaker = Speaker::Doctor;
    std::string text;
    std::optional<IntentSet> intents;
    StateDelta state_delta;
    std::optional<std::string> emotion;

    bool labeled() const { return intents.has_value(); }
};

struct Dialogue {
    std::string dialogue_id;
    std::vector<Turn> turns;
    RiskLabel risk = RiskLabel::None;

    /// Number of doctor records; the L_n denominator of the engagement ratios.
    std::size_t doctor_turn_count() const;
    /// Indices into `turns` of the doctor records, in order.
    std::vector<std::size_t> doctor_turn_positions() const;
};

struct Corpus {
    std::vector<Dialogue> dialogues;
    std::size_t size() const { return dialogues.size(); }
};

/// Raw pair counts between consecutive doctor records' topic sets
/// (10x10 over core symptoms) and strategy sets (7x7 over chit-chat leaves).
struct TransitionCounts {
    std::vector<std::string> topics;                      // paper group order
    std::vector<std::vector<std::int64_t>> topic_counts;  // [from][to]
    std::vector<std::string> strategies;                  // canonical ids
    std::vector<std::vector<std::int64_t>> strategy_counts;

    static std::vector<std::vector<double>>
    row_normalized(const std::vector<std::vector<std::int64_t>>& counts);
};

struct CorpusStats {
    std::size_t n_dialogues = 0;
    double avg_turns = 0; // speaker runs per dialogue
    double avg_utterances_total = 0;
    double avg_utterances_doctor = 0;
    double avg_utterances_patient = 0;
    std::int64_t intents_tod = 0;
    std::int64_t intents_chitchat = 0;
    std::size_t labeled_doctor_utterances = 0;
    double avg_intents_tod = 0; // per labeled doctor utterance
    double avg_intents_chitchat = 0;
    double avg_intents_overall = 0;
    std::map<std::string, std::int64_t> per_leaf_counts;
    TransitionCounts transitions;
};

struct ParseOptions {
    bool strict = false; // strict enforces speaker alternation
};

/// Parse JSON Lines, one dialogue per line. Every intent is resolved against
/// the registry and every delta slot checked; diagnostics carry the line.
Corpus parse_corpus(std::istream& in, const OntologyRegistry& reg,
                    const ParseOptions& opts = {});
Corpus parse_corpus_file(const std::string& path, const OntologyRegistry& reg,
                         const ParseOptions& opts = {});

/// Canonical serialization: sorted keys, intents in canonical-id order,
/// optional fields omitted when absent (state_delta omitted when empty).
/// Output is byte-deterministic and reparses to an equal Corpus.
void write_corpus(const Corpus& corpus, const OntologyRegistry& reg, std::ostream& out);
std::string write_corpus_string(const Corpus& corpus, const OntologyRegistry& reg);

CorpusStats compute_stats(const Corpus& corpus, const OntologyRegistry& reg,
                          bool singleton_transitions = false); // throws EmptyCorpus

/// Count[c1][c2] += 1 for every (c1, c2) in topics(k) x topics(k+1) over
/// consecutive doctor records; same construction for chit-chat strategies.
/// `singleton_only` restricts to pairs of singleton topic sets.
TransitionCounts estimate_transition_counts(const Corpus& corpus,
                                            const OntologyRegistry& reg,
                                            bool singleton_only = false);

} // namespace seo
