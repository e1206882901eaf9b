#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seo/corpus.hpp"
#include "seo/fusion.hpp"
#include "seo/state.hpp"

namespace seo {

struct EngagementConfig {
    std::size_t iqr_window = 3; // screening window i for in-depth questions
    std::size_t rqr_window = 3; // screening window i for repeated questions
    // The in-depth topic window T_{k-i:k} excludes the current turn unless
    // this is set (the literal subscript reading).
    bool window_inclusive_current = false;
    std::optional<IntentSet> empathy_set; // overrides the registry's ES
};

struct TurnEngagement {
    std::size_t turn_index = 0;             // 0-based doctor-turn index
    std::vector<std::string> in_depth;      // IQ_{n,k}
    std::vector<std::string> repeated;      // RQ_{n,k}
    std::vector<std::string> empathy;       // E_{n,k}
};

struct DialogueEngagement {
    std::string dialogue_id;
    std::size_t doctor_turns = 0;
    std::int64_t in_depth_count = 0;
    std::int64_t repeated_count = 0;
    std::int64_t empathy_turns = 0; // turns with nonempty E
    std::vector<TurnEngagement> turns;
};

struct EngagementReport {
    double iqr = 0, rqr = 0, err = 0; // stored in [0,1]
    std::int64_t in_depth_total = 0;
    std::int64_t repeated_total = 0;
    std::int64_t empathy_turn_total = 0;
    std::int64_t doctor_turn_total = 0; // sum of L_n
    std::vector<DialogueEngagement> per_dialogue; // ordered by dialogue_id
};

struct EngagementInputs {
    const Corpus* corpus = nullptr;
    const OntologyRegistry* registry = nullptr;
    // Replaces the gold doctor intents when set; missing turns become empty.
    const PredictionSet* intents = nullptr;
    // Aligned per-doctor-turn state snapshots (before the doctor speaks);
    // null means replay the gold deltas.
    const std::map<std::string, std::vector<DialogueState>>* states = nullptr;
    std::size_t jobs = 1; // per-dialogue fan-out; never changes the result
};

/// All three Appendix-B ratios in one pass. Per-turn IQ/RQ/E sets are kept
/// in the breakdown for audit.
EngagementReport compute_engagement(const EngagementInputs& in,
                                    const EngagementConfig& cfg);

double compute_iqr(const Corpus& corpus, const OntologyRegistry& reg,
                   const EngagementConfig& cfg = {});
double compute_rqr(const Corpus& corpus, const OntologyRegistry& reg,
                   const EngagementConfig& cfg = {});
double compute_err(const Corpus& corpus, const OntologyRegistry& reg,
                   const EngagementConfig& cfg = {});

} // namespace seo
