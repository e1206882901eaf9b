#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "seo/corpus.hpp"
#include "seo/state.hpp"

namespace seo {

/// Records of the last `w` turn-pairs of a dialogue, ending just before the
/// doctor speaks turn k. Shorter near the dialogue start; never crosses a
/// dialogue boundary.
struct HistoryWindow {
    std::vector<Turn> turns; // oldest first
};

HistoryWindow make_history_window(const Dialogue& dialogue,
                                  std::size_t doctor_turn_index,
                                  std::size_t window_pairs = 3);

struct LexiconRule {
    std::string pattern; // case-folded substring
    int slot = 0;
    Ternary value = Ternary::Present;
    bool override_known = false;
};

/// Keyword table for the reference non-ML tracker. Rules apply in file order.
class Lexicon {
  public:
    static Lexicon load(std::istream& in, const OntologyRegistry& reg);
    static Lexicon load_file(const std::string& path, const OntologyRegistry& reg);

    const std::vector<LexiconRule>& rules() const { return rules_; }

  private:
    std::vector<LexiconRule> rules_;
};

/// Fold the gold patient deltas from all-unknown. Snapshot k is the state
/// known when the doctor speaks turn k: all patient deltas strictly before
/// that record are applied.
std::vector<DialogueState> replay_gold(const Dialogue& dialogue,
                                       const OntologyRegistry& reg);
std::map<std::string, std::vector<DialogueState>>
replay_corpus(const Corpus& corpus, const OntologyRegistry& reg);

/// Pattern-hit delta over the window's patient utterances. A hit assigns its
/// slot only if the slot is still unknown in `prev` or the rule overrides;
/// the first rule (in lexicon order) to claim a slot wins.
StateDelta lexical_track(const HistoryWindow& window, const DialogueState& prev,
                         const Lexicon& lexicon);

enum class TrackerKind { Gold, Lexical };

struct TrackOptions {
    TrackerKind tracker = TrackerKind::Gold;
    std::size_t window_pairs = 3;
};

/// Per-dialogue, per-doctor-turn deltas from the chosen tracker, keyed by
/// dialogue id. Folding a dialogue's deltas from all-unknown reproduces its
/// tracker state snapshots.
std::map<std::string, std::vector<StateDelta>>
run_tracker(const Corpus& corpus, const OntologyRegistry& reg,
            const Lexicon* lexicon, const TrackOptions& opts);

/// Prediction file rows: {"dialogue_id", "turn_index", "state"|"state_delta"}.
/// turn_index is the 0-based doctor-turn index.
void write_state_predictions(std::ostream& out,
                             const std::map<std::string, std::vector<StateDelta>>& deltas,
                             const OntologyRegistry& reg, bool as_full_state);

/// Load a prediction file against the gold corpus. Full-state files must
/// cover every doctor turn; delta files may omit rows (no change). Returns
/// aligned snapshots per dialogue.
std::map<std::string, std::vector<DialogueState>>
load_state_predictions(std::istream& in, const Corpus& gold,
                       const OntologyRegistry& reg);
std::map<std::string, std::vector<DialogueState>>
load_state_predictions_file(const std::string& path, const Corpus& gold,
                            const OntologyRegistry& reg);

struct DstDialogueBreakdown {
    std::string dialogue_id;
    double jga = 0;
    double slot_accuracy = 0;
    std::int64_t final_tp = 0, final_fp = 0, final_fn = 0;
};

struct DstEvalReport {
    double jga = 0;
    double slot_accuracy = 0;
    double symptom_precision = 0, symptom_recall = 0, symptom_f1 = 0;
    std::int64_t turns_total = 0, turns_exact = 0;
    std::int64_t slots_total = 0, slots_correct = 0;
    std::int64_t tp = 0, fp = 0, fn = 0;
    std::vector<DstDialogueBreakdown> per_dialogue; // ordered by dialogue_id
};

/// JGA = exact-state turn fraction; SA = per-(turn,slot) accuracy;
/// Symptom F1 = micro P/R/F1 over final-turn present slots.
DstEvalReport evaluate_dst(const std::map<std::string, std::vector<DialogueState>>& predicted,
                           const std::map<std::string, std::vector<DialogueState>>& gold);

} // namespace seo
