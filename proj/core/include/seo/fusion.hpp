#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "seo/corpus.hpp"
#include "seo/ontology.hpp"

namespace seo {

/// (dialogue, 0-based doctor-turn index) addressing for prediction rows.
struct TurnKey {
    std::string dialogue_id;
    std::size_t turn_index = 0;

    friend auto operator<=>(const TurnKey&, const TurnKey&) = default;
};

/// Per-turn intent sets from one predictor.
struct PredictionSet {
    std::string predictor_id;
    std::map<TurnKey, IntentSet> turns;
};

/// Rows: {"predictor": str, "dialogue_id": str, "turn_index": int,
/// "intents": [str]}. One predictor per file. When a reference corpus is
/// given, every key must name one of its doctor turns.
PredictionSet load_predictions(std::istream& in, const OntologyRegistry& reg,
                               const Corpus* reference = nullptr);
PredictionSet load_predictions_file(const std::string& path,
                                    const OntologyRegistry& reg,
                                    const Corpus* reference = nullptr);
void write_predictions(std::ostream& out, const PredictionSet& pred);

/// Per-turn union across predictors: the recall-infusion rule.
PredictionSet fuse_recall(const std::vector<PredictionSet>& preds);

/// Per-turn vote: keep intents predicted by at least `threshold` predictors.
/// threshold=1 degenerates to recall fusion; threshold=#preds is intersection.
PredictionSet fuse_precision(const std::vector<PredictionSet>& preds,
                             std::size_t threshold = 2);

struct LabelCounts {
    std::int64_t tp = 0, fp = 0, fn = 0, support = 0;
};

struct MultilabelReport {
    double micro_precision = 0, micro_recall = 0, micro_f1 = 0;
    double macro_precision = 0, macro_recall = 0, macro_f1 = 0;
    double weighted_precision = 0, weighted_recall = 0, weighted_f1 = 0;
    std::map<std::string, LabelCounts> per_label; // canonical id -> counts
    std::int64_t turns_evaluated = 0;
};

/// Multi-label P/R/F1 over all labeled gold doctor turns. Missing prediction
/// rows count as empty sets; unlabeled gold turns are skipped. Macro averages
/// run over every registry label, zero-support labels contributing 0;
/// weighted averages are support-weighted.
MultilabelReport evaluate_multilabel(const PredictionSet& pred, const Corpus& gold,
                                     const OntologyRegistry& reg);

} // namespace seo
