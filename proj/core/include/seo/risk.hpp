#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "seo/corpus.hpp"
#include "seo/state.hpp"

namespace seo {

/// Transparent rule table for the 4-class severity labels. Thresholds count
/// core-symptom groups with at least one present slot; escalators only raise
/// the label.
struct RiskRuleTable {
    int mild_min = 2;     // qualifying groups for at least mild
    int moderate_min = 4; // .. at least moderate
    int severe_min = 6;   // .. severe
    std::set<std::string> excluded_groups = {"cause", "screening"};
    std::string floor_group = "suicide"; // any present slot here raises to..
    RiskLabel group_floor = RiskLabel::Moderate;
    std::string severe_leaf = "tod.suicide.suicidal_behavior";

    void validate() const; // throws BadThreshold
    static RiskRuleTable load_file(const std::string& path);
};

RiskLabel score_risk(const DialogueState& state, const OntologyRegistry& reg,
                     const RiskRuleTable& rules = {});

struct RiskClassCounts {
    std::int64_t tp = 0, fp = 0, fn = 0, support = 0;
    double precision = 0, recall = 0, f1 = 0;
};

struct RiskEvalReport {
    // One row per dialogue: rule label from the final replayed state.
    std::vector<std::pair<std::string, RiskLabel>> predicted;
    bool evaluated = false;
    RiskClassCounts per_class[4]; // indexed by risk_rank
    double avg_precision = 0, avg_recall = 0, avg_f1 = 0; // unweighted class mean
    double accuracy = 0;
};

/// Score every dialogue's final replayed state; with `eval`, compare against
/// the gold risk labels and fill the per-class table.
RiskEvalReport evaluate_risk(const Corpus& corpus, const OntologyRegistry& reg,
                             const RiskRuleTable& rules, bool eval);

} // namespace seo
