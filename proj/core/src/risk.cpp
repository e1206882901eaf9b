#include "seo/risk.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>


namespace seo {

using nlohmann::json;

void RiskRuleTable::validate() const {
    if (!(1 <= mild_min && mild_min < moderate_min && moderate_min < severe_min))
        throw Error(ErrorCode::BadThreshold,
                    "group thresholds must be strictly increasing and >= 1");
}

RiskRuleTable RiskRuleTable::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open rules file '" + path + "'");
    json obj;
    try {
        obj = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SyntaxError,
                    "byte " + std::to_string(e.byte) + ": invalid JSON in '" + path + "'");
    }
    RiskRuleTable rules;
    try {
        if (obj.contains("mild_min")) rules.mild_min = obj["mild_min"].get<int>();
        if (obj.contains("moderate_min")) rules.moderate_min = obj["moderate_min"].get<int>();
        if (obj.contains("severe_min")) rules.severe_min = obj["severe_min"].get<int>();
        if (obj.contains("excluded_groups")) {
            rules.excluded_groups.clear();
            for (const auto& g : obj["excluded_groups"])
                rules.excluded_groups.insert(g.get<std::string>());
        }
        if (obj.contains("floor_group"))
            rules.floor_group = obj["floor_group"].get<std::string>();
        if (obj.contains("group_floor"))
            rules.group_floor = parse_risk_label(obj["group_floor"].get<std::string>());
        if (obj.contains("severe_leaf"))
            rules.severe_leaf = obj["severe_leaf"].get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("rules file: ") + e.what());
    }
    rules.validate();
    return rules;
}

RiskLabel score_risk(const DialogueState& state, const OntologyRegistry& reg,
                     const RiskRuleTable& rules) {
    rules.validate();
    std::set<std::string> hit_groups;
    bool severe_hit = false;
    bool floor_hit = false;
    for (int s = 0; s < static_cast<int>(state.size()); ++s) {
        if (state.value(s) != Ternary::Present) continue;
        const IntentId& id = reg.slot_id(s);
        if (!rules.excluded_groups.count(id.group)) hit_groups.insert(id.group);
        if (id.group == rules.floor_group) floor_hit = true;
        if (id.canonical() == rules.severe_leaf) severe_hit = true;
    }
    const int n = static_cast<int>(hit_groups.size());
    RiskLabel label = RiskLabel::None;
    if (n >= rules.severe_min)
        label = RiskLabel::Severe;
    else if (n >= rules.moderate_min)
        label = RiskLabel::Moderate;
    else if (n >= rules.mild_min)
        label = RiskLabel::Mild;
    if (floor_hit && risk_rank(label) < risk_rank(rules.group_floor))
        label = rules.group_floor;
    if (severe_hit) label = RiskLabel::Severe;
    return label;
}

RiskEvalReport evaluate_risk(const Corpus& corpus, const OntologyRegistry& reg,
                             const RiskRuleTable& rules, bool eval) {
    RiskEvalReport report;
    std::int64_t correct = 0;
    for (const auto& d : corpus.dialogues) {
        // End-of-dialogue state: every patient delta folded in.
        DialogueState final_state = DialogueState::all_unknown(reg);
        for (const auto& t : d.turns)
            if (t.speaker == Speaker::Patient)
                final_state = apply_delta(final_state, t.state_delta);
        const RiskLabel predicted = score_risk(final_state, reg, rules);
        report.predicted.emplace_back(d.dialogue_id, predicted);
        if (eval) {
            ++report.per_class[risk_rank(d.risk)].support;
            if (predicted == d.risk) {
                ++report.per_class[risk_rank(d.risk)].tp;
                ++correct;
            } else {
                ++report.per_class[risk_rank(predicted)].fp;
                ++report.per_class[risk_rank(d.risk)].fn;
            }
        }
    }
    std::sort(report.predicted.begin(), report.predicted.end());
    if (eval) {
        report.evaluated = true;
        double sum_p = 0, sum_r = 0, sum_f = 0;
        for (auto& c : report.per_class) {
            const double tp = static_cast<double>(c.tp);
            c.precision = c.tp + c.fp > 0 ? tp / static_cast<double>(c.tp + c.fp) : 0.0;
            c.recall = c.tp + c.fn > 0 ? tp / static_cast<double>(c.tp + c.fn) : 0.0;
            c.f1 = c.precision + c.recall > 0
                       ? 2 * c.precision * c.recall / (c.precision + c.recall)
                       : 0.0;
            sum_p += c.precision;
            sum_r += c.recall;
            sum_f += c.f1;
        }
        report.avg_precision = sum_p / 4.0;
        report.avg_recall = sum_r / 4.0;
        report.avg_f1 = sum_f / 4.0;
        if (!corpus.dialogues.empty())
            report.accuracy =
                static_cast<double>(correct) / static_cast<double>(corpus.size());
    }
    return report;
}

} // namespace seo
