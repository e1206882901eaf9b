#include "seo/engagement.hpp"

#include <algorithm>

#include "seo/parallel.hpp"
#include "seo/tracking.hpp"

namespace seo {

namespace {

// Doctor intent sets for one dialogue, either gold annotations or the
// prediction override. Gold turns without an intents field are an error;
// missing prediction rows are empty sets.
std::vector<IntentSet> doctor_intents(const Dialogue& d, const PredictionSet* pred) {
    std::vector<IntentSet> out;
    std::size_t k = 0;
    for (const auto& t : d.turns) {
        if (t.speaker != Speaker::Doctor) continue;
        if (pred) {
            auto it = pred->turns.find(TurnKey{d.dialogue_id, k});
            out.push_back(it != pred->turns.end() ? it->second : IntentSet{});
        } else {
            if (!t.labeled())
                throw Error(ErrorCode::MissingIntents,
                            "doctor turn " + std::to_string(k) + " of '" +
                                d.dialogue_id + "' carries no intents");
            out.push_back(*t.intents);
        }
        ++k;
    }
    return out;
}

} // namespace

namespace {

DialogueEngagement engage_dialogue(const Dialogue& d, const OntologyRegistry& reg,
                                   const EngagementConfig& cfg, const IntentSet& es,
                                   const EngagementInputs& in) {
    const auto intents = doctor_intents(d, in.intents);
    const std::size_t L = intents.size();

    std::vector<DialogueState> snapshots;
    if (in.states) {
        auto it = in.states->find(d.dialogue_id);
        if (it == in.states->end() || it->second.size() != L)
            throw Error(ErrorCode::MissingStates,
                        "no aligned state snapshots for '" + d.dialogue_id + "'");
        snapshots = it->second;
    } else {
        snapshots = replay_gold(d, reg);
    }

    // Topic sets per turn; seen_before is the union over all earlier turns.
    std::vector<std::set<std::string>> topics(L);
    for (std::size_t k = 0; k < L; ++k)
        for (const auto& id : intents[k])
            if (id.aspect == Aspect::Tod) topics[k].insert(id.group);

    DialogueEngagement de;
    de.dialogue_id = d.dialogue_id;
    de.doctor_turns = L;
    IntentSet seen_before;
    for (std::size_t k = 0; k < L; ++k) {
        TurnEngagement te;
        te.turn_index = k;

        std::set<std::string> topic_window;
        const std::size_t t_begin = k >= cfg.iqr_window ? k - cfg.iqr_window : 0;
        const std::size_t t_end = cfg.window_inclusive_current ? k + 1 : k;
        for (std::size_t j = t_begin; j < t_end; ++j)
            topic_window.insert(topics[j].begin(), topics[j].end());

        IntentSet intent_window;
        const std::size_t i_begin = k >= cfg.rqr_window ? k - cfg.rqr_window : 0;
        for (std::size_t j = i_begin; j < k; ++j)
            intent_window.insert(intents[j].begin(), intents[j].end());

        for (const auto& id : intents[k]) {
            if (id.aspect != Aspect::Tod) continue;
            if (!seen_before.count(id) && topic_window.count(id.group))
                te.in_depth.push_back(id.canonical());
            if (intent_window.count(id) &&
                snapshots[k].value(reg.slot_index(id)) != Ternary::Unknown)
                te.repeated.push_back(id.canonical());
        }
        for (const auto& id : intents[k])
            if (es.count(id)) te.empathy.push_back(id.canonical());

        de.in_depth_count += static_cast<std::int64_t>(te.in_depth.size());
        de.repeated_count += static_cast<std::int64_t>(te.repeated.size());
        if (!te.empathy.empty()) ++de.empathy_turns;
        seen_before.insert(intents[k].begin(), intents[k].end());
        de.turns.push_back(std::move(te));
    }
    return de;
}

} // namespace

EngagementReport compute_engagement(const EngagementInputs& in,
                                    const EngagementConfig& cfg) {
    const Corpus& corpus = *in.corpus;
    const OntologyRegistry& reg = *in.registry;
    if (cfg.iqr_window < 1 || cfg.rqr_window < 1)
        throw Error(ErrorCode::BadThreshold, "screening window must be >= 1");
    const IntentSet& es = cfg.empathy_set ? *cfg.empathy_set : reg.empathy_set();

    auto breakdowns = parallel_map(
        corpus.dialogues, in.jobs,
        [&](const Dialogue& d) { return engage_dialogue(d, reg, cfg, es, in); });

    EngagementReport report;
    for (auto& de : breakdowns) {
        report.in_depth_total += de.in_depth_count;
        report.repeated_total += de.repeated_count;
        report.empathy_turn_total += de.empathy_turns;
        report.doctor_turn_total += static_cast<std::int64_t>(de.doctor_turns);
        report.per_dialogue.push_back(std::move(de));
    }
    std::sort(report.per_dialogue.begin(), report.per_dialogue.end(),
              [](const DialogueEngagement& a, const DialogueEngagement& b) {
                  return a.dialogue_id < b.dialogue_id;
              });
    if (report.doctor_turn_total > 0) {
        const double L = static_cast<double>(report.doctor_turn_total);
        report.iqr = static_cast<double>(report.in_depth_total) / L;
        report.rqr = static_cast<double>(report.repeated_total) / L;
        report.err = static_cast<double>(report.empathy_turn_total) / L;
    }
    return report;
}

double compute_iqr(const Corpus& corpus, const OntologyRegistry& reg,
                   const EngagementConfig& cfg) {
    return compute_engagement({&corpus, &reg, nullptr, nullptr}, cfg).iqr;
}

double compute_rqr(const Corpus& corpus, const OntologyRegistry& reg,
                   const EngagementConfig& cfg) {
    return compute_engagement({&corpus, &reg, nullptr, nullptr}, cfg).rqr;
}

double compute_err(const Corpus& corpus, const OntologyRegistry& reg,
                   const EngagementConfig& cfg) {
    return compute_engagement({&corpus, &reg, nullptr, nullptr}, cfg).err;
}

} // namespace seo
