#include "seo/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace seo {

using nlohmann::json;

const char* speaker_name(Speaker s) {
    return s == Speaker::Doctor ? "doctor" : "patient";
}

const char* risk_label_name(RiskLabel r) {
    switch (r) {
        case RiskLabel::None: return "none";
        case RiskLabel::Mild: return "mild";
        case RiskLabel::Moderate: return "moderate";
        case RiskLabel::Severe: return "severe";
    }
    return "none";
}

RiskLabel parse_risk_label(const std::string& text) {
    if (text == "none") return RiskLabel::None;
    if (text == "mild") return RiskLabel::Mild;
    if (text == "moderate") return RiskLabel::Moderate;
    if (text == "severe") return RiskLabel::Severe;
    throw Error(ErrorCode::SchemaError,
                "risk must be none|mild|moderate|severe, got '" + text + "'");
}

int risk_rank(RiskLabel r) { return static_cast<int>(r); }

std::size_t Dialogue::doctor_turn_count() const {
    std::size_t n = 0;
    for (const auto& t : turns)
        if (t.speaker == Speaker::Doctor) ++n;
    return n;
}

std::vector<std::size_t> Dialogue::doctor_turn_positions() const {
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < turns.size(); ++i)
        if (turns[i].speaker == Speaker::Doctor) pos.push_back(i);
    return pos;
}

namespace {

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const char* what) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw Error(ErrorCode::SchemaError,
                        std::string(what) + " has unknown field '" + item.key() + "'");
}

const json& require_field(const json& obj, const char* key, const char* what) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw Error(ErrorCode::SchemaError,
                    std::string(what) + " missing field '" + key + "'");
    return *it;
}

std::string require_string(const json& v, const char* key) {
    if (!v.is_string())
        throw Error(ErrorCode::SchemaError, std::string("'") + key + "' must be a string");
    return v.get<std::string>();
}

Turn parse_turn(const json& obj, const OntologyRegistry& reg) {
    if (!obj.is_object())
        throw Error(ErrorCode::SchemaError, "turn must be an object");
    require_keys(obj, {"speaker", "text", "intents", "state_delta", "emotion"}, "turn");

    Turn turn;
    const std::string speaker = require_string(require_field(obj, "speaker", "turn"), "speaker");
    if (speaker == "doctor")
        turn.speaker = Speaker::Doctor;
    else if (speaker == "patient")
        turn.speaker = Speaker::Patient;
    else
        throw Error(ErrorCode::SchemaError,
                    "speaker must be doctor|patient, got '" + speaker + "'");
    turn.text = require_string(require_field(obj, "text", "turn"), "text");

    if (auto it = obj.find("intents"); it != obj.end()) {
        if (turn.speaker != Speaker::Doctor)
            throw Error(ErrorCode::SchemaError, "patient turn carries intents");
        if (!it->is_array())
            throw Error(ErrorCode::SchemaError, "'intents' must be an array");
        IntentSet set;
        for (const auto& v : *it)
            set.insert(reg.resolve(require_string(v, "intents[]")));
        turn.intents = std::move(set);
    }
    if (auto it = obj.find("state_delta"); it != obj.end()) {
        if (turn.speaker != Speaker::Patient)
            throw Error(ErrorCode::SchemaError, "doctor turn carries state_delta");
        if (!it->is_object())
            throw Error(ErrorCode::SchemaError, "'state_delta' must be an object");
        std::map<std::string, std::string> slots;
        for (const auto& item : it->items())
            slots.emplace(item.key(), require_string(item.value(), "state_delta value"));
        turn.state_delta = StateDelta::from_slot_map(reg, slots);
    }
    if (auto it = obj.find("emotion"); it != obj.end()) {
        if (turn.speaker != Speaker::Patient)
            throw Error(ErrorCode::SchemaError, "doctor turn carries emotion");
        turn.emotion = require_string(*it, "emotion");
    }
    return turn;
}

Dialogue parse_dialogue(const json& obj, const OntologyRegistry& reg,
                        const ParseOptions& opts) {
    if (!obj.is_object())
        throw Error(ErrorCode::SchemaError, "dialogue must be an object");
    require_keys(obj, {"dialogue_id", "risk", "turns"}, "dialogue");

    Dialogue d;
    d.dialogue_id = require_string(require_field(obj, "dialogue_id", "dialogue"), "dialogue_id");
    d.risk = parse_risk_label(
        require_string(require_field(obj, "risk", "dialogue"), "risk"));
    const json& turns = require_field(obj, "turns", "dialogue");
    if (!turns.is_array())
        throw Error(ErrorCode::SchemaError, "'turns' must be an array");
    for (const auto& t : turns)
        d.turns.push_back(parse_turn(t, reg));

    if (d.doctor_turn_count() == 0)
        throw Error(ErrorCode::SchemaError,
                    "dialogue '" + d.dialogue_id + "' has no doctor turn");
    if (opts.strict) {
        for (std::size_t i = 1; i < d.turns.size(); ++i)
            if (d.turns[i].speaker == d.turns[i - 1].speaker)
                throw Error(ErrorCode::SchemaError,
                            "dialogue '" + d.dialogue_id +
                                "' violates speaker alternation at turn " +
                                std::to_string(i));
    }
    return d;
}

} // namespace

Corpus parse_corpus(std::istream& in, const OntologyRegistry& reg,
                    const ParseOptions& opts) {
    Corpus corpus;
    std::set<std::string> ids;
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
                        "byte " + std::to_string(e.byte) + ": invalid JSON",
                        lineno);
        }
        try {
            Dialogue d = parse_dialogue(obj, reg, opts);
            if (!ids.insert(d.dialogue_id).second)
                throw Error(ErrorCode::DuplicateDialogueId, "'" + d.dialogue_id + "'");
            corpus.dialogues.push_back(std::move(d));
        } catch (const Error& e) {
            if (e.line() != 0) throw;
            throw Error(e.code(), e.message(), lineno);
        }
    }
    return corpus;
}

Corpus parse_corpus_file(const std::string& path, const OntologyRegistry& reg,
                         const ParseOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open corpus file '" + path + "'");
    return parse_corpus(in, reg, opts);
}

void write_corpus(const Corpus& corpus, const OntologyRegistry& reg, std::ostream& out) {
    for (const auto& d : corpus.dialogues) {
        json turns = json::array();
        for (const auto& t : d.turns) {
            json obj;
            obj["speaker"] = speaker_name(t.speaker);
            obj["text"] = t.text;
            if (t.intents) {
                std::vector<std::string> ids;
                ids.reserve(t.intents->size());
                for (const auto& id : *t.intents) ids.push_back(id.canonical());
                obj["intents"] = ids; // IntentSet iterates in canonical order
            }
            if (!t.state_delta.empty())
                obj["state_delta"] = t.state_delta.to_slot_map(reg);
            if (t.emotion) obj["emotion"] = *t.emotion;
            turns.push_back(std::move(obj));
        }
        json line;
        line["dialogue_id"] = d.dialogue_id;
        line["risk"] = risk_label_name(d.risk);
        line["turns"] = std::move(turns);
        out << line.dump() << '\n';
    }
}

std::string write_corpus_string(const Corpus& corpus, const OntologyRegistry& reg) {
    std::ostringstream out;
    write_corpus(corpus, reg, out);
    return out.str();
}

namespace {

std::set<std::string> turn_topics(const Turn& t, const OntologyRegistry& reg) {
    std::set<std::string> topics;
    if (!t.intents) return topics;
    for (const auto& id : *t.intents)
        if (id.aspect == Aspect::Tod) topics.insert(reg.core_symptom_of(id));
    return topics;
}

std::set<std::string> turn_strategies(const Turn& t) {
    std::set<std::string> out;
    if (!t.intents) return out;
    for (const auto& id : *t.intents)
        if (id.aspect == Aspect::Chitchat) out.insert(id.canonical());
    return out;
}

} // namespace

std::vector<std::vector<double>>
TransitionCounts::row_normalized(const std::vector<std::vector<std::int64_t>>& counts) {
    std::vector<std::vector<double>> rows(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        std::int64_t total = 0;
        for (auto c : counts[i]) total += c;
        rows[i].resize(counts[i].size(), 0.0);
        if (total > 0)
            for (std::size_t j = 0; j < counts[i].size(); ++j)
                rows[i][j] = static_cast<double>(counts[i][j]) / static_cast<double>(total);
    }
    return rows;
}

TransitionCounts estimate_transition_counts(const Corpus& corpus,
                                            const OntologyRegistry& reg,
                                            bool singleton_only) {
    if (corpus.dialogues.empty())
        throw Error(ErrorCode::EmptyCorpus, "no dialogues");

    TransitionCounts tc;
    tc.topics = reg.core_symptom_groups();
    tc.topic_counts.assign(tc.topics.size(),
                           std::vector<std::int64_t>(tc.topics.size(), 0));
    for (const auto& e : reg.leaves())
        if (e.id.aspect == Aspect::Chitchat) tc.strategies.push_back(e.id.canonical());
    tc.strategy_counts.assign(tc.strategies.size(),
                              std::vector<std::int64_t>(tc.strategies.size(), 0));

    auto strategy_index = [&](const std::string& canonical) {
        auto it = std::find(tc.strategies.begin(), tc.strategies.end(), canonical);
        return static_cast<std::size_t>(it - tc.strategies.begin());
    };

    for (const auto& d : corpus.dialogues) {
        const auto positions = d.doctor_turn_positions();
        for (std::size_t k = 0; k + 1 < positions.size(); ++k) {
            const auto from_topics = turn_topics(d.turns[positions[k]], reg);
            const auto to_topics = turn_topics(d.turns[positions[k + 1]], reg);
            if (!singleton_only || (from_topics.size() == 1 && to_topics.size() == 1))
                for (const auto& a : from_topics)
                    for (const auto& b : to_topics)
                        ++tc.topic_counts[static_cast<std::size_t>(reg.group_index(a))]
                                         [static_cast<std::size_t>(reg.group_index(b))];

            const auto from_s = turn_strategies(d.turns[positions[k]]);
            const auto to_s = turn_strategies(d.turns[positions[k + 1]]);
            if (!singleton_only || (from_s.size() == 1 && to_s.size() == 1))
                for (const auto& a : from_s)
                    for (const auto& b : to_s)
                        ++tc.strategy_counts[strategy_index(a)][strategy_index(b)];
        }
    }
    return tc;
}

CorpusStats compute_stats(const Corpus& corpus, const OntologyRegistry& reg,
                          bool singleton_transitions) {
    if (corpus.dialogues.empty())
        throw Error(ErrorCode::EmptyCorpus, "no dialogues");

    CorpusStats s;
    s.n_dialogues = corpus.size();
    for (const auto& e : reg.leaves()) s.per_leaf_counts[e.id.canonical()] = 0;

    std::size_t runs = 0, utterances = 0, doctor_utts = 0, patient_utts = 0;
    for (const auto& d : corpus.dialogues) {
        utterances += d.turns.size();
        for (std::size_t i = 0; i < d.turns.size(); ++i) {
            const Turn& t = d.turns[i];
            if (i == 0 || t.speaker != d.turns[i - 1].speaker) ++runs;
            if (t.speaker == Speaker::Doctor) {
                ++doctor_utts;
                if (t.labeled()) {
                    ++s.labeled_doctor_utterances;
                    for (const auto& id : *t.intents) {
                        ++s.per_leaf_counts[id.canonical()];
                        if (id.aspect == Aspect::Tod)
                            ++s.intents_tod;
                        else
                            ++s.intents_chitchat;
                    }
                }
            } else {
                ++patient_utts;
            }
        }
    }
    const double n = static_cast<double>(s.n_dialogues);
    s.avg_turns = static_cast<double>(runs) / n;
    s.avg_utterances_total = static_cast<double>(utterances) / n;
    s.avg_utterances_doctor = static_cast<double>(doctor_utts) / n;
    s.avg_utterances_patient = static_cast<double>(patient_utts) / n;
    if (s.labeled_doctor_utterances > 0) {
        const double labeled = static_cast<double>(s.labeled_doctor_utterances);
        s.avg_intents_tod = static_cast<double>(s.intents_tod) / labeled;
        s.avg_intents_chitchat = static_cast<double>(s.intents_chitchat) / labeled;
        s.avg_intents_overall =
            static_cast<double>(s.intents_tod + s.intents_chitchat) / labeled;
    }
    s.transitions = estimate_transition_counts(corpus, reg, singleton_transitions);
    return s;
}

} // namespace seo
