#include "seo/tracking.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace seo {

using nlohmann::json;

namespace {

std::string fold_ascii(std::string s) {
    for (char& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

} // namespace

HistoryWindow make_history_window(const Dialogue& dialogue,
                                  std::size_t doctor_turn_index,
                                  std::size_t window_pairs) {
    const auto positions = dialogue.doctor_turn_positions();
    if (doctor_turn_index >= positions.size())
        throw Error(ErrorCode::LengthMismatch,
                    "doctor turn " + std::to_string(doctor_turn_index) +
                        " out of range in '" + dialogue.dialogue_id + "'");
    const std::size_t end = positions[doctor_turn_index];
    const std::size_t start = doctor_turn_index >= window_pairs
                                  ? positions[doctor_turn_index - window_pairs]
                                  : 0;
    HistoryWindow w;
    w.turns.assign(dialogue.turns.begin() + static_cast<std::ptrdiff_t>(start),
                   dialogue.turns.begin() + static_cast<std::ptrdiff_t>(end));
    return w;
}

Lexicon Lexicon::load(std::istream& in, const OntologyRegistry& reg) {
    Lexicon lex;
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;

        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            auto tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (fields.size() < 3 || fields.size() > 4)
            throw Error(ErrorCode::MalformedLexicon,
                        "expected pattern<TAB>leaf<TAB>value[<TAB>override]", lineno);
        if (fields[0].empty())
            throw Error(ErrorCode::MalformedLexicon, "empty pattern", lineno);

        LexiconRule rule;
        rule.pattern = fold_ascii(fields[0]);
        try {
            rule.slot = reg.slot_index(reg.resolve(fields[1]));
            rule.value = parse_ternary(fields[2]);
        } catch (const Error& e) {
            throw Error(ErrorCode::MalformedLexicon, e.what(), lineno);
        }
        if (fields.size() == 4 && !fields[3].empty()) {
            if (fields[3] != "override")
                throw Error(ErrorCode::MalformedLexicon,
                            "fourth field must be 'override', got '" + fields[3] + "'",
                            lineno);
            rule.override_known = true;
        }
        lex.rules_.push_back(std::move(rule));
    }
    return lex;
}

Lexicon Lexicon::load_file(const std::string& path, const OntologyRegistry& reg) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open lexicon file '" + path + "'");
    return load(in, reg);
}

std::vector<DialogueState> replay_gold(const Dialogue& dialogue,
                                       const OntologyRegistry& reg) {
    std::vector<DialogueState> snapshots;
    DialogueState state = DialogueState::all_unknown(reg);
    for (const auto& turn : dialogue.turns) {
        if (turn.speaker == Speaker::Doctor)
            snapshots.push_back(state);
        else
            state = apply_delta(state, turn.state_delta);
    }
    return snapshots;
}

std::map<std::string, std::vector<DialogueState>>
replay_corpus(const Corpus& corpus, const OntologyRegistry& reg) {
    std::map<std::string, std::vector<DialogueState>> out;
    for (const auto& d : corpus.dialogues) out.emplace(d.dialogue_id, replay_gold(d, reg));
    return out;
}

StateDelta lexical_track(const HistoryWindow& window, const DialogueState& prev,
                         const Lexicon& lexicon) {
    StateDelta delta;
    for (const auto& rule : lexicon.rules()) {
        if (delta.has(rule.slot)) continue; // first-listed pattern wins
        if (!rule.override_known && prev.value(rule.slot) != Ternary::Unknown) continue;
        for (const auto& turn : window.turns) {
            if (turn.speaker != Speaker::Patient) continue;
            if (fold_ascii(turn.text).find(rule.pattern) != std::string::npos) {
                delta.assign(rule.slot, rule.value);
                break;
            }
        }
    }
    return delta;
}

std::map<std::string, std::vector<StateDelta>>
run_tracker(const Corpus& corpus, const OntologyRegistry& reg,
            const Lexicon* lexicon, const TrackOptions& opts) {
    if (opts.tracker == TrackerKind::Lexical && lexicon == nullptr)
        throw Error(ErrorCode::MalformedLexicon, "lexical tracker needs a lexicon");

    std::map<std::string, std::vector<StateDelta>> out;
    for (const auto& d : corpus.dialogues) {
        const auto positions = d.doctor_turn_positions();
        std::vector<StateDelta> deltas;
        deltas.reserve(positions.size());
        if (opts.tracker == TrackerKind::Gold) {
            // Delta k collects the patient deltas between doctor turns k-1 and k,
            // so folding reproduces the replay snapshots.
            std::size_t record = 0;
            for (std::size_t k = 0; k < positions.size(); ++k) {
                StateDelta merged;
                for (; record < positions[k]; ++record) {
                    const Turn& t = d.turns[record];
                    if (t.speaker == Speaker::Patient)
                        for (const auto& [slot, value] : t.state_delta.assignments())
                            merged.assign(slot, value);
                }
                ++record; // skip the doctor record itself
                deltas.push_back(std::move(merged));
            }
        } else {
            DialogueState state = DialogueState::all_unknown(reg);
            for (std::size_t k = 0; k < positions.size(); ++k) {
                const HistoryWindow w = make_history_window(d, k, opts.window_pairs);
                StateDelta delta = lexical_track(w, state, *lexicon);
                state = apply_delta(state, delta);
                deltas.push_back(std::move(delta));
            }
        }
        out.emplace(d.dialogue_id, std::move(deltas));
    }
    return out;
}

void write_state_predictions(std::ostream& out,
                             const std::map<std::string, std::vector<StateDelta>>& deltas,
                             const OntologyRegistry& reg, bool as_full_state) {
    for (const auto& [dialogue_id, turn_deltas] : deltas) {
        DialogueState state = DialogueState::all_unknown(reg);
        for (std::size_t k = 0; k < turn_deltas.size(); ++k) {
            json row;
            row["dialogue_id"] = dialogue_id;
            row["turn_index"] = k;
            if (as_full_state) {
                state = apply_delta(state, turn_deltas[k]);
                json slots = json::object();
                for (const auto& [leaf, value] : state.known_slots(reg))
                    slots[leaf] = ternary_name(value);
                row["state"] = std::move(slots);
            } else {
                json slots = json::object();
                for (const auto& [leaf, value] : turn_deltas[k].to_slot_map(reg))
                    slots[leaf] = value;
                row["state_delta"] = std::move(slots);
            }
            out << row.dump() << '\n';
        }
    }
}

std::map<std::string, std::vector<DialogueState>>
load_state_predictions(std::istream& in, const Corpus& gold,
                       const OntologyRegistry& reg) {
    std::map<std::string, std::size_t> lengths;
    for (const auto& d : gold.dialogues) lengths[d.dialogue_id] = d.doctor_turn_count();

    enum class Mode { Unset, FullState, Delta };
    Mode mode = Mode::Unset;
    // (dialogue, turn) -> parsed slot assignments
    std::map<std::string, std::map<std::size_t, StateDelta>> rows;

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
            if (!obj.is_object() || !obj.contains("dialogue_id") ||
                !obj.contains("turn_index"))
                throw Error(ErrorCode::SchemaError,
                            "row needs dialogue_id and turn_index");
            const std::string id = obj["dialogue_id"].get<std::string>();
            auto len = lengths.find(id);
            if (len == lengths.end())
                throw Error(ErrorCode::KeyMismatch,
                            "dialogue '" + id + "' not in the gold corpus");
            const auto turn = obj["turn_index"].get<std::int64_t>();
            if (turn < 0 || static_cast<std::size_t>(turn) >= len->second)
                throw Error(ErrorCode::KeyMismatch,
                            "turn_index " + std::to_string(turn) + " out of range for '" +
                                id + "' (" + std::to_string(len->second) + " doctor turns)");

            const bool has_state = obj.contains("state");
            const bool has_delta = obj.contains("state_delta");
            if (has_state == has_delta)
                throw Error(ErrorCode::SchemaError,
                            "row needs exactly one of state / state_delta");
            const Mode row_mode = has_state ? Mode::FullState : Mode::Delta;
            if (mode == Mode::Unset) mode = row_mode;
            if (mode != row_mode)
                throw Error(ErrorCode::SchemaError,
                            "file mixes state and state_delta rows");

            const json& slots = has_state ? obj["state"] : obj["state_delta"];
            if (!slots.is_object())
                throw Error(ErrorCode::SchemaError, "slot assignments must be an object");
            std::map<std::string, std::string> assignments;
            for (const auto& item : slots.items())
                assignments.emplace(item.key(), item.value().get<std::string>());
            auto& by_turn = rows[id];
            if (!by_turn.emplace(static_cast<std::size_t>(turn),
                                 StateDelta::from_slot_map(reg, assignments))
                     .second)
                throw Error(ErrorCode::KeyMismatch,
                            "duplicate row for '" + id + "' turn " + std::to_string(turn));
        } catch (const Error& e) {
            if (e.line() != 0) throw;
            throw Error(e.code(), e.message(), lineno);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::SchemaError, e.what(), lineno);
        }
    }

    std::map<std::string, std::vector<DialogueState>> out;
    for (const auto& [id, length] : lengths) {
        auto it = rows.find(id);
        std::vector<DialogueState> snapshots;
        snapshots.reserve(length);
        DialogueState state = DialogueState::all_unknown(reg);
        for (std::size_t k = 0; k < length; ++k) {
            const StateDelta* row = nullptr;
            if (it != rows.end()) {
                auto rt = it->second.find(k);
                if (rt != it->second.end()) row = &rt->second;
            }
            if (mode == Mode::FullState) {
                if (row == nullptr)
                    throw Error(ErrorCode::LengthMismatch,
                                "full-state file misses '" + id + "' turn " +
                                    std::to_string(k));
                state = apply_delta(DialogueState::all_unknown(reg), *row);
            } else {
                if (row != nullptr) state = apply_delta(state, *row);
            }
            snapshots.push_back(state);
        }
        out.emplace(id, std::move(snapshots));
    }
    return out;
}

std::map<std::string, std::vector<DialogueState>>
load_state_predictions_file(const std::string& path, const Corpus& gold,
                            const OntologyRegistry& reg) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open prediction file '" + path + "'");
    return load_state_predictions(in, gold, reg);
}

DstEvalReport evaluate_dst(const std::map<std::string, std::vector<DialogueState>>& predicted,
                           const std::map<std::string, std::vector<DialogueState>>& gold) {
    DstEvalReport report;
    for (const auto& [id, gold_states] : gold) {
        auto it = predicted.find(id);
        if (it == predicted.end())
            throw Error(ErrorCode::LengthMismatch, "no predictions for '" + id + "'");
        const auto& pred_states = it->second;
        if (pred_states.size() != gold_states.size())
            throw Error(ErrorCode::LengthMismatch,
                        "'" + id + "': " + std::to_string(pred_states.size()) +
                            " predicted turns vs " + std::to_string(gold_states.size()) +
                            " gold turns");

        DstDialogueBreakdown bd;
        bd.dialogue_id = id;
        std::int64_t turns_exact = 0, slots_correct = 0, slots_total = 0;
        for (std::size_t k = 0; k < gold_states.size(); ++k) {
            const auto& g = gold_states[k];
            const auto& p = pred_states[k];
            if (g.size() != p.size())
                throw Error(ErrorCode::LengthMismatch,
                            "'" + id + "' turn " + std::to_string(k) +
                                ": slot counts differ");
            if (p == g) ++turns_exact;
            for (int s = 0; s < static_cast<int>(g.size()); ++s) {
                ++slots_total;
                if (p.value(s) == g.value(s)) ++slots_correct;
            }
        }
        const auto& final_gold = gold_states.back();
        const auto& final_pred = pred_states.back();
        for (int s = 0; s < static_cast<int>(final_gold.size()); ++s) {
            const bool gp = final_gold.value(s) == Ternary::Present;
            const bool pp = final_pred.value(s) == Ternary::Present;
            if (gp && pp) ++bd.final_tp;
            else if (pp) ++bd.final_fp;
            else if (gp) ++bd.final_fn;
        }
        bd.jga = static_cast<double>(turns_exact) / static_cast<double>(gold_states.size());
        bd.slot_accuracy =
            static_cast<double>(slots_correct) / static_cast<double>(slots_total);

        report.turns_total += static_cast<std::int64_t>(gold_states.size());
        report.turns_exact += turns_exact;
        report.slots_total += slots_total;
        report.slots_correct += slots_correct;
        report.tp += bd.final_tp;
        report.fp += bd.final_fp;
        report.fn += bd.final_fn;
        report.per_dialogue.push_back(std::move(bd));
    }
    if (predicted.size() != gold.size()) {
        for (const auto& [id, _] : predicted)
            if (!gold.count(id))
                throw Error(ErrorCode::LengthMismatch,
                            "prediction for unknown dialogue '" + id + "'");
    }
    if (report.turns_total > 0) {
        report.jga = static_cast<double>(report.turns_exact) /
                     static_cast<double>(report.turns_total);
        report.slot_accuracy = static_cast<double>(report.slots_correct) /
                               static_cast<double>(report.slots_total);
    }
    const double tp = static_cast<double>(report.tp);
    const double p_den = tp + static_cast<double>(report.fp);
    const double r_den = tp + static_cast<double>(report.fn);
    report.symptom_precision = p_den > 0 ? tp / p_den : 0.0;
    report.symptom_recall = r_den > 0 ? tp / r_den : 0.0;
    const double pr = report.symptom_precision + report.symptom_recall;
    report.symptom_f1 = pr > 0 ? 2 * report.symptom_precision * report.symptom_recall / pr : 0.0;
    return report;
}

} // namespace seo
