#include "seo/fusion.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace seo {

using nlohmann::json;

PredictionSet load_predictions(std::istream& in, const OntologyRegistry& reg,
                               const Corpus* reference) {
    std::map<std::string, std::size_t> lengths;
    if (reference)
        for (const auto& d : reference->dialogues)
            lengths[d.dialogue_id] = d.doctor_turn_count();

    PredictionSet pred;
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
            for (const char* key : {"predictor", "dialogue_id", "turn_index", "intents"})
                if (!obj.contains(key))
                    throw Error(ErrorCode::SchemaError,
                                std::string("row missing field '") + key + "'");
            const auto predictor = obj["predictor"].get<std::string>();
            if (pred.predictor_id.empty())
                pred.predictor_id = predictor;
            else if (pred.predictor_id != predictor)
                throw Error(ErrorCode::SchemaError,
                            "file mixes predictors '" + pred.predictor_id + "' and '" +
                                predictor + "'");
            TurnKey key{obj["dialogue_id"].get<std::string>(), 0};
            const auto turn = obj["turn_index"].get<std::int64_t>();
            if (turn < 0)
                throw Error(ErrorCode::SchemaError, "turn_index must be nonnegative");
            key.turn_index = static_cast<std::size_t>(turn);
            if (reference) {
                auto it = lengths.find(key.dialogue_id);
                if (it == lengths.end())
                    throw Error(ErrorCode::KeyMismatch,
                                "dialogue '" + key.dialogue_id + "' not in reference corpus");
                if (key.turn_index >= it->second)
                    throw Error(ErrorCode::KeyMismatch,
                                "turn_index " + std::to_string(key.turn_index) +
                                    " out of range for '" + key.dialogue_id + "'");
            }
            IntentSet intents;
            for (const auto& v : obj["intents"])
                intents.insert(reg.resolve(v.get<std::string>()));
            if (!pred.turns.emplace(std::move(key), std::move(intents)).second)
                throw Error(ErrorCode::SchemaError, "duplicate prediction row");
        } catch (const Error& e) {
            if (e.line() != 0) throw;
            throw Error(e.code(), e.message(), lineno);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::SchemaError, e.what(), lineno);
        }
    }
    return pred;
}

PredictionSet load_predictions_file(const std::string& path, const OntologyRegistry& reg,
                                    const Corpus* reference) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open prediction file '" + path + "'");
    return load_predictions(in, reg, reference);
}

void write_predictions(std::ostream& out, const PredictionSet& pred) {
    for (const auto& [key, intents] : pred.turns) {
        json row;
        row["predictor"] = pred.predictor_id;
        row["dialogue_id"] = key.dialogue_id;
        row["turn_index"] = key.turn_index;
        std::vector<std::string> ids;
        ids.reserve(intents.size());
        for (const auto& id : intents) ids.push_back(id.canonical());
        row["intents"] = ids;
        out << row.dump() << '\n';
    }
}

namespace {

void require_aligned(const std::vector<PredictionSet>& preds) {
    if (preds.size() < 2)
        throw Error(ErrorCode::KeyMismatch, "need at least two prediction sets");
    for (std::size_t i = 1; i < preds.size(); ++i) {
        if (preds[i].turns.size() != preds[0].turns.size())
            throw Error(ErrorCode::KeyMismatch,
                        "'" + preds[i].predictor_id + "' covers " +
                            std::to_string(preds[i].turns.size()) + " turns, '" +
                            preds[0].predictor_id + "' covers " +
                            std::to_string(preds[0].turns.size()));
        auto a = preds[0].turns.begin();
        auto b = preds[i].turns.begin();
        for (; a != preds[0].turns.end(); ++a, ++b)
            if (a->first != b->first)
                throw Error(ErrorCode::KeyMismatch,
                            "'" + preds[i].predictor_id + "' and '" +
                                preds[0].predictor_id + "' disagree on turn keys");
    }
}

std::string joined_ids(const std::vector<PredictionSet>& preds) {
    std::string out;
    for (const auto& p : preds) {
        if (!out.empty()) out += '+';
        out += p.predictor_id;
    }
    return out;
}

} // namespace

PredictionSet fuse_recall(const std::vector<PredictionSet>& preds) {
    require_aligned(preds);
    PredictionSet fused;
    fused.predictor_id = "recall(" + joined_ids(preds) + ")";
    for (const auto& [key, intents] : preds[0].turns) {
        IntentSet merged = intents;
        for (std::size_t i = 1; i < preds.size(); ++i) {
            const auto& other = preds[i].turns.at(key);
            merged.insert(other.begin(), other.end());
        }
        fused.turns.emplace(key, std::move(merged));
    }
    return fused;
}

PredictionSet fuse_precision(const std::vector<PredictionSet>& preds,
                             std::size_t threshold) {
    require_aligned(preds);
    if (threshold < 1 || threshold > preds.size())
        throw Error(ErrorCode::BadThreshold,
                    "threshold " + std::to_string(threshold) + " outside 1.." +
                        std::to_string(preds.size()));
    PredictionSet fused;
    fused.predictor_id =
        "vote" + std::to_string(threshold) + "(" + joined_ids(preds) + ")";
    for (const auto& [key, _] : preds[0].turns) {
        std::map<IntentId, std::size_t> votes;
        for (const auto& p : preds)
            for (const auto& id : p.turns.at(key)) ++votes[id];
        IntentSet kept;
        for (const auto& [id, n] : votes)
            if (n >= threshold) kept.insert(id);
        fused.turns.emplace(key, std::move(kept));
    }
    return fused;
}

MultilabelReport evaluate_multilabel(const PredictionSet& pred, const Corpus& gold,
                                     const OntologyRegistry& reg) {
    std::map<std::string, std::size_t> lengths;
    for (const auto& d : gold.dialogues)
        lengths[d.dialogue_id] = d.doctor_turn_count();
    for (const auto& [key, _] : pred.turns) {
        auto it = lengths.find(key.dialogue_id);
        if (it == lengths.end())
            throw Error(ErrorCode::KeyMismatch,
                        "prediction for unknown dialogue '" + key.dialogue_id + "'");
        if (key.turn_index >= it->second)
            throw Error(ErrorCode::KeyMismatch,
                        "prediction for '" + key.dialogue_id + "' turn " +
                            std::to_string(key.turn_index) + " beyond " +
                            std::to_string(it->second) + " doctor turns");
    }

    MultilabelReport report;
    for (const auto& e : reg.leaves()) report.per_label[e.id.canonical()];

    for (const auto& d : gold.dialogues) {
        std::size_t k = 0;
        for (const auto& t : d.turns) {
            if (t.speaker != Speaker::Doctor) continue;
            const std::size_t turn_index = k++;
            if (!t.labeled()) continue; // no gold labels to score against
            ++report.turns_evaluated;
            static const IntentSet kEmpty;
            auto it = pred.turns.find(TurnKey{d.dialogue_id, turn_index});
            const IntentSet& p = it != pred.turns.end() ? it->second : kEmpty;
            const IntentSet& g = *t.intents;
            for (const auto& id : g) {
                auto& counts = report.per_label[id.canonical()];
                ++counts.support;
                if (p.count(id))
                    ++counts.tp;
                else
                    ++counts.fn;
            }
            for (const auto& id : p)
                if (!g.count(id)) ++report.per_label[id.canonical()].fp;
        }
    }

    auto ratio = [](double num, double den) { return den > 0 ? num / den : 0.0; };
    auto f1_of = [&](double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; };

    std::int64_t tp = 0, fp = 0, fn = 0, total_support = 0;
    double macro_p = 0, macro_r = 0, macro_f = 0;
    double weighted_p = 0, weighted_r = 0, weighted_f = 0;
    for (const auto& [_, c] : report.per_label) {
        tp += c.tp;
        fp += c.fp;
        fn += c.fn;
        total_support += c.support;
        const double p = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
        const double r = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
        const double f = f1_of(p, r);
        macro_p += p;
        macro_r += r;
        macro_f += f;
        weighted_p += static_cast<double>(c.support) * p;
        weighted_r += static_cast<double>(c.support) * r;
        weighted_f += static_cast<double>(c.support) * f;
    }
    const double labels = static_cast<double>(report.per_label.size());
    report.micro_precision = ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
    report.micro_recall = ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
    report.micro_f1 = f1_of(report.micro_precision, report.micro_recall);
    report.macro_precision = labels > 0 ? macro_p / labels : 0.0;
    report.macro_recall = labels > 0 ? macro_r / labels : 0.0;
    report.macro_f1 = labels > 0 ? macro_f / labels : 0.0;
    const double support = static_cast<double>(total_support);
    report.weighted_precision = support > 0 ? weighted_p / support : 0.0;
    report.weighted_recall = support > 0 ? weighted_r / support : 0.0;
    report.weighted_f1 = support > 0 ? weighted_f / support : 0.0;
    return report;
}

} // namespace seo
