#include "seo/policy.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace seo {

using nlohmann::json;

namespace {

std::vector<double> normalized(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) total += w;
    std::vector<double> out(weights.size());
    if (total > 0) {
        for (std::size_t i = 0; i < weights.size(); ++i) out[i] = weights[i] / total;
    } else if (!weights.empty()) {
        const double u = 1.0 / static_cast<double>(weights.size());
        for (auto& v : out) v = u;
    }
    return out;
}

} // namespace

DialoguePhase phase_of(std::size_t turn, std::size_t horizon) {
    if (horizon == 0) return DialoguePhase::Body;
    const double f = static_cast<double>(turn) / static_cast<double>(horizon);
    if (f < 1.0 / 3.0) return DialoguePhase::Opening;
    if (f < 2.0 / 3.0) return DialoguePhase::Body;
    return DialoguePhase::Closing;
}

void PolicyModel::validate() const {
    if (topics.empty() || initial.size() != topics.size() ||
        transition.size() != topics.size())
        throw Error(ErrorCode::BadThreshold, "policy dimensions do not match topics");
    auto check_row = [&](const std::vector<double>& row, const char* what) {
        if (row.size() != topics.size())
            throw Error(ErrorCode::BadThreshold, std::string(what) + ": wrong length");
        double sum = 0;
        for (double v : row) {
            if (v < 0 || v > 1)
                throw Error(ErrorCode::BadThreshold,
                            std::string(what) + ": probability outside [0,1]");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw Error(ErrorCode::BadThreshold,
                        std::string(what) + ": row sums to " + std::to_string(sum));
    };
    check_row(initial, "initial distribution");
    for (const auto& row : transition) check_row(row, "transition row");
    for (const auto& rates : empathy_rates)
        for (const auto& [_, p] : rates)
            if (p < 0 || p > 1)
                throw Error(ErrorCode::BadThreshold, "empathy rate outside [0,1]");
    if (min_coverage < 0 || min_coverage > 1)
        throw Error(ErrorCode::BadThreshold, "min_coverage outside [0,1]");
    if (repeat_prob < 0 || repeat_prob > 1)
        throw Error(ErrorCode::BadThreshold, "repeat_prob outside [0,1]");
    if (max_turns < 1)
        throw Error(ErrorCode::BadThreshold, "max_turns must be >= 1");
}

PolicyModel estimate_policy(const Corpus& corpus, const OntologyRegistry& reg,
                            double smoothing) {
    if (corpus.dialogues.empty())
        throw Error(ErrorCode::EmptyCorpus, "no dialogues");
    if (smoothing < 0)
        throw Error(ErrorCode::BadThreshold, "smoothing must be >= 0");

    PolicyModel policy;
    policy.topics = reg.core_symptom_groups();
    const std::size_t n = policy.topics.size();

    const TransitionCounts counts = estimate_transition_counts(corpus, reg);
    policy.transition.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(n);
        for (std::size_t j = 0; j < n; ++j)
            row[j] = static_cast<double>(counts.topic_counts[i][j]) + smoothing;
        policy.transition[i] = normalized(row);
    }

    std::vector<double> first(n, smoothing);
    std::array<std::map<std::string, double>, 3> strategy_turns;
    std::array<double, 3> phase_turns = {0, 0, 0};
    std::vector<std::string> es_ids;
    for (const auto& id : reg.empathy_set()) es_ids.push_back(id.canonical());

    for (const auto& d : corpus.dialogues) {
        const std::size_t L = d.doctor_turn_count();
        std::size_t k = 0;
        bool counted_first = false;
        for (const auto& t : d.turns) {
            if (t.speaker != Speaker::Doctor) continue;
            const std::size_t turn_index = k++;
            if (!t.labeled()) continue;
            if (!counted_first) {
                std::set<std::string> topics;
                for (const auto& id : *t.intents)
                    if (id.aspect == Aspect::Tod) topics.insert(id.group);
                if (!topics.empty()) {
                    for (const auto& g : topics)
                        first[static_cast<std::size_t>(reg.group_index(g))] += 1.0;
                    counted_first = true;
                }
            }
            const auto phase = static_cast<std::size_t>(phase_of(turn_index, L));
            phase_turns[phase] += 1.0;
            for (const auto& id : reg.empathy_set())
                if (t.intents->count(id)) strategy_turns[phase][id.canonical()] += 1.0;
        }
    }
    policy.initial = normalized(first);
    for (std::size_t p = 0; p < 3; ++p)
        for (const auto& es : es_ids)
            policy.empathy_rates[p][es] =
                phase_turns[p] > 0 ? strategy_turns[p][es] / phase_turns[p] : 0.0;

    policy.validate();
    return policy;
}

PolicyModel PolicyModel::load_file(const std::string& path, const OntologyRegistry& reg) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open policy file '" + path + "'");
    json obj;
    try {
        obj = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SyntaxError,
                    "byte " + std::to_string(e.byte) + ": invalid JSON in '" + path + "'");
    }
    PolicyModel policy;
    try {
        policy.topics = obj.at("topics").get<std::vector<std::string>>();
        policy.initial = obj.at("initial").get<std::vector<double>>();
        policy.transition = obj.at("transition").get<std::vector<std::vector<double>>>();
        const char* phases[3] = {"opening", "body", "closing"};
        for (std::size_t p = 0; p < 3; ++p)
            if (obj.at("empathy_rates").contains(phases[p]))
                for (const auto& item : obj["empathy_rates"][phases[p]].items()) {
                    reg.resolve(item.key()); // must name a known intent
                    policy.empathy_rates[p][item.key()] = item.value().get<double>();
                }
        if (obj.contains("min_coverage"))
            policy.min_coverage = obj["min_coverage"].get<double>();
        if (obj.contains("max_turns"))
            policy.max_turns = obj["max_turns"].get<std::size_t>();
        if (obj.contains("repeat_prob"))
            policy.repeat_prob = obj["repeat_prob"].get<double>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("policy file: ") + e.what());
    }
    policy.validate();
    return policy;
}

void PolicyModel::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write policy file '" + path + "'");
    json obj;
    obj["topics"] = topics;
    obj["initial"] = initial;
    obj["transition"] = transition;
    const char* phases[3] = {"opening", "body", "closing"};
    for (std::size_t p = 0; p < 3; ++p) {
        json rates = json::object();
        for (const auto& [id, rate] : empathy_rates[p]) rates[id] = rate;
        obj["empathy_rates"][phases[p]] = std::move(rates);
    }
    obj["min_coverage"] = min_coverage;
    obj["max_turns"] = max_turns;
    obj["repeat_prob"] = repeat_prob;
    out << obj.dump(2) << '\n';
}

} // namespace seo
