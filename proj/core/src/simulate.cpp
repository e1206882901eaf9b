#include "seo/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

namespace seo {

using nlohmann::json;

namespace {

// Hand-rolled draws over mt19937_64: std::*_distribution output is
// implementation-defined, which would break the byte-identical contract.
class SimRng {
  public:
    explicit SimRng(std::uint64_t seed) : eng_(seed) {}

    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    bool bernoulli(double p) { return uniform01() < p; }

    std::size_t uniform_index(std::size_t n) {
        const auto i = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
        return std::min(i, n - 1);
    }

    std::size_t categorical(const std::vector<double>& weights) {
        double total = 0;
        for (double w : weights) total += w;
        double u = uniform01() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            u -= weights[i];
            if (u <= 0) return i;
        }
        return weights.size() - 1;
    }

  private:
    std::mt19937_64 eng_;
};

std::string replace_all(std::string text, const std::string& key,
                        const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string::npos) {
        text.replace(pos, key.size(), value);
        pos += value.size();
    }
    return text;
}

std::string render(const std::string& tmpl, const LeafEntry& entry) {
    std::string out = replace_all(tmpl, "{display}", entry.display_name);
    out = replace_all(out, "{leaf}", entry.id.leaf);
    return replace_all(out, "{group}", entry.id.group);
}

struct BuiltinText {
    const char* id;
    const char* text;
};

constexpr BuiltinText kDoctorText[] = {
    {"tod.cause.cause", "What brings you in today? Did something happen recently?"},
    {"tod.mood.whether", "Have you been feeling down or in a low mood lately?"},
    {"tod.mood.duration", "How long has this low mood been going on?"},
    {"tod.mood.morning_depression", "Do you feel worse at a particular time of day, say mornings?"},
    {"tod.interest.whether", "Have you lost interest in things you used to enjoy?"},
    {"tod.interest.duration", "How long has this loss of interest lasted?"},
    {"tod.interest.range", "Is it only certain hobbies, or most things in life?"},
    {"tod.interest.indifferent", "Do you feel emotionally flat, as if nothing touches you?"},
    {"tod.social_function.life_affair", "Are you managing day-to-day affairs as usual?"},
    {"tod.social_function.study_work", "How are things going with study or work?"},
    {"tod.social_function.social_contact", "Do you stay in touch with family or friends?"},
    {"tod.social_function.social_interact", "Do you find yourself avoiding social situations?"},
    {"tod.mental_status.decreased_concentration", "Is it harder to concentrate than before?"},
    {"tod.mental_status.memory_loss", "Have you noticed your memory slipping?"},
    {"tod.mental_status.tired", "Do you feel tired or drained most of the day?"},
    {"tod.mental_status.difficulty_in_decision", "Do you struggle to make decisions lately?"},
    {"tod.mental_status.decline_in_self_confidence", "How is your confidence in yourself these days?"},
    {"tod.sleep.whether", "How has your sleep been recently?"},
    {"tod.sleep.difficulty_in_falling_sleep", "Do you have trouble falling asleep?"},
    {"tod.sleep.light_sleep", "Is your sleep light, waking at the slightest thing?"},
    {"tod.sleep.wake_up_early", "Do you wake up much earlier than you intend?"},
    {"tod.sleep.sleep_too_short", "Are you getting fewer hours of sleep than you need?"},
    {"tod.sleep.dream", "Do vivid dreams disturb your rest?"},
    {"tod.appetite.whether", "How is your appetite these days?"},
    {"tod.appetite.loss_of_appetite", "Have you been eating less than usual?"},
    {"tod.appetite.overeating", "Do you find yourself eating more than usual?"},
    {"tod.appetite.significant_weight_change", "Has your weight changed noticeably?"},
    {"tod.somatic_symptoms.psychomotor_agitation", "Do you feel restless or unusually worked up?"},
    {"tod.somatic_symptoms.psychomotor_retardation", "Do you feel slowed down in speech or movement?"},
    {"tod.somatic_symptoms.physical_discomfort", "Any physical discomfort, like headaches or chest tightness?"},
    {"tod.suicide.self_harm_tendency", "Have you had thoughts of hurting yourself?"},
    {"tod.suicide.suicidal_tendency", "Have thoughts of ending your life crossed your mind?"},
    {"tod.suicide.suicidal_behavior", "Have you ever acted on such thoughts?"},
    {"tod.suicide.hopelessness", "Do you feel hopeless about the future?"},
    {"tod.suicide.guilt", "Do you blame yourself or feel guilty often?"},
    {"tod.suicide.low_self_worth", "Do you feel worthless or not good enough?"},
    {"tod.screening.mania", "Are there times you feel unusually irritable or high-energy?"},
    {"tod.screening.genetic", "Does anyone in your family have a history of mental illness?"},
    {"chitchat.starting_ending.starting_ending", "Hello, thank you for coming in."},
    {"chitchat.give_information.question", "Could you tell me a little about yourself first?"},
    {"chitchat.give_information.restatement", "So, as I understand it, things have been difficult for a while."},
    {"chitchat.show_empathy.reflection", "That sounds really hard; it makes sense that you feel this way."},
    {"chitchat.show_empathy.self_disclosure", "I have sat with many people carrying something similar."},
    {"chitchat.show_empathy.affirmation", "It took courage to talk about this, and you are doing well."},
    {"chitchat.seek_help.provide_suggestions", "It might help to keep a small daily routine and stay connected."},
};

} // namespace

void PatientProfile::validate(const OntologyRegistry& reg) const {
    if (truth.size() != reg.tod_leaf_count())
        throw Error(ErrorCode::SchemaError,
                    "profile '" + profile_id + "' truth covers " +
                        std::to_string(truth.size()) + " slots, expected " +
                        std::to_string(reg.tod_leaf_count()));
    for (int s = 0; s < static_cast<int>(truth.size()); ++s)
        if (truth.value(s) == Ternary::Unknown)
            throw Error(ErrorCode::SchemaError,
                        "profile '" + profile_id + "' leaves slot '" +
                            reg.slot_id(s).canonical() + "' unknown");
    if (rapport < 0 || rapport > 1 || disclosure_gain < 0)
        throw Error(ErrorCode::SchemaError,
                    "profile '" + profile_id + "' has rapport outside [0,1] or negative gain");
}

ResponseTemplates ResponseTemplates::builtin(const OntologyRegistry& reg) {
    ResponseTemplates t;
    for (const auto& row : kDoctorText) t.leaf_text[row.id] = row.text;
    (void)reg;
    return t;
}

ResponseTemplates ResponseTemplates::load_file(const std::string& path,
                                               const OntologyRegistry& reg) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open template file '" + path + "'");
    json obj;
    try {
        obj = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SyntaxError,
                    "byte " + std::to_string(e.byte) + ": invalid JSON in '" + path + "'");
    }
    ResponseTemplates t = builtin(reg);
    try {
        if (obj.contains("leaves"))
            for (const auto& item : obj["leaves"].items()) {
                reg.resolve(item.key());
                t.leaf_text[item.key()] = item.value().get<std::string>();
            }
        if (obj.contains("patient")) {
            const json& p = obj["patient"];
            if (p.contains("present")) t.patient_present = p["present"].get<std::string>();
            if (p.contains("absent")) t.patient_absent = p["absent"].get<std::string>();
            if (p.contains("silent")) t.patient_silent = p["silent"].get<std::string>();
        }
        if (obj.contains("opening")) t.opening = obj["opening"].get<std::string>();
        if (obj.contains("closing")) t.closing = obj["closing"].get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("template file: ") + e.what());
    }
    return t;
}

void ResponseTemplates::require_complete(const OntologyRegistry& reg) const {
    for (const auto& e : reg.leaves())
        if (!leaf_text.count(e.id.canonical()))
            throw Error(ErrorCode::MissingTemplate, "'" + e.id.canonical() + "'");
}

Dialogue simulate(const PolicyModel& policy, const PatientProfile& profile,
                  std::uint64_t seed, const ResponseTemplates& templates,
                  const OntologyRegistry& reg) {
    policy.validate();
    profile.validate(reg);
    templates.require_complete(reg);
    if (policy.topics != reg.core_symptom_groups())
        throw Error(ErrorCode::KeyMismatch, "policy topics do not match the registry");

    SimRng rng(seed);
    Dialogue d;
    d.dialogue_id = "sim-" + profile.profile_id;
    d.risk = profile.risk;

    const IntentId starting_ending =
        reg.resolve("chitchat.starting_ending.starting_ending");
    const std::size_t slot_count = reg.tod_leaf_count();
    const auto needed = static_cast<std::size_t>(
        std::ceil(policy.min_coverage * static_cast<double>(slot_count) - 1e-9));

    // Slots grouped by topic for unasked-leaf sampling.
    std::vector<std::vector<int>> topic_slots(policy.topics.size());
    for (int s = 0; s < static_cast<int>(slot_count); ++s)
        topic_slots[static_cast<std::size_t>(reg.group_index(reg.slot_id(s).group))]
            .push_back(s);

    double rapport = std::clamp(profile.rapport, 0.0, 1.0);
    DialogueState known = DialogueState::all_unknown(reg);
    std::vector<bool> asked(slot_count, false);
    std::size_t asked_count = 0;
    int current_topic = -1;
    int last_slot = -1;
    const std::size_t hard_cap = policy.max_turns * 4 + 64;

    for (std::size_t k = 0;; ++k) {
        if (k > hard_cap)
            throw Error(ErrorCode::NonTerminating,
                        "simulation exceeded " + std::to_string(hard_cap) + " turns");

        auto unasked_in = [&](std::size_t topic) {
            std::vector<int> out;
            for (int s : topic_slots[topic])
                if (!asked[static_cast<std::size_t>(s)]) out.push_back(s);
            return out;
        };
        bool any_unasked = asked_count < slot_count;
        const bool stop =
            asked_count >= needed || k + 1 >= policy.max_turns || !any_unasked;
        if (stop) {
            Turn closing;
            closing.speaker = Speaker::Doctor;
            closing.intents = IntentSet{starting_ending};
            closing.text = templates.closing;
            d.turns.push_back(std::move(closing));
            break;
        }

        int slot = -1;
        bool is_repeat = false;
        if (policy.repeat_prob > 0 && last_slot >= 0 &&
            known.value(last_slot) != Ternary::Unknown &&
            rng.bernoulli(policy.repeat_prob)) {
            slot = last_slot;
            is_repeat = true;
        }
        if (!is_repeat) {
            const std::vector<double>& base =
                current_topic < 0 ? policy.initial
                                  : policy.transition[static_cast<std::size_t>(current_topic)];
            std::vector<double> masked(base.size(), 0.0);
            double mass = 0;
            for (std::size_t t = 0; t < base.size(); ++t)
                if (!unasked_in(t).empty()) {
                    masked[t] = base[t];
                    mass += base[t];
                }
            if (mass <= 0)
                for (std::size_t t = 0; t < base.size(); ++t)
                    if (!unasked_in(t).empty()) masked[t] = 1.0;
            const std::size_t topic = rng.categorical(masked);
            current_topic = static_cast<int>(topic);
            const auto candidates = unasked_in(topic);
            slot = candidates[rng.uniform_index(candidates.size())];
        }

        const LeafEntry& leaf = reg.entry(reg.slot_id(slot));
        IntentSet intents;
        intents.insert(leaf.id);
        if (k == 0) intents.insert(starting_ending);
        const auto phase = static_cast<std::size_t>(phase_of(k, policy.max_turns));
        for (const auto& [es_id, p] : policy.empathy_rates[phase])
            if (rng.bernoulli(p)) intents.insert(reg.resolve(es_id));

        std::string text;
        if (k == 0) text = templates.opening;
        for (const auto& id : intents) {
            if (id.aspect != Aspect::Chitchat || id == starting_ending) continue;
            if (!text.empty()) text += ' ';
            text += render(templates.leaf_text.at(id.canonical()), reg.entry(id));
        }
        if (!text.empty()) text += ' ';
        text += render(templates.leaf_text.at(leaf.id.canonical()), leaf);

        Turn doctor;
        doctor.speaker = Speaker::Doctor;
        doctor.intents = intents;
        doctor.text = std::move(text);
        d.turns.push_back(std::move(doctor));

        if (!asked[static_cast<std::size_t>(slot)]) {
            asked[static_cast<std::size_t>(slot)] = true;
            ++asked_count;
        }
        last_slot = slot;

        bool empathic = false;
        for (const auto& id : intents)
            if (reg.empathy_set().count(id)) empathic = true;
        if (empathic)
            rapport = std::clamp(rapport + profile.disclosure_gain, 0.0, 1.0);

        Turn patient;
        patient.speaker = Speaker::Patient;
        if (rng.bernoulli(rapport)) {
            const Ternary value = profile.truth.value(slot);
            patient.state_delta.assign(slot, value);
            known.set(slot, value);
            patient.text = render(
                value == Ternary::Present ? templates.patient_present
                                          : templates.patient_absent,
                leaf);
        } else {
            patient.text = render(templates.patient_silent, leaf);
        }
        d.turns.push_back(std::move(patient));
    }
    return d;
}

std::vector<PatientProfile> sample_profiles(std::size_t count, std::uint64_t seed,
                                            const OntologyRegistry& reg,
                                            const RiskRuleTable& rules) {
    SimRng rng(seed);
    std::vector<PatientProfile> profiles;
    profiles.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        PatientProfile p;
        char id[16];
        std::snprintf(id, sizeof id, "p%04zu", i);
        p.profile_id = id;
        p.truth = DialogueState::all_unknown(reg);
        const double base = 0.05 + 0.65 * rng.uniform01();
        for (int s = 0; s < static_cast<int>(reg.tod_leaf_count()); ++s)
            p.truth.set(s, rng.bernoulli(base) ? Ternary::Present : Ternary::Absent);
        p.risk = score_risk(p.truth, reg, rules);
        profiles.push_back(std::move(p));
    }
    return profiles;
}

std::vector<PatientProfile> load_profiles_file(const std::string& path,
                                               const OntologyRegistry& reg) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open profiles file '" + path + "'");
    std::vector<PatientProfile> profiles;
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
            PatientProfile p;
            p.profile_id = obj.at("profile_id").get<std::string>();
            p.truth = DialogueState::all_unknown(reg);
            for (const auto& item : obj.at("truth").items()) {
                const int slot = reg.slot_index(reg.resolve(item.key()));
                p.truth.set(slot, parse_ternary(item.value().get<std::string>()));
            }
            if (obj.contains("rapport")) p.rapport = obj["rapport"].get<double>();
            if (obj.contains("disclosure_gain"))
                p.disclosure_gain = obj["disclosure_gain"].get<double>();
            if (obj.contains("risk"))
                p.risk = parse_risk_label(obj["risk"].get<std::string>());
            else
                p.risk = score_risk(p.truth, reg, RiskRuleTable{});
            p.validate(reg);
            profiles.push_back(std::move(p));
        } catch (const Error& e) {
            if (e.line() != 0) throw;
            throw Error(e.code(), e.message(), lineno);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::SchemaError, e.what(), lineno);
        }
    }
    return profiles;
}

} // namespace seo
