#include "seo/ontology.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <istream>
#include <sstream>

namespace seo {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::DuplicateLeaf: return "DuplicateLeaf";
        case ErrorCode::UnknownGroup: return "UnknownGroup";
        case ErrorCode::CountMismatch: return "CountMismatch";
        case ErrorCode::UnknownIntent: return "UnknownIntent";
        case ErrorCode::NotASymptom: return "NotASymptom";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::DuplicateDialogueId: return "DuplicateDialogueId";
        case ErrorCode::EmptyCorpus: return "EmptyCorpus";
        case ErrorCode::UnknownSlot: return "UnknownSlot";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::KeyMismatch: return "KeyMismatch";
        case ErrorCode::BadThreshold: return "BadThreshold";
        case ErrorCode::MalformedLexicon: return "MalformedLexicon";
        case ErrorCode::MissingIntents: return "MissingIntents";
        case ErrorCode::MissingStates: return "MissingStates";
        case ErrorCode::MissingTemplate: return "MissingTemplate";
        case ErrorCode::NonTerminating: return "NonTerminating";
        case ErrorCode::IoError: return "IoError";
    }
    return "Error";
}

const char* aspect_name(Aspect a) {
    return a == Aspect::Tod ? "tod" : "chitchat";
}

// Leaves sorted by canonical id put every chitchat.* entry before every
// tod.* entry, so TOD slot k sits at position chitchat_count + k.

std::string IntentId::canonical() const {
    std::string out = aspect_name(aspect);
    out += '.';
    out += group;
    out += '.';
    out += leaf;
    return out;
}

namespace {

struct BuiltinRow {
    const char* aspect;
    const char* group;
    const char* leaf;
    const char* display;
    const char* remark;
    std::int64_t occurrence;
};

// The SEO table: 38 symptom leaves in 10 core-symptom groups and 7 chit-chat
// leaves in 4 strategy groups. Display names keep the source spellings
// (including "pyschomotor agitation"); canonical ids are lower snake case.
// overeating carries 136 so the per-aspect totals close at 21,412 / 14,157.
constexpr std::array<BuiltinRow, 45> kBuiltinTable = {{
    {"tod", "cause", "cause", "cause", "The primary reason for patients seeking assistance.", 1245},
    {"tod", "mood", "whether", "whether", "Whether patients in a bad mood", 979},
    {"tod", "mood", "duration", "duration", "", 523},
    {"tod", "mood", "morning_depression", "morning depression", "Feel more sad in the morning or at night", 359},
    {"tod", "interest", "whether", "whether", "Does the patient has low interest", 175},
    {"tod", "interest", "duration", "duration", "", 223},
    {"tod", "interest", "range", "range", "Past hobbies or all things.", 1178},
    {"tod", "interest", "indifferent", "indifferent", "Lack of emotional experience.", 320},
    {"tod", "social_function", "life_affair", "life affair", "The function of dealing with life affairs", 397},
    {"tod", "social_function", "study_work", "study & work", "", 507},
    {"tod", "social_function", "social_contact", "social contact", "Whether to contact/talk to family and friends.", 765},
    {"tod", "social_function", "social_interact", "social interact", "Whether patients deliberately avoid social interaction.", 253},
    {"tod", "mental_status", "decreased_concentration", "decreased concentration", "", 267},
    {"tod", "mental_status", "memory_loss", "memory loss", "", 307},
    {"tod", "mental_status", "tired", "tired", "", 987},
    {"tod", "mental_status", "difficulty_in_decision", "difficulty in decision", "", 323},
    {"tod", "mental_status", "decline_in_self_confidence", "decline in self-confidence", "", 852},
    {"tod", "sleep", "whether", "whether", "Does the patient has sleep problems", 1288},
    {"tod", "sleep", "difficulty_in_falling_sleep", "difficulty in falling sleep", "", 469},
    {"tod", "sleep", "light_sleep", "light sleep", "", 413},
    {"tod", "sleep", "wake_up_early", "wake up early", "", 331},
    {"tod", "sleep", "sleep_too_short", "sleep too short", "", 284},
    {"tod", "sleep", "dream", "dream", "", 350},
    {"tod", "appetite", "whether", "whether", "Does the patient has appetite problems", 1258},
    {"tod", "appetite", "loss_of_appetite", "loss of appetite", "", 76},
    {"tod", "appetite", "overeating", "overeating", "", 136},
    {"tod", "appetite", "significant_weight_change", "significant weight change", "", 755},
    {"tod", "somatic_symptoms", "psychomotor_agitation", "pyschomotor agitation", "Excessive excitement and loquacity.", 547},
    {"tod", "somatic_symptoms", "psychomotor_retardation", "psychomotor retardation", "Slow response", 524},
    {"tod", "somatic_symptoms", "physical_discomfort", "physical discomfort", "", 1218},
    {"tod", "suicide", "self_harm_tendency", "self-harm-tendency", "", 549},
    {"tod", "suicide", "suicidal_tendency", "suicidal tendency", "", 492},
    {"tod", "suicide", "suicidal_behavior", "suicidal behavior", "", 305},
    {"tod", "suicide", "hopelessness", "hopelessness", "", 574},
    {"tod", "suicide", "guilt", "guilt", "", 498},
    {"tod", "suicide", "low_self_worth", "low self-worth", "", 506},
    {"tod", "screening", "mania", "mania", "Is it irritable and prone to disputes", 732},
    {"tod", "screening", "genetic", "genetic", "", 447},
    {"chitchat", "starting_ending", "starting_ending", "starting/ending", "", 4302},
    {"chitchat", "give_information", "question", "requiring personal information", "Inquire about personal information of patients", 2309},
    {"chitchat", "give_information", "restatement", "restatement", "", 1776},
    {"chitchat", "show_empathy", "reflection", "reflection", "The doctor demonstrated an understanding of the emotions experienced by the patient.", 1145},
    {"chitchat", "show_empathy", "self_disclosure", "self-disclosure", "The doctor expressed their own emotions and viewpoints.", 55},
    {"chitchat", "show_empathy", "affirmation", "affirmation", "The doctor positively acknowledged and recognized the patient.", 1973},
    {"chitchat", "seek_help", "provide_suggestions", "provide suggestions", "", 2597},
}};

constexpr std::array<const char*, 10> kTodGroups = {
    "cause", "mood", "interest", "social_function", "mental_status",
    "sleep", "appetite", "somatic_symptoms", "suicide", "screening"};

constexpr std::array<const char*, 4> kChitchatGroups = {
    "starting_ending", "give_information", "show_empathy", "seek_help"};

std::string fold_ascii(std::string s) {
    for (char& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

IntentId parse_canonical(const std::string& folded, std::uint64_t line) {
    auto first = folded.find('.');
    auto last = folded.rfind('.');
    if (first == std::string::npos || first == last)
        throw Error(ErrorCode::SyntaxError,
                    "expected aspect.group.leaf, got '" + folded + "'", line);
    IntentId id;
    std::string aspect = folded.substr(0, first);
    if (aspect == "tod")
        id.aspect = Aspect::Tod;
    else if (aspect == "chitchat")
        id.aspect = Aspect::Chitchat;
    else
        throw Error(ErrorCode::SyntaxError, "unknown aspect '" + aspect + "'", line);
    id.group = folded.substr(first + 1, last - first - 1);
    id.leaf = folded.substr(last + 1);
    if (id.group.empty() || id.leaf.empty())
        throw Error(ErrorCode::SyntaxError,
                    "empty group or leaf in '" + folded + "'", line);
    return id;
}

} // namespace

OntologyRegistry OntologyRegistry::builtin() {
    OntologyRegistry reg;
    reg.leaves_.reserve(kBuiltinTable.size());
    for (const auto& row : kBuiltinTable) {
        LeafEntry e;
        e.id.aspect = std::string(row.aspect) == "tod" ? Aspect::Tod : Aspect::Chitchat;
        e.id.group = row.group;
        e.id.leaf = row.leaf;
        e.display_name = row.display;
        e.remark = row.remark;
        e.occurrence = row.occurrence;
        reg.leaves_.push_back(std::move(e));
    }
    reg.index();
    reg.validate(false);
    return reg;
}

OntologyRegistry OntologyRegistry::load(std::istream& override_doc, bool custom) {
    OntologyRegistry reg = builtin();
    std::set<std::string> seen;
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(override_doc, line)) {
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
            throw Error(ErrorCode::SyntaxError,
                        "expected 3 or 4 tab-separated fields, got " +
                            std::to_string(fields.size()),
                        lineno);

        const std::string canonical = fold_ascii(fields[0]);
        IntentId id = parse_canonical(canonical, lineno);
        if (!seen.insert(canonical).second)
            throw Error(ErrorCode::DuplicateLeaf, "'" + canonical + "' listed twice",
                        lineno);
        const auto& groups =
            id.aspect == Aspect::Tod ? reg.tod_groups_ : reg.chitchat_groups_;
        if (std::find(groups.begin(), groups.end(), id.group) == groups.end())
            throw Error(ErrorCode::UnknownGroup,
                        "'" + id.group + "' is not a " +
                            std::string(aspect_name(id.aspect)) + " group",
                        lineno);

        std::optional<std::int64_t> occurrence;
        if (fields.size() == 4 && !fields[3].empty()) {
            try {
                std::size_t pos = 0;
                occurrence = std::stoll(fields[3], &pos);
                if (pos != fields[3].size() || *occurrence < 0)
                    throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw Error(ErrorCode::SyntaxError,
                            "occurrence must be a nonnegative integer, got '" +
                                fields[3] + "'",
                            lineno);
            }
        }

        auto it = reg.by_canonical_.find(canonical);
        if (it != reg.by_canonical_.end()) {
            LeafEntry& e = reg.leaves_[it->second];
            e.display_name = fields[1];
            e.remark = fields[2];
            e.occurrence = occurrence;
        } else {
            if (!custom)
                throw Error(ErrorCode::CountMismatch,
                            "'" + canonical +
                                "' adds a 46th leaf; pass the custom-ontology flag "
                                "to change the leaf count",
                            lineno);
            LeafEntry e;
            e.id = id;
            e.display_name = fields[1];
            e.remark = fields[2];
            e.occurrence = occurrence;
            reg.leaves_.push_back(std::move(e));
        }
    }
    reg.index();
    reg.validate(custom);
    return reg;
}

OntologyRegistry OntologyRegistry::load_file(const std::string& path, bool custom) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open ontology file '" + path + "'");
    return load(in, custom);
}

void OntologyRegistry::index() {
    std::sort(leaves_.begin(), leaves_.end(), [](const LeafEntry& a, const LeafEntry& b) {
        return a.id.canonical() < b.id.canonical();
    });
    by_canonical_.clear();
    group_leaves_.clear();
    tod_count_ = 0;
    for (std::size_t i = 0; i < leaves_.size(); ++i) {
        LeafEntry& e = leaves_[i];
        if (!by_canonical_.emplace(e.id.canonical(), i).second)
            throw Error(ErrorCode::DuplicateLeaf, "'" + e.id.canonical() + "'");
        group_leaves_[e.id.group].insert(e.id.leaf);
        if (e.id.aspect == Aspect::Tod)
            e.slot_index = static_cast<int>(tod_count_++);
        else
            e.slot_index = -1;
    }
    tod_groups_.assign(kTodGroups.begin(), kTodGroups.end());
    chitchat_groups_.assign(kChitchatGroups.begin(), kChitchatGroups.end());

    empathy_set_.clear();
    for (const char* leaf : {"reflection", "self_disclosure", "affirmation"})
        empathy_set_.insert(IntentId{Aspect::Chitchat, "show_empathy", leaf});
    empathy_set_.insert(IntentId{Aspect::Chitchat, "seek_help", "provide_suggestions"});
}

void OntologyRegistry::validate(bool custom) const {
    for (const auto& e : leaves_) {
        const auto& groups = e.id.aspect == Aspect::Tod ? tod_groups_ : chitchat_groups_;
        if (std::find(groups.begin(), groups.end(), e.id.group) == groups.end())
            throw Error(ErrorCode::UnknownGroup, "'" + e.id.group + "'");
    }
    for (const auto& id : empathy_set_)
        if (!contains(id))
            throw Error(ErrorCode::CountMismatch,
                        "empathy strategy '" + id.canonical() + "' missing");
    if (custom) return;
    if (tod_count_ != 38)
        throw Error(ErrorCode::CountMismatch,
                    "expected 38 tod leaves, have " + std::to_string(tod_count_));
    if (leaves_.size() - tod_count_ != 7)
        throw Error(ErrorCode::CountMismatch,
                    "expected 7 chitchat leaves, have " +
                        std::to_string(leaves_.size() - tod_count_));
}

IntentId OntologyRegistry::resolve(const std::string& text) const {
    const std::string folded = fold_ascii(text);
    auto it = by_canonical_.find(folded);
    if (it == by_canonical_.end())
        throw Error(ErrorCode::UnknownIntent, "'" + text + "'");
    return leaves_[it->second].id;
}

bool OntologyRegistry::contains(const IntentId& id) const {
    return by_canonical_.count(id.canonical()) != 0;
}

const LeafEntry& OntologyRegistry::entry(const IntentId& id) const {
    auto it = by_canonical_.find(id.canonical());
    if (it == by_canonical_.end())
        throw Error(ErrorCode::UnknownIntent, "'" + id.canonical() + "'");
    return leaves_[it->second];
}

const std::string& OntologyRegistry::core_symptom_of(const IntentId& id) const {
    if (id.aspect != Aspect::Tod)
        throw Error(ErrorCode::NotASymptom,
                    "'" + id.canonical() + "' is a chit-chat intent");
    return entry(id).id.group;
}

int OntologyRegistry::slot_index(const IntentId& id) const {
    auto it = by_canonical_.find(id.canonical());
    if (it == by_canonical_.end() || leaves_[it->second].slot_index < 0)
        throw Error(ErrorCode::UnknownSlot, "'" + id.canonical() + "' is not a state slot");
    return leaves_[it->second].slot_index;
}

const IntentId& OntologyRegistry::slot_id(int index) const {
    if (index < 0 || static_cast<std::size_t>(index) >= tod_count_)
        throw Error(ErrorCode::UnknownSlot, "slot index " + std::to_string(index));
    const std::size_t chitchat = leaves_.size() - tod_count_;
    return leaves_[chitchat + static_cast<std::size_t>(index)].id;
}

int OntologyRegistry::group_index(const std::string& group) const {
    auto it = std::find(tod_groups_.begin(), tod_groups_.end(), group);
    if (it != tod_groups_.end())
        return static_cast<int>(it - tod_groups_.begin());
    throw Error(ErrorCode::UnknownGroup, "'" + group + "'");
}

const std::set<std::string>& OntologyRegistry::group_leaves(const std::string& group) const {
    auto it = group_leaves_.find(group);
    if (it == group_leaves_.end())
        throw Error(ErrorCode::UnknownGroup, "'" + group + "'");
    return it->second;
}

std::int64_t OntologyRegistry::occurrence_sum(Aspect a) const {
    std::int64_t sum = 0;
    for (const auto& e : leaves_)
        if (e.id.aspect == a && e.occurrence)
            sum += *e.occurrence;
    return sum;
}

bool operator==(const OntologyRegistry& a, const OntologyRegistry& b) {
    auto tie = [](const LeafEntry& e) {
        return std::tie(e.id.aspect, e.id.group, e.id.leaf, e.display_name, e.remark,
                        e.occurrence, e.slot_index);
    };
    if (a.leaves_.size() != b.leaves_.size()) return false;
    for (std::size_t i = 0; i < a.leaves_.size(); ++i)
        if (tie(a.leaves_[i]) != tie(b.leaves_[i])) return false;
    return a.empathy_set_ == b.empathy_set_;
}

} // namespace seo
