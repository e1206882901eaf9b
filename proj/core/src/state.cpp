#include "seo/state.hpp"

namespace seo {

const char* ternary_name(Ternary v) {
    switch (v) {
        case Ternary::Unknown: return "unknown";
        case Ternary::Present: return "present";
        case Ternary::Absent: return "absent";
    }
    return "unknown";
}

Ternary parse_ternary(const std::string& text) {
    if (text == "unknown") return Ternary::Unknown;
    if (text == "present") return Ternary::Present;
    if (text == "absent") return Ternary::Absent;
    throw Error(ErrorCode::SchemaError,
                "slot value must be present|absent|unknown, got '" + text + "'");
}

Ternary DialogueState::value(int slot) const {
    if (slot < 0 || static_cast<std::size_t>(slot) >= slots_.size())
        throw Error(ErrorCode::UnknownSlot, "slot index " + std::to_string(slot));
    return slots_[static_cast<std::size_t>(slot)];
}

void DialogueState::set(int slot, Ternary v) {
    if (slot < 0 || static_cast<std::size_t>(slot) >= slots_.size())
        throw Error(ErrorCode::UnknownSlot, "slot index " + std::to_string(slot));
    slots_[static_cast<std::size_t>(slot)] = v;
}

std::map<std::string, Ternary> DialogueState::known_slots(const OntologyRegistry& reg) const {
    std::map<std::string, Ternary> out;
    for (std::size_t i = 0; i < slots_.size(); ++i)
        if (slots_[i] != Ternary::Unknown)
            out.emplace(reg.slot_id(static_cast<int>(i)).canonical(), slots_[i]);
    return out;
}

StateDelta StateDelta::from_slot_map(const OntologyRegistry& reg,
                                     const std::map<std::string, std::string>& slots) {
    StateDelta d;
    for (const auto& [key, value] : slots) {
        const IntentId id = reg.resolve(key);
        d.assign(reg.slot_index(id), parse_ternary(value));
    }
    return d;
}

std::map<std::string, std::string> StateDelta::to_slot_map(const OntologyRegistry& reg) const {
    std::map<std::string, std::string> out;
    for (const auto& [slot, value] : assignments_)
        out.emplace(reg.slot_id(slot).canonical(), ternary_name(value));
    return out;
}

DialogueState apply_delta(const DialogueState& state, const StateDelta& delta) {
    DialogueState next = state;
    for (const auto& [slot, value] : delta.assignments())
        next.set(slot, value);
    return next;
}

StateDelta diff_states(const DialogueState& curr, const DialogueState& prev) {
    if (curr.size() != prev.size())
        throw Error(ErrorCode::LengthMismatch,
                    "states have " + std::to_string(curr.size()) + " and " +
                        std::to_string(prev.size()) + " slots");
    StateDelta d;
    for (int i = 0; i < static_cast<int>(curr.size()); ++i)
        if (curr.value(i) != prev.value(i)) d.assign(i, curr.value(i));
    return d;
}

} // namespace seo
