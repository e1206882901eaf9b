#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "seo/error.hpp"
#include "seo/ontology.hpp"

namespace seo {

/// Slot value domain. "absent" means the patient denied the symptom;
/// "unknown" means it has not been established either way.
enum class Ternary { Unknown, Present, Absent };

const char* ternary_name(Ternary v);
Ternary parse_ternary(const std::string& text); // throws SchemaError

/// Full assignment over the symptom slots (all 38 for the standard registry),
/// indexed by OntologyRegistry::slot_index order.
class DialogueState {
  public:
    DialogueState() = default;
    explicit DialogueState(std::size_t slot_count)
        : slots_(slot_count, Ternary::Unknown) {}
    static DialogueState all_unknown(const OntologyRegistry& reg) {
        return DialogueState(reg.tod_leaf_count());
    }

    std::size_t size() const { return slots_.size(); }
    Ternary value(int slot) const;
    void set(int slot, Ternary v);

    /// Known (non-unknown) slots rendered through the registry.
    std::map<std::string, Ternary> known_slots(const OntologyRegistry& reg) const;

    friend bool operator==(const DialogueState&, const DialogueState&) = default;

  private:
    std::vector<Ternary> slots_;
};

/// Sparse per-turn change set: only reassigned slots are listed.
/// Entries are ordered by slot index, which is canonical-id order.
class StateDelta {
  public:
    StateDelta() = default;

    bool empty() const { return assignments_.empty(); }
    std::size_t size() const { return assignments_.size(); }
    void assign(int slot, Ternary v) { assignments_[slot] = v; }
    bool has(int slot) const { return assignments_.count(slot) != 0; }

    const std::map<int, Ternary>& assignments() const { return assignments_; }

    /// Parse from {"<tod-leaf-id>": "present|absent|unknown"} entries.
    static StateDelta from_slot_map(const OntologyRegistry& reg,
                                    const std::map<std::string, std::string>& slots);
    std::map<std::string, std::string> to_slot_map(const OntologyRegistry& reg) const;

    friend bool operator==(const StateDelta&, const StateDelta&) = default;

  private:
    std::map<int, Ternary> assignments_;
};

/// Overwrite `state` with the delta's assignments; the input is untouched.
DialogueState apply_delta(const DialogueState& state, const StateDelta& delta);

/// Minimal delta taking prev to curr: exactly the slots where they differ.
StateDelta diff_states(const DialogueState& curr, const DialogueState& prev);

} // namespace seo
