#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "seo/error.hpp"

namespace seo {

// Enumerator order matches canonical-string order ("chitchat" < "tod") so
// that ordered IntentId containers iterate in canonical-id order.
enum class Aspect { Chitchat, Tod };

const char* aspect_name(Aspect a);

/// One node of the 3-level intent hierarchy, identified by its
/// (aspect, group, leaf) triple. Canonical text form is
/// "aspect.group.leaf" in lower snake case.
struct IntentId {
    Aspect aspect = Aspect::Tod;
    std::string group;
    std::string leaf;

    std::string canonical() const;

    friend bool operator==(const IntentId&, const IntentId&) = default;
    friend auto operator<=>(const IntentId& a, const IntentId& b) {
        if (auto c = a.aspect <=> b.aspect; c != 0) return c;
        if (auto c = a.group <=> b.group; c != 0) return c;
        return a.leaf <=> b.leaf;
    }
};

using IntentSet = std::set<IntentId>;

struct LeafEntry {
    IntentId id;
    std::string display_name;
    std::string remark;
    std::optional<std::int64_t> occurrence;
    // Position among TOD leaves in canonical-id order; -1 for chit-chat.
    int slot_index = -1;
};

/// The SEO intent registry: 38 symptom leaves under 10 core-symptom groups
/// plus 7 chit-chat leaves under 4 strategy groups. Immutable after load;
/// share freely across threads.
class OntologyRegistry {
  public:
    /// The built-in SEO table.
    static OntologyRegistry builtin();

    /// Built-in table with override records applied. Each override line either
    /// replaces the metadata of an existing leaf or (with `custom` set) adds a
    /// new leaf under one of the 14 groups. Line format:
    ///   canonical_id<TAB>display_name<TAB>remark<TAB>occurrence(optional)
    /// '#' starts a comment line.
    static OntologyRegistry load(std::istream& override_doc, bool custom = false);
    static OntologyRegistry load_file(const std::string& path, bool custom = false);

    /// Exact match on canonical form after ASCII case folding.
    /// Throws UnknownIntent if absent.
    IntentId resolve(const std::string& text) const;

    bool contains(const IntentId& id) const;
    const LeafEntry& entry(const IntentId& id) const;

    /// Topic function T(.): the core-symptom group of a TOD intent.
    /// Throws NotASymptom for chit-chat intents.
    const std::string& core_symptom_of(const IntentId& id) const;

    /// All leaves in canonical-id order.
    const std::vector<LeafEntry>& leaves() const { return leaves_; }

    std::size_t tod_leaf_count() const { return tod_count_; }
    std::size_t chitchat_leaf_count() const { return leaves_.size() - tod_count_; }

    /// TOD leaves double as dialogue-state slots, indexed 0..tod_leaf_count()-1
    /// in canonical-id order.
    int slot_index(const IntentId& id) const; // throws UnknownSlot
    const IntentId& slot_id(int index) const; // throws UnknownSlot

    /// Core-symptom groups in the paper's listing order (cause .. screening)
    /// followed by any custom additions.
    const std::vector<std::string>& core_symptom_groups() const { return tod_groups_; }
    const std::vector<std::string>& chitchat_groups() const { return chitchat_groups_; }
    int group_index(const std::string& group) const; // throws UnknownGroup
    const std::set<std::string>& group_leaves(const std::string& group) const;

    /// Empathy-strategy set ES used by the empathy response ratio.
    const IntentSet& empathy_set() const { return empathy_set_; }

    std::int64_t occurrence_sum(Aspect a) const;

    friend bool operator==(const OntologyRegistry&, const OntologyRegistry&);

  private:
    OntologyRegistry() = default;
    void index();
    void validate(bool custom) const;

    std::vector<LeafEntry> leaves_; // canonical-id order
    std::size_t tod_count_ = 0;
    std::map<std::string, std::size_t> by_canonical_;
    std::vector<std::string> tod_groups_;
    std::vector<std::string> chitchat_groups_;
    std::map<std::string, std::set<std::string>> group_leaves_;
    IntentSet empathy_set_;
};

} // namespace seo
