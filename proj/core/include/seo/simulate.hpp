#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "seo/corpus.hpp"
#include "seo/policy.hpp"
#include "seo/risk.hpp"
#include "seo/state.hpp"

namespace seo {

/// Scripted patient: full ground-truth state (no unknown slots), a risk
/// label, and the rapport dynamics driving disclosure.
struct PatientProfile {
    std::string profile_id;
    DialogueState truth;
    RiskLabel risk = RiskLabel::None;
    double rapport = 0.3;          // disclosure probability, clamped to [0,1]
    double disclosure_gain = 0.1;  // rapport added per empathy turn

    void validate(const OntologyRegistry& reg) const; // throws SchemaError
};

/// Per-leaf doctor question text plus patient reply forms. Placeholders
/// {display}, {leaf} and {group} are substituted at render time.
struct ResponseTemplates {
    std::map<std::string, std::string> leaf_text; // canonical id -> text
    std::string patient_present = "Yes. {display} has been troubling me.";
    std::string patient_absent = "No, nothing like that with {display}.";
    std::string patient_silent = "I would rather not go into that.";
    std::string opening = "Hello, thank you for coming in. Let us talk a little.";
    std::string closing = "Thank you for sharing all of this. We will follow up soon.";

    static ResponseTemplates builtin(const OntologyRegistry& reg);
    /// Builtin table overlaid with the file's entries.
    static ResponseTemplates load_file(const std::string& path,
                                       const OntologyRegistry& reg);
    void require_complete(const OntologyRegistry& reg) const; // MissingTemplate
};

/// Drive one policy/patient session. Alternating doctor/patient records,
/// fully reproducible per seed; the result parses and validates against the
/// corpus schema.
Dialogue simulate(const PolicyModel& policy, const PatientProfile& profile,
                  std::uint64_t seed, const ResponseTemplates& templates,
                  const OntologyRegistry& reg);

/// Random ground-truth profiles; risk labels come from the rule table.
std::vector<PatientProfile> sample_profiles(std::size_t count, std::uint64_t seed,
                                            const OntologyRegistry& reg,
                                            const RiskRuleTable& rules = {});

/// Rows: {"profile_id": str, "truth": {leaf: "present|absent"}, "risk"?,
/// "rapport"?, "disclosure_gain"?}. Truth must cover every slot.
std::vector<PatientProfile> load_profiles_file(const std::string& path,
                                               const OntologyRegistry& reg);

} // namespace seo
