#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "seo/corpus.hpp"

namespace seo {

enum class DialoguePhase { Opening, Body, Closing };

/// Thirds of the doctor-turn horizon; `turn` is 0-based.
DialoguePhase phase_of(std::size_t turn, std::size_t horizon);

/// Estimated psychiatrist questioning policy: where to start, how topics
/// move, and how often each empathy strategy shows up per dialogue phase
/// (thirds of the doctor-turn horizon).
struct PolicyModel {
    std::vector<std::string> topics;             // 10 core-symptom groups
    std::vector<double> initial;                 // sums to 1
    std::vector<std::vector<double>> transition; // row-stochastic
    // phase -> empathy-strategy canonical id -> inclusion probability
    std::array<std::map<std::string, double>, 3> empathy_rates;

    double min_coverage = 0.6; // asked-slot fraction that ends the interview
    std::size_t max_turns = 30;
    double repeat_prob = 0.0;  // chance of re-asking the last answered slot

    void validate() const; // throws BadThreshold on malformed distributions

    static PolicyModel load_file(const std::string& path, const OntologyRegistry& reg);
    void save_file(const std::string& path) const;
};

/// Laplace-smoothed row normalization of the corpus transition counts,
/// empirical first-turn topic frequencies, and per-phase empathy rates.
/// Rows with no mass fall back to uniform.
PolicyModel estimate_policy(const Corpus& corpus, const OntologyRegistry& reg,
                            double smoothing = 1.0);

} // namespace seo
