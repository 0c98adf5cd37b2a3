#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "jic/clients.hpp"
#include "jic/dialogue.hpp"

namespace jic {

// Per-dialogue toxicity outcome. An utterance counts as toxic when its
// `toxicity` score reaches the threshold; a subclass flag is set when any
// utterance reaches the threshold on that subclass.
struct ToxicityReport {
    std::string dialogue_id;
    std::vector<ToxicityScores> per_utterance;
    size_t toxic_utterance_count = 0;
    double toxic_fraction = 0;
    bool severe_toxicity = false;
    bool obscene = false;
    bool threat = false;
    bool insult = false;
    bool identity_attack = false;
    bool flagged = false;

    nlohmann::json to_json() const;
};

ToxicityReport score_dialogue(const Dialogue& dialogue, ToxicityClient& client,
                              double threshold = 0.5);

// A dialogue is withheld when strictly more than 25% of its utterances are
// toxic, or any severe subclass (severe_toxicity, threat, identity_attack)
// fired.
bool apply_flag_rule(const ToxicityReport& report);

struct PartitionResult {
    size_t clean_count = 0;
    size_t flagged_count = 0;
};

// Writes the clean dialogues under the canonical dialogue schema and the
// flagged ones with their ToxicityReport attached. Both files are always
// produced, empty or not.
PartitionResult partition(const std::vector<Dialogue>& dialogues,
                          const std::vector<ToxicityReport>& reports,
                          const std::filesystem::path& clean_path,
                          const std::filesystem::path& flagged_path);

// Per-subclass utterance and dialogue counts across a scored collection.
// A dialogue counts under `toxicity` via the >25% rule and under any other
// subclass when that subclass flag fired.
nlohmann::json toxicity_summary(const std::vector<ToxicityReport>& reports, double threshold);

}  // namespace jic
