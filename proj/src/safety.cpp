#include "jic/safety.hpp"

#include "jic/io.hpp"

namespace jic {

using nlohmann::json;

json ToxicityReport::to_json() const {
    json scores = json::array();
    for (const auto& s : per_utterance)
        scores.push_back(json{{"toxicity", s.toxicity},
                              {"severe_toxicity", s.severe_toxicity},
                              {"obscene", s.obscene},
                              {"threat", s.threat},
                              {"insult", s.insult},
                              {"identity_attack", s.identity_attack}});
    return json{{"dialogue_id", dialogue_id},
                {"per_utterance", std::move(scores)},
                {"toxic_utterance_count", toxic_utterance_count},
                {"toxic_fraction", toxic_fraction},
                {"subclass_flags",
                 json{{"severe_toxicity", severe_toxicity},
                      {"obscene", obscene},
                      {"threat", threat},
                      {"insult", insult},
                      {"identity_attack", identity_attack}}},
                {"flagged", flagged}};
}

ToxicityReport score_dialogue(const Dialogue& dialogue, ToxicityClient& client, double threshold) {
    if (dialogue.utterances.empty())
        throw ArgumentError("score_dialogue requires a non-empty dialogue");

    ToxicityReport report;
    report.dialogue_id = dialogue.dialogue_id;
    report.per_utterance.reserve(dialogue.utterances.size());
    for (const auto& u : dialogue.utterances) {
        ToxicityScores s = client.classify(u.text);
        if (s.toxicity >= threshold) report.toxic_utterance_count++;
        report.severe_toxicity |= s.severe_toxicity >= threshold;
        report.obscene |= s.obscene >= threshold;
        report.threat |= s.threat >= threshold;
        report.insult |= s.insult >= threshold;
        report.identity_attack |= s.identity_attack >= threshold;
        report.per_utterance.push_back(s);
    }
    report.toxic_fraction = static_cast<double>(report.toxic_utterance_count) /
                            static_cast<double>(dialogue.utterances.size());
    report.flagged = apply_flag_rule(report);
    return report;
}

bool apply_flag_rule(const ToxicityReport& report) {
    if (report.toxic_fraction > 0.25) return true;  // strictly more than a quarter
    return report.severe_toxicity || report.threat || report.identity_attack;
}

PartitionResult partition(const std::vector<Dialogue>& dialogues,
                          const std::vector<ToxicityReport>& reports,
                          const std::filesystem::path& clean_path,
                          const std::filesystem::path& flagged_path) {
    if (dialogues.size() != reports.size())
        throw ArgumentError("partition needs one report per dialogue (" +
                            std::to_string(dialogues.size()) + " dialogues, " +
                            std::to_string(reports.size()) + " reports)");

    std::vector<json> clean, flagged;
    for (size_t i = 0; i < dialogues.size(); ++i) {
        if (reports[i].flagged) {
            json line = dialogues[i].to_json();
            line["toxicity_report"] = reports[i].to_json();
            flagged.push_back(std::move(line));
        } else {
            clean.push_back(dialogues[i].to_json());
        }
    }
    io::write_jsonl_atomic(clean_path, clean);
    io::write_jsonl_atomic(flagged_path, flagged);
    return PartitionResult{clean.size(), flagged.size()};
}

json toxicity_summary(const std::vector<ToxicityReport>& reports, double threshold) {
    size_t utt[6] = {0, 0, 0, 0, 0, 0};
    size_t dia[6] = {0, 0, 0, 0, 0, 0};
    size_t total_utterances = 0;
    size_t flagged_dialogues = 0;
    for (const auto& r : reports) {
        total_utterances += r.per_utterance.size();
        for (const auto& s : r.per_utterance) {
            if (s.toxicity >= threshold) utt[0]++;
            if (s.severe_toxicity >= threshold) utt[1]++;
            if (s.obscene >= threshold) utt[2]++;
            if (s.threat >= threshold) utt[3]++;
            if (s.insult >= threshold) utt[4]++;
            if (s.identity_attack >= threshold) utt[5]++;
        }
        if (r.toxic_fraction > 0.25) dia[0]++;
        if (r.severe_toxicity) dia[1]++;
        if (r.obscene) dia[2]++;
        if (r.threat) dia[3]++;
        if (r.insult) dia[4]++;
        if (r.identity_attack) dia[5]++;
        if (r.flagged) flagged_dialogues++;
    }
    auto row = [](size_t u, size_t d) { return json{{"utterances", u}, {"dialogues", d}}; };
    return json{{"threshold", threshold},
                {"total_dialogues", reports.size()},
                {"total_utterances", total_utterances},
                {"flagged_dialogues", flagged_dialogues},
                {"subclasses",
                 json{{"toxicity", row(utt[0], dia[0])},
                      {"severe_toxicity", row(utt[1], dia[1])},
                      {"obscene", row(utt[2], dia[2])},
                      {"threat", row(utt[3], dia[3])},
                      {"insult", row(utt[4], dia[4])},
                      {"identity_attack", row(utt[5], dia[5])}}}};
}

}  // namespace jic
