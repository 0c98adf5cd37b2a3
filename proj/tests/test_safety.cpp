#include <doctest.h>

#include <map>

#include "helpers.hpp"
#include "jic/io.hpp"
#include "jic/safety.hpp"

using namespace jic;

namespace {

// Scores utterances from a fixed per-text table; anything absent is clean.
class TableToxicityClient : public ToxicityClient {
public:
    std::map<std::string, ToxicityScores> table;
    ToxicityScores classify(const std::string& text) override {
        auto it = table.find(text);
        return it == table.end() ? ToxicityScores{} : it->second;
    }
};

// Builds a 16-utterance dialogue where utterances [0, toxic_count) carry a
// marker text found in the scorer table.
Dialogue dialogue_with_toxic(size_t toxic_count, TableToxicityClient& client,
                             ToxicityScores scores = {.toxicity = 0.9}) {
    Dialogue d = jt::make_dialogue();
    for (size_t i = 0; i < toxic_count; ++i) {
        d.utterances[i].text = "marked utterance " + std::to_string(i);
        client.table[d.utterances[i].text] = scores;
    }
    return d;
}

}  // namespace

TEST_SUITE("safety") {

TEST_CASE("score_dialogue: all-clean dialogue is unflagged with zero fraction") {
    TableToxicityClient client;
    Dialogue d = jt::make_dialogue();
    auto report = score_dialogue(d, client);
    CHECK(report.toxic_utterance_count == 0);
    CHECK(report.toxic_fraction == 0.0);
    CHECK_FALSE(report.flagged);
}

TEST_CASE("score_dialogue: 5 of 16 toxic utterances give fraction 0.3125") {
    TableToxicityClient client;
    Dialogue d = dialogue_with_toxic(5, client);
    auto report = score_dialogue(d, client);
    CHECK(report.toxic_utterance_count == 5);
    CHECK(report.toxic_fraction == doctest::Approx(0.3125));
    CHECK(report.flagged);
}

TEST_CASE("score_dialogue: threshold boundary counts at >=") {
    TableToxicityClient client;
    Dialogue d = dialogue_with_toxic(1, client, ToxicityScores{.toxicity = 0.5});
    auto report = score_dialogue(d, client, 0.5);
    CHECK(report.toxic_utterance_count == 1);
}

TEST_CASE("score_dialogue: subclass flags fire from single utterances") {
    TableToxicityClient client;
    Dialogue d = jt::make_dialogue();
    d.utterances[4].text = "threatening line";
    client.table["threatening line"] = ToxicityScores{.toxicity = 0.0, .threat = 0.8};
    auto report = score_dialogue(d, client);
    CHECK(report.threat);
    CHECK_FALSE(report.severe_toxicity);
    CHECK(report.flagged);  // severe subclass flags regardless of fraction
}

TEST_CASE("flag rule: exactly 25 percent does not flag, strictly more does") {
    TableToxicityClient client;
    auto r4 = score_dialogue(dialogue_with_toxic(4, client), client);   // 4/16 = 0.25
    CHECK_FALSE(r4.flagged);
    auto r5 = score_dialogue(dialogue_with_toxic(5, client), client);   // 5/16
    CHECK(r5.flagged);
}

TEST_CASE("flag rule: identity attack alone flags at zero fraction") {
    ToxicityReport report;
    report.toxic_fraction = 0.0;
    report.identity_attack = true;
    CHECK(apply_flag_rule(report));
    report.identity_attack = false;
    CHECK_FALSE(apply_flag_rule(report));
}

TEST_CASE("flag rule: monotone in the per-utterance threshold") {
    TableToxicityClient client;
    Dialogue d = dialogue_with_toxic(6, client, ToxicityScores{.toxicity = 0.6});
    auto strict = score_dialogue(d, client, 0.4);
    auto loose = score_dialogue(d, client, 0.7);
    // lowering the threshold can only add toxic counts
    CHECK(strict.toxic_utterance_count >= loose.toxic_utterance_count);
    CHECK((loose.flagged ? strict.flagged : true));
}

TEST_CASE("partition: counts split and files always exist") {
    jt::TempDir dir("safety");
    TableToxicityClient client;
    std::vector<Dialogue> dialogues;
    std::vector<ToxicityReport> reports;
    for (int i = 0; i < 10; ++i) {
        Dialogue d = (i < 2) ? dialogue_with_toxic(6, client) : jt::make_dialogue();
        d.dialogue_id = "d" + std::to_string(i);
        dialogues.push_back(d);
        reports.push_back(score_dialogue(d, client));
    }
    auto result =
        partition(dialogues, reports, dir.path() / "clean.jsonl", dir.path() / "flagged.jsonl");
    CHECK(result.clean_count == 8);
    CHECK(result.flagged_count == 2);
    CHECK(io::read_jsonl(dir.path() / "clean.jsonl").size() == 8);
    auto flagged = io::read_jsonl(dir.path() / "flagged.jsonl");
    REQUIRE(flagged.size() == 2);
    CHECK(flagged[0].contains("toxicity_report"));  // schema + report
}

TEST_CASE("partition: empty flagged file on a clean collection") {
    jt::TempDir dir("safety");
    TableToxicityClient client;
    std::vector<Dialogue> dialogues{jt::make_dialogue()};
    std::vector<ToxicityReport> reports{score_dialogue(dialogues[0], client)};
    auto result =
        partition(dialogues, reports, dir.path() / "clean.jsonl", dir.path() / "flagged.jsonl");
    CHECK(result.flagged_count == 0);
    CHECK(std::filesystem::exists(dir.path() / "flagged.jsonl"));
    CHECK(io::read_jsonl(dir.path() / "flagged.jsonl").empty());

    CHECK_THROWS_AS(partition(dialogues, {}, dir.path() / "c", dir.path() / "f"), ArgumentError);
}

TEST_CASE("partition: all flagged still succeeds") {
    jt::TempDir dir("safety");
    TableToxicityClient client;
    std::vector<Dialogue> dialogues;
    std::vector<ToxicityReport> reports;
    for (int i = 0; i < 3; ++i) {
        Dialogue d = dialogue_with_toxic(8, client);
        d.dialogue_id = "d" + std::to_string(i);
        dialogues.push_back(d);
        reports.push_back(score_dialogue(d, client));
    }
    auto result =
        partition(dialogues, reports, dir.path() / "clean.jsonl", dir.path() / "flagged.jsonl");
    CHECK(result.clean_count == 0);
    CHECK(result.flagged_count == 3);
}

TEST_CASE("summary: per-subclass utterance and dialogue counts") {
    TableToxicityClient client;
    std::vector<ToxicityReport> reports;
    Dialogue d1 = dialogue_with_toxic(5, client);
    reports.push_back(score_dialogue(d1, client));
    TableToxicityClient client2;
    Dialogue d2 = jt::make_dialogue();
    d2.utterances[0].text = "obscene bit";
    client2.table["obscene bit"] = ToxicityScores{.obscene = 0.9};
    reports.push_back(score_dialogue(d2, client2));

    auto summary = toxicity_summary(reports, 0.5);
    CHECK(summary.at("subclasses").at("toxicity").at("utterances").get<size_t>() == 5);
    CHECK(summary.at("subclasses").at("toxicity").at("dialogues").get<size_t>() == 1);
    CHECK(summary.at("subclasses").at("obscene").at("utterances").get<size_t>() == 1);
    CHECK(summary.at("subclasses").at("obscene").at("dialogues").get<size_t>() == 1);
    CHECK(summary.at("flagged_dialogues").get<size_t>() == 1);
    CHECK(summary.at("total_utterances").get<size_t>() == 32);
}

}  // TEST_SUITE
