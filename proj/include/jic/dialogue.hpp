#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jic/clients.hpp"
#include "jic/corpus.hpp"

namespace jic {

enum class Role { user, assistant };

inline const char* to_string(Role role) { return role == Role::user ? "user" : "assistant"; }

struct Utterance {
    Role role = Role::user;
    std::string text;  // non-empty

    size_t word_count() const;  // whitespace tokens
};

// Ordered alternating utterances starting with `user`. One turn = one
// adjacent (user, assistant) pair, so a finalized dialogue has 16
// utterances = 8 turns.
struct Dialogue {
    std::string dialogue_id;
    std::pair<std::string, std::string> author_pair;     // (user side, assistant side)
    std::pair<std::string, std::string> source_entries;  // aligned with author_pair
    std::vector<Utterance> utterances;
    std::vector<std::string> flags;

    size_t turns() const { return utterances.size() / 2; }
    // alternation from `user`, even count, non-empty texts
    bool well_formed() const;

    nlohmann::json to_json() const;
    static Dialogue from_json(const nlohmann::json& j);
};

// All C(n, 2) unordered pairs in lexicographic order.
std::vector<std::pair<std::string, std::string>> pair_authors(std::vector<std::string> author_ids);

// Cartesian product of the two authors' entries, file order on each side.
std::vector<std::pair<std::string, std::string>> entry_combinations(
    const std::pair<std::string, std::string>& pair, const Corpus& corpus);

// The generation instruction followed by the two journal bodies under
// <journal 1> / <journal 2> markers. Any literal "<journal" inside a body
// is escaped as "\<journal" so the markers stay unambiguous.
std::string build_prompt(const JournalEntry& entry_a, const JournalEntry& entry_b);

struct ParseConfig {
    // Recognized speaker prefixes; a line is an utterance when it starts
    // with one of these followed by ':'. Lines matching no prefix are
    // treated as preamble noise and skipped.
    std::vector<std::string> speaker_prefixes = {"Author 1", "Author 2", "Speaker 1", "Speaker 2",
                                                 "Person 1", "Person 2"};
    size_t expected_utterances = 18;  // the 9-turn instruction
    size_t max_words = 40;            // 2x the instructed 20-word bound
};

// Parses a raw completion into a 9-turn dialogue: first speaker maps to
// `user`, strict alternation, exact utterance count, per-utterance length
// cap. Violations throw DialogueParseError naming the rule.
Dialogue parse_dialogue(const std::string& raw, const ParseConfig& cfg = {});

// Drops the 9th turn (utterances 17-18); the first 16 pass through
// byte-identically. Input must have exactly 18 utterances.
Dialogue trim_last_turn(const Dialogue& d);

struct GenerationConfig {
    int workers = 4;
    int gen_retries = 2;       // re-prompts after a parse failure
    size_t max_pairs = 0;      // 0 = all pairs; otherwise seeded sample
    uint64_t seed = 0;
    size_t budget = 0;         // 0 = unlimited; else stop after this many
                               // newly processed combinations (resume later)
    ParseConfig parse;
    DecodeSettings decode;
};

struct SkipRecord {
    std::string entry_a;
    std::string entry_b;
    std::string reason;
    int attempts = 0;
};

struct GenerationReport {
    size_t combinations_total = 0;      // in the (possibly sampled) plan
    size_t completed = 0;               // cumulative, includes prior runs
    size_t skipped = 0;                 // cumulative
    size_t processed_this_run = 0;      // combinations newly attempted
    size_t backend_calls = 0;           // chat calls made by this run
    bool exhausted_budget = false;
};

// Runs the full pair -> entry-combination -> prompt -> parse -> trim
// pipeline, appending dialogues to `dialogues_path` (one JSON line each)
// and failures to `skips_path`. Progress is checkpointed per combination
// in `manifest_path`; a rerun never re-requests combinations already
// recorded there. Per-combination failures are skips, never fatal.
GenerationReport generate_all(const Corpus& corpus, ChatClient& chat, const GenerationConfig& cfg,
                              const std::filesystem::path& dialogues_path,
                              const std::filesystem::path& skips_path,
                              const std::filesystem::path& manifest_path);

}  // namespace jic
