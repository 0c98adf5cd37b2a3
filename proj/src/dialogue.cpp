#include "jic/dialogue.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>
#include <unordered_map>

#include "jic/io.hpp"
#include "jic/log.hpp"
#include "jic/text.hpp"

namespace jic {

using nlohmann::json;

size_t Utterance::word_count() const { return count_whitespace_tokens(text); }

bool Dialogue::well_formed() const {
    if (utterances.empty() || utterances.size() % 2 != 0) return false;
    for (size_t i = 0; i < utterances.size(); ++i) {
        Role expected = (i % 2 == 0) ? Role::user : Role::assistant;
        if (utterances[i].role != expected) return false;
        if (trim(utterances[i].text).empty()) return false;
    }
    return true;
}

json Dialogue::to_json() const {
    json utts = json::array();
    for (const auto& u : utterances)
        utts.push_back(json{{"role", to_string(u.role)}, {"text", u.text}});
    return json{{"dialogue_id", dialogue_id},
                {"author_pair", json::array({author_pair.first, author_pair.second})},
                {"source_entries", json::array({source_entries.first, source_entries.second})},
                {"utterances", std::move(utts)},
                {"flags", flags}};
}

Dialogue Dialogue::from_json(const json& j) {
    Dialogue d;
    d.dialogue_id = j.at("dialogue_id").get<std::string>();
    d.author_pair = {j.at("author_pair").at(0).get<std::string>(),
                     j.at("author_pair").at(1).get<std::string>()};
    d.source_entries = {j.at("source_entries").at(0).get<std::string>(),
                        j.at("source_entries").at(1).get<std::string>()};
    for (const auto& u : j.at("utterances")) {
        Utterance utt;
        utt.role = u.at("role").get<std::string>() == "user" ? Role::user : Role::assistant;
        utt.text = u.at("text").get<std::string>();
        d.utterances.push_back(std::move(utt));
    }
    if (j.contains("flags")) d.flags = j.at("flags").get<std::vector<std::string>>();
    return d;
}

std::vector<std::pair<std::string, std::string>> pair_authors(std::vector<std::string> author_ids) {
    if (author_ids.size() < 2)
        throw ArgumentError("pairing requires at least 2 authors, got " +
                            std::to_string(author_ids.size()));
    std::sort(author_ids.begin(), author_ids.end());
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(author_ids.size() * (author_ids.size() - 1) / 2);
    for (size_t i = 0; i < author_ids.size(); ++i)
        for (size_t j = i + 1; j < author_ids.size(); ++j)
            pairs.emplace_back(author_ids[i], author_ids[j]);
    return pairs;
}

std::vector<std::pair<std::string, std::string>> entry_combinations(
    const std::pair<std::string, std::string>& pair, const Corpus& corpus) {
    auto entries_a = corpus.author_entries(pair.first);   // throws on unknown author
    auto entries_b = corpus.author_entries(pair.second);
    std::vector<std::pair<std::string, std::string>> combos;
    combos.reserve(entries_a.size() * entries_b.size());
    for (const auto* a : entries_a)
        for (const auto* b : entries_b) combos.emplace_back(a->entry_id, b->entry_id);
    return combos;
}

namespace {

const char* kInstruction =
    "<Instruction>: Create a 9-turn dialogue in english between two authors based on the "
    "journal entries provided below. The dialogue should reflect a natural and engaging "
    "conversation, finding common ground between the authors' experiences, thoughts, or "
    "emotions. Ensure that the conversation stays true to the personality traits and tones "
    "expressed in the journal entries. Each author should contribute equally, with utterances "
    "that are concise, relevant, and no longer than 20 words.";

std::string escape_markers(const std::string& body) {
    std::string out;
    out.reserve(body.size());
    size_t i = 0;
    while (i < body.size()) {
        if (body.compare(i, 8, "<journal") == 0) {
            out += "\\<journal";
            i += 8;
        } else {
            out.push_back(body[i++]);
        }
    }
    return out;
}

}  // namespace

std::string build_prompt(const JournalEntry& entry_a, const JournalEntry& entry_b) {
    if (trim(entry_a.body).empty() || trim(entry_b.body).empty())
        throw ArgumentError("build_prompt requires non-empty journal bodies");
    std::string prompt = kInstruction;
    prompt += "\n<journal 1>\n";
    prompt += escape_markers(entry_a.body);
    prompt += "\n<journal 2>\n";
    prompt += escape_markers(entry_b.body);
    prompt += "\n";
    return prompt;
}

namespace {

// Matches "<prefix> :"-style speaker lines, tolerating markdown asterisks
// around the prefix. Returns the speaker prefix index and the utterance
// text, or nullopt for non-utterance lines.
std::optional<std::pair<size_t, std::string>> match_speaker_line(const std::string& raw_line,
                                                                 const ParseConfig& cfg) {
    std::string line = trim(raw_line);
    size_t start = 0;
    while (start < line.size() && line[start] == '*') ++start;
    for (size_t p = 0; p < cfg.speaker_prefixes.size(); ++p) {
        const auto& prefix = cfg.speaker_prefixes[p];
        if (line.compare(start, prefix.size(), prefix) != 0) continue;
        size_t pos = start + prefix.size();
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '*')) ++pos;
        if (pos >= line.size() || line[pos] != ':') continue;
        ++pos;
        std::string text = trim(line.substr(pos));
        while (!text.empty() && text.front() == '*') text.erase(text.begin());
        while (!text.empty() && text.back() == '*') text.pop_back();
        return std::make_pair(p, trim(text));
    }
    return std::nullopt;
}

}  // namespace

Dialogue parse_dialogue(const std::string& raw, const ParseConfig& cfg) {
    if (trim(raw).empty()) throw ArgumentError("parse_dialogue requires non-empty text");

    struct SpeakerUtterance {
        size_t speaker;  // prefix index
        std::string text;
    };
    std::vector<SpeakerUtterance> collected;
    size_t pos = 0;
    while (pos <= raw.size()) {
        size_t eol = raw.find('\n', pos);
        std::string line = raw.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
        pos = (eol == std::string::npos) ? raw.size() + 1 : eol + 1;
        if (trim(line).empty()) continue;
        auto matched = match_speaker_line(line, cfg);
        if (!matched) continue;  // preamble / commentary noise
        if (matched->second.empty())
            throw DialogueParseError("empty-utterance",
                                     "utterance " + std::to_string(collected.size() + 1) +
                                         " is empty after its speaker prefix");
        collected.push_back({matched->first, matched->second});
    }

    if (collected.size() != cfg.expected_utterances)
        throw DialogueParseError("utterance-count",
                                 "expected " + std::to_string(cfg.expected_utterances) +
                                     " utterances, found " + std::to_string(collected.size()));

    const size_t first_speaker = collected.front().speaker;
    size_t second_speaker = first_speaker;
    Dialogue d;
    for (size_t i = 0; i < collected.size(); ++i) {
        const auto& cu = collected[i];
        if (i % 2 == 0) {
            if (cu.speaker != first_speaker)
                throw DialogueParseError("role-violation",
                                         "utterance " + std::to_string(i + 1) +
                                             " breaks alternation: expected the first speaker");
        } else {
            if (cu.speaker == first_speaker)
                throw DialogueParseError("role-violation",
                                         "utterance " + std::to_string(i + 1) +
                                             " breaks alternation: two consecutive utterances by "
                                             "the same speaker");
            if (second_speaker == first_speaker) {
                second_speaker = cu.speaker;
            } else if (cu.speaker != second_speaker) {
                throw DialogueParseError("role-violation", "utterance " + std::to_string(i + 1) +
                                                               " introduces a third speaker");
            }
        }
        Utterance utt;
        utt.role = (i % 2 == 0) ? Role::user : Role::assistant;
        utt.text = cu.text;
        if (utt.word_count() > cfg.max_words)
            throw DialogueParseError("over-length",
                                     "utterance " + std::to_string(i + 1) + " has " +
                                         std::to_string(utt.word_count()) + " words (cap " +
                                         std::to_string(cfg.max_words) + ")");
        d.utterances.push_back(std::move(utt));
    }
    return d;
}

Dialogue trim_last_turn(const Dialogue& d) {
    if (d.utterances.size() != 18)
        throw ArgumentError("trim_last_turn expects 18 utterances, got " +
                            std::to_string(d.utterances.size()));
    Dialogue out = d;
    out.utterances.resize(16);
    return out;
}

// ---------------------------------------------------------------------------
// generate_all
// ---------------------------------------------------------------------------

namespace {

struct Combination {
    std::string author_a, author_b;
    std::string entry_a, entry_b;

    std::string key() const { return entry_a + "\x1f" + entry_b; }
};

// A killed run can leave one torn line at the end of an append-mode file.
// Truncate back to the last complete line before resuming.
void repair_torn_tail(const std::filesystem::path& path) {
    std::error_code ec;
    auto size = std::filesystem::file_size(path, ec);
    if (ec || size == 0) return;
    std::ifstream in(path, std::ios::binary);
    in.seekg(-1, std::ios::end);
    char last = 0;
    in.get(last);
    if (last == '\n') return;
    std::string content = io::read_text(path);
    auto cut = content.find_last_of('\n');
    content = (cut == std::string::npos) ? std::string() : content.substr(0, cut + 1);
    in.close();
    io::write_text_atomic(path, content);
}

struct ComboOutcome {
    std::optional<Dialogue> dialogue;
    std::optional<SkipRecord> skip;
    size_t calls = 0;
};

ComboOutcome process_combination(const Combination& combo, const Corpus& corpus, ChatClient& chat,
                                 const GenerationConfig& cfg) {
    ComboOutcome out;
    const JournalEntry* a = corpus.find(combo.entry_a);
    const JournalEntry* b = corpus.find(combo.entry_b);
    std::string prompt = build_prompt(*a, *b);
    std::string reason = "unknown";
    int attempts = 0;
    for (attempts = 1; attempts <= cfg.gen_retries + 1; ++attempts) {
        std::string raw;
        try {
            out.calls++;
            raw = chat.complete(prompt, cfg.decode);
        } catch (const std::exception& ex) {
            reason = ex.what();
            continue;
        }
        try {
            Dialogue nine = parse_dialogue(raw, cfg.parse);
            Dialogue d = trim_last_turn(nine);
            d.dialogue_id = combo.entry_a + "__" + combo.entry_b;
            d.author_pair = {combo.author_a, combo.author_b};
            d.source_entries = {combo.entry_a, combo.entry_b};
            out.dialogue = std::move(d);
            return out;
        } catch (const DialogueParseError& ex) {
            reason = ex.what();
        }
    }
    out.skip = SkipRecord{combo.entry_a, combo.entry_b, reason, attempts - 1};
    return out;
}

}  // namespace

GenerationReport generate_all(const Corpus& corpus, ChatClient& chat, const GenerationConfig& cfg,
                              const std::filesystem::path& dialogues_path,
                              const std::filesystem::path& skips_path,
                              const std::filesystem::path& manifest_path) {
    if (corpus.by_author().size() < 2)
        throw ArgumentError("generation requires a corpus with at least 2 authors");

    auto pairs = pair_authors(corpus.author_ids());
    if (cfg.max_pairs > 0 && cfg.max_pairs < pairs.size()) {
        deterministic_shuffle(pairs, cfg.seed ^ 0xa5a5a5a5ULL);
        pairs.resize(cfg.max_pairs);
        std::sort(pairs.begin(), pairs.end());
    }

    std::vector<Combination> plan;
    for (const auto& pair : pairs)
        for (const auto& [ea, eb] : entry_combinations(pair, corpus))
            plan.push_back({pair.first, pair.second, ea, eb});

    // Combination statuses from any previous run; these are never
    // re-requested.
    repair_torn_tail(manifest_path);
    repair_torn_tail(dialogues_path);
    repair_torn_tail(skips_path);
    std::unordered_map<std::string, std::string> status;
    if (std::filesystem::exists(manifest_path)) {
        io::for_each_jsonl(manifest_path, [&](size_t, const json& line) {
            status[line.at("entry_a").get<std::string>() + "\x1f" +
                   line.at("entry_b").get<std::string>()] = line.at("status").get<std::string>();
        });
    }

    io::JsonlAppender dialogues_out(dialogues_path);
    io::JsonlAppender skips_out(skips_path);
    io::JsonlAppender manifest_out(manifest_path);

    // A kill between a payload write and its status write leaves a complete
    // dialogue/skip line with no manifest entry; adopt it instead of
    // re-requesting the combination and duplicating the line.
    auto adopt_orphans = [&](const std::filesystem::path& path, const char* state,
                             auto&& key_of) {
        if (!std::filesystem::exists(path)) return;
        io::for_each_jsonl(path, [&](size_t, const json& line) {
            std::string key = key_of(line);
            if (status.count(key)) return;
            status[key] = state;
            auto sep = key.find('\x1f');
            manifest_out.append(
                json{{"entry_a", key.substr(0, sep)},
                     {"entry_b", key.substr(sep + 1)},
                     {"status", state},
                     {"ts", std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::system_clock::now().time_since_epoch())
                                .count()}});
        });
    };
    adopt_orphans(dialogues_path, "done", [](const json& line) {
        return line.at("source_entries").at(0).get<std::string>() + "\x1f" +
               line.at("source_entries").at(1).get<std::string>();
    });
    adopt_orphans(skips_path, "skipped", [](const json& line) {
        return line.at("entry_a").get<std::string>() + "\x1f" +
               line.at("entry_b").get<std::string>();
    });

    GenerationReport report;
    report.combinations_total = plan.size();

    std::vector<const Combination*> pending;
    for (const auto& combo : plan)
        if (!status.count(combo.key())) pending.push_back(&combo);
    if (cfg.budget > 0 && pending.size() > cfg.budget) {
        pending.resize(cfg.budget);
        report.exhausted_budget = true;
    }

    const size_t workers = std::max(1, cfg.workers);
    std::atomic<size_t> backend_calls{0};
    // Chunked dispatch: a batch of `workers` combinations runs in parallel,
    // then results are written in plan order so output files are
    // deterministic regardless of scheduling.
    for (size_t base = 0; base < pending.size(); base += workers) {
        const size_t count = std::min(workers, pending.size() - base);
        std::vector<ComboOutcome> outcomes(count);
        std::vector<std::thread> threads;
        threads.reserve(count);
        for (size_t t = 0; t < count; ++t) {
            threads.emplace_back([&, t] {
                ComboOutcome outcome = process_combination(*pending[base + t], corpus, chat, cfg);
                backend_calls += outcome.calls;
                outcomes[t] = std::move(outcome);
            });
        }
        for (auto& th : threads) th.join();

        for (size_t t = 0; t < count; ++t) {
            const Combination& combo = *pending[base + t];
            auto& outcome = outcomes[t];
            const char* state = nullptr;
            if (outcome.dialogue) {
                dialogues_out.append(outcome.dialogue->to_json());
                state = "done";
            } else {
                skips_out.append(json{{"entry_a", outcome.skip->entry_a},
                                      {"entry_b", outcome.skip->entry_b},
                                      {"reason", outcome.skip->reason},
                                      {"attempts", outcome.skip->attempts}});
                state = "skipped";
            }
            // status line lands after its payload so a kill between the two
            // re-requests the combination instead of losing it
            manifest_out.append(json{{"entry_a", combo.entry_a},
                                     {"entry_b", combo.entry_b},
                                     {"status", state},
                                     {"ts", std::chrono::duration_cast<std::chrono::milliseconds>(
                                                std::chrono::system_clock::now().time_since_epoch())
                                                .count()}});
            status[combo.key()] = state;
            report.processed_this_run++;
        }
    }

    report.backend_calls = backend_calls.load();
    for (const auto& combo : plan) {
        auto it = status.find(combo.key());
        if (it == status.end()) continue;
        if (it->second == "done")
            report.completed++;
        else
            report.skipped++;
    }
    return report;
}

}  // namespace jic
