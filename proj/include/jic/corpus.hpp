#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "jic/errors.hpp"
#include "jic/rng.hpp"

namespace jic {

// One author-attributed journal text with provenance.
struct JournalEntry {
    std::string entry_id;
    std::string author_id;
    std::string title;
    std::string body;  // non-empty after trimming
    int64_t created_at = 0;  // UTC epoch seconds
    std::string source;
    std::string url;
};

// Maps input field names onto JournalEntry fields. Defaults match the
// Reddit dump layout; canonical() matches this module's own output so a
// saved corpus reloads losslessly.
struct FieldSchema {
    std::string id = "id";
    std::string author = "author";
    std::string body = "selftext";
    std::string title = "title";
    std::string created_at = "created_utc";
    std::string source = "subreddit";
    std::string url = "url";

    static FieldSchema canonical();
};

struct DropReport {
    size_t input_lines = 0;
    size_t kept = 0;
    size_t malformed = 0;      // unparseable lines
    size_t missing_field = 0;  // empty author_id or empty-after-trim body
    size_t duplicates = 0;     // repeated (author_id, normalized body) or repeated entry_id
};

class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<JournalEntry> entries);

    const std::vector<JournalEntry>& entries() const { return entries_; }
    size_t size() const { return entries_.size(); }

    // author_id -> indices into entries(), in file order. Iteration order
    // over authors is lexicographic.
    const std::map<std::string, std::vector<size_t>>& by_author() const { return by_author_; }

    const JournalEntry& entry(size_t index) const { return entries_.at(index); }
    const JournalEntry* find(const std::string& entry_id) const;

    std::vector<std::string> author_ids() const;
    std::vector<const JournalEntry*> author_entries(const std::string& author_id) const;

private:
    std::vector<JournalEntry> entries_;
    std::map<std::string, std::vector<size_t>> by_author_;
    std::map<std::string, size_t> by_id_;
};

struct LoadResult {
    Corpus corpus;
    DropReport report;
};

// Reads a line-delimited dump, drops records with missing required fields
// and per-author exact-duplicate bodies (first occurrence kept, file
// order), and groups the survivors by author. Malformed lines are counted,
// never fatal; an unreadable file is.
LoadResult load_corpus(const std::filesystem::path& path, const FieldSchema& schema = {});

// Canonical corpus file: one entry per line under fixed field names.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

void save_drop_report(const DropReport& report, const std::filesystem::path& path);

// Deterministic seeded split into (train, test) with |test| = test_size.
// Shuffles a copy under the seed; both halves keep the shuffled order.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_dataset(const std::vector<T>& items,
                                                        size_t test_size, uint64_t seed) {
    if (test_size > items.size())
        throw ArgumentError("test_size " + std::to_string(test_size) + " exceeds collection size " +
                            std::to_string(items.size()));
    std::vector<size_t> order(items.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    deterministic_shuffle(order, seed);
    std::pair<std::vector<T>, std::vector<T>> out;
    out.second.reserve(test_size);
    out.first.reserve(items.size() - test_size);
    for (size_t i = 0; i < order.size(); ++i) {
        (i < test_size ? out.second : out.first).push_back(items[order[i]]);
    }
    return out;
}

}  // namespace jic
