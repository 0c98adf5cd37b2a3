#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace jic {

std::string trim(std::string_view s);

// Trim plus collapse of internal whitespace runs to single spaces.
// This is the normalization used for duplicate-body detection.
std::string collapse_whitespace(std::string_view s);

std::string to_lower(std::string_view s);

// Plain whitespace split. This is the "word" definition for utterance
// word counts and dataset statistics.
std::vector<std::string> whitespace_tokens(std::string_view s);

size_t count_whitespace_tokens(std::string_view s);

// Shared tokenizer for all lexical metrics and word-list scorers:
// whitespace split, then per token drop every non-alphanumeric ASCII
// character and lowercase A-Z; empty results are discarded.
std::vector<std::string> metric_tokens(std::string_view s);

// Sentence splitter used by journal chunking: a sentence ends at a run
// of '.', '!' or '?' followed by whitespace (or end of text). Returns
// [start, end) character offsets into `s`; offsets cover the sentence
// including its terminator, with surrounding whitespace trimmed.
std::vector<std::pair<size_t, size_t>> sentence_spans(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);

}  // namespace jic
