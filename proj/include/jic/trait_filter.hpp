#pragma once

#include <string>
#include <vector>

#include "jic/clients.hpp"
#include "jic/corpus.hpp"

namespace jic {

enum class TraitNorm { l2, l1, linf };

TraitNorm trait_norm_from_string(const std::string& name);
std::string to_string(TraitNorm norm);

double trait_distance(const TraitVector& a, const TraitVector& b, TraitNorm norm = TraitNorm::l2);

// stddev: retain while deviation <= mean + parameter * population stddev of
// the deviations. absolute: the literal reading, deviation <= parameter.
enum class ThresholdMode { stddev, absolute };

ThresholdMode threshold_mode_from_string(const std::string& name);
std::string to_string(ThresholdMode mode);

struct TraitFilterConfig {
    double alpha = 1.0;
    double beta = 0.0;
    ThresholdMode mode = ThresholdMode::stddev;
    TraitNorm norm = TraitNorm::l2;
};

// Per-author trait profile: per-entry scores, their mean, and each entry's
// deviation from the mean under the configured norm.
struct AuthorProfile {
    std::string author_id;
    std::vector<std::string> entry_ids;       // corpus order
    std::vector<TraitVector> entry_traits;    // aligned with entry_ids
    TraitVector mean_traits;
    std::vector<double> deviations;           // aligned, all >= 0

    const TraitVector* traits_of(const std::string& entry_id) const;
};

struct GlobalProfile {
    TraitVector mean_traits;
    std::vector<std::string> author_ids;     // input order
    std::vector<double> author_deviations;   // aligned with author_ids
    double threshold = 0.0;
};

// Scores every entry through the trait client and assembles the profile.
// Client failures propagate as TransportError naming the entry.
AuthorProfile score_author(const std::string& author_id,
                           const std::vector<const JournalEntry*>& entries, TraitClient& client,
                           TraitNorm norm = TraitNorm::l2);

// Rebuilds mean and deviations from already-known per-entry traits.
AuthorProfile make_profile(const std::string& author_id, std::vector<std::string> entry_ids,
                           std::vector<TraitVector> entry_traits, TraitNorm norm = TraitNorm::l2);

// The retention cutoff the journal-level pass applies to `profile`.
double journal_threshold(const AuthorProfile& profile, double alpha,
                         ThresholdMode mode = ThresholdMode::stddev);

// Journal-level pass: retains entry j iff its deviation is within the
// alpha threshold. Single-entry authors always retain their entry. Returns
// retained entry ids in corpus order, never empty for alpha >= 0.
std::vector<std::string> filter_journals(const AuthorProfile& profile, double alpha,
                                         ThresholdMode mode = ThresholdMode::stddev);

struct AuthorFilterResult {
    std::vector<std::string> retained_authors;  // input order
    GlobalProfile global;
};

// Author-level pass: global mean over all input profiles, per-author
// deviation from it, retention under the beta threshold.
AuthorFilterResult filter_authors(const std::vector<AuthorProfile>& profiles, double beta,
                                  ThresholdMode mode = ThresholdMode::stddev,
                                  TraitNorm norm = TraitNorm::l2);

}  // namespace jic
