#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "jic/clients.hpp"
#include "jic/dialogue.hpp"

namespace jic {

// Collection-level statistics for a dialogue set. Word counts are
// whitespace tokens. Topic consistency is the per-dialogue mean cosine of
// each utterance embedding to the dialogue centroid; semantic similarity
// the per-dialogue mean cosine of consecutive utterances; both averaged
// over dialogues. Those two definitions are this pipeline's own reading of
// the usual row names and are flagged as such in emitted reports.
struct DatasetStats {
    size_t n_conversations = 0;
    size_t total_turns = 0;
    double avg_turns = 0;
    size_t total_utterances = 0;
    double avg_utterances_per_conv = 0;
    double avg_words_per_utterance = 0;
    double avg_conv_length_words = 0;
    size_t longest_conv_utterances = 0;
    size_t shortest_conv_utterances = 0;
    size_t longest_conv_words = 0;
    size_t shortest_conv_words = 0;
    double avg_topic_consistency = 0;
    double avg_semantic_similarity = 0;

    nlohmann::json to_json() const;
};

DatasetStats dataset_stats(const std::vector<Dialogue>& dialogues, EmbeddingClient& embed_client);

// --- lexical metrics --------------------------------------------------------
// All lexical metrics share metric_tokens() (lowercased, punctuation
// stripped), so they are case-insensitive by construction.

// Corpus-style BLEU-4: clipped modified n-gram precisions with add-epsilon
// smoothing for zero-match orders, geometric mean, brevity penalty against
// the closest reference length.
double bleu(const std::string& candidate, const std::vector<std::string>& references);

// Accumulates counts across segments for proper corpus-level BLEU.
class BleuAccumulator {
public:
    void add(const std::string& candidate, const std::vector<std::string>& references);
    double value() const;

private:
    size_t candidate_length_ = 0;
    size_t reference_length_ = 0;
    size_t matches_[4] = {0, 0, 0, 0};
    size_t totals_[4] = {0, 0, 0, 0};
};

// Exact-match unigram METEOR with alpha=0.9, beta=3, gamma=0.5. The
// alignment is greedy left-to-right, preferring the continuation of the
// previous match; a single contiguous match run counts as unfragmented
// (zero penalty), so identical strings score exactly 1.
double meteor(const std::string& candidate, const std::string& reference);

struct RougeScores {
    double rouge1 = 0;
    double rouge2 = 0;
    double rougeL = 0;
};

// F1 variants; rougeL from the longest common subsequence.
RougeScores rouge(const std::string& candidate, const std::string& reference);

struct EmbedScore {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
};

// Greedy token-level cosine matching over per-token embeddings: precision
// averages each candidate token's best match against the reference, recall
// the reverse, f1 the harmonic mean.
EmbedScore embed_score(const std::string& candidate, const std::string& reference,
                       EmbeddingClient& embed_client);

struct MetricReport {
    double bleu = 0;
    double meteor = 0;
    double embed_f1 = 0;
    double rouge1 = 0;
    double rouge2 = 0;
    double rougeL = 0;
    double average = 0;  // arithmetic mean of the six components

    nlohmann::json to_json() const;
};

// Assembles the report; `average` is the arithmetic mean of the six
// component scores.
MetricReport average_score(double bleu_score, double meteor_score, double embed_f1,
                           double rouge1_score, double rouge2_score, double rougeL_score);

// --- agreement statistics ----------------------------------------------------

enum class IccForm { average_measures, single_measure };  // ICC(2,k) / ICC(2,1)

struct AgreementReport {
    double pearson = 0;
    double spearman = 0;
    double icc = 0;
    double mae = 0;
};

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

// Average ranks on ties.
double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b);

double mean_absolute_error(const std::vector<double>& a, const std::vector<double>& b);

// Two-way random effects, absolute agreement, on an items x raters matrix.
double icc_two_way_random(const Eigen::Ref<const Eigen::MatrixXd>& ratings,
                          IccForm form = IccForm::average_measures);

// Pearson/Spearman/MAE over (a, b); ICC over `all_raters` when provided
// (items x raters), otherwise over the two sequences as a 2-rater matrix.
AgreementReport agreement(const std::vector<double>& a, const std::vector<double>& b,
                          const Eigen::MatrixXd* all_raters = nullptr,
                          IccForm form = IccForm::average_measures);

}  // namespace jic
