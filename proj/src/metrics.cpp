#include "jic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "jic/text.hpp"

namespace jic {

using nlohmann::json;

namespace {

constexpr double kBleuEpsilon = 1e-9;

double cosine(const Embedding& a, const Embedding& b) {
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

std::vector<std::string> require_metric_tokens(const std::string& text, const char* side) {
    if (trim(text).empty())
        throw ArgumentError(std::string("metric input (") + side + ") must be non-empty");
    return metric_tokens(text);
}

std::map<std::string, size_t> ngram_counts(const std::vector<std::string>& tokens, size_t n) {
    std::map<std::string, size_t> counts;
    if (tokens.size() < n) return counts;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string gram = tokens[i];
        for (size_t j = 1; j < n; ++j) gram += "\x1f" + tokens[i + j];
        counts[gram]++;
    }
    return counts;
}

}  // namespace

// ---------------------------------------------------------------------------
// BLEU
// ---------------------------------------------------------------------------

void BleuAccumulator::add(const std::string& candidate,
                          const std::vector<std::string>& references) {
    if (references.empty()) throw ArgumentError("bleu requires at least one reference");
    auto cand = require_metric_tokens(candidate, "candidate");
    std::vector<std::vector<std::string>> refs;
    refs.reserve(references.size());
    for (const auto& r : references) refs.push_back(require_metric_tokens(r, "reference"));

    // closest reference length; ties toward the shorter one
    size_t closest = refs[0].size();
    for (const auto& r : refs) {
        auto diff = [&](size_t len) {
            return len > cand.size() ? len - cand.size() : cand.size() - len;
        };
        if (diff(r.size()) < diff(closest) || (diff(r.size()) == diff(closest) && r.size() < closest))
            closest = r.size();
    }
    candidate_length_ += cand.size();
    reference_length_ += closest;

    for (size_t n = 1; n <= 4; ++n) {
        auto cand_counts = ngram_counts(cand, n);
        std::map<std::string, size_t> max_ref;
        for (const auto& r : refs)
            for (const auto& [gram, count] : ngram_counts(r, n))
                max_ref[gram] = std::max(max_ref[gram], count);
        for (const auto& [gram, count] : cand_counts) {
            totals_[n - 1] += count;
            auto it = max_ref.find(gram);
            if (it != max_ref.end()) matches_[n - 1] += std::min(count, it->second);
        }
    }
}

double BleuAccumulator::value() const {
    if (candidate_length_ == 0) return 0.0;
    double log_sum = 0.0;
    for (size_t n = 0; n < 4; ++n) {
        if (totals_[n] == 0) return 0.0;  // candidate shorter than n: no score
        double p = matches_[n] > 0
                       ? static_cast<double>(matches_[n]) / static_cast<double>(totals_[n])
                       : kBleuEpsilon / static_cast<double>(totals_[n]);
        log_sum += std::log(p);
    }
    double bp = 1.0;
    if (candidate_length_ < reference_length_)
        bp = std::exp(1.0 - static_cast<double>(reference_length_) /
                                static_cast<double>(candidate_length_));
    return bp * std::exp(log_sum / 4.0);
}

double bleu(const std::string& candidate, const std::vector<std::string>& references) {
    BleuAccumulator acc;
    acc.add(candidate, references);
    return acc.value();
}

// ---------------------------------------------------------------------------
// METEOR
// ---------------------------------------------------------------------------

double meteor(const std::string& candidate, const std::string& reference) {
    auto cand = require_metric_tokens(candidate, "candidate");
    auto ref = require_metric_tokens(reference, "reference");
    if (cand.empty() || ref.empty()) return 0.0;

    // greedy left-to-right exact alignment; prefer continuing the previous
    // match, else the smallest unused reference position
    std::vector<bool> ref_used(ref.size(), false);
    std::vector<long> aligned_to(cand.size(), -1);
    long prev_ref = -1;
    size_t matches = 0;
    for (size_t i = 0; i < cand.size(); ++i) {
        long pick = -1;
        size_t cont = static_cast<size_t>(prev_ref + 1);
        if (prev_ref + 1 >= 0 && cont < ref.size() && !ref_used[cont] && ref[cont] == cand[i]) {
            pick = prev_ref + 1;
        } else {
            for (size_t j = 0; j < ref.size(); ++j) {
                if (!ref_used[j] && ref[j] == cand[i]) {
                    pick = static_cast<long>(j);
                    break;
                }
            }
        }
        if (pick >= 0) {
            ref_used[static_cast<size_t>(pick)] = true;
            aligned_to[i] = pick;
            prev_ref = pick;
            ++matches;
        }
    }
    if (matches == 0) return 0.0;

    double precision = static_cast<double>(matches) / static_cast<double>(cand.size());
    double recall = static_cast<double>(matches) / static_cast<double>(ref.size());
    constexpr double alpha = 0.9, beta = 3.0, gamma = 0.5;
    double f_mean = precision * recall / (alpha * precision + (1.0 - alpha) * recall);

    // chunks: maximal runs contiguous in both sequences
    size_t chunks = 0;
    long last = -2;
    for (size_t i = 0; i < cand.size(); ++i) {
        if (aligned_to[i] < 0) {
            last = -2;
            continue;
        }
        if (aligned_to[i] != last + 1) ++chunks;
        last = aligned_to[i];
    }
    double penalty = 0.0;
    if (chunks > 1)
        penalty = gamma * std::pow(static_cast<double>(chunks) / static_cast<double>(matches), beta);
    return f_mean * (1.0 - penalty);
}

// ---------------------------------------------------------------------------
// ROUGE
// ---------------------------------------------------------------------------

namespace {

double overlap_f1(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                  size_t n) {
    auto cand_counts = ngram_counts(cand, n);
    auto ref_counts = ngram_counts(ref, n);
    size_t cand_total = cand.size() + 1 >= n ? cand.size() + 1 - n : 0;
    size_t ref_total = ref.size() + 1 >= n ? ref.size() + 1 - n : 0;
    if (cand_total == 0 || ref_total == 0) return 0.0;
    size_t overlap = 0;
    for (const auto& [gram, count] : cand_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) overlap += std::min(count, it->second);
    }
    if (overlap == 0) return 0.0;
    double p = static_cast<double>(overlap) / static_cast<double>(cand_total);
    double r = static_cast<double>(overlap) / static_cast<double>(ref_total);
    return 2.0 * p * r / (p + r);
}

size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (size_t i = 1; i <= a.size(); ++i) {
        for (size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace

RougeScores rouge(const std::string& candidate, const std::string& reference) {
    auto cand = require_metric_tokens(candidate, "candidate");
    auto ref = require_metric_tokens(reference, "reference");
    RougeScores out;
    if (cand.empty() || ref.empty()) return out;
    out.rouge1 = overlap_f1(cand, ref, 1);
    out.rouge2 = overlap_f1(cand, ref, 2);
    size_t lcs = lcs_length(cand, ref);
    if (lcs > 0) {
        double p = static_cast<double>(lcs) / static_cast<double>(cand.size());
        double r = static_cast<double>(lcs) / static_cast<double>(ref.size());
        out.rougeL = 2.0 * p * r / (p + r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Embedding-based score
// ---------------------------------------------------------------------------

EmbedScore embed_score(const std::string& candidate, const std::string& reference,
                       EmbeddingClient& embed_client) {
    auto cand = require_metric_tokens(candidate, "candidate");
    auto ref = require_metric_tokens(reference, "reference");
    EmbedScore out;
    if (cand.empty() || ref.empty()) return out;

    auto cand_vecs = embed_client.embed_batch(cand);
    auto ref_vecs = embed_client.embed_batch(ref);

    double p_sum = 0.0;
    for (const auto& cv : cand_vecs) {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& rv : ref_vecs) best = std::max(best, cosine(cv, rv));
        p_sum += best;
    }
    double r_sum = 0.0;
    for (const auto& rv : ref_vecs) {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& cv : cand_vecs) best = std::max(best, cosine(rv, cv));
        r_sum += best;
    }
    // raw cosines can dip below zero on disjoint vocabulary; scores are
    // documented in [0, 1], so floor at 0
    out.precision = std::max(0.0, p_sum / static_cast<double>(cand_vecs.size()));
    out.recall = std::max(0.0, r_sum / static_cast<double>(ref_vecs.size()));
    if (out.precision + out.recall > 0)
        out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

json MetricReport::to_json() const {
    return json{{"bleu", bleu},     {"meteor", meteor}, {"embed_f1", embed_f1},
                {"rouge1", rouge1}, {"rouge2", rouge2}, {"rougeL", rougeL},
                {"average", average}};
}

MetricReport average_score(double bleu_score, double meteor_score, double embed_f1,
                           double rouge1_score, double rouge2_score, double rougeL_score) {
    const double components[] = {bleu_score,   meteor_score, embed_f1,
                                 rouge1_score, rouge2_score, rougeL_score};
    for (double c : components)
        if (!std::isfinite(c)) throw ArgumentError("average_score requires six finite components");
    MetricReport report;
    report.bleu = bleu_score;
    report.meteor = meteor_score;
    report.embed_f1 = embed_f1;
    report.rouge1 = rouge1_score;
    report.rouge2 = rouge2_score;
    report.rougeL = rougeL_score;
    report.average = (bleu_score + meteor_score + embed_f1 + rouge1_score + rouge2_score +
                      rougeL_score) / 6.0;
    return report;
}

// ---------------------------------------------------------------------------
// Agreement statistics
// ---------------------------------------------------------------------------

namespace {

void require_paired(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw ArgumentError("paired sequences differ in length: " + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()));
    if (a.size() < 3) throw ArgumentError("agreement statistics need at least 3 items");
}

bool is_constant(const std::vector<double>& v) {
    for (double x : v)
        if (x != v.front()) return false;
    return true;
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t i, size_t j) { return values[i] < values[j]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    require_paired(a, b);
    if (is_constant(a)) throw ArgumentError("pearson undefined: scores_a is constant");
    if (is_constant(b)) throw ArgumentError("pearson undefined: scores_b is constant");
    const double n = static_cast<double>(a.size());
    double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    return sab / std::sqrt(saa * sbb);
}

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    require_paired(a, b);
    if (is_constant(a)) throw ArgumentError("spearman undefined: scores_a is constant");
    if (is_constant(b)) throw ArgumentError("spearman undefined: scores_b is constant");
    return pearson_correlation(average_ranks(a), average_ranks(b));
}

double mean_absolute_error(const std::vector<double>& a, const std::vector<double>& b) {
    require_paired(a, b);
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum / static_cast<double>(a.size());
}

double icc_two_way_random(const Eigen::Ref<const Eigen::MatrixXd>& ratings, IccForm form) {
    const auto n = ratings.rows();  // items
    const auto k = ratings.cols();  // raters
    if (n < 2 || k < 2) throw ArgumentError("icc needs at least 2 items and 2 raters");

    const double grand = ratings.mean();
    Eigen::VectorXd row_means = ratings.rowwise().mean();
    Eigen::VectorXd col_means = ratings.colwise().mean();

    double ss_rows = static_cast<double>(k) * (row_means.array() - grand).square().sum();
    double ss_cols = static_cast<double>(n) * (col_means.array() - grand).square().sum();
    double ss_err = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < k; ++j) {
            double resid = ratings(i, j) - row_means[i] - col_means[j] + grand;
            ss_err += resid * resid;
        }

    double msr = ss_rows / static_cast<double>(n - 1);
    double msc = ss_cols / static_cast<double>(k - 1);
    double mse = ss_err / static_cast<double>((n - 1) * (k - 1));

    double nd = static_cast<double>(n), kd = static_cast<double>(k);
    double denom;
    if (form == IccForm::average_measures) {
        denom = msr + (msc - mse) / nd;
    } else {
        denom = msr + (kd - 1.0) * mse + kd * (msc - mse) / nd;
    }
    if (denom == 0.0) throw ArgumentError("icc undefined: no variance in ratings");
    return (msr - mse) / denom;
}

AgreementReport agreement(const std::vector<double>& a, const std::vector<double>& b,
                          const Eigen::MatrixXd* all_raters, IccForm form) {
    AgreementReport out;
    out.pearson = pearson_correlation(a, b);
    out.spearman = spearman_correlation(a, b);
    out.mae = mean_absolute_error(a, b);
    if (all_raters) {
        out.icc = icc_two_way_random(*all_raters, form);
    } else {
        Eigen::MatrixXd two(a.size(), 2);
        for (size_t i = 0; i < a.size(); ++i) {
            two(static_cast<Eigen::Index>(i), 0) = a[i];
            two(static_cast<Eigen::Index>(i), 1) = b[i];
        }
        out.icc = icc_two_way_random(two, form);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dataset statistics
// ---------------------------------------------------------------------------

json DatasetStats::to_json() const {
    return json{
        {"n_conversations", n_conversations},
        {"total_turns", total_turns},
        {"avg_turns", avg_turns},
        {"total_utterances", total_utterances},
        {"avg_utterances_per_conv", avg_utterances_per_conv},
        {"avg_words_per_utterance", avg_words_per_utterance},
        {"avg_conv_length_words", avg_conv_length_words},
        {"longest_conv_utterances", longest_conv_utterances},
        {"shortest_conv_utterances", shortest_conv_utterances},
        {"longest_conv_words", longest_conv_words},
        {"shortest_conv_words", shortest_conv_words},
        {"avg_topic_consistency", avg_topic_consistency},
        {"avg_semantic_similarity", avg_semantic_similarity},
        {"note", "topic consistency and semantic similarity use this pipeline's embedding-cosine "
                 "definitions; see README"}};
}

DatasetStats dataset_stats(const std::vector<Dialogue>& dialogues, EmbeddingClient& embed_client) {
    if (dialogues.empty()) throw ArgumentError("dataset_stats requires a non-empty collection");

    DatasetStats s;
    s.n_conversations = dialogues.size();
    s.shortest_conv_utterances = std::numeric_limits<size_t>::max();
    s.shortest_conv_words = std::numeric_limits<size_t>::max();

    size_t total_words = 0;
    double topic_sum = 0.0, semantic_sum = 0.0;

    for (const auto& d : dialogues) {
        if (!d.well_formed())
            throw ArgumentError("dataset_stats: dialogue " + d.dialogue_id + " is malformed");
        const size_t utts = d.utterances.size();
        size_t words = 0;
        std::vector<std::string> texts;
        texts.reserve(utts);
        for (const auto& u : d.utterances) {
            words += u.word_count();
            texts.push_back(u.text);
        }
        s.total_utterances += utts;
        s.total_turns += utts / 2;
        total_words += words;
        s.longest_conv_utterances = std::max(s.longest_conv_utterances, utts);
        s.shortest_conv_utterances = std::min(s.shortest_conv_utterances, utts);
        s.longest_conv_words = std::max(s.longest_conv_words, words);
        s.shortest_conv_words = std::min(s.shortest_conv_words, words);

        auto vectors = embed_client.embed_batch(texts);
        Embedding centroid = Embedding::Zero(vectors[0].size());
        for (const auto& v : vectors) centroid += v;
        centroid /= static_cast<double>(vectors.size());

        double topic = 0.0;
        for (const auto& v : vectors) topic += cosine(v, centroid);
        topic_sum += topic / static_cast<double>(vectors.size());

        double semantic = 0.0;
        for (size_t i = 0; i + 1 < vectors.size(); ++i)
            semantic += cosine(vectors[i], vectors[i + 1]);
        semantic_sum += semantic / static_cast<double>(vectors.size() - 1);
    }

    const double n = static_cast<double>(s.n_conversations);
    s.avg_turns = static_cast<double>(s.total_turns) / n;
    s.avg_utterances_per_conv = static_cast<double>(s.total_utterances) / n;
    s.avg_words_per_utterance =
        static_cast<double>(total_words) / static_cast<double>(s.total_utterances);
    s.avg_conv_length_words = static_cast<double>(total_words) / n;
    s.avg_topic_consistency = topic_sum / n;
    s.avg_semantic_similarity = semantic_sum / n;
    return s;
}

}  // namespace jic
