#include "jic/trait_filter.hpp"

#include <cmath>
#include <limits>

namespace jic {

TraitNorm trait_norm_from_string(const std::string& name) {
    if (name == "l2") return TraitNorm::l2;
    if (name == "l1") return TraitNorm::l1;
    if (name == "linf") return TraitNorm::linf;
    throw ArgumentError("unknown trait norm: " + name);
}

std::string to_string(TraitNorm norm) {
    switch (norm) {
        case TraitNorm::l2: return "l2";
        case TraitNorm::l1: return "l1";
        case TraitNorm::linf: return "linf";
    }
    return "?";
}

ThresholdMode threshold_mode_from_string(const std::string& name) {
    if (name == "stddev") return ThresholdMode::stddev;
    if (name == "absolute") return ThresholdMode::absolute;
    throw ArgumentError("unknown threshold mode: " + name);
}

std::string to_string(ThresholdMode mode) {
    return mode == ThresholdMode::stddev ? "stddev" : "absolute";
}

double trait_distance(const TraitVector& a, const TraitVector& b, TraitNorm norm) {
    Eigen::Matrix<double, 5, 1> diff = a.as_vector() - b.as_vector();
    switch (norm) {
        case TraitNorm::l2: return diff.norm();
        case TraitNorm::l1: return diff.lpNorm<1>();
        case TraitNorm::linf: return diff.lpNorm<Eigen::Infinity>();
    }
    return diff.norm();
}

const TraitVector* AuthorProfile::traits_of(const std::string& entry_id) const {
    for (size_t i = 0; i < entry_ids.size(); ++i)
        if (entry_ids[i] == entry_id) return &entry_traits[i];
    return nullptr;
}

namespace {

TraitVector mean_of(const std::vector<TraitVector>& traits) {
    Eigen::Matrix<double, 5, 1> sum = Eigen::Matrix<double, 5, 1>::Zero();
    for (const auto& t : traits) sum += t.as_vector();
    return TraitVector::from_vector(sum / static_cast<double>(traits.size()));
}

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;  // population
};

MeanStd population_stats(const std::vector<double>& values) {
    MeanStd out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(values.size()));
    return out;
}

void check_parameter(double value, const char* name) {
    if (std::isnan(value) || value == -std::numeric_limits<double>::infinity())
        throw ArgumentError(std::string(name) + " must not be NaN or -inf");
}

}  // namespace

AuthorProfile make_profile(const std::string& author_id, std::vector<std::string> entry_ids,
                           std::vector<TraitVector> entry_traits, TraitNorm norm) {
    if (entry_ids.empty() || entry_ids.size() != entry_traits.size())
        throw ArgumentError("profile for " + author_id + " needs aligned, non-empty traits");
    AuthorProfile p;
    p.author_id = author_id;
    p.entry_ids = std::move(entry_ids);
    p.entry_traits = std::move(entry_traits);
    p.mean_traits = mean_of(p.entry_traits);
    p.deviations.reserve(p.entry_traits.size());
    for (const auto& t : p.entry_traits)
        p.deviations.push_back(trait_distance(t, p.mean_traits, norm));
    return p;
}

AuthorProfile score_author(const std::string& author_id,
                           const std::vector<const JournalEntry*>& entries, TraitClient& client,
                           TraitNorm norm) {
    if (entries.empty()) throw ArgumentError("score_author: no entries for " + author_id);
    std::vector<std::string> ids;
    std::vector<TraitVector> traits;
    ids.reserve(entries.size());
    traits.reserve(entries.size());
    for (const auto* e : entries) {
        ids.push_back(e->entry_id);
        try {
            traits.push_back(client.classify(e->body));
        } catch (const TransportError& ex) {
            throw TransportError("trait scoring failed for entry " + e->entry_id + ": " + ex.what(),
                                 ex.attempts);
        }
    }
    return make_profile(author_id, std::move(ids), std::move(traits), norm);
}

double journal_threshold(const AuthorProfile& profile, double alpha, ThresholdMode mode) {
    check_parameter(alpha, "alpha");
    if (mode == ThresholdMode::absolute) return alpha;
    MeanStd stats = population_stats(profile.deviations);
    return stats.mean + alpha * stats.stddev;
}

std::vector<std::string> filter_journals(const AuthorProfile& profile, double alpha,
                                         ThresholdMode mode) {
    check_parameter(alpha, "alpha");
    if (profile.entry_ids.size() == 1) return profile.entry_ids;

    const double threshold = journal_threshold(profile, alpha, mode);
    std::vector<std::string> retained;
    for (size_t i = 0; i < profile.entry_ids.size(); ++i)
        if (profile.deviations[i] <= threshold) retained.push_back(profile.entry_ids[i]);
    return retained;
}

AuthorFilterResult filter_authors(const std::vector<AuthorProfile>& profiles, double beta,
                                  ThresholdMode mode, TraitNorm norm) {
    check_parameter(beta, "beta");
    if (profiles.empty()) throw ArgumentError("filter_authors: no profiles");

    AuthorFilterResult out;
    std::vector<TraitVector> means;
    means.reserve(profiles.size());
    for (const auto& p : profiles) {
        means.push_back(p.mean_traits);
        out.global.author_ids.push_back(p.author_id);
    }
    out.global.mean_traits = mean_of(means);

    out.global.author_deviations.reserve(profiles.size());
    for (const auto& m : means)
        out.global.author_deviations.push_back(trait_distance(m, out.global.mean_traits, norm));

    if (mode == ThresholdMode::absolute) {
        out.global.threshold = beta;
    } else {
        MeanStd stats = population_stats(out.global.author_deviations);
        out.global.threshold = stats.mean + beta * stats.stddev;
    }
    for (size_t i = 0; i < profiles.size(); ++i)
        if (out.global.author_deviations[i] <= out.global.threshold)
            out.retained_authors.push_back(profiles[i].author_id);
    return out;
}

}  // namespace jic
