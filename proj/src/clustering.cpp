#include "jic/clustering.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "jic/rng.hpp"

namespace jic {

Linkage linkage_from_string(const std::string& name) {
    if (name == "ward") return Linkage::ward;
    if (name == "single") return Linkage::single;
    if (name == "complete") return Linkage::complete;
    if (name == "average") return Linkage::average;
    throw ArgumentError("unknown linkage: " + name);
}

std::string to_string(Linkage linkage) {
    switch (linkage) {
        case Linkage::ward: return "ward";
        case Linkage::single: return "single";
        case Linkage::complete: return "complete";
        case Linkage::average: return "average";
    }
    return "?";
}

namespace {

using Matrix = Eigen::MatrixXd;

// Compacts arbitrary non-negative labels to 0..k-1 preserving relative order
// of first appearance. Keeps silhouette invariant under relabeling.
std::vector<int> compact_labels(const std::vector<int>& labels, int* k_out) {
    std::map<int, int> remap;
    std::vector<int> out(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) {
        auto [it, _] = remap.emplace(labels[i], static_cast<int>(remap.size()));
        out[i] = it->second;
    }
    *k_out = static_cast<int>(remap.size());
    return out;
}

}  // namespace

double silhouette(const Eigen::Ref<const Matrix>& points, const std::vector<int>& labels) {
    const auto n = static_cast<size_t>(points.rows());
    if (labels.size() != n)
        throw ArgumentError("silhouette: " + std::to_string(n) + " points but " +
                            std::to_string(labels.size()) + " labels");
    if (n < 3) throw ArgumentError("silhouette requires at least 3 points");
    int k = 0;
    std::vector<int> lab = compact_labels(labels, &k);
    if (k < 2) throw ArgumentError("silhouette requires at least 2 clusters");

    std::vector<size_t> cluster_size(k, 0);
    for (int c : lab) cluster_size[c]++;

    double total = 0.0;
    std::vector<double> mean_dist(k);
    for (size_t i = 0; i < n; ++i) {
        std::fill(mean_dist.begin(), mean_dist.end(), 0.0);
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            mean_dist[lab[j]] += (points.row(i) - points.row(j)).norm();
        }
        const int own = lab[i];
        if (cluster_size[own] == 1) continue;  // singleton contributes 0
        double a = mean_dist[own] / static_cast<double>(cluster_size[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == own || cluster_size[c] == 0) continue;
            b = std::min(b, mean_dist[c] / static_cast<double>(cluster_size[c]));
        }
        double denom = std::max(a, b);
        if (denom > 0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

std::vector<int> kmeans(const Eigen::Ref<const Matrix>& points, int k, uint64_t seed) {
    const auto n = points.rows();
    if (k < 2 || k > n)
        throw ArgumentError("kmeans: k=" + std::to_string(k) + " out of range for n=" +
                            std::to_string(n));

    // Greedy farthest-point seeding from a seeded random first center.
    SplitMix64 rng(seed);
    std::vector<Eigen::Index> centers;
    centers.push_back(static_cast<Eigen::Index>(rng.bounded(static_cast<uint64_t>(n))));
    Eigen::VectorXd nearest_sq =
        (points.rowwise() - points.row(centers[0])).rowwise().squaredNorm();
    while (static_cast<int>(centers.size()) < k) {
        Eigen::Index farthest = 0;
        nearest_sq.maxCoeff(&farthest);
        centers.push_back(farthest);
        nearest_sq =
            nearest_sq.cwiseMin((points.rowwise() - points.row(farthest)).rowwise().squaredNorm());
    }

    Matrix centroids(k, points.cols());
    for (int c = 0; c < k; ++c) centroids.row(c) = points.row(centers[c]);

    std::vector<int> labels(static_cast<size_t>(n), -1);
    for (int iter = 0; iter < 300; ++iter) {
        bool changed = false;
        // assignment; equal distances go to the lower centroid index
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_sq = (points.row(i) - centroids.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                double d = (points.row(i) - centroids.row(c)).squaredNorm();
                if (d < best_sq) {
                    best_sq = d;
                    best = c;
                }
            }
            if (labels[static_cast<size_t>(i)] != best) {
                labels[static_cast<size_t>(i)] = best;
                changed = true;
            }
        }
        if (!changed) break;

        // update
        centroids.setZero();
        std::vector<Eigen::Index> counts(static_cast<size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            centroids.row(labels[static_cast<size_t>(i)]) += points.row(i);
            counts[static_cast<size_t>(labels[i])]++;
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] > 0) {
                centroids.row(c) /= static_cast<double>(counts[static_cast<size_t>(c)]);
            } else {
                // re-seed an empty cluster from the point farthest from its
                // own centroid
                Eigen::Index worst = 0;
                double worst_sq = -1.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    double d = (points.row(i) - centroids.row(labels[static_cast<size_t>(i)]))
                                   .squaredNorm();
                    if (d > worst_sq) {
                        worst_sq = d;
                        worst = i;
                    }
                }
                centroids.row(c) = points.row(worst);
                labels[static_cast<size_t>(worst)] = c;
            }
        }
    }
    int k_seen = 0;
    return compact_labels(labels, &k_seen);
}

int optimal_k(const Eigen::Ref<const Matrix>& points, int k_max, uint64_t seed,
              std::map<int, double>* scores_out) {
    const auto n = points.rows();
    if (n < 3) throw ArgumentError("optimal_k requires at least 3 points");
    int upper = std::min<int>(k_max, static_cast<int>(n) - 1);
    if (upper < 2) upper = 2;
    int best_k = 2;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int k = 2; k <= upper; ++k) {
        double s = silhouette(points, kmeans(points, k, seed));
        if (scores_out) (*scores_out)[k] = s;
        if (s > best_score) {  // strict: ties stay with the smaller k
            best_score = s;
            best_k = k;
        }
    }
    return best_k;
}

std::vector<int> agglomerative(const Eigen::Ref<const Matrix>& points, int k, Linkage linkage) {
    const auto n = static_cast<size_t>(points.rows());
    if (k < 2 || static_cast<size_t>(k) > n)
        throw ArgumentError("agglomerative: k=" + std::to_string(k) + " out of range for n=" +
                            std::to_string(n));

    // Pairwise starting distances: squared Euclidean for Ward, plain
    // Euclidean otherwise. Lance-Williams updates keep them consistent.
    const bool squared = (linkage == Linkage::ward);
    Matrix dist(n, n);
    for (size_t i = 0; i < n; ++i) {
        dist(i, i) = 0.0;
        for (size_t j = i + 1; j < n; ++j) {
            double d2 = (points.row(i) - points.row(j)).squaredNorm();
            double d = squared ? d2 : std::sqrt(d2);
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }

    std::vector<bool> active(n, true);
    std::vector<size_t> size(n, 1);
    // representative index of cluster slot i is the smallest original point
    // index it contains; with merges into the lower slot this is the slot
    // index itself
    std::vector<int> member(n);
    std::iota(member.begin(), member.end(), 0);

    size_t clusters = n;
    while (clusters > static_cast<size_t>(k)) {
        size_t best_i = 0, best_j = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (size_t j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                if (dist(i, j) < best_d) {  // strict: ties keep smallest (i, j)
                    best_d = dist(i, j);
                    best_i = i;
                    best_j = j;
                }
            }
        }

        const double na = static_cast<double>(size[best_i]);
        const double nb = static_cast<double>(size[best_j]);
        for (size_t c = 0; c < n; ++c) {
            if (!active[c] || c == best_i || c == best_j) continue;
            const double dac = dist(best_i, c);
            const double dbc = dist(best_j, c);
            const double nc = static_cast<double>(size[c]);
            double merged = 0.0;
            switch (linkage) {
                case Linkage::single: merged = std::min(dac, dbc); break;
                case Linkage::complete: merged = std::max(dac, dbc); break;
                case Linkage::average: merged = (na * dac + nb * dbc) / (na + nb); break;
                case Linkage::ward: {
                    const double t = na + nb + nc;
                    merged = ((na + nc) * dac + (nb + nc) * dbc - nc * dist(best_i, best_j)) / t;
                    break;
                }
            }
            dist(best_i, c) = merged;
            dist(c, best_i) = merged;
        }
        size[best_i] += size[best_j];
        active[best_j] = false;
        for (size_t p = 0; p < n; ++p)
            if (member[p] == static_cast<int>(best_j)) member[p] = static_cast<int>(best_i);
        --clusters;
    }

    int k_seen = 0;
    return compact_labels(member, &k_seen);
}

ClusteringOutcome retain_prominent(const std::vector<std::string>& entry_ids,
                                   const Eigen::Ref<const Matrix>& embeddings,
                                   const ClusteringConfig& cfg) {
    const auto n = entry_ids.size();
    if (static_cast<Eigen::Index>(n) != embeddings.rows())
        throw ArgumentError("retain_prominent: " + std::to_string(n) + " entries but " +
                            std::to_string(embeddings.rows()) + " embeddings");
    if (n == 0) throw ArgumentError("retain_prominent: no entries");

    ClusteringOutcome out;
    if (n <= 2) {
        out.k_star = 1;
        out.labels.assign(n, 0);
        out.retained_ids = entry_ids;
        return out;
    }

    Matrix work = embeddings;
    if (cfg.normalize) {
        for (Eigen::Index i = 0; i < work.rows(); ++i) {
            double norm = work.row(i).norm();
            if (norm > 0) work.row(i) /= norm;
        }
    }

    out.k_star = optimal_k(work, cfg.k_max, cfg.seed, &out.silhouette_by_k);
    out.labels = agglomerative(work, out.k_star, cfg.linkage);

    std::vector<size_t> counts(static_cast<size_t>(out.k_star), 0);
    for (int lab : out.labels) counts[static_cast<size_t>(lab)]++;
    // by construction labels are numbered by first appearance, so scanning
    // clusters in index order realizes the earliest-entry tie-break
    int winner = 0;
    for (int c = 1; c < out.k_star; ++c)
        if (counts[static_cast<size_t>(c)] > counts[static_cast<size_t>(winner)]) winner = c;

    for (size_t i = 0; i < n; ++i)
        if (out.labels[i] == winner) out.retained_ids.push_back(entry_ids[i]);
    return out;
}

}  // namespace jic
