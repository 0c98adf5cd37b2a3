#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "jic/errors.hpp"

namespace jic {

// Points are rows of a dense matrix throughout this module; all distances
// are Euclidean in the raw embedding space unless ClusteringConfig says to
// unit-normalize first.

enum class Linkage { ward, single, complete, average };

Linkage linkage_from_string(const std::string& name);
std::string to_string(Linkage linkage);

struct ClusteringConfig {
    int k_max = 10;
    Linkage linkage = Linkage::ward;
    uint64_t seed = 0;
    bool normalize = false;  // unit-normalize rows before clustering
};

struct ClusteringOutcome {
    std::vector<int> labels;              // in [0, k_star)
    int k_star = 1;
    std::map<int, double> silhouette_by_k;
    std::vector<std::string> retained_ids;  // members of the largest cluster
};

// Mean over points of (b - a) / max(a, b); singleton-cluster points
// contribute 0. Labels may be any non-negative ints; at least two distinct
// values and three points required.
double silhouette(const Eigen::Ref<const Eigen::MatrixXd>& points, const std::vector<int>& labels);

// Lloyd iterations to an assignment fixpoint (max 300 sweeps) from greedy
// farthest-point seeding off a seeded random first center. Empty clusters
// are re-seeded from the point farthest from its centroid. Deterministic
// under seed.
std::vector<int> kmeans(const Eigen::Ref<const Eigen::MatrixXd>& points, int k, uint64_t seed);

// argmax of silhouette(kmeans(points, k)) over k in [2, min(k_max, n-1)],
// ties toward smaller k. `scores_out`, when given, receives every S(k).
int optimal_k(const Eigen::Ref<const Eigen::MatrixXd>& points, int k_max, uint64_t seed,
              std::map<int, double>* scores_out = nullptr);

// Bottom-up merging to exactly k clusters under the configured linkage
// (Lance-Williams updates). Merge ties break toward the smallest
// (i, j) pair of cluster representatives, a representative being the
// smallest point index in the cluster. Output labels are numbered by first
// point occurrence.
std::vector<int> agglomerative(const Eigen::Ref<const Eigen::MatrixXd>& points, int k,
                               Linkage linkage = Linkage::ward);

// Per-author retention: authors with <= 2 entries bypass clustering and
// keep everything (k_star = 1); otherwise k* comes from the K-Means
// silhouette sweep, final labels from agglomerative clustering, and the
// largest cluster is retained. Size ties go to the cluster containing the
// earliest entry in corpus order.
ClusteringOutcome retain_prominent(const std::vector<std::string>& entry_ids,
                                   const Eigen::Ref<const Eigen::MatrixXd>& embeddings,
                                   const ClusteringConfig& cfg);

}  // namespace jic
