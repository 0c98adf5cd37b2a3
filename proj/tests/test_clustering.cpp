#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "helpers.hpp"
#include "jic/clustering.hpp"

using namespace jic;

namespace {

// within-cluster sum of squares, for the Lloyd-descent property
double wcss(const Eigen::MatrixXd& points, const std::vector<int>& labels) {
    int k = 0;
    for (int lab : labels) k = std::max(k, lab + 1);
    Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<double> counts(static_cast<size_t>(k), 0.0);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        centroids.row(labels[static_cast<size_t>(i)]) += points.row(i);
        counts[static_cast<size_t>(labels[i])] += 1.0;
    }
    for (int c = 0; c < k; ++c) centroids.row(c) /= counts[static_cast<size_t>(c)];
    double total = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        total += (points.row(i) - centroids.row(labels[static_cast<size_t>(i)])).squaredNorm();
    return total;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, int> fwd, rev;
    for (size_t i = 0; i < a.size(); ++i) {
        auto [fit, fnew] = fwd.emplace(a[i], b[i]);
        if (!fnew && fit->second != b[i]) return false;
        auto [rit, rnew] = rev.emplace(b[i], a[i]);
        if (!rnew && rit->second != a[i]) return false;
    }
    return true;
}

}  // namespace

TEST_SUITE("clustering") {

TEST_CASE("silhouette: two tight far-separated pairs score above 0.9") {
    Eigen::MatrixXd points(4, 2);
    points << 0, 0, 0.1, 0, 100, 0, 100.1, 0;
    double s = silhouette(points, {0, 0, 1, 1});
    CHECK(s > 0.9);
    CHECK(s == doctest::Approx(jt::silhouette_oracle(points, {0, 0, 1, 1})).epsilon(1e-12));
}

TEST_CASE("silhouette: single cluster or size mismatch are argument errors") {
    Eigen::MatrixXd points(3, 2);
    points << 0, 0, 1, 0, 2, 0;
    CHECK_THROWS_AS(silhouette(points, {0, 0, 0}), ArgumentError);
    CHECK_THROWS_AS(silhouette(points, {0, 1}), ArgumentError);
}

TEST_CASE("silhouette: singleton cluster contributes exactly zero") {
    Eigen::MatrixXd points(3, 1);
    points << 0, 1, 10;
    // clusters {0,1} and the singleton {10}: the singleton's term is 0
    double with_singleton = silhouette(points, {0, 0, 1});
    // recompute dropping the singleton's contribution by hand
    // a(0)=1, b(0)=10 -> 9/10 ; a(1)=1, b(1)=9 -> 8/9 ; singleton 0
    double expected = (9.0 / 10.0 + 8.0 / 9.0 + 0.0) / 3.0;
    CHECK(with_singleton == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("silhouette: invariant under label permutation") {
    auto blobs = jt::make_blobs({5, 4, 3}, 3, 12.0, 99);
    std::vector<int> permuted = blobs.labels;
    for (int& lab : permuted) lab = (lab + 1) % 3;
    CHECK(silhouette(blobs.points, blobs.labels) ==
          doctest::Approx(silhouette(blobs.points, permuted)).epsilon(1e-12));
}

TEST_CASE("silhouette: matches the direct-formula oracle on random instances") {
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 3 + static_cast<int>(rng.bounded(30));
        const int d = 1 + static_cast<int>(rng.bounded(6));
        const int k = 2 + static_cast<int>(rng.bounded(3));
        Eigen::MatrixXd points(n, d);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) points(i, j) = rng.uniform() * 10.0;
        std::vector<int> labels(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) labels[static_cast<size_t>(i)] = i < k ? i : static_cast<int>(rng.bounded(k));
        CHECK(silhouette(points, labels) ==
              doctest::Approx(jt::silhouette_oracle(points, labels)).epsilon(1e-9));
    }
}

TEST_CASE("kmeans: recovers two planted blobs") {
    auto blobs = jt::make_blobs({6, 5}, 3, 15.0, 41);
    auto labels = kmeans(blobs.points, 2, 7);
    CHECK(same_partition(labels, blobs.labels));
}

TEST_CASE("kmeans: k equal to n gives singletons; bad k is an error") {
    Eigen::MatrixXd points(4, 2);
    points << 0, 0, 5, 0, 0, 5, 5, 5;
    auto labels = kmeans(points, 4, 3);
    std::set<int> distinct(labels.begin(), labels.end());
    CHECK(distinct.size() == 4);
    CHECK_THROWS_AS(kmeans(points, 1, 3), ArgumentError);
    CHECK_THROWS_AS(kmeans(points, 5, 3), ArgumentError);
}

TEST_CASE("kmeans: deterministic under seed") {
    auto blobs = jt::make_blobs({8, 7, 6}, 4, 12.0, 5);
    CHECK(kmeans(blobs.points, 3, 11) == kmeans(blobs.points, 3, 11));
}

TEST_CASE("kmeans: labels never leave an assignment that worsens WCSS vs planted") {
    // Lloyd descends: starting labels from a converged run re-run must not
    // increase the objective
    auto blobs = jt::make_blobs({10, 10}, 2, 10.0, 17);
    auto labels = kmeans(blobs.points, 2, 1);
    CHECK(wcss(blobs.points, labels) <= wcss(blobs.points, blobs.labels) + 1e-9);
}

TEST_CASE("kmeans: converged labels are a Lloyd fixpoint") {
    SplitMix64 rng(271);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 6 + static_cast<int>(rng.bounded(25));
        const int d = 1 + static_cast<int>(rng.bounded(5));
        const int k = 2 + static_cast<int>(rng.bounded(4));
        Eigen::MatrixXd points(n, d);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j) points(i, j) = rng.uniform() * 10.0;
        auto labels = kmeans(points, k, rng.next());

        // one more assignment sweep against the label centroids changes nothing
        int k_seen = 0;
        for (int lab : labels) k_seen = std::max(k_seen, lab + 1);
        Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(k_seen, d);
        std::vector<double> counts(static_cast<size_t>(k_seen), 0.0);
        for (int i = 0; i < n; ++i) {
            centroids.row(labels[static_cast<size_t>(i)]) += points.row(i);
            counts[static_cast<size_t>(labels[i])] += 1.0;
        }
        for (int c = 0; c < k_seen; ++c) centroids.row(c) /= counts[static_cast<size_t>(c)];
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (points.row(i) - centroids.row(0)).squaredNorm();
            for (int c = 1; c < k_seen; ++c) {
                double dist = (points.row(i) - centroids.row(c)).squaredNorm();
                if (dist < best_d) {
                    best_d = dist;
                    best = c;
                }
            }
            CHECK(best == labels[static_cast<size_t>(i)]);
        }
    }
}

TEST_CASE("optimal_k: finds the planted blob count") {
    auto three = jt::make_blobs({7, 6, 5}, 3, 14.0, 23);
    CHECK(optimal_k(three.points, 8, 9) == 3);
    auto two = jt::make_blobs({7, 6}, 3, 14.0, 29);
    CHECK(optimal_k(two.points, 8, 9) == 2);
}

TEST_CASE("optimal_k: k_max 2 pins the answer, tiny inputs are errors") {
    auto blobs = jt::make_blobs({5, 4, 4}, 2, 14.0, 31);
    std::map<int, double> scores;
    CHECK(optimal_k(blobs.points, 2, 9, &scores) == 2);
    CHECK(scores.size() == 1);
    Eigen::MatrixXd two(2, 2);
    two << 0, 0, 1, 1;
    CHECK_THROWS_AS(optimal_k(two, 8, 9), ArgumentError);
}

TEST_CASE("agglomerative: recovers planted blobs and handles degenerate k") {
    auto blobs = jt::make_blobs({6, 5}, 3, 15.0, 43);
    CHECK(same_partition(agglomerative(blobs.points, 2), blobs.labels));

    Eigen::MatrixXd points(4, 1);
    points << 0, 10, 20, 30;
    auto singles = agglomerative(points, 4);
    std::set<int> distinct(singles.begin(), singles.end());
    CHECK(distinct.size() == 4);
}

TEST_CASE("agglomerative: four collinear equispaced points split pairwise under ward") {
    Eigen::MatrixXd points(4, 1);
    points << 0, 1, 2, 3;
    // hand trace: all adjacent gaps tie at 1; the (0,1) pair merges first by
    // the index tie-break, then (2,3) at cost below the cross-merge
    auto labels = agglomerative(points, 2, Linkage::ward);
    CHECK(labels == std::vector<int>{0, 0, 1, 1});
}

TEST_CASE("agglomerative: alternative linkages produce valid k-partitions") {
    auto blobs = jt::make_blobs({5, 5, 4}, 3, 14.0, 47);
    for (auto linkage : {Linkage::single, Linkage::complete, Linkage::average}) {
        auto labels = agglomerative(blobs.points, 3, linkage);
        std::set<int> distinct(labels.begin(), labels.end());
        CHECK(distinct.size() == 3);
        CHECK(same_partition(labels, blobs.labels));
    }
}

TEST_CASE("retain_prominent: small authors bypass clustering") {
    Eigen::MatrixXd one(1, 4);
    one.setRandom();
    auto outcome = retain_prominent({"e1"}, one, {});
    CHECK(outcome.k_star == 1);
    CHECK(outcome.retained_ids == std::vector<std::string>{"e1"});

    Eigen::MatrixXd two(2, 4);
    two.setRandom();
    auto pair_outcome = retain_prominent({"e1", "e2"}, two, {});
    CHECK(pair_outcome.retained_ids.size() == 2);
}

TEST_CASE("retain_prominent: keeps the larger planted cluster") {
    auto blobs = jt::make_blobs({3, 2}, 3, 15.0, 53);
    std::vector<std::string> ids{"a", "b", "c", "d", "e"};
    auto outcome = retain_prominent(ids, blobs.points, {});
    CHECK(outcome.retained_ids == std::vector<std::string>{"a", "b", "c"});
    CHECK(outcome.k_star == 2);
}

TEST_CASE("retain_prominent: equal-size tie goes to the cluster of the earliest entry") {
    // two 2-point blobs plus forced k*=2 via the sweep; first-ordered entry
    // sits in blob 0
    auto blobs = jt::make_blobs({2, 2}, 2, 15.0, 59);
    std::vector<std::string> ids{"first", "second", "third", "fourth"};
    auto outcome = retain_prominent(ids, blobs.points, {});
    REQUIRE(outcome.retained_ids.size() == 2);
    CHECK(outcome.retained_ids[0] == "first");
}

TEST_CASE("retain_prominent: alignment mismatch is an argument error") {
    Eigen::MatrixXd points(3, 2);
    points.setRandom();
    CHECK_THROWS_AS(retain_prominent({"a", "b"}, points, {}), ArgumentError);
}

TEST_CASE("retain_prominent: retained set is permutation-invariant on separated blobs") {
    SplitMix64 rng(73);
    for (int trial = 0; trial < 10; ++trial) {
        auto blobs = jt::make_blobs({5, 3}, 3, 15.0, rng.next());
        const size_t n = static_cast<size_t>(blobs.points.rows());
        std::vector<std::string> ids;
        for (size_t i = 0; i < n; ++i) ids.push_back("e" + std::to_string(i));
        auto base = retain_prominent(ids, blobs.points, {});

        std::vector<size_t> perm(n);
        std::iota(perm.begin(), perm.end(), size_t{0});
        deterministic_shuffle(perm, rng.next());
        Eigen::MatrixXd shuffled(blobs.points.rows(), blobs.points.cols());
        std::vector<std::string> shuffled_ids(n);
        for (size_t i = 0; i < n; ++i) {
            shuffled.row(static_cast<Eigen::Index>(i)) =
                blobs.points.row(static_cast<Eigen::Index>(perm[i]));
            shuffled_ids[i] = ids[perm[i]];
        }
        auto permuted = retain_prominent(shuffled_ids, shuffled, {});
        std::set<std::string> expected(base.retained_ids.begin(), base.retained_ids.end());
        std::set<std::string> got(permuted.retained_ids.begin(), permuted.retained_ids.end());
        CHECK(got == expected);
    }
}

TEST_CASE("retain_prominent: output is a subset and order-stable") {
    auto blobs = jt::make_blobs({4, 3, 2}, 3, 12.0, 61);
    std::vector<std::string> ids;
    for (int i = 0; i < 9; ++i) ids.push_back("e" + std::to_string(i));
    auto outcome = retain_prominent(ids, blobs.points, {});
    CHECK(!outcome.retained_ids.empty());
    for (const auto& id : outcome.retained_ids)
        CHECK(std::find(ids.begin(), ids.end(), id) != ids.end());
}

}  // TEST_SUITE
