#pragma once

// Shared fixtures, stub clients, and independent oracles for the test
// suites. Oracles here re-derive results straight from the definitions and
// must stay independent of the library implementations they check.

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "jic/clients.hpp"
#include "jic/dialogue.hpp"
#include "jic/rng.hpp"

namespace jt {

namespace fs = std::filesystem;

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = fs::temp_directory_path();
        for (int i = 0; i < 10000; ++i) {
            fs::path candidate = base / (tag + "-" + std::to_string(::getpid()) + "-" +
                                         std::to_string(counter_++));
            std::error_code ec;
            if (fs::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw std::runtime_error("cannot create temp dir");
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    static inline std::atomic<int> counter_{0};
    fs::path path_;
};

// --- planted blobs -----------------------------------------------------------

struct PlantedBlobs {
    Eigen::MatrixXd points;
    std::vector<int> labels;         // planted assignment
    std::vector<size_t> blob_sizes;
};

// Well-separated Gaussian blobs (unit sigma, centers >= `separation`
// apart on a simplex-ish layout).
inline PlantedBlobs make_blobs(const std::vector<size_t>& sizes, int dim, double separation,
                               uint64_t seed) {
    jic::SplitMix64 rng(seed);
    PlantedBlobs out;
    out.blob_sizes = sizes;
    size_t total = 0;
    for (size_t s : sizes) total += s;
    out.points.resize(static_cast<Eigen::Index>(total), dim);
    Eigen::Index row = 0;
    for (size_t b = 0; b < sizes.size(); ++b) {
        Eigen::VectorXd center = Eigen::VectorXd::Zero(dim);
        center[static_cast<Eigen::Index>(b % static_cast<size_t>(dim))] =
            separation * static_cast<double>(1 + b);
        for (size_t i = 0; i < sizes[b]; ++i, ++row) {
            for (int d = 0; d < dim; ++d) out.points(row, d) = center[d] + rng.gaussian();
            out.labels.push_back(static_cast<int>(b));
        }
    }
    return out;
}

// --- direct-formula oracles ---------------------------------------------------

// O(n^2) silhouette straight from the definition, no shared code with the
// library implementation.
inline double silhouette_oracle(const Eigen::MatrixXd& points, const std::vector<int>& labels) {
    const auto n = static_cast<size_t>(points.rows());
    int k = 0;
    for (int lab : labels) k = std::max(k, lab + 1);
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        std::vector<double> sum(static_cast<size_t>(k), 0.0);
        std::vector<size_t> count(static_cast<size_t>(k), 0);
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            sum[static_cast<size_t>(labels[j])] += (points.row(static_cast<Eigen::Index>(i)) -
                                                    points.row(static_cast<Eigen::Index>(j)))
                                                       .norm();
            count[static_cast<size_t>(labels[j])]++;
        }
        const auto own = static_cast<size_t>(labels[i]);
        if (count[own] == 0) continue;  // singleton: s(i) = 0
        double a = sum[own] / static_cast<double>(count[own]);
        double b = std::numeric_limits<double>::infinity();
        for (size_t c = 0; c < static_cast<size_t>(k); ++c) {
            if (c == own || count[c] == 0) continue;
            b = std::min(b, sum[c] / static_cast<double>(count[c]));
        }
        double m = std::max(a, b);
        if (m > 0) total += (b - a) / m;
    }
    return total / static_cast<double>(n);
}

// Brute-force greedy MMR from the recurrence definition.
inline std::vector<size_t> mmr_oracle(const Eigen::VectorXd& query,
                                      const std::vector<Eigen::VectorXd>& chunks, size_t k,
                                      double lambda) {
    auto cos = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        double na = a.norm(), nb = b.norm();
        return (na == 0 || nb == 0) ? 0.0 : a.dot(b) / (na * nb);
    };
    std::vector<size_t> selected;
    std::vector<bool> used(chunks.size(), false);
    while (selected.size() < std::min(k, chunks.size())) {
        double best_score = -1e300;
        size_t best = chunks.size();
        for (size_t i = 0; i < chunks.size(); ++i) {
            if (used[i]) continue;
            double redundancy = 0.0;
            for (size_t s : selected) redundancy = std::max(redundancy, cos(chunks[i], chunks[s]));
            if (selected.empty()) redundancy = 0.0;
            double score = lambda * cos(query, chunks[i]) - (1.0 - lambda) * redundancy;
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        used[best] = true;
        selected.push_back(best);
    }
    return selected;
}

// --- stub chat clients ---------------------------------------------------------

// Well-formed 18-line completion whose utterance texts are derived from a
// label, for scripted tests.
inline std::string canned_completion(const std::string& label = "t") {
    std::string out;
    for (int i = 0; i < 18; ++i) {
        out += (i % 2 == 0) ? "Author 1: " : "Author 2: ";
        out += "Utterance " + std::to_string(i + 1) + " about " + label + ".";
        out += "\n";
    }
    return out;
}

class ScriptedChatClient : public jic::ChatClient {
public:
    explicit ScriptedChatClient(std::string script) : script_(std::move(script)) {}
    std::string complete(const std::string&, const jic::DecodeSettings&) override {
        calls++;
        return script_;
    }
    std::atomic<int> calls{0};

private:
    std::string script_;
};

// Delegates to the deterministic offline backend but counts calls and can
// produce malformed output for chosen prompts.
class CountingChatClient : public jic::ChatClient {
public:
    explicit CountingChatClient(uint64_t seed = 0) : inner_(seed) {}
    std::string complete(const std::string& prompt, const jic::DecodeSettings& d) override {
        calls++;
        for (const auto& marker : malformed_markers)
            if (prompt.find(marker) != std::string::npos) return "Author 1: only one line.";
        return inner_.complete(prompt, d);
    }
    std::atomic<int> calls{0};
    std::vector<std::string> malformed_markers;

private:
    jic::TemplateChatClient inner_;
};

// --- dialogue fixtures ----------------------------------------------------------

inline jic::Dialogue make_dialogue(size_t utterances = 16, const std::string& id = "d1",
                                   const std::string& text_prefix = "hello there friend") {
    jic::Dialogue d;
    d.dialogue_id = id;
    d.author_pair = {"a1", "a2"};
    d.source_entries = {"e1", "e2"};
    for (size_t i = 0; i < utterances; ++i) {
        jic::Utterance u;
        u.role = (i % 2 == 0) ? jic::Role::user : jic::Role::assistant;
        u.text = text_prefix + " number " + std::to_string(i + 1);
        d.utterances.push_back(std::move(u));
    }
    return d;
}

}  // namespace jt
