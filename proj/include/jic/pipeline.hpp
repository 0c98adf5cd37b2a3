#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "jic/clients.hpp"
#include "jic/clustering.hpp"
#include "jic/corpus.hpp"
#include "jic/dialogue.hpp"
#include "jic/retrieval.hpp"
#include "jic/trait_filter.hpp"

namespace jic {

enum class Stage { ingest, cluster, traits, filter, generate, raft, stats, evaluate, toxicity,
                   split, all };

Stage stage_from_string(const std::string& name);
std::string to_string(Stage stage);

// Stage boundary files inside the workdir.
namespace files {
inline constexpr const char* corpus = "corpus.jsonl";
inline constexpr const char* drop_report = "drop_report.json";
inline constexpr const char* retained = "retained.jsonl";
inline constexpr const char* retention_report = "retention_report.jsonl";
inline constexpr const char* traits = "traits.jsonl";
inline constexpr const char* filtered = "filtered.jsonl";
inline constexpr const char* trait_report = "trait_report.json";
inline constexpr const char* dialogues = "dialogues.jsonl";
inline constexpr const char* skips = "skips.jsonl";
inline constexpr const char* gen_manifest = "gen_manifest.jsonl";
inline constexpr const char* clean = "clean.jsonl";
inline constexpr const char* flagged = "flagged.jsonl";
inline constexpr const char* toxicity_summary = "toxicity_summary.json";
inline constexpr const char* train = "train.jsonl";
inline constexpr const char* test = "test.jsonl";
inline constexpr const char* stats = "stats.json";
inline constexpr const char* raft_records = "raft_records.jsonl";
inline constexpr const char* eval_report = "eval_report.json";
inline constexpr const char* manifest = "manifest.json";
}  // namespace files

struct PipelineConfig {
    std::filesystem::path corpus_path;
    std::filesystem::path workdir;
    std::filesystem::path predictions;  // evaluate stage input
    FieldSchema schema;

    double alpha = 1.0;
    double beta = 0.0;
    ThresholdMode threshold_mode = ThresholdMode::stddev;
    TraitNorm trait_norm = TraitNorm::l2;

    ClusteringConfig clustering;
    RetrievalConfig retrieval;
    GenerationConfig generation;

    bool offline = true;  // forces the deterministic fallback clients
    ClientConfig embedding_client;
    ClientConfig chat_client;
    ClientConfig trait_client;
    ClientConfig toxicity_client;

    double toxicity_threshold = 0.5;
    size_t test_size = 0;
    uint64_t split_seed = 0;

    static PipelineConfig from_json(const nlohmann::json& j);
    static PipelineConfig from_file(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    // Hash over every field that can change output bytes; scheduling and
    // rate-limit knobs are excluded.
    std::string config_hash() const;
    void validate() const;
};

// Stage completion ledger persisted at workdir/manifest.json. A stage is
// trusted only while its recorded outputs still exist with matching
// checksums.
class RunManifest {
public:
    static RunManifest load_or_create(const std::filesystem::path& workdir,
                                      const std::string& config_hash, bool force);

    bool stage_complete(const std::filesystem::path& workdir, Stage stage) const;
    void record_stage(const std::filesystem::path& workdir, Stage stage,
                      const std::vector<std::string>& outputs);
    void save(const std::filesystem::path& workdir) const;

    const std::string& run_id() const { return run_id_; }

private:
    std::string run_id_;
    std::string config_hash_;
    struct StageRecord {
        bool complete = false;
        std::map<std::string, std::string> outputs;  // file -> checksum
        int64_t completed_at = 0;
    };
    std::map<std::string, StageRecord> stages_;
};

// Constructed per run from the config: fallbacks when offline, HTTP
// clients otherwise.
struct ClientSet {
    std::unique_ptr<EmbeddingClient> embedding;
    std::unique_ptr<ChatClient> chat;
    std::unique_ptr<TraitClient> traits;
    std::unique_ptr<ToxicityClient> toxicity;
};

ClientSet make_clients(const PipelineConfig& cfg);

// Runs one stage (or `all` in pipeline order), enforcing prerequisites via
// the manifest and writing outputs atomically. Returns 0 on success; the
// generate stage returns 0 even when it stopped at its budget (rerun to
// continue). Throws PipelineError for orchestration failures.
int run_stage(Stage stage, const PipelineConfig& cfg, bool force = false);

}  // namespace jic
