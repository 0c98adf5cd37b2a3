#include "jic/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <set>
#include <unordered_map>

#include "jic/http_clients.hpp"
#include "jic/io.hpp"
#include "jic/log.hpp"
#include "jic/metrics.hpp"
#include "jic/parallel.hpp"
#include "jic/safety.hpp"

namespace jic {

namespace fs = std::filesystem;
using nlohmann::json;

Stage stage_from_string(const std::string& name) {
    static const std::map<std::string, Stage> kNames = {
        {"ingest", Stage::ingest},     {"cluster", Stage::cluster},
        {"traits", Stage::traits},     {"filter", Stage::filter},
        {"generate", Stage::generate}, {"raft", Stage::raft},
        {"stats", Stage::stats},       {"evaluate", Stage::evaluate},
        {"toxicity", Stage::toxicity}, {"split", Stage::split},
        {"all", Stage::all}};
    auto it = kNames.find(name);
    if (it == kNames.end()) throw ArgumentError("unknown stage: " + name);
    return it->second;
}

std::string to_string(Stage stage) {
    switch (stage) {
        case Stage::ingest: return "ingest";
        case Stage::cluster: return "cluster";
        case Stage::traits: return "traits";
        case Stage::filter: return "filter";
        case Stage::generate: return "generate";
        case Stage::raft: return "raft";
        case Stage::stats: return "stats";
        case Stage::evaluate: return "evaluate";
        case Stage::toxicity: return "toxicity";
        case Stage::split: return "split";
        case Stage::all: return "all";
    }
    return "?";
}

namespace {

const std::vector<Stage>& stage_deps(Stage stage) {
    static const std::map<Stage, std::vector<Stage>> kDeps = {
        {Stage::ingest, {}},
        {Stage::cluster, {Stage::ingest}},
        {Stage::traits, {Stage::cluster}},
        {Stage::filter, {Stage::traits}},
        {Stage::generate, {Stage::filter}},
        {Stage::raft, {Stage::generate}},
        {Stage::stats, {Stage::generate}},
        {Stage::evaluate, {Stage::generate}},
        {Stage::toxicity, {Stage::generate}},
        {Stage::split, {Stage::toxicity}},
    };
    return kDeps.at(stage);
}

// `all` runs the construction pipeline end to end in order.
const std::vector<Stage> kAllStages = {Stage::ingest,   Stage::cluster,  Stage::traits,
                                       Stage::filter,   Stage::generate, Stage::toxicity,
                                       Stage::split,    Stage::stats};

json client_to_json(const ClientConfig& c) {
    return json{{"endpoint", c.endpoint},
                {"model_id", c.model_id},
                {"requests_per_minute", c.requests_per_minute},
                {"max_retries", c.max_retries},
                {"timeout_ms", c.timeout.count()},
                {"seed", c.seed},
                {"embed_dim", c.embed_dim}};
}

ClientConfig client_from_json(const json& j, const ClientConfig& defaults = {}) {
    ClientConfig c = defaults;
    if (j.contains("endpoint")) c.endpoint = j.at("endpoint").get<std::string>();
    if (j.contains("model_id")) c.model_id = j.at("model_id").get<std::string>();
    if (j.contains("requests_per_minute"))
        c.requests_per_minute = j.at("requests_per_minute").get<int>();
    if (j.contains("max_retries")) c.max_retries = j.at("max_retries").get<int>();
    if (j.contains("timeout_ms"))
        c.timeout = std::chrono::milliseconds(j.at("timeout_ms").get<int64_t>());
    if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
    if (j.contains("embed_dim")) c.embed_dim = j.at("embed_dim").get<int>();
    if (j.contains("api_key")) c.api_key = j.at("api_key").get<std::string>();
    return c;
}

json traits_to_json(const TraitVector& t) {
    return json{{"openness", t.openness},
                {"conscientiousness", t.conscientiousness},
                {"extraversion", t.extraversion},
                {"agreeableness", t.agreeableness},
                {"neuroticism", t.neuroticism}};
}

TraitVector traits_from_json(const json& j) {
    TraitVector t;
    t.openness = j.at("openness").get<double>();
    t.conscientiousness = j.at("conscientiousness").get<double>();
    t.extraversion = j.at("extraversion").get<double>();
    t.agreeableness = j.at("agreeableness").get<double>();
    t.neuroticism = j.at("neuroticism").get<double>();
    return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// PipelineConfig
// ---------------------------------------------------------------------------

PipelineConfig PipelineConfig::from_json(const json& j) {
    PipelineConfig cfg;
    if (j.contains("paths")) {
        const auto& p = j.at("paths");
        if (p.contains("corpus")) cfg.corpus_path = p.at("corpus").get<std::string>();
        if (p.contains("workdir")) cfg.workdir = p.at("workdir").get<std::string>();
        if (p.contains("predictions")) cfg.predictions = p.at("predictions").get<std::string>();
    }
    if (j.contains("schema")) {
        const auto& s = j.at("schema");
        if (s.contains("id")) cfg.schema.id = s.at("id").get<std::string>();
        if (s.contains("author")) cfg.schema.author = s.at("author").get<std::string>();
        if (s.contains("body")) cfg.schema.body = s.at("body").get<std::string>();
        if (s.contains("title")) cfg.schema.title = s.at("title").get<std::string>();
        if (s.contains("created_at")) cfg.schema.created_at = s.at("created_at").get<std::string>();
        if (s.contains("source")) cfg.schema.source = s.at("source").get<std::string>();
        if (s.contains("url")) cfg.schema.url = s.at("url").get<std::string>();
    }
    if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
    if (j.contains("beta")) cfg.beta = j.at("beta").get<double>();
    if (j.contains("threshold_mode"))
        cfg.threshold_mode = threshold_mode_from_string(j.at("threshold_mode").get<std::string>());
    if (j.contains("trait_norm"))
        cfg.trait_norm = trait_norm_from_string(j.at("trait_norm").get<std::string>());
    if (j.contains("clustering")) {
        const auto& c = j.at("clustering");
        if (c.contains("k_max")) cfg.clustering.k_max = c.at("k_max").get<int>();
        if (c.contains("linkage"))
            cfg.clustering.linkage = linkage_from_string(c.at("linkage").get<std::string>());
        if (c.contains("seed")) cfg.clustering.seed = c.at("seed").get<uint64_t>();
        if (c.contains("normalize")) cfg.clustering.normalize = c.at("normalize").get<bool>();
    }
    if (j.contains("retrieval")) {
        const auto& r = j.at("retrieval");
        if (r.contains("window")) cfg.retrieval.window = r.at("window").get<int>();
        if (r.contains("stride")) cfg.retrieval.stride = r.at("stride").get<int>();
        if (r.contains("k")) cfg.retrieval.k = r.at("k").get<int>();
        if (r.contains("lambda")) cfg.retrieval.lambda = r.at("lambda").get<double>();
    }
    if (j.contains("generation")) {
        const auto& g = j.at("generation");
        if (g.contains("workers")) cfg.generation.workers = g.at("workers").get<int>();
        if (g.contains("gen_retries")) cfg.generation.gen_retries = g.at("gen_retries").get<int>();
        if (g.contains("max_pairs")) cfg.generation.max_pairs = g.at("max_pairs").get<size_t>();
        if (g.contains("seed")) cfg.generation.seed = g.at("seed").get<uint64_t>();
        if (g.contains("budget")) cfg.generation.budget = g.at("budget").get<size_t>();
        if (g.contains("max_words")) cfg.generation.parse.max_words = g.at("max_words").get<size_t>();
    }
    if (j.contains("clients")) {
        const auto& c = j.at("clients");
        if (c.contains("offline")) cfg.offline = c.at("offline").get<bool>();
        if (c.contains("embedding")) cfg.embedding_client = client_from_json(c.at("embedding"));
        if (c.contains("chat")) cfg.chat_client = client_from_json(c.at("chat"));
        if (c.contains("traits")) cfg.trait_client = client_from_json(c.at("traits"));
        if (c.contains("toxicity")) cfg.toxicity_client = client_from_json(c.at("toxicity"));
    }
    if (j.contains("toxicity_threshold"))
        cfg.toxicity_threshold = j.at("toxicity_threshold").get<double>();
    if (j.contains("test_size")) cfg.test_size = j.at("test_size").get<size_t>();
    if (j.contains("split_seed")) cfg.split_seed = j.at("split_seed").get<uint64_t>();
    cfg.validate();
    return cfg;
}

PipelineConfig PipelineConfig::from_file(const fs::path& path) {
    return from_json(io::read_json(path));
}

json PipelineConfig::to_json() const {
    return json{
        {"paths",
         json{{"corpus", corpus_path.string()},
              {"workdir", workdir.string()},
              {"predictions", predictions.string()}}},
        {"schema",
         json{{"id", schema.id},
              {"author", schema.author},
              {"body", schema.body},
              {"title", schema.title},
              {"created_at", schema.created_at},
              {"source", schema.source},
              {"url", schema.url}}},
        {"alpha", alpha},
        {"beta", beta},
        {"threshold_mode", to_string(threshold_mode)},
        {"trait_norm", to_string(trait_norm)},
        {"clustering",
         json{{"k_max", clustering.k_max},
              {"linkage", to_string(clustering.linkage)},
              {"seed", clustering.seed},
              {"normalize", clustering.normalize}}},
        {"retrieval",
         json{{"window", retrieval.window},
              {"stride", retrieval.stride},
              {"k", retrieval.k},
              {"lambda", retrieval.lambda}}},
        {"generation",
         json{{"workers", generation.workers},
              {"gen_retries", generation.gen_retries},
              {"max_pairs", generation.max_pairs},
              {"seed", generation.seed},
              {"budget", generation.budget},
              {"max_words", generation.parse.max_words}}},
        {"clients",
         json{{"offline", offline},
              {"embedding", client_to_json(embedding_client)},
              {"chat", client_to_json(chat_client)},
              {"traits", client_to_json(trait_client)},
              {"toxicity", client_to_json(toxicity_client)}}},
        {"toxicity_threshold", toxicity_threshold},
        {"test_size", test_size},
        {"split_seed", split_seed}};
}

std::string PipelineConfig::config_hash() const {
    // Only fields that can change output bytes participate. workers and
    // budget change scheduling and how far one invocation gets, never the
    // final artifacts; rate limits and timeouts change timing only.
    json h = json{
        {"corpus", corpus_path.string()},
        {"schema", to_json().at("schema")},
        {"alpha", alpha},
        {"beta", beta},
        {"threshold_mode", to_string(threshold_mode)},
        {"trait_norm", to_string(trait_norm)},
        {"clustering", to_json().at("clustering")},
        {"retrieval", to_json().at("retrieval")},
        {"generation",
         json{{"gen_retries", generation.gen_retries},
              {"max_pairs", generation.max_pairs},
              {"seed", generation.seed},
              {"max_words", generation.parse.max_words}}},
        {"offline", offline},
        {"embedding", json{{"endpoint", embedding_client.endpoint},
                           {"model_id", embedding_client.model_id},
                           {"seed", embedding_client.seed},
                           {"embed_dim", embedding_client.embed_dim}}},
        {"chat", json{{"endpoint", chat_client.endpoint},
                      {"model_id", chat_client.model_id},
                      {"seed", chat_client.seed}}},
        {"traits", json{{"endpoint", trait_client.endpoint},
                        {"model_id", trait_client.model_id},
                        {"seed", trait_client.seed}}},
        {"toxicity", json{{"endpoint", toxicity_client.endpoint},
                          {"model_id", toxicity_client.model_id},
                          {"seed", toxicity_client.seed}}},
        {"toxicity_threshold", toxicity_threshold},
        {"test_size", test_size},
        {"split_seed", split_seed}};
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(h.dump())));
    return std::string(out);
}

void PipelineConfig::validate() const {
    if (std::isnan(alpha) || std::isnan(beta)) throw ArgumentError("alpha/beta must not be NaN");
    if (clustering.k_max < 2) throw ArgumentError("clustering.k_max must be >= 2");
    if (retrieval.window < 1 || retrieval.stride < 1)
        throw ArgumentError("retrieval window/stride must be >= 1");
    if (retrieval.k < 0) throw ArgumentError("retrieval.k must be >= 0");
    if (retrieval.lambda < 0.0 || retrieval.lambda > 1.0)
        throw ArgumentError("retrieval.lambda must lie in [0, 1]");
    if (generation.workers < 1) throw ArgumentError("generation.workers must be >= 1");
    if (generation.gen_retries < 0) throw ArgumentError("generation.gen_retries must be >= 0");
    if (toxicity_threshold < 0.0 || toxicity_threshold > 1.0)
        throw ArgumentError("toxicity_threshold must lie in [0, 1]");
    embedding_client.validate();
    chat_client.validate();
    trait_client.validate();
    toxicity_client.validate();
}

// ---------------------------------------------------------------------------
// RunManifest
// ---------------------------------------------------------------------------

RunManifest RunManifest::load_or_create(const fs::path& workdir, const std::string& config_hash,
                                        bool force) {
    RunManifest m;
    fs::path path = workdir / files::manifest;
    if (fs::exists(path)) {
        json j = io::read_json(path);
        m.run_id_ = j.value("run_id", "");
        m.config_hash_ = j.value("config_hash", "");
        if (j.contains("stages")) {
            for (const auto& [name, rec] : j.at("stages").items()) {
                StageRecord r;
                r.complete = rec.value("complete", false);
                r.completed_at = rec.value("completed_at", int64_t{0});
                if (rec.contains("outputs"))
                    r.outputs = rec.at("outputs").get<std::map<std::string, std::string>>();
                m.stages_[name] = std::move(r);
            }
        }
        if (m.config_hash_ != config_hash) {
            if (!force)
                throw PipelineError(
                    "config hash mismatch with existing workdir (" + m.config_hash_ + " vs " +
                    config_hash + "); pass --force to take over the workdir");
            m.config_hash_ = config_hash;
        }
        return m;
    }
    auto now = std::chrono::system_clock::now().time_since_epoch();
    char id[32];
    std::snprintf(id, sizeof(id), "run-%llx",
                  static_cast<unsigned long long>(
                      std::chrono::duration_cast<std::chrono::milliseconds>(now).count()));
    m.run_id_ = id;
    m.config_hash_ = config_hash;
    return m;
}

bool RunManifest::stage_complete(const fs::path& workdir, Stage stage) const {
    auto it = stages_.find(to_string(stage));
    if (it == stages_.end() || !it->second.complete) return false;
    for (const auto& [file, checksum] : it->second.outputs) {
        fs::path path = workdir / file;
        if (!fs::exists(path) || io::file_checksum(path) != checksum) return false;
    }
    return true;
}

void RunManifest::record_stage(const fs::path& workdir, Stage stage,
                               const std::vector<std::string>& outputs) {
    StageRecord r;
    r.complete = true;
    r.completed_at = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    for (const auto& file : outputs) r.outputs[file] = io::file_checksum(workdir / file);
    stages_[to_string(stage)] = std::move(r);
    save(workdir);
}

void RunManifest::save(const fs::path& workdir) const {
    json stages = json::object();
    for (const auto& [name, r] : stages_)
        stages[name] = json{
            {"complete", r.complete}, {"outputs", r.outputs}, {"completed_at", r.completed_at}};
    io::write_json_atomic(workdir / files::manifest, json{{"run_id", run_id_},
                                                          {"config_hash", config_hash_},
                                                          {"stages", std::move(stages)}});
}

// ---------------------------------------------------------------------------
// Clients
// ---------------------------------------------------------------------------

ClientSet make_clients(const PipelineConfig& cfg) {
    ClientSet set;
    if (cfg.offline) {
        set.embedding = std::make_unique<HashingEmbeddingClient>(cfg.embedding_client.embed_dim,
                                                                 cfg.embedding_client.seed);
        set.chat = std::make_unique<TemplateChatClient>(cfg.chat_client.seed);
        set.traits = std::make_unique<LexiconTraitClient>();
        set.toxicity = std::make_unique<WordListToxicityClient>();
    } else {
        set.embedding = std::make_unique<HttpEmbeddingClient>(cfg.embedding_client);
        set.chat = std::make_unique<HttpChatClient>(cfg.chat_client);
        set.traits = std::make_unique<HttpTraitClient>(cfg.trait_client);
        set.toxicity = std::make_unique<HttpToxicityClient>(cfg.toxicity_client);
    }
    return set;
}

// ---------------------------------------------------------------------------
// Stage bodies
// ---------------------------------------------------------------------------

namespace {

// One run owns the workdir; the lock file goes away with the run.
class WorkdirLock {
public:
    WorkdirLock(const fs::path& workdir, bool force) : path_(workdir / ".lock") {
        if (force) ::unlink(path_.c_str());
        fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0)
            throw PipelineError("workdir is locked by another run (" + path_.string() +
                                "); pass --force if it is stale");
        std::string pid = std::to_string(::getpid()) + "\n";
        [[maybe_unused]] ssize_t n = ::write(fd_, pid.data(), pid.size());
    }
    ~WorkdirLock() {
        if (fd_ >= 0) ::close(fd_);
        ::unlink(path_.c_str());
    }

private:
    fs::path path_;
    int fd_ = -1;
};

Corpus load_canonical(const fs::path& path) {
    std::vector<JournalEntry> entries;
    io::for_each_jsonl(path, [&](size_t, const json& j) {
        JournalEntry e;
        e.entry_id = j.at("entry_id").get<std::string>();
        e.author_id = j.at("author_id").get<std::string>();
        e.title = j.value("title", "");
        e.body = j.at("body").get<std::string>();
        e.created_at = j.value("created_at", int64_t{0});
        e.source = j.value("source", "");
        e.url = j.value("url", "");
        entries.push_back(std::move(e));
    });
    return Corpus(std::move(entries));
}

std::vector<Dialogue> load_dialogues(const fs::path& path) {
    std::vector<Dialogue> dialogues;
    io::for_each_jsonl(path,
                       [&](size_t, const json& j) { dialogues.push_back(Dialogue::from_json(j)); });
    return dialogues;
}

void stage_ingest(const PipelineConfig& cfg) {
    auto loaded = load_corpus(cfg.corpus_path, cfg.schema);
    save_corpus(loaded.corpus, cfg.workdir / files::corpus);
    save_drop_report(loaded.report, cfg.workdir / files::drop_report);
    log::info("ingest: kept " + std::to_string(loaded.report.kept) + " of " +
              std::to_string(loaded.report.input_lines) + " lines");
}

void stage_cluster(const PipelineConfig& cfg, EmbeddingClient& embed) {
    Corpus corpus = load_canonical(cfg.workdir / files::corpus);
    auto authors = corpus.author_ids();

    auto outcomes = parallel_map(authors, cfg.generation.workers, [&](const std::string& author) {
        auto entries = corpus.author_entries(author);
        std::vector<std::string> ids;
        std::vector<std::string> bodies;
        for (const auto* e : entries) {
            ids.push_back(e->entry_id);
            bodies.push_back(e->body);
        }
        auto vectors = embed.embed_batch(bodies);
        Eigen::MatrixXd points(vectors.size(), vectors[0].size());
        for (size_t i = 0; i < vectors.size(); ++i) points.row(static_cast<Eigen::Index>(i)) = vectors[i];
        ClusteringConfig author_cfg = cfg.clustering;
        author_cfg.seed = cfg.clustering.seed ^ fnv1a64(author);
        return retain_prominent(ids, points, author_cfg);
    });

    std::vector<json> report;
    std::set<std::string> retained_ids;
    for (size_t i = 0; i < authors.size(); ++i) {
        const auto& outcome = outcomes[i];
        json by_k = json::object();
        for (const auto& [k, s] : outcome.silhouette_by_k) by_k[std::to_string(k)] = s;
        report.push_back(json{{"author_id", authors[i]},
                              {"entry_count", corpus.author_entries(authors[i]).size()},
                              {"k_star", outcome.k_star},
                              {"silhouette_by_k", std::move(by_k)},
                              {"retained_ids", outcome.retained_ids}});
        retained_ids.insert(outcome.retained_ids.begin(), outcome.retained_ids.end());
    }
    io::write_jsonl_atomic(cfg.workdir / files::retention_report, report);

    std::vector<JournalEntry> retained;
    for (const auto& e : corpus.entries())
        if (retained_ids.count(e.entry_id)) retained.push_back(e);
    save_corpus(Corpus(std::move(retained)), cfg.workdir / files::retained);
}

void stage_traits(const PipelineConfig& cfg, TraitClient& traits) {
    Corpus corpus = load_canonical(cfg.workdir / files::retained);
    std::vector<size_t> indices(corpus.size());
    for (size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    auto scored = parallel_map(indices, cfg.generation.workers, [&](size_t i) {
        const auto& e = corpus.entry(i);
        try {
            return traits.classify(e.body);
        } catch (const TransportError& ex) {
            throw TransportError("trait scoring failed for entry " + e.entry_id + ": " + ex.what(),
                                 ex.attempts);
        }
    });

    std::vector<json> lines;
    lines.reserve(corpus.size());
    for (size_t i = 0; i < corpus.size(); ++i) {
        const auto& e = corpus.entry(i);
        lines.push_back(json{{"entry_id", e.entry_id},
                             {"author_id", e.author_id},
                             {"traits", traits_to_json(scored[i])}});
    }
    io::write_jsonl_atomic(cfg.workdir / files::traits, lines);
}

void stage_filter(const PipelineConfig& cfg) {
    Corpus corpus = load_canonical(cfg.workdir / files::retained);
    std::unordered_map<std::string, TraitVector> trait_by_entry;
    io::for_each_jsonl(cfg.workdir / files::traits, [&](size_t, const json& j) {
        trait_by_entry[j.at("entry_id").get<std::string>()] = traits_from_json(j.at("traits"));
    });

    // journal-level pass, then author profiles recomputed over survivors
    std::vector<AuthorProfile> refined;
    json author_report = json::array();
    for (const auto& author : corpus.author_ids()) {
        std::vector<std::string> ids;
        std::vector<TraitVector> traits;
        for (const auto* e : corpus.author_entries(author)) {
            auto it = trait_by_entry.find(e->entry_id);
            if (it == trait_by_entry.end())
                throw PipelineError("traits file is missing entry " + e->entry_id +
                                    "; rerun the traits stage");
            ids.push_back(e->entry_id);
            traits.push_back(it->second);
        }
        AuthorProfile profile = make_profile(author, ids, traits, cfg.trait_norm);
        auto kept = filter_journals(profile, cfg.alpha, cfg.threshold_mode);
        const double threshold = journal_threshold(profile, cfg.alpha, cfg.threshold_mode);

        json entries = json::array();
        std::set<std::string> kept_set(kept.begin(), kept.end());
        for (size_t i = 0; i < ids.size(); ++i)
            entries.push_back(json{{"entry_id", ids[i]},
                                   {"traits", traits_to_json(traits[i])},
                                   {"deviation", profile.deviations[i]},
                                   {"retained", kept_set.count(ids[i]) > 0}});

        json record = json{{"author_id", author},
                           {"journal_threshold", threshold},
                           {"entries", std::move(entries)}};
        if (kept.empty()) {
            record["retained"] = false;
            record["note"] = "no entries within the journal-level threshold";
            author_report.push_back(std::move(record));
            continue;
        }
        std::vector<TraitVector> kept_traits;
        for (const auto& id : kept) kept_traits.push_back(*profile.traits_of(id));
        AuthorProfile refreshed = make_profile(author, kept, kept_traits, cfg.trait_norm);
        record["mean_traits"] = traits_to_json(refreshed.mean_traits);
        author_report.push_back(std::move(record));
        refined.push_back(std::move(refreshed));
    }
    if (refined.empty()) throw PipelineError("journal-level filtering removed every author");

    auto result = filter_authors(refined, cfg.beta, cfg.threshold_mode, cfg.trait_norm);
    std::set<std::string> author_kept(result.retained_authors.begin(),
                                      result.retained_authors.end());
    std::set<std::string> entry_kept;
    for (const auto& profile : refined)
        if (author_kept.count(profile.author_id))
            entry_kept.insert(profile.entry_ids.begin(), profile.entry_ids.end());

    // decorate the per-author report with the author-level outcome
    json deviations = json::object();
    for (size_t i = 0; i < result.global.author_ids.size(); ++i)
        deviations[result.global.author_ids[i]] = result.global.author_deviations[i];
    for (auto& record : author_report) {
        const std::string author = record.at("author_id").get<std::string>();
        if (deviations.contains(author)) record["author_deviation"] = deviations.at(author);
        if (!record.contains("retained")) record["retained"] = author_kept.count(author) > 0;
    }

    io::write_json_atomic(
        cfg.workdir / files::trait_report,
        json{{"global", json{{"mean_traits", traits_to_json(result.global.mean_traits)},
                             {"author_threshold", result.global.threshold},
                             {"author_deviations", std::move(deviations)}}},
             {"alpha", cfg.alpha},
             {"beta", cfg.beta},
             {"threshold_mode", to_string(cfg.threshold_mode)},
             {"norm", to_string(cfg.trait_norm)},
             {"authors", std::move(author_report)}});

    std::vector<JournalEntry> filtered;
    for (const auto& e : corpus.entries())
        if (entry_kept.count(e.entry_id)) filtered.push_back(e);
    save_corpus(Corpus(std::move(filtered)), cfg.workdir / files::filtered);
}

// returns true when the combination plan is exhausted (stage complete)
bool stage_generate(const PipelineConfig& cfg, ChatClient& chat) {
    Corpus corpus = load_canonical(cfg.workdir / files::filtered);
    GenerationReport report =
        generate_all(corpus, chat, cfg.generation, cfg.workdir / files::dialogues,
                     cfg.workdir / files::skips, cfg.workdir / files::gen_manifest);
    log::info("generate: " + std::to_string(report.completed) + " dialogues, " +
              std::to_string(report.skipped) + " skips of " +
              std::to_string(report.combinations_total) + " combinations");
    return report.completed + report.skipped == report.combinations_total;
}

void stage_toxicity(const PipelineConfig& cfg, ToxicityClient& toxicity) {
    auto dialogues = load_dialogues(cfg.workdir / files::dialogues);
    auto reports = parallel_map(dialogues, cfg.generation.workers, [&](const Dialogue& d) {
        return score_dialogue(d, toxicity, cfg.toxicity_threshold);
    });
    partition(dialogues, reports, cfg.workdir / files::clean, cfg.workdir / files::flagged);
    io::write_json_atomic(cfg.workdir / files::toxicity_summary,
                          toxicity_summary(reports, cfg.toxicity_threshold));
}

void stage_split(const PipelineConfig& cfg) {
    auto clean = io::read_jsonl(cfg.workdir / files::clean);
    auto [train, test] = split_dataset(clean, cfg.test_size, cfg.split_seed);
    io::write_jsonl_atomic(cfg.workdir / files::train, train);
    io::write_jsonl_atomic(cfg.workdir / files::test, test);
}

void stage_stats(const PipelineConfig& cfg, EmbeddingClient& embed) {
    auto dialogues = load_dialogues(cfg.workdir / files::dialogues);
    DatasetStats stats = dataset_stats(dialogues, embed);
    io::write_json_atomic(cfg.workdir / files::stats, stats.to_json());
}

void stage_raft(const PipelineConfig& cfg, EmbeddingClient& embed) {
    Corpus corpus = load_canonical(cfg.workdir / files::filtered);
    auto dialogues = load_dialogues(cfg.workdir / files::dialogues);
    std::vector<json> lines;
    for (const auto& d : dialogues) {
        const JournalEntry* assistant_entry = corpus.find(d.source_entries.second);
        if (!assistant_entry)
            throw PipelineError("dialogue " + d.dialogue_id + " references unknown entry " +
                                d.source_entries.second);
        for (const auto& rec : build_raft_records(d, *assistant_entry, embed, cfg.retrieval))
            lines.push_back(rec.to_json());
    }
    io::write_jsonl_atomic(cfg.workdir / files::raft_records, lines);
}

void stage_evaluate(const PipelineConfig& cfg, EmbeddingClient& embed) {
    if (cfg.predictions.empty())
        throw PipelineError("evaluate needs paths.predictions in the config");
    auto dialogues = load_dialogues(cfg.workdir / files::dialogues);
    std::unordered_map<std::string, const Dialogue*> index;
    for (const auto& d : dialogues) index[d.dialogue_id] = &d;

    json items = json::array();
    BleuAccumulator corpus_bleu;
    double sums[5] = {0, 0, 0, 0, 0};  // meteor, embed_f1, r1, r2, rL
    size_t count = 0;
    io::for_each_jsonl(cfg.predictions, [&](size_t lineno, const json& j) {
        const std::string id = j.at("dialogue_id").get<std::string>();
        const size_t turn = j.at("turn").get<size_t>();
        const std::string candidate = j.at("candidate").get<std::string>();
        auto it = index.find(id);
        if (it == index.end())
            throw ArgumentError("predictions line " + std::to_string(lineno) +
                                " references unknown dialogue " + id);
        const auto& utts = it->second->utterances;
        const size_t ref_index = 2 * turn + 1;
        if (ref_index >= utts.size())
            throw ArgumentError("predictions line " + std::to_string(lineno) + " turn " +
                                std::to_string(turn) + " out of range for dialogue " + id);
        const std::string& reference = utts[ref_index].text;

        double b = bleu(candidate, {reference});
        corpus_bleu.add(candidate, {reference});
        double m = meteor(candidate, reference);
        RougeScores r = rouge(candidate, reference);
        EmbedScore e = embed_score(candidate, reference, embed);
        MetricReport item = average_score(b, m, e.f1, r.rouge1, r.rouge2, r.rougeL);
        json line = item.to_json();
        line["dialogue_id"] = id;
        line["turn"] = turn;
        items.push_back(std::move(line));
        sums[0] += m;
        sums[1] += e.f1;
        sums[2] += r.rouge1;
        sums[3] += r.rouge2;
        sums[4] += r.rougeL;
        ++count;
    });
    if (count == 0) throw PipelineError("predictions file is empty");

    const double n = static_cast<double>(count);
    MetricReport aggregate = average_score(corpus_bleu.value(), sums[0] / n, sums[1] / n,
                                           sums[2] / n, sums[3] / n, sums[4] / n);
    io::write_json_atomic(cfg.workdir / files::eval_report,
                          json{{"items", std::move(items)},
                               {"n_items", count},
                               {"aggregate", aggregate.to_json()},
                               {"note", "aggregate bleu is corpus-level; other components are "
                                        "means over items"}});
}

struct StageOutputs {
    std::vector<std::string> files;
};

std::vector<std::string> outputs_of(Stage stage) {
    switch (stage) {
        case Stage::ingest: return {files::corpus, files::drop_report};
        case Stage::cluster: return {files::retained, files::retention_report};
        case Stage::traits: return {files::traits};
        case Stage::filter: return {files::filtered, files::trait_report};
        case Stage::generate: return {files::dialogues, files::skips};
        case Stage::toxicity: return {files::clean, files::flagged, files::toxicity_summary};
        case Stage::split: return {files::train, files::test};
        case Stage::stats: return {files::stats};
        case Stage::raft: return {files::raft_records};
        case Stage::evaluate: return {files::eval_report};
        case Stage::all: return {};
    }
    return {};
}

int run_stage_locked(Stage stage, const PipelineConfig& cfg, RunManifest& manifest) {
    for (Stage dep : stage_deps(stage)) {
        if (!manifest.stage_complete(cfg.workdir, dep))
            throw PipelineError("stage '" + to_string(stage) + "' requires stage '" +
                                to_string(dep) + "' to have completed first");
    }

    ClientSet clients = make_clients(cfg);
    bool complete = true;
    switch (stage) {
        case Stage::ingest: stage_ingest(cfg); break;
        case Stage::cluster: stage_cluster(cfg, *clients.embedding); break;
        case Stage::traits: stage_traits(cfg, *clients.traits); break;
        case Stage::filter: stage_filter(cfg); break;
        case Stage::generate: complete = stage_generate(cfg, *clients.chat); break;
        case Stage::toxicity: stage_toxicity(cfg, *clients.toxicity); break;
        case Stage::split: stage_split(cfg); break;
        case Stage::stats: stage_stats(cfg, *clients.embedding); break;
        case Stage::raft: stage_raft(cfg, *clients.embedding); break;
        case Stage::evaluate: stage_evaluate(cfg, *clients.embedding); break;
        case Stage::all: throw ArgumentError("internal: 'all' handled by the caller");
    }
    if (complete) {
        manifest.record_stage(cfg.workdir, stage, outputs_of(stage));
    } else {
        manifest.save(cfg.workdir);
        log::info("stage '" + to_string(stage) + "' stopped at its budget; rerun to continue");
    }
    return 0;
}

}  // namespace

int run_stage(Stage stage, const PipelineConfig& cfg, bool force) {
    cfg.validate();
    fs::create_directories(cfg.workdir);
    WorkdirLock lock(cfg.workdir, force);
    RunManifest manifest = RunManifest::load_or_create(cfg.workdir, cfg.config_hash(), force);
    manifest.save(cfg.workdir);

    if (stage == Stage::all) {
        for (Stage s : kAllStages) {
            if (manifest.stage_complete(cfg.workdir, s)) continue;
            int rc = run_stage_locked(s, cfg, manifest);
            if (rc != 0) return rc;
            if (!manifest.stage_complete(cfg.workdir, s)) {
                log::info("pipeline paused at stage '" + to_string(s) + "'; rerun to continue");
                return 0;
            }
        }
        return 0;
    }
    return run_stage_locked(stage, cfg, manifest);
}

}  // namespace jic
