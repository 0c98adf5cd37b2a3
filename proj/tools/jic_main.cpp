// jic: staged construction pipeline for journal-grounded synthetic
// dialogue datasets. See README.md for the stage graph and file formats.

#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "jic/io.hpp"
#include "jic/log.hpp"
#include "jic/pipeline.hpp"

#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#endif

namespace {

int cmd_run(const std::string& config_path, const std::string& stage_name,
            std::optional<double> alpha, std::optional<double> beta,
            std::optional<uint64_t> seed, std::optional<size_t> max_pairs,
            std::optional<size_t> budget, bool offline, bool force,
            const std::string& workdir_override, const std::string& corpus_override) {
    jic::PipelineConfig cfg = config_path.empty()
                                  ? jic::PipelineConfig{}
                                  : jic::PipelineConfig::from_file(config_path);
    if (alpha) cfg.alpha = *alpha;
    if (beta) cfg.beta = *beta;
    if (seed) {
        cfg.clustering.seed = *seed;
        cfg.generation.seed = *seed;
        cfg.split_seed = *seed;
        cfg.embedding_client.seed = *seed;
        cfg.chat_client.seed = *seed;
        cfg.trait_client.seed = *seed;
        cfg.toxicity_client.seed = *seed;
    }
    if (max_pairs) cfg.generation.max_pairs = *max_pairs;
    if (budget) cfg.generation.budget = *budget;
    if (offline) cfg.offline = true;
    if (!workdir_override.empty()) cfg.workdir = workdir_override;
    if (!corpus_override.empty()) cfg.corpus_path = corpus_override;
    if (cfg.workdir.empty()) throw jic::ArgumentError("no workdir configured (paths.workdir)");

    return jic::run_stage(jic::stage_from_string(stage_name), cfg, force);
}

#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
// Optional live fetcher emitting the same dump format the pipeline
// ingests. The pipeline itself never touches the network for ingestion.
int cmd_fetch(const std::string& endpoint, const std::string& subreddit, const std::string& out,
              int limit) {
    httplib::Client http(endpoint);
    http.set_read_timeout(60, 0);
    std::string path = "/reddit/search/submission/?subreddit=" + subreddit +
                       "&size=" + std::to_string(limit);
    auto res = http.Get(path);
    if (!res || res->status != 200) {
        std::cerr << "fetch failed: " << (res ? "HTTP " + std::to_string(res->status) : "no response")
                  << "\n";
        return 1;
    }
    auto doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("data")) {
        std::cerr << "fetch failed: unexpected response body\n";
        return 1;
    }
    std::vector<nlohmann::json> lines;
    for (const auto& item : doc["data"]) lines.push_back(item);
    jic::io::write_jsonl_atomic(out, lines);
    std::cout << "wrote " << lines.size() << " submissions to " << out << "\n";
    return 0;
}
#endif

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"journal-grounded synthetic dialogue pipeline"};
    app.require_subcommand(1);

    int verbosity = 0;
    app.add_flag("-v,--verbose", verbosity, "increase log verbosity (-v info, -vv debug)");

    // run
    auto* run = app.add_subcommand("run", "run a pipeline stage");
    std::string config_path, stage_name = "all", workdir, corpus;
    std::optional<double> alpha, beta;
    std::optional<uint64_t> seed;
    std::optional<size_t> max_pairs, budget;
    bool offline = false, force = false;
    run->add_option("--config", config_path, "pipeline config JSON");
    run->add_option("--stage", stage_name,
                    "ingest|cluster|traits|filter|generate|raft|stats|evaluate|toxicity|split|all");
    run->add_option("--alpha", alpha, "journal-level filter strictness");
    run->add_option("--beta", beta, "author-level filter strictness");
    run->add_option("--seed", seed, "master seed override for all seeded components");
    run->add_option("--max-pairs", max_pairs, "cap on sampled author pairs (0 = all)");
    run->add_option("--gen-budget", budget, "combinations to process this run (0 = all)");
    run->add_flag("--offline", offline, "force the deterministic fallback clients");
    run->add_flag("--force", force, "take over a locked/mismatched workdir");
    run->add_option("--workdir", workdir, "override paths.workdir");
    run->add_option("--corpus", corpus, "override paths.corpus");

#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
    auto* fetch = app.add_subcommand("fetch", "fetch a subreddit dump (optional, live)");
    std::string endpoint = "https://api.pullpush.io", subreddit, fetch_out;
    int limit = 100;
    fetch->add_option("--endpoint", endpoint, "search API base URL");
    fetch->add_option("--subreddit", subreddit, "subreddit name")->required();
    fetch->add_option("--out", fetch_out, "output dump file")->required();
    fetch->add_option("--limit", limit, "max submissions");
#endif

    CLI11_PARSE(app, argc, argv);

    if (verbosity >= 2)
        jic::log::threshold() = jic::log::Level::debug;
    else if (verbosity == 1)
        jic::log::threshold() = jic::log::Level::info;

    try {
        if (run->parsed())
            return cmd_run(config_path, stage_name, alpha, beta, seed, max_pairs, budget, offline,
                           force, workdir, corpus);
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
        if (fetch->parsed()) return cmd_fetch(endpoint, subreddit, fetch_out, limit);
#endif
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
