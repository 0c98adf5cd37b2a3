#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "jic/clients.hpp"
#include "jic/corpus.hpp"
#include "jic/dialogue.hpp"

namespace jic {

// A sliding-window slice of a journal body. `text` always equals the body
// slice at [start, end).
struct RetrievalChunk {
    std::string entry_id;
    size_t start = 0;
    size_t end = 0;
    std::string text;
    Embedding embedding;  // unfilled until embedded
};

struct RetrievalConfig {
    int window = 3;   // sentences per chunk
    int stride = 2;   // sentences advanced between chunks
    int k = 3;        // chunks selected per query
    double lambda = 0.5;
};

// Sentence-window chunking: windows of `window` sentences advancing by
// `stride`; the final window may be partial and is kept. Embeddings are
// left unfilled.
std::vector<RetrievalChunk> chunk_journal(const JournalEntry& entry, int window, int stride);

// Greedy Maximum Marginal Relevance over cosine similarity:
//   score(c) = lambda * sim(query, c) - (1 - lambda) * max_{s in selected} sim(c, s)
// with the redundancy term zero for the first pick. Returns min(k, n)
// indices in selection order; ties break toward the lower index. Vectors
// are normalized inside, so backend normalization does not matter.
std::vector<size_t> mmr_select(const Embedding& query_vec, const std::vector<Embedding>& chunks,
                               size_t k, double lambda);

// A dialogue turn's training record: query (the user utterance preceding
// an assistant turn), MMR-selected chunks of the assistant author's
// journal, and the enriched input
//   query + "\n[context] " + chunk_1 + "\n[context] " + chunk_2 + ...
struct RaftRecord {
    std::string dialogue_id;
    size_t turn = 0;  // assistant turn index, 0-based
    std::vector<Utterance> context_turns;  // everything before the query
    std::string query;
    std::vector<RetrievalChunk> chunks;  // selection order
    std::string enriched_input;
    std::string target;

    nlohmann::json to_json() const;
};

extern const char* const kContextSeparator;  // "\n[context] "

std::string assemble_enriched_input(const std::string& query,
                                    const std::vector<RetrievalChunk>& chunks);

// One record per assistant turn of a finalized 16-utterance dialogue.
// Chunks come from mmr_select over the assistant-side journal.
std::vector<RaftRecord> build_raft_records(const Dialogue& dialogue,
                                           const JournalEntry& assistant_entry,
                                           EmbeddingClient& embed_client,
                                           const RetrievalConfig& cfg);

// Question heuristic for selective retrieval: trailing '?' or an
// interrogative lead token.
bool is_question(const std::string& utterance_text);

struct RagEnrichment {
    std::string text;
    bool retrieved = false;
    bool empty_journal = false;  // question with nothing to retrieve
};

// Inference-side gating: questions get the MMR-enriched input, statements
// pass through unchanged.
RagEnrichment rag_enrich(const std::string& last_user_utterance,
                         const JournalEntry& assistant_entry, EmbeddingClient& embed_client,
                         const RetrievalConfig& cfg);

}  // namespace jic
