#include "jic/retrieval.hpp"

#include <algorithm>
#include <set>

#include "jic/text.hpp"

namespace jic {

const char* const kContextSeparator = "\n[context] ";

std::vector<RetrievalChunk> chunk_journal(const JournalEntry& entry, int window, int stride) {
    if (window < 1 || stride < 1) throw ArgumentError("chunk window and stride must be >= 1");
    if (trim(entry.body).empty()) throw ArgumentError("cannot chunk an empty body");

    auto sentences = sentence_spans(entry.body);
    std::vector<RetrievalChunk> chunks;
    if (sentences.empty()) return chunks;

    const size_t n = sentences.size();
    const size_t w = static_cast<size_t>(window);
    size_t start = 0;
    for (;;) {
        size_t last = std::min(start + w, n) - 1;
        RetrievalChunk chunk;
        chunk.entry_id = entry.entry_id;
        chunk.start = sentences[start].first;
        chunk.end = sentences[last].second;
        chunk.text = entry.body.substr(chunk.start, chunk.end - chunk.start);
        chunks.push_back(std::move(chunk));
        if (start + w >= n) break;  // this window reached the end
        start += static_cast<size_t>(stride);
        if (start >= n) break;
    }
    return chunks;
}

namespace {

double cosine(const Embedding& a, const Embedding& b) {
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

}  // namespace

std::vector<size_t> mmr_select(const Embedding& query_vec, const std::vector<Embedding>& chunks,
                               size_t k, double lambda) {
    if (lambda < 0.0 || lambda > 1.0) throw ArgumentError("mmr lambda must lie in [0, 1]");
    for (const auto& c : chunks)
        if (c.size() != query_vec.size())
            throw ArgumentError("mmr_select: chunk dimension " + std::to_string(c.size()) +
                                " does not match query dimension " +
                                std::to_string(query_vec.size()));

    const size_t n = chunks.size();
    const size_t want = std::min(k, n);
    std::vector<double> relevance(n);
    for (size_t i = 0; i < n; ++i) relevance[i] = cosine(query_vec, chunks[i]);

    std::vector<size_t> selected;
    std::vector<bool> used(n, false);
    std::vector<double> max_sim_to_selected(n, 0.0);
    while (selected.size() < want) {
        size_t best = n;
        double best_score = -std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < n; ++i) {
            if (used[i]) continue;
            double redundancy = selected.empty() ? 0.0 : max_sim_to_selected[i];
            double score = lambda * relevance[i] - (1.0 - lambda) * redundancy;
            if (score > best_score) {  // strict: ties keep the lower index
                best_score = score;
                best = i;
            }
        }
        used[best] = true;
        selected.push_back(best);
        for (size_t i = 0; i < n; ++i) {
            if (used[i]) continue;
            max_sim_to_selected[i] = std::max(max_sim_to_selected[i], cosine(chunks[i], chunks[best]));
        }
    }
    return selected;
}

nlohmann::json RaftRecord::to_json() const {
    nlohmann::json context = nlohmann::json::array();
    for (const auto& u : context_turns)
        context.push_back(nlohmann::json{{"role", to_string(u.role)}, {"text", u.text}});
    nlohmann::json chunk_list = nlohmann::json::array();
    for (const auto& c : chunks)
        chunk_list.push_back(nlohmann::json{
            {"entry_id", c.entry_id}, {"start", c.start}, {"end", c.end}, {"text", c.text}});
    return nlohmann::json{{"dialogue_id", dialogue_id}, {"turn", turn},
                          {"context_turns", std::move(context)}, {"query", query},
                          {"chunks", std::move(chunk_list)}, {"enriched_input", enriched_input},
                          {"target", target}};
}

std::string assemble_enriched_input(const std::string& query,
                                    const std::vector<RetrievalChunk>& chunks) {
    std::string out = query;
    for (const auto& c : chunks) {
        out += kContextSeparator;
        out += c.text;
    }
    return out;
}

namespace {

std::vector<RetrievalChunk> embedded_chunks(const JournalEntry& entry, EmbeddingClient& client,
                                            const RetrievalConfig& cfg) {
    auto chunks = chunk_journal(entry, cfg.window, cfg.stride);
    if (chunks.empty()) return chunks;
    std::vector<std::string> texts;
    texts.reserve(chunks.size());
    for (const auto& c : chunks) texts.push_back(c.text);
    auto vectors = client.embed_batch(texts);
    for (size_t i = 0; i < chunks.size(); ++i) chunks[i].embedding = std::move(vectors[i]);
    return chunks;
}

std::vector<RetrievalChunk> select_chunks(const std::string& query,
                                          const std::vector<RetrievalChunk>& pool,
                                          EmbeddingClient& client, const RetrievalConfig& cfg) {
    if (pool.empty() || cfg.k <= 0) return {};
    Embedding query_vec = client.embed(query);
    std::vector<Embedding> vectors;
    vectors.reserve(pool.size());
    for (const auto& c : pool) vectors.push_back(c.embedding);
    std::vector<RetrievalChunk> picked;
    for (size_t index : mmr_select(query_vec, vectors, static_cast<size_t>(cfg.k), cfg.lambda))
        picked.push_back(pool[index]);
    return picked;
}

}  // namespace

std::vector<RaftRecord> build_raft_records(const Dialogue& dialogue,
                                           const JournalEntry& assistant_entry,
                                           EmbeddingClient& embed_client,
                                           const RetrievalConfig& cfg) {
    if (dialogue.utterances.size() != 16 || !dialogue.well_formed())
        throw ArgumentError("build_raft_records expects a finalized 16-utterance dialogue");

    auto pool = embedded_chunks(assistant_entry, embed_client, cfg);

    std::vector<RaftRecord> records;
    records.reserve(8);
    for (size_t i = 1; i < dialogue.utterances.size(); i += 2) {
        RaftRecord rec;
        rec.dialogue_id = dialogue.dialogue_id;
        rec.turn = (i - 1) / 2;
        rec.query = dialogue.utterances[i - 1].text;  // the user utterance just before
        rec.target = dialogue.utterances[i].text;
        rec.context_turns.assign(dialogue.utterances.begin(),
                                 dialogue.utterances.begin() + static_cast<long>(i - 1));
        rec.chunks = select_chunks(rec.query, pool, embed_client, cfg);
        rec.enriched_input = assemble_enriched_input(rec.query, rec.chunks);
        records.push_back(std::move(rec));
    }
    return records;
}

bool is_question(const std::string& utterance_text) {
    std::string t = trim(utterance_text);
    if (t.empty()) throw ArgumentError("is_question requires non-empty text");
    if (t.back() == '?') return true;
    static const std::set<std::string> kInterrogatives = {
        "what", "why", "how", "when", "where", "who",  "which",
        "do",   "does", "did", "is",  "are",  "can",  "could",
        "would", "will", "should"};
    auto tokens = metric_tokens(t);
    return !tokens.empty() && kInterrogatives.count(tokens.front()) > 0;
}

RagEnrichment rag_enrich(const std::string& last_user_utterance,
                         const JournalEntry& assistant_entry, EmbeddingClient& embed_client,
                         const RetrievalConfig& cfg) {
    RagEnrichment out;
    out.text = last_user_utterance;
    if (!is_question(last_user_utterance)) return out;

    if (trim(assistant_entry.body).empty()) {
        out.empty_journal = true;
        return out;
    }
    auto pool = embedded_chunks(assistant_entry, embed_client, cfg);
    if (pool.empty()) {
        out.empty_journal = true;
        return out;
    }
    auto picked = select_chunks(last_user_utterance, pool, embed_client, cfg);
    out.text = assemble_enriched_input(last_user_utterance, picked);
    out.retrieved = true;
    return out;
}

}  // namespace jic
