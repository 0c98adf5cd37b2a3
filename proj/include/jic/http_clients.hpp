#pragma once

#include <memory>
#include <string>
#include <vector>

#include "jic/clients.hpp"

namespace jic {

// Remote clients speaking the hosted-inference convention:
//   POST {endpoint}/v1/chat/completions  {model, messages, temperature, max_tokens}
//   POST {endpoint}/v1/embeddings        {model, input: [text, ...]}
//   POST {endpoint}/v1/classify         {model, input: [text, ...]}  (scorer services)
// Responses follow the matching convention; see README for the schemas.
// All share a per-endpoint rate limiter and the retry policy from
// ClientConfig. Request/response bodies are logged at debug verbosity,
// truncated to 2 KiB.

class HttpEmbeddingClient : public EmbeddingClient {
public:
    explicit HttpEmbeddingClient(ClientConfig cfg, std::shared_ptr<RateLimiter> limiter = nullptr);
    ~HttpEmbeddingClient() override;
    std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(ClientConfig cfg, std::shared_ptr<RateLimiter> limiter = nullptr);
    ~HttpChatClient() override;
    std::string complete(const std::string& prompt, const DecodeSettings& decode = {}) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

class HttpTraitClient : public TraitClient {
public:
    explicit HttpTraitClient(ClientConfig cfg, std::shared_ptr<RateLimiter> limiter = nullptr);
    ~HttpTraitClient() override;
    TraitVector classify(const std::string& text) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

class HttpToxicityClient : public ToxicityClient {
public:
    explicit HttpToxicityClient(ClientConfig cfg, std::shared_ptr<RateLimiter> limiter = nullptr);
    ~HttpToxicityClient() override;
    ToxicityScores classify(const std::string& text) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace jic
