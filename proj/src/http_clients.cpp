#include "jic/http_clients.hpp"

#include <httplib.h>
#include <json.hpp>

#include <thread>

#include "jic/log.hpp"
#include "jic/text.hpp"

namespace jic {

using json = nlohmann::json;

namespace {

// Shared transport: one httplib client + limiter + retry wrapper per endpoint.
// httplib::Client is not safe under concurrent requests, so calls are
// serialized; the rate limiter is the throughput gate regardless.
struct Transport {
    ClientConfig cfg;
    std::shared_ptr<RateLimiter> limiter;
    httplib::Client http;
    std::mutex request_mutex;

    Transport(ClientConfig c, std::shared_ptr<RateLimiter> lim)
        : cfg(std::move(c)),
          limiter(lim ? std::move(lim) : std::make_shared<RateLimiter>(cfg.requests_per_minute)),
          http(cfg.endpoint) {
        cfg.validate();
        if (cfg.endpoint.empty()) throw ArgumentError("remote client requires an endpoint URL");
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
        if (secs.count() < 1) secs = std::chrono::seconds(1);
        http.set_connection_timeout(secs.count(), 0);
        http.set_read_timeout(secs.count(), 0);
        std::string key = api_key_from_env();
        if (key.empty()) key = cfg.api_key;
        if (!key.empty()) http.set_default_headers({{"Authorization", "Bearer " + key}});
    }

    json post(const std::string& path, const json& payload) {
        std::string body = payload.dump();
        log::debug("POST " + cfg.endpoint + path + " " + log::truncate_body(body));
        return with_retries(
            "POST " + path, cfg.max_retries,
            [&]() -> json {
                limiter->acquire();
                std::lock_guard<std::mutex> lock(request_mutex);
                auto res = http.Post(path, body, "application/json");
                if (!res) throw std::runtime_error("no response from " + cfg.endpoint + path);
                log::debug("HTTP " + std::to_string(res->status) + " " +
                           log::truncate_body(res->body));
                if (res->status < 200 || res->status >= 300)
                    throw std::runtime_error("HTTP " + std::to_string(res->status) + " from " +
                                             path);
                json parsed = json::parse(res->body, nullptr, false);
                if (parsed.is_discarded())
                    throw std::runtime_error("unparseable response body from " + path);
                return parsed;
            },
            [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); },
            cfg.seed ^ fnv1a64(path));
    }
};

double score_field(const json& obj, const char* name) {
    auto it = obj.find(name);
    if (it == obj.end() || !it->is_number())
        throw std::runtime_error(std::string("scorer response missing field ") + name);
    return it->get<double>();
}

}  // namespace

// --- embeddings -------------------------------------------------------------

struct HttpEmbeddingClient::Impl {
    Transport transport;
    Impl(ClientConfig c, std::shared_ptr<RateLimiter> l)
        : transport(std::move(c), std::move(l)) {}
};

HttpEmbeddingClient::HttpEmbeddingClient(ClientConfig cfg, std::shared_ptr<RateLimiter> limiter)
    : impl_(new Impl(std::move(cfg), std::move(limiter))) {}
HttpEmbeddingClient::~HttpEmbeddingClient() = default;

std::vector<Embedding> HttpEmbeddingClient::embed_batch(const std::vector<std::string>& texts) {
    if (texts.empty()) throw ArgumentError("embed_batch requires a non-empty text list");
    for (const auto& t : texts)
        if (trim(t).empty()) throw ArgumentError("cannot embed empty text");

    json payload = {{"model", impl_->transport.cfg.model_id}, {"input", texts}};
    json res = impl_->transport.post("/v1/embeddings", payload);

    if (!res.contains("data") || !res["data"].is_array() || res["data"].size() != texts.size())
        throw TransportError("embedding response count mismatch", 1);
    std::vector<Embedding> out(texts.size());
    for (const auto& item : res["data"]) {
        size_t index = item.at("index").get<size_t>();
        const auto& values = item.at("embedding");
        Embedding v(values.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = values[i].get<double>();
        out.at(index) = std::move(v);
    }
    return out;
}

// --- chat -------------------------------------------------------------------

struct HttpChatClient::Impl {
    Transport transport;
    Impl(ClientConfig c, std::shared_ptr<RateLimiter> l)
        : transport(std::move(c), std::move(l)) {}
};

HttpChatClient::HttpChatClient(ClientConfig cfg, std::shared_ptr<RateLimiter> limiter)
    : impl_(new Impl(std::move(cfg), std::move(limiter))) {}
HttpChatClient::~HttpChatClient() = default;

std::string HttpChatClient::complete(const std::string& prompt, const DecodeSettings& decode) {
    if (trim(prompt).empty()) throw ArgumentError("chat_complete requires a non-empty prompt");
    json payload = {{"model", impl_->transport.cfg.model_id},
                    {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
                    {"temperature", decode.temperature},
                    {"max_tokens", decode.max_tokens}};
    json res = impl_->transport.post("/v1/chat/completions", payload);
    std::string text;
    try {
        text = res.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& ex) {
        throw TransportError(std::string("malformed chat response: ") + ex.what(), 1);
    }
    if (trim(text).empty()) throw EmptyResponseError("backend returned an empty completion");
    return text;
}

// --- scorer services ---------------------------------------------------------

struct HttpTraitClient::Impl {
    Transport transport;
    Impl(ClientConfig c, std::shared_ptr<RateLimiter> l)
        : transport(std::move(c), std::move(l)) {}
};

HttpTraitClient::HttpTraitClient(ClientConfig cfg, std::shared_ptr<RateLimiter> limiter)
    : impl_(new Impl(std::move(cfg), std::move(limiter))) {}
HttpTraitClient::~HttpTraitClient() = default;

TraitVector HttpTraitClient::classify(const std::string& text) {
    if (trim(text).empty()) throw ArgumentError("classify_traits requires non-empty text");
    json payload = {{"model", impl_->transport.cfg.model_id}, {"input", json::array({text})}};
    json res = impl_->transport.post("/v1/classify", payload);
    const auto& scores = res.at("results").at(0);
    TraitVector t;
    t.openness = score_field(scores, "openness");
    t.conscientiousness = score_field(scores, "conscientiousness");
    t.extraversion = score_field(scores, "extraversion");
    t.agreeableness = score_field(scores, "agreeableness");
    t.neuroticism = score_field(scores, "neuroticism");
    if (!t.valid()) throw TransportError("trait scores outside [0,1]", 1);
    return t;
}

struct HttpToxicityClient::Impl {
    Transport transport;
    Impl(ClientConfig c, std::shared_ptr<RateLimiter> l)
        : transport(std::move(c), std::move(l)) {}
};

HttpToxicityClient::HttpToxicityClient(ClientConfig cfg, std::shared_ptr<RateLimiter> limiter)
    : impl_(new Impl(std::move(cfg), std::move(limiter))) {}
HttpToxicityClient::~HttpToxicityClient() = default;

ToxicityScores HttpToxicityClient::classify(const std::string& text) {
    if (trim(text).empty()) throw ArgumentError("classify_toxicity requires non-empty text");
    json payload = {{"model", impl_->transport.cfg.model_id}, {"input", json::array({text})}};
    json res = impl_->transport.post("/v1/classify", payload);
    const auto& scores = res.at("results").at(0);
    ToxicityScores s;
    s.toxicity = score_field(scores, "toxicity");
    s.severe_toxicity = score_field(scores, "severe_toxicity");
    s.obscene = score_field(scores, "obscene");
    s.threat = score_field(scores, "threat");
    s.insult = score_field(scores, "insult");
    s.identity_attack = score_field(scores, "identity_attack");
    if (!s.valid()) throw TransportError("toxicity scores outside [0,1]", 1);
    return s;
}

}  // namespace jic
