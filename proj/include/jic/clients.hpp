#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "jic/errors.hpp"
#include "jic/rng.hpp"

namespace jic {

using Embedding = Eigen::VectorXd;

// Big Five scores, each in [0, 1].
struct TraitVector {
    double openness = 0;
    double conscientiousness = 0;
    double extraversion = 0;
    double agreeableness = 0;
    double neuroticism = 0;

    Eigen::Matrix<double, 5, 1> as_vector() const {
        Eigen::Matrix<double, 5, 1> v;
        v << openness, conscientiousness, extraversion, agreeableness, neuroticism;
        return v;
    }
    static TraitVector from_vector(const Eigen::Matrix<double, 5, 1>& v) {
        return TraitVector{v[0], v[1], v[2], v[3], v[4]};
    }
    bool valid() const;
};

struct ToxicityScores {
    double toxicity = 0;
    double severe_toxicity = 0;
    double obscene = 0;
    double threat = 0;
    double insult = 0;
    double identity_attack = 0;

    bool valid() const;
};

struct ClientConfig {
    std::string endpoint;
    std::string model_id;
    int requests_per_minute = 60;
    int max_retries = 4;
    std::chrono::milliseconds timeout{30000};
    uint64_t seed = 0;       // fallback determinism
    std::string api_key;     // overridden by JF_API_KEY when set
    int embed_dim = 64;      // fallback embedder dimensionality

    void validate() const;
};

struct DecodeSettings {
    double temperature = 0.7;
    int max_tokens = 2048;
};

// ---------------------------------------------------------------------------
// Client interfaces. Remote implementations live in http_clients.hpp; the
// fallbacks below are pure functions of (text, seed) so the whole pipeline
// runs with no network and no model weights.
// ---------------------------------------------------------------------------

class EmbeddingClient {
public:
    virtual ~EmbeddingClient() = default;
    // One vector per input, order-preserving, all same dimension.
    virtual std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) = 0;
    Embedding embed(const std::string& text) { return embed_batch({text}).front(); }
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const std::string& prompt, const DecodeSettings& decode = {}) = 0;
};

class TraitClient {
public:
    virtual ~TraitClient() = default;
    virtual TraitVector classify(const std::string& text) = 0;
};

class ToxicityClient {
public:
    virtual ~ToxicityClient() = default;
    virtual ToxicityScores classify(const std::string& text) = 0;
};

// ---------------------------------------------------------------------------
// Rate limiting and retries
// ---------------------------------------------------------------------------

// Sliding one-minute window limiter shared by all workers hitting one
// endpoint. Clock and sleep are injectable so tests can drive it with a
// fake clock.
class RateLimiter {
public:
    using TimePoint = std::chrono::steady_clock::time_point;
    using ClockFn = std::function<TimePoint()>;
    using SleepFn = std::function<void(std::chrono::milliseconds)>;

    explicit RateLimiter(int per_minute, ClockFn clock = nullptr, SleepFn sleep = nullptr);

    // Blocks until admitting the call keeps the window within the limit.
    void acquire();

private:
    int per_minute_;
    ClockFn clock_;
    SleepFn sleep_;
    std::mutex mutex_;
    std::deque<TimePoint> admitted_;
};

// Runs `fn` up to max_retries+1 times with exponential backoff and seeded
// jitter; rethrows the last failure as TransportError carrying the attempt
// count.
template <typename Fn>
auto with_retries(const std::string& what, int max_retries, Fn&& fn,
                  const std::function<void(std::chrono::milliseconds)>& sleep_fn,
                  uint64_t jitter_seed) -> decltype(fn()) {
    SplitMix64 jitter(jitter_seed);
    std::string last_error = "unknown failure";
    const int attempts_allowed = max_retries + 1;
    for (int attempt = 1; attempt <= attempts_allowed; ++attempt) {
        try {
            return fn();
        } catch (const ArgumentError&) {
            throw;  // caller bug, retrying cannot help
        } catch (const std::exception& ex) {
            last_error = ex.what();
            if (attempt == attempts_allowed) break;
            auto backoff = std::chrono::milliseconds(200 * (1LL << (attempt - 1)));
            backoff += std::chrono::milliseconds(jitter.bounded(100));
            if (sleep_fn) sleep_fn(backoff);
        }
    }
    throw TransportError(what + ": " + last_error, attempts_allowed);
}

// ---------------------------------------------------------------------------
// Offline fallbacks
// ---------------------------------------------------------------------------

// Seeded feature hashing of word unigrams and bigrams into `dim`
// dimensions, sign-hashed and unit-normalized. Identical (text, seed) pairs
// give bit-identical vectors.
class HashingEmbeddingClient : public EmbeddingClient {
public:
    explicit HashingEmbeddingClient(int dim = 64, uint64_t seed = 0);
    std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) override;

private:
    int dim_;
    uint64_t seed_;
};

// Word-list trait scorer. For each trait, score = (tokens whose normalized
// form is in the trait lexicon) / (whitespace token count), clamped to
// [0, 1]. Lexicons are fixed tables compiled into the library.
class LexiconTraitClient : public TraitClient {
public:
    TraitVector classify(const std::string& text) override;
};

// Word-list toxicity scorer. Each subclass score = matches against that
// subclass's list / whitespace token count; the general `toxicity` list
// feeds the toxicity field.
class WordListToxicityClient : public ToxicityClient {
public:
    ToxicityScores classify(const std::string& text) override;
};

// Deterministic offline chat backend. Reads the two journal sections out
// of the prompt and emits a well-formed 18-line speaker-prefixed dialogue
// grounded in their vocabulary; the final exchange is intentionally
// superficial so last-turn trimming has something real to remove.
class TemplateChatClient : public ChatClient {
public:
    explicit TemplateChatClient(uint64_t seed = 0) : seed_(seed) {}
    std::string complete(const std::string& prompt, const DecodeSettings& decode = {}) override;

private:
    uint64_t seed_;
};

// Reads JF_API_KEY, empty string when unset.
std::string api_key_from_env();

}  // namespace jic
