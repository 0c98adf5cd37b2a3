#include "jic/clients.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <unordered_set>

#include "jic/text.hpp"

namespace jic {

namespace {

bool in_unit_interval(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

}  // namespace

bool TraitVector::valid() const {
    return in_unit_interval(openness) && in_unit_interval(conscientiousness) &&
           in_unit_interval(extraversion) && in_unit_interval(agreeableness) &&
           in_unit_interval(neuroticism);
}

bool ToxicityScores::valid() const {
    return in_unit_interval(toxicity) && in_unit_interval(severe_toxicity) &&
           in_unit_interval(obscene) && in_unit_interval(threat) && in_unit_interval(insult) &&
           in_unit_interval(identity_attack);
}

void ClientConfig::validate() const {
    if (requests_per_minute < 1) throw ArgumentError("requests_per_minute must be >= 1");
    if (max_retries < 0) throw ArgumentError("max_retries must be >= 0");
    if (embed_dim < 1) throw ArgumentError("embed_dim must be >= 1");
}

std::string api_key_from_env() {
    const char* key = std::getenv("JF_API_KEY");
    return key ? key : "";
}

// ---------------------------------------------------------------------------
// RateLimiter
// ---------------------------------------------------------------------------

RateLimiter::RateLimiter(int per_minute, ClockFn clock, SleepFn sleep)
    : per_minute_(per_minute),
      clock_(clock ? std::move(clock) : [] { return std::chrono::steady_clock::now(); }),
      sleep_(sleep ? std::move(sleep)
                   : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
    if (per_minute_ < 1) throw ArgumentError("rate limit must be >= 1 per minute");
}

void RateLimiter::acquire() {
    using namespace std::chrono;
    for (;;) {
        milliseconds wait{0};
        {
            std::lock_guard<std::mutex> lock(mutex_);
            TimePoint now = clock_();
            while (!admitted_.empty() && now - admitted_.front() >= minutes(1))
                admitted_.pop_front();
            if (static_cast<int>(admitted_.size()) < per_minute_) {
                admitted_.push_back(now);
                return;
            }
            wait = duration_cast<milliseconds>(admitted_.front() + minutes(1) - now);
            if (wait < milliseconds(1)) wait = milliseconds(1);
        }
        sleep_(wait);
    }
}

// ---------------------------------------------------------------------------
// HashingEmbeddingClient
// ---------------------------------------------------------------------------

HashingEmbeddingClient::HashingEmbeddingClient(int dim, uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim < 1) throw ArgumentError("embedding dimension must be >= 1");
}

std::vector<Embedding> HashingEmbeddingClient::embed_batch(const std::vector<std::string>& texts) {
    if (texts.empty()) throw ArgumentError("embed_batch requires a non-empty text list");
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        if (trim(text).empty()) throw ArgumentError("cannot embed empty text");
        Embedding v = Embedding::Zero(dim_);
        auto tokens = metric_tokens(text);
        auto bump = [&](const std::string& gram) {
            uint64_t h = fnv1a64(gram, seed_ ^ 0x51ed270b9f812f3bULL);
            double sign = (h >> 63) ? 1.0 : -1.0;
            v[static_cast<int>(h % static_cast<uint64_t>(dim_))] += sign;
        };
        for (size_t i = 0; i < tokens.size(); ++i) {
            bump(tokens[i]);
            if (i + 1 < tokens.size()) bump(tokens[i] + "\x1f" + tokens[i + 1]);
        }
        double norm = v.norm();
        if (norm > 0) {
            v /= norm;
        } else {
            // punctuation-only input hashes to nothing; pin a unit basis
            // vector so the dimension contract still holds
            v[static_cast<int>(fnv1a64(text, seed_) % static_cast<uint64_t>(dim_))] = 1.0;
        }
        out.push_back(std::move(v));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Word-list scorers
// ---------------------------------------------------------------------------

namespace {

using WordSet = std::unordered_set<std::string>;

const WordSet kOpenness = {"curious",  "imagine", "imaginative", "wonder", "art",
                           "dream",    "explore", "novel",       "create", "creative",
                           "invent",   "idea",    "ideas",       "poetry", "philosophy"};
const WordSet kConscientiousness = {"plan",     "plans",    "organize", "organized", "schedule",
                                    "careful",  "duty",     "goal",     "goals",     "discipline",
                                    "finish",   "complete", "tidy",     "routine",   "diligent"};
const WordSet kExtraversion = {"party",    "friends", "talk",   "talking", "excited",
                               "outgoing", "social",  "fun",    "crowd",   "energy",
                               "chat",     "loud",    "people", "meetup",  "lively"};
const WordSet kAgreeableness = {"kind",    "help",  "helping", "warm",   "trust",
                                "gentle",  "support", "care",  "caring", "thank",
                                "thanks",  "share",  "sharing", "forgive", "friendly"};
const WordSet kNeuroticism = {"anxious", "anxiety", "worry",   "worried", "stress",
                              "stressed", "afraid", "nervous", "sad",     "angry",
                              "fear",    "panic",   "upset",   "cry",     "dread"};

const WordSet kToxicity = {"stupid", "idiot", "dumb",  "hate",  "trash",
                           "moron",  "loser", "scum",  "filth", "garbage"};
const WordSet kSevereToxicity = {"kill", "murder", "slaughter"};
const WordSet kObscene = {"damn", "crap", "hell"};
const WordSet kThreat = {"kill", "hurt", "destroy", "punch", "stab"};
const WordSet kInsult = {"idiot", "stupid", "dumb", "moron", "loser"};
const WordSet kIdentityAttack = {"racist", "sexist", "bigot"};

std::string normalize_token(const std::string& token) {
    std::string out;
    for (char c : token)
        if (std::isalnum(static_cast<unsigned char>(c)))
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

// score = hits / whitespace-token count, clamped to [0, 1]
double list_ratio(const std::vector<std::string>& raw_tokens, const WordSet& words) {
    if (raw_tokens.empty()) return 0.0;
    size_t hits = 0;
    for (const auto& t : raw_tokens)
        if (words.count(normalize_token(t))) ++hits;
    double r = static_cast<double>(hits) / static_cast<double>(raw_tokens.size());
    return r > 1.0 ? 1.0 : r;
}

std::vector<std::string> require_tokens(const std::string& text, const char* op) {
    if (trim(text).empty()) throw ArgumentError(std::string(op) + " requires non-empty text");
    return whitespace_tokens(text);
}

}  // namespace

TraitVector LexiconTraitClient::classify(const std::string& text) {
    auto tokens = require_tokens(text, "classify_traits");
    TraitVector t;
    t.openness = list_ratio(tokens, kOpenness);
    t.conscientiousness = list_ratio(tokens, kConscientiousness);
    t.extraversion = list_ratio(tokens, kExtraversion);
    t.agreeableness = list_ratio(tokens, kAgreeableness);
    t.neuroticism = list_ratio(tokens, kNeuroticism);
    return t;
}

ToxicityScores WordListToxicityClient::classify(const std::string& text) {
    auto tokens = require_tokens(text, "classify_toxicity");
    ToxicityScores s;
    s.toxicity = list_ratio(tokens, kToxicity);
    s.severe_toxicity = list_ratio(tokens, kSevereToxicity);
    s.obscene = list_ratio(tokens, kObscene);
    s.threat = list_ratio(tokens, kThreat);
    s.insult = list_ratio(tokens, kInsult);
    s.identity_attack = list_ratio(tokens, kIdentityAttack);
    return s;
}

// ---------------------------------------------------------------------------
// TemplateChatClient
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> content_words(const std::string& body) {
    std::vector<std::string> pool;
    std::unordered_set<std::string> seen;
    for (const auto& t : metric_tokens(body)) {
        if (t.size() >= 4 && seen.insert(t).second) pool.push_back(t);
    }
    const char* padding[] = {"today", "writing", "thoughts", "feelings"};
    for (const char* p : padding)
        if (pool.size() < 4 && seen.insert(p).second) pool.push_back(p);
    return pool;
}

std::string section_after(const std::string& prompt, const std::string& marker,
                          const std::string& next_marker) {
    size_t at = prompt.find(marker);
    if (at == std::string::npos) return "";
    at += marker.size();
    size_t end = next_marker.empty() ? std::string::npos : prompt.find(next_marker, at);
    return prompt.substr(at, end == std::string::npos ? std::string::npos : end - at);
}

}  // namespace

std::string TemplateChatClient::complete(const std::string& prompt, const DecodeSettings&) {
    if (trim(prompt).empty()) throw ArgumentError("chat_complete requires a non-empty prompt");

    std::string body_a = section_after(prompt, "<journal 1>", "<journal 2>");
    std::string body_b = section_after(prompt, "<journal 2>", "");
    if (body_a.empty()) body_a = prompt;
    if (body_b.empty()) body_b = prompt;
    auto pool_a = content_words(body_a);
    auto pool_b = content_words(body_b);

    static const char* kShapes[] = {
        "I keep coming back to % whenever I write about %.",
        "Lately % has been on my mind more than %.",
        "Writing about % helps me make sense of %.",
        "Do you ever think about % when % comes up?",
        "For me % and % always end up connected.",
        "That reminds me of % and %, something I journaled about recently.",
        "Honestly % changed how I look at %.",
    };
    constexpr int kShapeCount = sizeof(kShapes) / sizeof(kShapes[0]);

    SplitMix64 rng(fnv1a64(prompt, seed_ ^ 0x7c9a2e1db4f0635dULL));
    std::string out;
    for (int line = 0; line < 18; ++line) {
        bool first_speaker = (line % 2 == 0);
        out += first_speaker ? "Author 1: " : "Author 2: ";
        if (line == 16) {
            out += "It was lovely talking with you. Bye!";
        } else if (line == 17) {
            out += "You too. Have a nice day.";
        } else {
            const auto& pool = first_speaker ? pool_a : pool_b;
            const char* shape = kShapes[rng.bounded(kShapeCount)];
            std::string text;
            for (const char* c = shape; *c; ++c) {
                if (*c == '%')
                    text += pool[rng.bounded(pool.size())];
                else
                    text.push_back(*c);
            }
            out += text;
        }
        out.push_back('\n');
    }
    return out;
}

}  // namespace jic
