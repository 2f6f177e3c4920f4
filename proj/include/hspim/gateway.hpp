#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace hspim {

struct CompletionRequest {
    std::string model = "default";
    std::string system;
    std::string user;
    double temperature = 0.0;       // must lie in [0, 2]
    int max_output = 2048;          // token budget hint, forwarded to the provider
    std::string json_schema_hint;   // optional schema descriptor
};

struct CompletionResponse {
    std::string text;
    std::chrono::microseconds latency{0};
    bool cached = false;
};

enum class ProviderKind { mock, http_openai_compatible };

struct RetryPolicy {
    int max_attempts = 3;
    std::vector<int> backoff_ms = {100, 400};  // sleep before attempt 2, 3, ...
};

struct ProviderConfig {
    ProviderKind kind = ProviderKind::mock;
    std::string endpoint;                    // e.g. "http://host:port"
    std::string credentials_env = "HSPIM_API_KEY";
    int concurrency_limit = 4;
    RetryPolicy retry;
    std::string cache_dir;                   // empty disables the disk layer
    bool cache_enabled = true;
    uint64_t max_llm_calls = 0;              // 0 = unlimited
    uint64_t mock_seed = 0x48535049;         // fixed unless a harness overrides it
};

// A provider turns one request into raw model text. Implementations must be
// safe for concurrent calls.
class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string complete(const CompletionRequest& request) = 0;
    virtual std::string name() const = 0;
};

// Deterministic offline provider: a pure function of (request text, seed).
// It recognizes the prompt shapes built in prompts.hpp and answers each by a
// published rule that tests can evaluate independently:
//   - classification: keyword table over the "Heading:" line;
//   - QA: digest tag of (question, first sentence of the chunk) plus that
//     sentence;
//   - scoring: per-key score = round1(base + wobble) where base depends only
//     on the chunk text and wobble (±0.15) on the full user text.
class MockProvider : public Provider {
public:
    explicit MockProvider(uint64_t seed) : seed_(seed) {}
    std::string complete(const CompletionRequest& request) override;
    std::string name() const override { return "mock"; }

    // The published rules. Kept static so test oracles can call them without
    // going through a gateway.
    static std::string classify_heading(uint64_t seed, const std::string& heading,
                                        bool allow_unmatched);
    static std::string qa_digest(uint64_t seed, const std::string& question,
                                 const std::string& chunk_text);
    static double score_value(uint64_t seed, const std::string& key,
                              const std::string& chunk_text, const std::string& user_text);
    static std::string qa_answer(uint64_t seed, const std::string& question,
                                 const std::string& chunk_text);
    static std::string first_sentence(const std::string& text);

private:
    uint64_t seed_;
};

class HttpProvider : public Provider {
public:
    explicit HttpProvider(ProviderConfig config);
    std::string complete(const CompletionRequest& request) override;
    std::string name() const override { return "http-openai-compatible"; }

private:
    ProviderConfig config_;
    std::string api_key_;
};

struct GatewayStats {
    uint64_t requests = 0;        // complete() calls
    uint64_t provider_calls = 0;  // actual provider invocations (retries included)
    uint64_t cache_hits = 0;
    uint64_t retries = 0;
    uint64_t reprompts = 0;       // complete_json corrective turns
};

// Front door to any provider: response cache (memory + optional disk),
// bounded retries with backoff, a concurrency semaphore, and JSON-contract
// enforcement. Safe for concurrent callers.
class Gateway {
public:
    explicit Gateway(ProviderConfig config);
    Gateway(ProviderConfig config, std::unique_ptr<Provider> provider);
    ~Gateway();

    CompletionResponse complete(const CompletionRequest& request);

    // Extracts the first JSON object from the response and verifies the
    // required keys. Keys whose names contain "score" or "confidence" must
    // hold real numbers (numeric strings are accepted). One corrective
    // reprompt, then JsonContractError.
    nlohmann::json complete_json(const CompletionRequest& request,
                                 const std::vector<std::string>& required_keys);

    GatewayStats stats() const;
    const ProviderConfig& config() const { return config_; }

    static std::string cache_key(const CompletionRequest& request);
    // Exposed for tests: first balanced JSON object inside free text.
    static std::optional<std::string> extract_json_object(const std::string& text);

private:
    CompletionResponse complete_with_retries(const CompletionRequest& request);
    std::optional<std::string> cache_lookup(const std::string& key);
    void cache_store(const std::string& key, const std::string& text);

    ProviderConfig config_;
    std::unique_ptr<Provider> provider_;

    mutable std::mutex cache_mutex_;
    std::map<std::string, std::string> memory_cache_;

    std::mutex sem_mutex_;
    std::condition_variable sem_cv_;
    int in_flight_ = 0;

    std::atomic<uint64_t> requests_{0};
    std::atomic<uint64_t> provider_calls_{0};
    std::atomic<uint64_t> cache_hits_{0};
    std::atomic<uint64_t> retries_{0};
    std::atomic<uint64_t> reprompts_{0};
};

// Text embedding behind the same provider abstraction.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(const std::string& text) = 0;
};

// Deterministic feature-hashing bag-of-words embedder: token counts hashed
// into a fixed number of buckets, L2-normalized. Lexical overlap translates
// into cosine similarity, which keeps similarity tests meaningful offline.
class MockEmbedder : public Embedder {
public:
    explicit MockEmbedder(size_t dimension = 256, uint64_t seed = 0x48535049);
    std::vector<double> embed(const std::string& text) override;

private:
    size_t dimension_;
    uint64_t seed_;
};

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace hspim
