#include "hspim/gateway.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "hspim/errors.hpp"
#include "hspim/util.hpp"

namespace hspim {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// HttpProvider
// ---------------------------------------------------------------------------

HttpProvider::HttpProvider(ProviderConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty())
        throw UsageError("http provider requires an endpoint");
    if (const char* key = std::getenv(config_.credentials_env.c_str()))
        api_key_ = key;
}

std::string HttpProvider::complete(const CompletionRequest& request) {
    json body = {
        {"model", request.model},
        {"messages",
         {{{"role", "system"}, {"content", request.system}},
          {{"role", "user"}, {"content", request.user}}}},
        {"temperature", request.temperature},
        {"max_tokens", request.max_output},
    };
    if (!request.json_schema_hint.empty())
        body["response_format"] = {{"type", "json_object"}};
    httplib::Client client(config_.endpoint);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
    if (!res)
        throw TransportError("no response from " + config_.endpoint + ": " +
                             httplib::to_string(res.error()));
    if (res->status == 401 || res->status == 403)
        throw AuthError("authentication failed against " + config_.endpoint +
                        " (env " + config_.credentials_env + ")");
    if (res->status != 200)
        throw TransportError("endpoint returned HTTP " + std::to_string(res->status) + ": " +
                             res->body.substr(0, 300));
    try {
        json parsed = json::parse(res->body);
        return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw TransportError(std::string("unexpected chat-completions payload: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Gateway
// ---------------------------------------------------------------------------

namespace {

std::unique_ptr<Provider> make_provider(const ProviderConfig& config) {
    switch (config.kind) {
        case ProviderKind::mock: return std::make_unique<MockProvider>(config.mock_seed);
        case ProviderKind::http_openai_compatible:
            return std::make_unique<HttpProvider>(config);
    }
    throw UsageError("unknown provider kind");
}

class SemaphoreGuard {
public:
    SemaphoreGuard(std::mutex& m, std::condition_variable& cv, int& in_flight, int limit)
        : m_(m), cv_(cv), in_flight_(in_flight) {
        std::unique_lock<std::mutex> lock(m_);
        cv_.wait(lock, [&] { return in_flight_ < limit; });
        ++in_flight_;
    }
    ~SemaphoreGuard() {
        {
            std::lock_guard<std::mutex> lock(m_);
            --in_flight_;
        }
        cv_.notify_one();
    }

private:
    std::mutex& m_;
    std::condition_variable& cv_;
    int& in_flight_;
};

std::string hex_digest(uint64_t a, uint64_t b) {
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << a;
    out.width(16);
    out << b;
    return out.str();
}

}  // namespace

Gateway::Gateway(ProviderConfig config) : Gateway(std::move(config), nullptr) {}

Gateway::Gateway(ProviderConfig config, std::unique_ptr<Provider> provider)
    : config_(std::move(config)), provider_(std::move(provider)) {
    if (config_.concurrency_limit < 1)
        throw UsageError("concurrency_limit must be >= 1");
    if (config_.retry.max_attempts < 1)
        throw UsageError("retry.max_attempts must be >= 1");
    if (!provider_) provider_ = make_provider(config_);
    if (!config_.cache_dir.empty()) fs::create_directories(config_.cache_dir);
}

Gateway::~Gateway() = default;

std::string Gateway::cache_key(const CompletionRequest& request) {
    std::ostringstream packed;
    packed << request.model << '\x1f' << request.system << '\x1f' << request.user << '\x1f'
           << request.temperature;
    std::string s = packed.str();
    // two passes with distinct seeds; 128 bits keeps accidental collisions out
    return hex_digest(fnv1a64(s), fnv1a64(s, 0x9e3779b97f4a7c15ull));
}

std::optional<std::string> Gateway::cache_lookup(const std::string& key) {
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = memory_cache_.find(key);
        if (it != memory_cache_.end()) return it->second;
    }
    if (config_.cache_dir.empty()) return std::nullopt;
    fs::path file = fs::path(config_.cache_dir) / (key + ".json");
    std::ifstream in(file, std::ios::binary);
    if (!in) return std::nullopt;
    try {
        json rec = json::parse(in);
        std::string text = rec.at("text").get<std::string>();
        std::lock_guard<std::mutex> lock(cache_mutex_);
        memory_cache_[key] = text;
        return text;
    } catch (const json::exception&) {
        return std::nullopt;  // damaged entry: treat as a miss
    }
}

void Gateway::cache_store(const std::string& key, const std::string& text) {
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        memory_cache_[key] = text;
    }
    if (config_.cache_dir.empty()) return;
    fs::path file = fs::path(config_.cache_dir) / (key + ".json");
    fs::path tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out << json{{"text", text}}.dump();
    }
    std::error_code ec;
    fs::rename(tmp, file, ec);  // atomic on POSIX; losing a cache entry is harmless
}

CompletionResponse Gateway::complete_with_retries(const CompletionRequest& request) {
    const auto& retry = config_.retry;
    auto start = std::chrono::steady_clock::now();
    for (int attempt = 1;; ++attempt) {
        try {
            if (config_.max_llm_calls > 0 &&
                provider_calls_.load() >= config_.max_llm_calls)
                throw BudgetError("LLM call budget of " +
                                  std::to_string(config_.max_llm_calls) + " exceeded");
            provider_calls_.fetch_add(1);
            std::string text;
            {
                SemaphoreGuard guard(sem_mutex_, sem_cv_, in_flight_,
                                     config_.concurrency_limit);
                text = provider_->complete(request);
            }
            if (text.empty()) throw TransportError("provider returned empty text");
            CompletionResponse resp;
            resp.text = std::move(text);
            resp.latency = std::chrono::duration_cast<std::chrono::microseconds>(
                std::chrono::steady_clock::now() - start);
            return resp;
        } catch (const AuthError&) {
            throw;
        } catch (const BudgetError&) {
            throw;
        } catch (const TransportError& e) {
            if (attempt >= retry.max_attempts)
                throw TransportError(std::string(e.what()) + " (after " +
                                     std::to_string(attempt) + " attempts)");
            retries_.fetch_add(1);
            int sleep_ms = 0;
            if (!retry.backoff_ms.empty()) {
                size_t idx = std::min<size_t>(static_cast<size_t>(attempt - 1),
                                              retry.backoff_ms.size() - 1);
                sleep_ms = retry.backoff_ms[idx];
            }
            if (sleep_ms > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms));
        }
    }
}

CompletionResponse Gateway::complete(const CompletionRequest& request) {
    if (request.temperature < 0.0 || request.temperature > 2.0)
        throw UsageError("temperature must lie in [0,2], got " +
                         std::to_string(request.temperature));
    requests_.fetch_add(1);
    std::string key = cache_key(request);
    if (config_.cache_enabled) {
        if (auto hit = cache_lookup(key)) {
            cache_hits_.fetch_add(1);
            CompletionResponse resp;
            resp.text = *hit;
            resp.cached = true;
            return resp;
        }
    }
    CompletionResponse resp = complete_with_retries(request);
    if (config_.cache_enabled) cache_store(key, resp.text);
    return resp;
}

std::optional<std::string> Gateway::extract_json_object(const std::string& text) {
    size_t start = text.find('{');
    if (start == std::string::npos) return std::nullopt;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (size_t i = start; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}') {
            --depth;
            if (depth == 0) return text.substr(start, i - start + 1);
        }
    }
    return std::nullopt;
}

namespace {

bool needs_numeric_value(const std::string& key) {
    std::string k = to_lower(key);
    return k.find("score") != std::string::npos || k.find("confidence") != std::string::npos;
}

// Throws JsonContractError describing the first violated requirement.
json parse_contract(const std::string& text, const std::vector<std::string>& required_keys) {
    auto object_text = Gateway::extract_json_object(text);
    if (!object_text)
        throw JsonContractError("no JSON object found in response: " + text.substr(0, 200));
    json obj;
    try {
        obj = json::parse(*object_text);
    } catch (const json::exception& e) {
        throw JsonContractError(std::string("response JSON does not parse: ") + e.what());
    }
    for (const auto& key : required_keys) {
        if (!obj.contains(key))
            throw JsonContractError("response JSON is missing required key \"" + key + "\"");
        if (needs_numeric_value(key)) {
            const json& v = obj[key];
            if (v.is_number()) continue;
            if (v.is_string()) {
                try {
                    size_t used = 0;
                    const std::string s = v.get<std::string>();
                    double parsed = std::stod(s, &used);
                    if (used == s.size() && std::isfinite(parsed)) {
                        obj[key] = parsed;
                        continue;
                    }
                } catch (const std::exception&) {
                }
            }
            throw JsonContractError("key \"" + key + "\" is not a real number: " + v.dump());
        }
    }
    return obj;
}

}  // namespace

json Gateway::complete_json(const CompletionRequest& request,
                            const std::vector<std::string>& required_keys) {
    if (required_keys.empty())
        throw UsageError("complete_json requires at least one required key");
    CompletionResponse first = complete(request);
    try {
        return parse_contract(first.text, required_keys);
    } catch (const JsonContractError& first_error) {
        reprompts_.fetch_add(1);
        CompletionRequest corrective = request;
        std::string keys;
        for (size_t i = 0; i < required_keys.size(); ++i) {
            if (i > 0) keys += ", ";
            keys += '"' + required_keys[i] + '"';
        }
        corrective.user += "\nYour previous reply was not a valid JSON object with the "
                           "required keys. Reply with ONLY a JSON object containing the keys: " +
                           keys + ". Score values must be plain numbers.";
        CompletionResponse second = complete(corrective);
        try {
            return parse_contract(second.text, required_keys);
        } catch (const JsonContractError& second_error) {
            throw JsonContractError(std::string(second_error.what()) +
                                    " (after corrective reprompt; first failure: " +
                                    first_error.what() + ")");
        }
    }
}

GatewayStats Gateway::stats() const {
    GatewayStats st;
    st.requests = requests_.load();
    st.provider_calls = provider_calls_.load();
    st.cache_hits = cache_hits_.load();
    st.retries = retries_.load();
    st.reprompts = reprompts_.load();
    return st;
}

// ---------------------------------------------------------------------------
// Embedding
// ---------------------------------------------------------------------------

MockEmbedder::MockEmbedder(size_t dimension, uint64_t seed)
    : dimension_(dimension), seed_(seed) {
    if (dimension_ == 0) throw UsageError("embedder dimension must be positive");
}

std::vector<double> MockEmbedder::embed(const std::string& text) {
    std::vector<double> v(dimension_, 0.0);
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        uint64_t h = fnv1a64(token, hash_mix(fnv1a64("embed"), seed_));
        v[h % dimension_] += 1.0;
        token.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            token += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        else
            flush();
    }
    flush();
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (double& x : v) x /= norm;
    return v;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty())
        throw UsageError("cosine_similarity requires equal, nonzero dimensions");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    double denom = std::sqrt(na) * std::sqrt(nb);
    return denom > 0.0 ? dot / denom : 0.0;
}

}  // namespace hspim
