#include "convmem/http_providers.hpp"

#include "convmem/errors.hpp"
#include "convmem/tokenize.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <thread>

namespace convmem {

namespace {

using nlohmann::json;

struct EndpointParts {
    std::string base;
    std::string path;
};

EndpointParts split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ValidationError("http provider endpoint must include a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string auth_token(const ProviderConfig& config) {
    if (!config.credentials_env_var) return {};
    const char* value = std::getenv(config.credentials_env_var->c_str());
    if (value == nullptr || *value == '\0')
        throw ProviderError("credentials environment variable " + *config.credentials_env_var +
                                " is not set",
                            false);
    return value;
}

json post_json(const ProviderConfig& config, const json& body) {
    if (!config.endpoint)
        throw ValidationError("http provider requires an endpoint");
    const auto [base, path] = split_endpoint(*config.endpoint);
    const std::string token = auth_token(config);

    constexpr int max_attempts = 3;
    std::string last_error;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        httplib::Client client(base);
        client.set_connection_timeout(config.request_timeout);
        client.set_read_timeout(config.request_timeout);
        client.set_write_timeout(config.request_timeout);
        httplib::Headers headers;
        if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (res && res->status >= 200 && res->status < 300) {
            json parsed = json::parse(res->body, nullptr, false);
            if (parsed.is_discarded())
                throw ProtocolError("http provider returned non-JSON body from " + base + path);
            return parsed;
        }
        if (res && res->status < 500)
            throw ProviderError("http provider " + base + path + " returned status " +
                                    std::to_string(res->status) + ": " + res->body,
                                false);
        last_error = res ? "status " + std::to_string(res->status)
                         : std::string(httplib::to_string(res.error()));
        if (attempt < max_attempts)
            std::this_thread::sleep_for(std::chrono::milliseconds(200 << (attempt - 1)));
    }
    throw ProviderError("http provider " + base + path + " failed after " +
                            std::to_string(max_attempts) + " attempts: " + last_error,
                        true);
}

} // namespace

HttpEmbeddingProvider::HttpEmbeddingProvider(ProviderConfig config) : config_(std::move(config)) {
    if (!config_.endpoint) throw ValidationError("http embedding provider requires an endpoint");
    if (config_.max_batch_size < 1)
        throw ValidationError("http embedding provider: max_batch_size must be positive");
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
    validate_embed_batch_input(texts);

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t begin = 0; begin < texts.size();
         begin += static_cast<std::size_t>(config_.max_batch_size)) {
        const std::size_t end =
            std::min(texts.size(), begin + static_cast<std::size_t>(config_.max_batch_size));
        json body{{"model", config_.model_id},
                  {"input", std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(begin),
                                                     texts.begin() + static_cast<std::ptrdiff_t>(end))}};
        json response = post_json(config_, body);
        if (!response.contains("data") || !response["data"].is_array() ||
            response["data"].size() != end - begin)
            throw ProtocolError("embedding response is missing a data entry per input");
        for (const auto& item : response["data"]) {
            if (!item.contains("embedding"))
                throw ProtocolError("embedding response entry is missing 'embedding'");
            out.push_back(item["embedding"].get<EmbeddingVector>());
        }
    }

    const int batch_dim = static_cast<int>(out.front().size());
    for (const auto& v : out)
        if (static_cast<int>(v.size()) != batch_dim)
            throw ProtocolError("embedding response mixes dimensions " +
                                std::to_string(batch_dim) + " and " + std::to_string(v.size()));
    int known = dim_.load();
    if (known == 0)
        dim_.compare_exchange_strong(known, batch_dim);
    else if (known != batch_dim)
        throw ProtocolError("embedding dimension changed from " + std::to_string(known) + " to " +
                            std::to_string(batch_dim));
    return out;
}

std::string HttpEmbeddingProvider::fingerprint() const {
    return "http_embedding|" + *config_.endpoint + "|" + config_.model_id;
}

HttpChatProvider::HttpChatProvider(ProviderConfig config) : config_(std::move(config)) {
    if (!config_.endpoint) throw ValidationError("http chat provider requires an endpoint");
}

ChatResult HttpChatProvider::complete(const std::string& prompt, const ChatParams& params) {
    validate_chat_prompt(prompt);

    json body{{"model", config_.model_id},
              {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
              {"temperature", params.temperature},
              {"max_tokens", params.max_tokens}};

    const auto started = std::chrono::steady_clock::now();
    json response = post_json(config_, body);
    const auto elapsed = std::chrono::steady_clock::now() - started;

    if (!response.contains("choices") || !response["choices"].is_array() ||
        response["choices"].empty())
        throw ProtocolError("chat response has no choices");
    const auto& message = response["choices"][0];
    if (!message.contains("message") || !message["message"].contains("content"))
        throw ProtocolError("chat response choice has no message content");

    ChatResult result;
    result.text = message["message"]["content"].get<std::string>();
    if (result.text.empty())
        throw ProviderError("chat provider returned an empty completion", false);
    result.latency_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(elapsed).count();
    if (response.contains("usage") && response["usage"].is_object()) {
        const auto& usage = response["usage"];
        result.prompt_tokens = usage.value("prompt_tokens", 0L);
        result.completion_tokens = usage.value("completion_tokens", 0L);
    } else {
        result.prompt_tokens = static_cast<long>(count_fallback_tokens(prompt));
        result.completion_tokens = static_cast<long>(count_fallback_tokens(result.text));
    }
    return result;
}

std::string HttpChatProvider::fingerprint() const {
    return "http_chat|" + *config_.endpoint + "|" + config_.model_id;
}

} // namespace convmem
