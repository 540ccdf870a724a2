#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace convmem {

using EmbeddingVector = std::vector<double>;

/// Completion text plus usage accounting. When a backend does not report
/// usage the token counts are computed with the fallback tokenizer and are
/// approximate.
struct ChatResult {
    std::string text;
    long prompt_tokens = 0;
    long completion_tokens = 0;
    double latency_ms = 0.0;
};

struct ChatParams {
    double temperature = 0.0;
    int max_tokens = 4000;
};

enum class ProviderKind { http_embedding, http_chat, mock_embedding, mock_chat };

std::string to_string(ProviderKind kind);
ProviderKind provider_kind_from_string(const std::string& name);

/// Configuration for one provider slot. http kinds require an endpoint.
/// For mock_chat the model_id selects the behavior: "scripted",
/// "keyword-filter", "context-echo" or "substring-judge".
struct ProviderConfig {
    ProviderKind provider_kind = ProviderKind::mock_embedding;
    std::optional<std::string> endpoint;
    std::string model_id;
    std::optional<std::string> credentials_env_var;
    std::chrono::milliseconds request_timeout{30000};
    int max_batch_size = 64;

    // Embedding vector width. The mock defaults to 64; for http providers
    // it is unknown until the first response unless declared here, and the
    // persistent cache is only enabled when the width is known up front.
    std::optional<int> dim;
    std::uint64_t seed = 0;

    // mock_chat "scripted": exact prompt -> response, with optional default.
    std::map<std::string, std::string> script;
    std::optional<std::string> default_response;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    /// One vector per input text, same order, all with the same dimension.
    /// The text list must be non-empty and every text non-empty after
    /// trimming. Implementations must be safe to call concurrently.
    virtual std::vector<EmbeddingVector> embed_batch(
        const std::vector<std::string>& texts) = 0;

    /// Vector width, or 0 when unknown until the first call (http).
    virtual int dim() const = 0;

    /// Stable identity string: kind, model, and the parameters that change
    /// the vectors. Used for cache namespacing and index fingerprints.
    virtual std::string fingerprint() const = 0;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;

    /// Complete a non-empty prompt. Implementations must be safe to call
    /// concurrently. An empty completion from the backend is an error.
    virtual ChatResult complete(const std::string& prompt,
                                const ChatParams& params) = 0;

    virtual std::string fingerprint() const = 0;
};

/// Throws ValidationError unless texts is non-empty and each entry has
/// non-whitespace content.
void validate_embed_batch_input(const std::vector<std::string>& texts);

/// Throws ValidationError when the prompt is empty.
void validate_chat_prompt(const std::string& prompt);

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const ProviderConfig& config);
std::unique_ptr<ChatProvider> make_chat_provider(const ProviderConfig& config);

} // namespace convmem
