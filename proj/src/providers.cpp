#include "convmem/providers.hpp"

#include "convmem/errors.hpp"
#include "convmem/http_providers.hpp"
#include "convmem/mock_providers.hpp"

#include <algorithm>
#include <cctype>

namespace convmem {

std::string to_string(ProviderKind kind) {
    switch (kind) {
    case ProviderKind::http_embedding: return "http_embedding";
    case ProviderKind::http_chat: return "http_chat";
    case ProviderKind::mock_embedding: return "mock_embedding";
    case ProviderKind::mock_chat: return "mock_chat";
    }
    throw ValidationError("unknown provider kind");
}

ProviderKind provider_kind_from_string(const std::string& name) {
    if (name == "http_embedding") return ProviderKind::http_embedding;
    if (name == "http_chat") return ProviderKind::http_chat;
    if (name == "mock_embedding") return ProviderKind::mock_embedding;
    if (name == "mock_chat") return ProviderKind::mock_chat;
    throw ValidationError("unknown provider kind: " + name);
}

void validate_embed_batch_input(const std::vector<std::string>& texts) {
    if (texts.empty()) throw ValidationError("embed_batch: text list is empty");
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const bool blank = std::all_of(texts[i].begin(), texts[i].end(), [](unsigned char c) {
            return std::isspace(c) != 0;
        });
        if (blank)
            throw ValidationError("embed_batch: text " + std::to_string(i) +
                                  " is empty after trimming");
    }
}

void validate_chat_prompt(const std::string& prompt) {
    if (prompt.empty()) throw ValidationError("chat_complete: prompt is empty");
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const ProviderConfig& config) {
    switch (config.provider_kind) {
    case ProviderKind::mock_embedding:
        return std::make_unique<MockEmbeddingProvider>(config.dim.value_or(64), config.seed);
    case ProviderKind::http_embedding:
        return std::make_unique<HttpEmbeddingProvider>(config);
    default:
        throw ValidationError("provider kind " + to_string(config.provider_kind) +
                              " is not an embedding provider");
    }
}

std::unique_ptr<ChatProvider> make_chat_provider(const ProviderConfig& config) {
    switch (config.provider_kind) {
    case ProviderKind::http_chat:
        return std::make_unique<HttpChatProvider>(config);
    case ProviderKind::mock_chat:
        if (config.model_id == "keyword-filter")
            return std::make_unique<KeywordFilterChatProvider>();
        if (config.model_id == "context-echo")
            return std::make_unique<ContextEchoChatProvider>();
        if (config.model_id == "substring-judge")
            return std::make_unique<SubstringJudgeChatProvider>();
        if (config.model_id == "scripted" || config.model_id.empty())
            return std::make_unique<ScriptedChatProvider>(config.script, config.default_response);
        throw ValidationError("unknown mock chat model: " + config.model_id);
    default:
        throw ValidationError("provider kind " + to_string(config.provider_kind) +
                              " is not a chat provider");
    }
}

} // namespace convmem
