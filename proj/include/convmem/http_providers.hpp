#pragma once

#include "convmem/providers.hpp"

#include <atomic>
#include <string>

namespace convmem {

/// OpenAI-compatible embeddings endpoint.
/// Request {"model", "input": [...]}, response {"data": [{"embedding"}]}.
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(ProviderConfig config);

    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;
    int dim() const override { return dim_.load(); }
    std::string fingerprint() const override;

private:
    ProviderConfig config_;
    std::atomic<int> dim_{0};
};

/// OpenAI-compatible chat completions endpoint.
/// Request {"model", "messages", "temperature", "max_tokens"},
/// response {"choices": [{"message": {"content"}}], "usage": {...}}.
class HttpChatProvider : public ChatProvider {
public:
    explicit HttpChatProvider(ProviderConfig config);

    ChatResult complete(const std::string& prompt, const ChatParams& params) override;
    std::string fingerprint() const override;

private:
    ProviderConfig config_;
};

} // namespace convmem
