#pragma once

#include "convmem/providers.hpp"

#include <atomic>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace convmem {

/// Deterministic stand-in embedding. Whitespace tokens are hashed with
/// FNV-1a (64-bit) mixed with the seed, expanded to dim doubles in [-1, 1)
/// with splitmix64, averaged and L2-normalized. No tokens yields e_0.
/// Stable across platforms; the algorithm is documented in the README.
EmbeddingVector mock_embed(const std::string& text, int dim, std::uint64_t seed);

class MockEmbeddingProvider : public EmbeddingProvider {
public:
    MockEmbeddingProvider(int dim, std::uint64_t seed);

    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;
    int dim() const override { return dim_; }
    std::string fingerprint() const override;

    // Call accounting for memoization tests.
    long texts_embedded() const { return texts_embedded_.load(); }
    long batch_calls() const { return batch_calls_.load(); }

private:
    int dim_;
    std::uint64_t seed_;
    std::atomic<long> texts_embedded_{0};
    std::atomic<long> batch_calls_{0};
};

/// Fixture provider with hand-planted vectors. Unknown texts are an error
/// so tests fail loudly instead of scoring garbage.
class ScriptedEmbeddingProvider : public EmbeddingProvider {
public:
    ScriptedEmbeddingProvider(int dim, std::map<std::string, EmbeddingVector> vectors,
                              std::string label = "scripted");

    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;
    int dim() const override { return dim_; }
    std::string fingerprint() const override;

private:
    int dim_;
    std::map<std::string, EmbeddingVector> vectors_;
    std::string label_;
};

/// Exact prompt -> response map with an optional default.
class ScriptedChatProvider : public ChatProvider {
public:
    ScriptedChatProvider(std::map<std::string, std::string> script,
                         std::optional<std::string> default_response);

    ChatResult complete(const std::string& prompt, const ChatParams& params) override;
    std::string fingerprint() const override;

private:
    std::map<std::string, std::string> script_;
    std::optional<std::string> default_response_;
};

/// Deterministic filter double. Parses the context block and the question
/// out of a rendered pruning prompt and keeps exactly the lines sharing at
/// least one case-folded non-stopword token with the question, in order.
class KeywordFilterChatProvider : public ChatProvider {
public:
    ChatResult complete(const std::string& prompt, const ChatParams& params) override;
    std::string fingerprint() const override;
};

/// Deterministic generator double: echoes the history block of a rendered
/// answer prompt. Answer quality then tracks how clean the context is.
class ContextEchoChatProvider : public ChatProvider {
public:
    ChatResult complete(const std::string& prompt, const ChatParams& params) override;
    std::string fingerprint() const override;
};

/// Deterministic judge double: answers <yes> iff the model response section
/// of a rendered judge prompt contains the gold answer case-folded.
class SubstringJudgeChatProvider : public ChatProvider {
public:
    ChatResult complete(const std::string& prompt, const ChatParams& params) override;
    std::string fingerprint() const override;
};

} // namespace convmem
