#include "convmem/mock_providers.hpp"

#include "convmem/errors.hpp"
#include "convmem/hash.hpp"
#include "convmem/tokenize.hpp"

#include <cmath>
#include <unordered_set>

namespace convmem {

namespace {

long token_count(const std::string& text) {
    return static_cast<long>(count_fallback_tokens(text));
}

ChatResult make_result(const std::string& prompt, std::string text) {
    ChatResult result;
    result.prompt_tokens = token_count(prompt);
    result.completion_tokens = token_count(text);
    result.text = std::move(text);
    return result;
}

// Locates "\n<label>" scanning backwards from end_pos. Throws when absent
// or when it precedes min_pos.
std::size_t rfind_marker(const std::string& prompt, const std::string& label,
                         std::size_t end_pos, std::size_t min_pos) {
    const std::string marker = "\n" + label;
    std::size_t pos = prompt.rfind(marker, end_pos);
    if (pos == std::string::npos || pos < min_pos)
        throw ProtocolError("mock chat: prompt is missing the '" + label + "' section");
    return pos;
}

// The context block ends where the question section begins. When a
// "Question Date:" line immediately precedes the question line it belongs
// to the template, not the context.
std::size_t context_end(const std::string& prompt, std::size_t context_start,
                        std::size_t question_pos) {
    const std::string date_marker = "\nQuestion Date: ";
    std::size_t date_pos = prompt.rfind(date_marker, question_pos);
    if (date_pos != std::string::npos && date_pos >= context_start &&
        prompt.find('\n', date_pos + 1) == question_pos)
        return date_pos;
    return question_pos;
}

std::unordered_set<std::string> content_token_set(const std::string& text) {
    std::unordered_set<std::string> out;
    for (const auto& tok : metric_tokens(text))
        if (!is_filter_stopword(tok)) out.insert(tok);
    return out;
}

} // namespace

EmbeddingVector mock_embed(const std::string& text, int dim, std::uint64_t seed) {
    if (dim < 2) throw ValidationError("mock_embed: dim must be >= 2, got " + std::to_string(dim));

    const auto tokens = whitespace_tokens(text);
    EmbeddingVector v(static_cast<std::size_t>(dim), 0.0);
    if (tokens.empty()) {
        v[0] = 1.0;
        return v;
    }
    for (const auto& tok : tokens) {
        SplitMix rng(fnv1a64(tok) ^ (seed + 0x9e3779b97f4a7c15ULL));
        for (auto& component : v) component += rng.next_signed();
    }
    double norm_sq = 0.0;
    for (auto& component : v) {
        component /= static_cast<double>(tokens.size());
        norm_sq += component * component;
    }
    if (norm_sq == 0.0) {
        v.assign(static_cast<std::size_t>(dim), 0.0);
        v[0] = 1.0;
        return v;
    }
    const double inv_norm = 1.0 / std::sqrt(norm_sq);
    for (auto& component : v) component *= inv_norm;
    return v;
}

MockEmbeddingProvider::MockEmbeddingProvider(int dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
    if (dim < 2) throw ValidationError("mock embedding provider: dim must be >= 2");
}

std::vector<EmbeddingVector> MockEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
    validate_embed_batch_input(texts);
    batch_calls_.fetch_add(1);
    texts_embedded_.fetch_add(static_cast<long>(texts.size()));
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) out.push_back(mock_embed(text, dim_, seed_));
    return out;
}

std::string MockEmbeddingProvider::fingerprint() const {
    return "mock_embedding|dim=" + std::to_string(dim_) + "|seed=" + std::to_string(seed_) + "|v1";
}

ScriptedEmbeddingProvider::ScriptedEmbeddingProvider(
    int dim, std::map<std::string, EmbeddingVector> vectors, std::string label)
    : dim_(dim), vectors_(std::move(vectors)), label_(std::move(label)) {
    for (const auto& [text, v] : vectors_)
        if (static_cast<int>(v.size()) != dim_)
            throw ValidationError("scripted embedding for \"" + text + "\" has dim " +
                                  std::to_string(v.size()) + ", expected " + std::to_string(dim_));
}

std::vector<EmbeddingVector> ScriptedEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
    validate_embed_batch_input(texts);
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        auto it = vectors_.find(text);
        if (it == vectors_.end())
            throw ValidationError("scripted embedding provider has no vector for \"" + text + "\"");
        out.push_back(it->second);
    }
    return out;
}

std::string ScriptedEmbeddingProvider::fingerprint() const {
    return "scripted_embedding|" + label_ + "|dim=" + std::to_string(dim_);
}

ScriptedChatProvider::ScriptedChatProvider(std::map<std::string, std::string> script,
                                           std::optional<std::string> default_response)
    : script_(std::move(script)), default_response_(std::move(default_response)) {}

ChatResult ScriptedChatProvider::complete(const std::string& prompt, const ChatParams&) {
    validate_chat_prompt(prompt);
    std::string text;
    if (auto it = script_.find(prompt); it != script_.end()) {
        text = it->second;
    } else if (default_response_) {
        text = *default_response_;
    } else {
        throw ProviderError("scripted chat provider has no response for this prompt", false);
    }
    if (text.empty())
        throw ProviderError("scripted chat provider returned an empty completion", false);
    return make_result(prompt, std::move(text));
}

std::string ScriptedChatProvider::fingerprint() const {
    return "mock_chat|scripted|entries=" + std::to_string(script_.size());
}

ChatResult KeywordFilterChatProvider::complete(const std::string& prompt, const ChatParams&) {
    validate_chat_prompt(prompt);

    const std::string context_marker = "\nFused Historical Event: ";
    std::size_t marker_pos = prompt.find(context_marker);
    if (marker_pos == std::string::npos)
        throw ProtocolError("keyword filter: prompt is missing the 'Fused Historical Event:' section");
    std::size_t start = marker_pos + context_marker.size();

    std::size_t answer_pos = rfind_marker(prompt, "Answer:", std::string::npos, start);
    std::size_t question_pos = rfind_marker(prompt, "Question: ", answer_pos, start);
    std::size_t end = context_end(prompt, start, question_pos);

    const std::string question =
        prompt.substr(question_pos + 11, answer_pos - (question_pos + 11));
    const auto query_tokens = content_token_set(question);

    std::string kept;
    std::size_t line_start = start;
    while (line_start <= end) {
        std::size_t line_end = prompt.find('\n', line_start);
        if (line_end == std::string::npos || line_end > end) line_end = end;
        const std::string line = prompt.substr(line_start, line_end - line_start);
        bool shares = false;
        for (const auto& tok : metric_tokens(line)) {
            if (query_tokens.count(tok)) {
                shares = true;
                break;
            }
        }
        if (shares) {
            if (!kept.empty()) kept += '\n';
            kept += line;
        }
        if (line_end >= end) break;
        line_start = line_end + 1;
    }
    return make_result(prompt, std::move(kept));
}

std::string KeywordFilterChatProvider::fingerprint() const {
    return "mock_chat|keyword-filter|v1";
}

ChatResult ContextEchoChatProvider::complete(const std::string& prompt, const ChatParams&) {
    validate_chat_prompt(prompt);

    const std::string context_marker = "\nHistory Dialogs: ";
    std::size_t marker_pos = prompt.find(context_marker);
    if (marker_pos == std::string::npos)
        throw ProtocolError("context echo: prompt is missing the 'History Dialogs:' section");
    std::size_t start = marker_pos + context_marker.size();

    std::size_t question_pos = rfind_marker(prompt, "Question: ", std::string::npos, start);
    std::size_t end = context_end(prompt, start, question_pos);

    std::string text = prompt.substr(start, end - start);
    if (text.empty())
        throw ProviderError("context echo: empty history block", false);
    return make_result(prompt, std::move(text));
}

std::string ContextEchoChatProvider::fingerprint() const {
    return "mock_chat|context-echo|v1";
}

ChatResult SubstringJudgeChatProvider::complete(const std::string& prompt, const ChatParams&) {
    validate_chat_prompt(prompt);

    std::size_t tail_pos = rfind_marker(prompt, "Is the model response correct?", std::string::npos, 0);
    std::size_t response_pos = rfind_marker(prompt, "Model Response: ", tail_pos, 0);
    std::size_t answer_pos = rfind_marker(prompt, "Correct Answer: ", response_pos, 0);

    const std::size_t answer_start = answer_pos + std::string("\nCorrect Answer: ").size();
    const std::size_t response_start = response_pos + std::string("\nModel Response: ").size();
    const std::string gold = to_lower(prompt.substr(answer_start, response_pos - answer_start));
    const std::string response = to_lower(prompt.substr(response_start, tail_pos - response_start));

    const bool correct = !gold.empty() && response.find(gold) != std::string::npos;
    return make_result(prompt, correct ? "<yes>" : "<no>");
}

std::string SubstringJudgeChatProvider::fingerprint() const {
    return "mock_chat|substring-judge|v1";
}

} // namespace convmem
