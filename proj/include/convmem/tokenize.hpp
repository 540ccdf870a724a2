#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace convmem {

/// Split on runs of whitespace. No other normalization.
std::vector<std::string> whitespace_tokens(std::string_view text);

/// Approximate tokenizer used for token accounting when a provider does not
/// report usage: punctuation characters are separated into their own tokens,
/// then the text is split on whitespace. "Hello, world!" -> 4 tokens.
std::vector<std::string> fallback_tokens(std::string_view text);
long count_fallback_tokens(std::string_view text);

std::string to_lower(std::string_view text);

/// Lowercased maximal alphanumeric runs; the tokenizer behind BLEU and ROUGE.
std::vector<std::string> metric_tokens(std::string_view text);

/// Token-F1 normalization: case-fold, strip punctuation, collapse whitespace,
/// drop the articles "a", "an", "the".
std::vector<std::string> normalized_answer_tokens(std::string_view text);

/// Stopword test for the keyword-filter chat mock (case-folded input).
bool is_filter_stopword(std::string_view token);

} // namespace convmem
