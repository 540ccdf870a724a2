#include "convmem/tokenize.hpp"

#include <cctype>
#include <unordered_set>

namespace convmem {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_punct(unsigned char c) { return std::ispunct(c) != 0; }
bool is_alnum(unsigned char c) { return std::isalnum(c) != 0; }

} // namespace

std::vector<std::string> whitespace_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (is_space(c)) {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(static_cast<char>(c));
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<std::string> fallback_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    };
    for (unsigned char c : text) {
        if (is_space(c)) {
            flush();
        } else if (is_punct(c)) {
            flush();
            out.emplace_back(1, static_cast<char>(c));
        } else {
            cur.push_back(static_cast<char>(c));
        }
    }
    flush();
    return out;
}

long count_fallback_tokens(std::string_view text) {
    return static_cast<long>(fallback_tokens(text).size());
}

std::string to_lower(std::string_view text) {
    std::string out(text);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> metric_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (is_alnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<std::string> normalized_answer_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (auto& tok : metric_tokens(text)) {
        if (tok == "a" || tok == "an" || tok == "the") continue;
        out.push_back(std::move(tok));
    }
    return out;
}

bool is_filter_stopword(std::string_view token) {
    static const std::unordered_set<std::string_view> kStopwords = {
        "a",    "an",    "the",   "i",     "you",   "he",    "she",  "it",
        "we",   "they",  "me",    "him",   "her",   "us",    "them", "my",
        "your", "his",   "its",   "our",   "their", "this",  "that", "these",
        "those","what",  "which", "who",   "whom",  "when",  "where","why",
        "how",  "am",    "is",    "are",   "was",   "were",  "be",   "been",
        "being","have",  "has",   "had",   "do",    "does",  "did",  "will",
        "would","shall", "should","may",   "might", "must",  "can",  "could",
        "of",   "at",    "by",    "for",   "with",  "about", "to",   "from",
        "in",   "on",    "up",    "down",  "out",   "off",   "over", "under",
        "and",  "but",   "or",    "nor",   "not",   "no",    "so",   "than",
        "too",  "very",  "just",  "there", "here",  "then",  "once", "again",
        "all",  "any",   "both",  "each",  "few",   "more",  "most", "some",
        "such", "only",  "own",   "same",  "as",    "if",    "into", "s",
        "t",    "d",     "ll",    "re",    "ve",    "m",
    };
    return kStopwords.count(token) > 0;
}

} // namespace convmem
