#pragma once

#include "convmem/hash.hpp"
#include "convmem/memory.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace testutil {

/// Unique scratch directory, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<unsigned> counter{0};
        const auto stamp =
            std::chrono::steady_clock::now().time_since_epoch().count();
        const auto base = std::filesystem::temp_directory_path();
        for (;;) {
            auto candidate = base / ("convmem_test_" + std::to_string(stamp) + "_" +
                                     std::to_string(counter.fetch_add(1)));
            if (std::filesystem::create_directories(candidate)) {
                path = candidate;
                return;
            }
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string str() const { return path.string(); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out.is_open()) throw std::runtime_error("test util: cannot write " + path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) throw std::runtime_error("test util: cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

/// Session from a flat speaker/text list, paired into turns.
inline convmem::Session make_session(std::string id,
                                     std::vector<std::pair<std::string, std::string>> utterances,
                                     std::optional<std::string> date = std::nullopt) {
    std::vector<convmem::Utterance> flat;
    flat.reserve(utterances.size());
    for (auto& [speaker, text] : utterances) flat.push_back({std::move(speaker), std::move(text)});
    convmem::Session session;
    session.session_id = std::move(id);
    session.date = std::move(date);
    session.turns = convmem::pair_utterances(flat);
    return session;
}

inline std::string random_word(convmem::SplitMix& rng) {
    const std::size_t length = 3 + static_cast<std::size_t>(rng.next_below(6));
    std::string word;
    for (std::size_t i = 0; i < length; ++i)
        word += static_cast<char>('a' + rng.next_below(26));
    return word;
}

inline std::string random_text(convmem::SplitMix& rng, int min_words, int max_words) {
    const int words =
        min_words + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_words - min_words + 1)));
    std::string text;
    for (int i = 0; i < words; ++i) {
        if (i > 0) text += ' ';
        text += random_word(rng);
    }
    return text;
}

inline convmem::MemoryBank random_bank(convmem::SplitMix& rng, int n_sessions, int max_turns) {
    std::vector<convmem::Session> sessions;
    for (int s = 0; s < n_sessions; ++s) {
        convmem::Session session;
        session.session_id = "s" + std::to_string(s);
        const int turns = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_turns)));
        for (int t = 0; t < turns; ++t) {
            convmem::Turn turn;
            turn.turn_index = t;
            turn.request = {"A", random_text(rng, 1, 6)};
            if (rng.next_below(4) != 0) turn.response = convmem::Utterance{"B", random_text(rng, 1, 6)};
            session.turns.push_back(std::move(turn));
        }
        sessions.push_back(std::move(session));
    }
    return convmem::construct_bank(std::move(sessions));
}

} // namespace testutil
