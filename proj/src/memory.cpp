#include "convmem/memory.hpp"

#include "convmem/errors.hpp"

#include <unordered_set>

namespace convmem {

const Session* MemoryBank::find_session(const std::string& session_id) const {
    for (const auto& s : sessions) {
        if (s.session_id == session_id) return &s;
    }
    return nullptr;
}

std::vector<Turn> pair_utterances(const std::vector<Utterance>& utterances) {
    std::vector<Turn> turns;
    turns.reserve((utterances.size() + 1) / 2);
    for (size_t i = 0; i < utterances.size(); i += 2) {
        Turn t;
        t.request = utterances[i];
        if (i + 1 < utterances.size()) t.response = utterances[i + 1];
        t.turn_index = static_cast<int>(turns.size());
        turns.push_back(std::move(t));
    }
    return turns;
}

namespace {

void validate_session(const Session& s) {
    if (s.turns.empty()) {
        throw ValidationError("session '" + s.session_id + "' has no turns");
    }
    for (size_t j = 0; j < s.turns.size(); ++j) {
        const Turn& t = s.turns[j];
        if (t.turn_index != static_cast<int>(j)) {
            throw ValidationError("session '" + s.session_id +
                                  "' turn indices are not contiguous from 0");
        }
        if (t.request.speaker.empty() ||
            (t.response && t.response->speaker.empty())) {
            throw ValidationError("session '" + s.session_id +
                                  "' contains an utterance with an empty speaker");
        }
    }
}

} // namespace

MemoryBank construct_bank(std::vector<Session> history) {
    std::unordered_set<std::string> seen;
    seen.reserve(history.size());
    for (auto& s : history) {
        if (!seen.insert(s.session_id).second) {
            throw ValidationError("duplicate session_id '" + s.session_id + "'");
        }
        validate_session(s);
    }
    MemoryBank bank;
    bank.sessions = std::move(history);
    for (size_t i = 0; i < bank.sessions.size(); ++i) {
        bank.sessions[i].session_index = static_cast<int>(i);
    }
    return bank;
}

MemoryBank append_history(const MemoryBank& bank, std::vector<Session> delta) {
    std::unordered_set<std::string> seen;
    seen.reserve(bank.sessions.size() + delta.size());
    for (const auto& s : bank.sessions) seen.insert(s.session_id);
    for (const auto& s : delta) {
        if (!seen.insert(s.session_id).second) {
            throw ValidationError("session_id '" + s.session_id +
                                  "' already exists in the bank");
        }
        validate_session(s);
    }
    MemoryBank out;
    out.sessions.reserve(bank.sessions.size() + delta.size());
    out.sessions = bank.sessions;
    for (auto& s : delta) out.sessions.push_back(std::move(s));
    for (size_t i = 0; i < out.sessions.size(); ++i) {
        out.sessions[i].session_index = static_cast<int>(i);
    }
    return out;
}

} // namespace convmem
