#pragma once

#include <optional>
#include <string>
#include <vector>

namespace convmem {

/// One utterance of a dialogue. Speakers are kept verbatim; no role
/// normalization is applied.
struct Utterance {
    std::string speaker;
    std::string text;

    bool operator==(const Utterance&) const = default;
};

/// A request/response pair. The response is absent only for a trailing
/// unpaired utterance at the end of a session.
struct Turn {
    Utterance request;
    std::optional<Utterance> response;
    int turn_index = 0;

    bool operator==(const Turn&) const = default;
};

/// One conversation episode. Dates are opaque dataset-native strings; they
/// are never parsed, only substituted into prompts.
struct Session {
    std::string session_id;
    std::optional<std::string> date;
    std::vector<Turn> turns;
    int session_index = 0;

    bool operator==(const Session&) const = default;
};

/// The append-only collection of all raw past sessions, in chronological
/// order. Immutable after construction; appending produces a new value, so
/// a bank can be shared read-only across concurrent workers.
struct MemoryBank {
    std::vector<Session> sessions;

    bool operator==(const MemoryBank&) const = default;

    const Session* find_session(const std::string& session_id) const;
};

/// A user request to answer against the bank.
struct Query {
    std::string text;
    std::optional<std::string> date;
    std::optional<std::string> query_type;
    std::vector<std::string> gt_session_ids;
    std::optional<std::string> gold_answer;

    bool operator==(const Query&) const = default;
};

/// Pair a flat utterance list into turns: consecutive utterances become
/// (request, response); an odd trailing utterance becomes a turn with an
/// absent response. turn_index is assigned 0..N-1.
std::vector<Turn> pair_utterances(const std::vector<Utterance>& utterances);

/// Build a bank from sessions in their given (chronological) order.
/// Content is not transformed, summarized, or reordered; only session_index
/// is assigned. Throws ValidationError on duplicate ids, empty sessions,
/// empty speakers, or non-contiguous turn indices.
MemoryBank construct_bank(std::vector<Session> history);

/// Append new sessions to an existing bank. Existing sessions are copied
/// byte-identical; delta ids must not collide with existing ids.
MemoryBank append_history(const MemoryBank& bank, std::vector<Session> delta);

} // namespace convmem
