#include "convmem/synthetic.hpp"

#include "convmem/errors.hpp"
#include "convmem/hash.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <vector>

namespace convmem {

namespace {

std::string fresh_word(SplitMix& rng, std::set<std::string>& used) {
    for (;;) {
        const std::size_t length = 5 + static_cast<std::size_t>(rng.next_below(4));
        std::string word;
        for (std::size_t i = 0; i < length; ++i)
            word += static_cast<char>('a' + rng.next_below(26));
        if (used.insert(word).second) return word;
    }
}

std::string filler_text(SplitMix& rng, const std::vector<std::string>& pool,
                        double noise_overlap) {
    const std::size_t words = 3 + static_cast<std::size_t>(rng.next_below(3));
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < words; ++i)
        parts.push_back(pool[static_cast<std::size_t>(rng.next_below(pool.size()))]);
    if (rng.next_double() < noise_overlap) {
        const std::size_t at = static_cast<std::size_t>(rng.next_below(parts.size() + 1));
        parts.insert(parts.begin() + static_cast<std::ptrdiff_t>(at), "about");
    }
    std::string text;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) text += ' ';
        text += parts[i];
    }
    return text;
}

std::string session_date(int index) {
    const int day = 1 + index % 28;
    const int month = 1 + (index / 28) % 12;
    const int year = 2025 + index / (28 * 12);
    char buffer[16];
    std::snprintf(buffer, sizeof(buffer), "%04d-%02d-%02d", year, month, day);
    return buffer;
}

std::string padded_id(int index) {
    char buffer[16];
    std::snprintf(buffer, sizeof(buffer), "sess-%03d", index);
    return buffer;
}

} // namespace

SignalPlacement placement_from_string(const std::string& name) {
    if (name == "unique") return SignalPlacement::unique;
    if (name == "random" || name == "random_assign") return SignalPlacement::random_assign;
    throw ValidationError("unknown signal placement: " + name);
}

DatasetBundle make_synthetic(const SyntheticConfig& config) {
    if (config.n_sessions < 1 || config.turns_per_session < 1 || config.n_queries < 1 ||
        config.long_turns < 1)
        throw ValidationError("make_synthetic: sizes must be positive");
    if (config.noise_overlap < 0.0 || config.noise_overlap > 1.0)
        throw ValidationError("make_synthetic: noise_overlap must be in [0, 1]");
    if (config.placement == SignalPlacement::unique && config.n_queries > config.n_sessions)
        throw ValidationError("make_synthetic: unique placement needs n_queries <= n_sessions");

    SplitMix rng(config.seed);
    std::set<std::string> used{"about", "alice", "bob"};

    struct Planted {
        std::string topic;
        std::string gold;
        int session = 0;
        int position = 0;
    };
    std::vector<Planted> planted(static_cast<std::size_t>(config.n_queries));
    for (auto& p : planted) {
        p.topic = fresh_word(rng, used);
        p.gold = fresh_word(rng, used) + " " + fresh_word(rng, used);
    }

    std::vector<std::string> pool;
    for (int i = 0; i < 100; ++i) pool.push_back(fresh_word(rng, used));

    auto session_length = [&](int index) {
        if (!config.mixed_lengths) return config.turns_per_session;
        const int cycle[4] = {4, 8, 16, config.long_turns};
        return cycle[index % 4];
    };

    for (std::size_t q = 0; q < planted.size(); ++q)
        planted[q].session = config.placement == SignalPlacement::unique
                                 ? static_cast<int>(q)
                                 : static_cast<int>(rng.next_below(
                                       static_cast<std::uint64_t>(config.n_sessions)));

    std::map<int, std::set<int>> taken;
    for (auto& p : planted) {
        const int length = session_length(p.session);
        auto& occupied = taken[p.session];
        if (static_cast<int>(occupied.size()) >= length)
            throw ValidationError("make_synthetic: session " + std::to_string(p.session) +
                                  " is too short for its planted evidence turns");
        int position = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(length)));
        while (occupied.count(position)) position = (position + 1) % length;
        occupied.insert(position);
        p.position = position;
    }

    std::map<std::pair<int, int>, std::size_t> evidence_at;
    for (std::size_t q = 0; q < planted.size(); ++q)
        evidence_at[{planted[q].session, planted[q].position}] = q;

    std::vector<Session> sessions;
    for (int s = 0; s < config.n_sessions; ++s) {
        Session session;
        session.session_id = padded_id(s);
        session.date = session_date(s);
        const int length = session_length(s);
        for (int t = 0; t < length; ++t) {
            Turn turn;
            turn.turn_index = t;
            auto it = evidence_at.find({s, t});
            if (it != evidence_at.end()) {
                const auto& p = planted[it->second];
                turn.request = {"Alice", "remember what was mentioned about " + p.topic};
                turn.response = Utterance{"Bob", "yes the " + p.topic + " thing was " + p.gold};
            } else {
                turn.request = {"Alice", filler_text(rng, pool, config.noise_overlap)};
                turn.response = Utterance{"Bob", filler_text(rng, pool, config.noise_overlap)};
            }
            session.turns.push_back(std::move(turn));
        }
        sessions.push_back(std::move(session));
    }

    std::vector<Query> queries;
    for (const auto& p : planted) {
        Query query;
        query.text = "what was mentioned about " + p.topic;
        query.query_type = "single-hop";
        query.gt_session_ids = {padded_id(p.session)};
        query.gold_answer = p.gold;
        queries.push_back(std::move(query));
    }

    DatasetBundle bundle;
    bundle.bank = construct_bank(std::move(sessions));
    bundle.queries = std::move(queries);
    bundle.dataset_name = "synthetic-seed-" + std::to_string(config.seed);
    bundle.stats = compute_stats(bundle.bank);
    return bundle;
}

} // namespace convmem
