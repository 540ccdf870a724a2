#include "convmem/tir.hpp"

#include "convmem/errors.hpp"
#include "convmem/hash.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <unordered_map>

namespace convmem {

namespace {

using nlohmann::json;

// Divides rather than multiplying by the reciprocal so each component is
// correctly rounded; {3, 4} lands on exactly {0.6, 0.8}.
void normalize_in_place(EmbeddingVector& v) {
    double norm_sq = 0.0;
    for (double x : v) norm_sq += x * x;
    if (norm_sq == 0.0) return;
    const double norm = std::sqrt(norm_sq);
    for (double& x : v) x /= norm;
}

bool is_zero(const EmbeddingVector& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

std::vector<double> per_turn_similarities(const EmbeddingVector& q,
                                          const std::vector<EmbeddingVector>& vectors) {
    std::vector<double> sims;
    sims.reserve(vectors.size());
    for (const auto& t : vectors) sims.push_back(turn_similarity(q, t));
    return sims;
}

} // namespace

Strategy Strategy::parse(const std::string& text) {
    if (text == "max" || text == "max_activation") return {StrategyKind::max_activation, 1};
    if (text == "mean" || text == "mean_pool") return {StrategyKind::mean_pool, 1};
    const std::string prefix = "topk_turn:";
    if (text.rfind(prefix, 0) == 0) {
        int m = 0;
        try {
            m = std::stoi(text.substr(prefix.size()));
        } catch (const std::exception&) {
            throw ValidationError("strategy " + text + " has a malformed turn count");
        }
        if (m < 1) throw ValidationError("strategy " + text + " needs m >= 1");
        return {StrategyKind::topk_turn_mean, m};
    }
    throw ValidationError("unknown strategy: " + text +
                          " (expected max, mean or topk_turn:<m>)");
}

// The canonical short spelling, chosen so any strategy string printed in a
// report or config can be passed back to parse() unchanged.
std::string Strategy::name() const {
    switch (kind) {
    case StrategyKind::max_activation: return "max";
    case StrategyKind::mean_pool: return "mean";
    case StrategyKind::topk_turn_mean: return "topk_turn:" + std::to_string(m);
    }
    throw ValidationError("unknown strategy kind");
}

std::string serialize_turn(const Turn& turn) {
    std::string out = turn.request.speaker + ": " + turn.request.text;
    if (turn.response) out += "\n" + turn.response->speaker + ": " + turn.response->text;
    return out;
}

std::string index_fingerprint(const EmbeddingProvider& provider, bool normalize) {
    return provider.fingerprint() + "|normalize=" + (normalize ? "1" : "0");
}

BankIndex build_index(const MemoryBank& bank, EmbeddingProvider& provider, bool normalize,
                      EmbeddingCache* cache, int workers, int max_batch_size) {
    if (workers < 1) throw ValidationError("build_index: workers must be positive");

    BankIndex index;
    index.normalized = normalize;
    index.provider_fingerprint = index_fingerprint(provider, normalize);
    index.dim = provider.dim();
    if (bank.sessions.empty()) return index;

    std::vector<std::string> texts;
    for (const auto& session : bank.sessions) {
        SessionIndexEntry entry;
        entry.session_id = session.session_id;
        for (const auto& turn : session.turns) {
            entry.turn_texts.push_back(serialize_turn(turn));
            texts.push_back(entry.turn_texts.back());
        }
        index.per_session.push_back(std::move(entry));
    }

    std::vector<EmbeddingVector> vectors(texts.size());
    const std::size_t chunk =
        (texts.size() + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);
    std::vector<std::future<void>> futures;
    for (std::size_t begin = 0; begin < texts.size(); begin += chunk) {
        const std::size_t end = std::min(texts.size(), begin + chunk);
        futures.push_back(std::async(std::launch::async, [&, begin, end] {
            std::vector<std::string> slice(texts.begin() + static_cast<std::ptrdiff_t>(begin),
                                           texts.begin() + static_cast<std::ptrdiff_t>(end));
            auto out = cache ? cached_embed(*cache, provider, slice, max_batch_size)
                             : provider.embed_batch(slice);
            std::copy(out.begin(), out.end(),
                      vectors.begin() + static_cast<std::ptrdiff_t>(begin));
        }));
    }
    for (auto& f : futures) f.get();

    index.dim = static_cast<int>(vectors.front().size());
    for (const auto& v : vectors)
        if (static_cast<int>(v.size()) != index.dim)
            throw ProtocolError("build_index: provider mixed dimensions " +
                                std::to_string(index.dim) + " and " + std::to_string(v.size()));

    std::size_t flat = 0;
    for (auto& entry : index.per_session) {
        for (std::size_t j = 0; j < entry.turn_texts.size(); ++j, ++flat) {
            EmbeddingVector v = std::move(vectors[flat]);
            if (normalize) {
                if (is_zero(v))
                    index.warnings.push_back("session " + entry.session_id + " turn " +
                                             std::to_string(j) +
                                             " embedded to a zero vector; left unnormalized");
                else
                    normalize_in_place(v);
            }
            entry.turn_vectors.push_back(std::move(v));
        }
    }
    return index;
}

double turn_similarity(const EmbeddingVector& q, const EmbeddingVector& t) {
    if (q.size() != t.size())
        throw ValidationError("turn_similarity: dim mismatch " + std::to_string(q.size()) +
                              " vs " + std::to_string(t.size()));
    double sum = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) sum += q[i] * t[i];
    return sum;
}

SessionScore session_score_max(const EmbeddingVector& q,
                               const std::vector<EmbeddingVector>& session_vectors) {
    if (session_vectors.empty())
        throw ValidationError("session_score_max: session has no turns");
    SessionScore result;
    result.per_turn_scores = per_turn_similarities(q, session_vectors);
    result.score = result.per_turn_scores[0];
    for (std::size_t j = 1; j < result.per_turn_scores.size(); ++j) {
        if (result.per_turn_scores[j] > result.score) {
            result.score = result.per_turn_scores[j];
            result.best_turn_index = j;
        }
    }
    return result;
}

double session_score_mean(const EmbeddingVector& q,
                          const std::vector<EmbeddingVector>& session_vectors) {
    if (session_vectors.empty())
        throw ValidationError("session_score_mean: session has no turns");
    EmbeddingVector mean(session_vectors.front().size(), 0.0);
    for (const auto& t : session_vectors) {
        if (t.size() != mean.size())
            throw ValidationError("session_score_mean: inconsistent turn dims");
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += t[i];
    }
    for (double& x : mean) x /= static_cast<double>(session_vectors.size());
    return turn_similarity(q, mean);
}

double session_score_topk_turns(const EmbeddingVector& q,
                                const std::vector<EmbeddingVector>& session_vectors, int m) {
    if (m < 1) throw ValidationError("session_score_topk_turns: m must be >= 1");
    if (session_vectors.empty())
        throw ValidationError("session_score_topk_turns: session has no turns");
    std::vector<double> sims = per_turn_similarities(q, session_vectors);
    std::sort(sims.begin(), sims.end(), std::greater<>());
    const std::size_t take = std::min(sims.size(), static_cast<std::size_t>(m));
    double sum = 0.0;
    for (std::size_t j = 0; j < take; ++j) sum += sims[j];
    return sum / static_cast<double>(take);
}

RetrievalResult retrieve(const BankIndex& index, const std::string& query_text, int k,
                         const Strategy& strategy, EmbeddingProvider& provider,
                         bool keep_per_turn_scores) {
    if (k < 1) throw ValidationError("retrieve: k must be >= 1");
    if (strategy.kind == StrategyKind::topk_turn_mean && strategy.m < 1)
        throw ValidationError("retrieve: topk_turn_mean needs m >= 1");

    RetrievalResult result;
    result.strategy = strategy;
    result.k = k;
    if (index.per_session.empty()) return result;

    const std::string expected = index_fingerprint(provider, index.normalized);
    if (index.provider_fingerprint != expected)
        throw ValidationError("retrieve: index fingerprint \"" + index.provider_fingerprint +
                              "\" does not match provider \"" + expected + "\"");

    EmbeddingVector q = provider.embed_batch({query_text}).front();
    if (static_cast<int>(q.size()) != index.dim)
        throw ProtocolError("retrieve: query dim " + std::to_string(q.size()) +
                            " does not match index dim " + std::to_string(index.dim));
    if (index.normalized) normalize_in_place(q);

    result.ranked.reserve(index.per_session.size());
    for (std::size_t i = 0; i < index.per_session.size(); ++i) {
        const auto& entry = index.per_session[i];
        SessionScore max_score = session_score_max(q, entry.turn_vectors);

        RankedSession ranked;
        ranked.session_id = entry.session_id;
        ranked.session_index = i;
        ranked.best_turn_index = max_score.best_turn_index;
        switch (strategy.kind) {
        case StrategyKind::max_activation:
            ranked.score = max_score.score;
            break;
        case StrategyKind::mean_pool:
            ranked.score = session_score_mean(q, entry.turn_vectors);
            break;
        case StrategyKind::topk_turn_mean:
            ranked.score = session_score_topk_turns(q, entry.turn_vectors, strategy.m);
            break;
        }
        if (keep_per_turn_scores) ranked.per_turn_scores = std::move(max_score.per_turn_scores);
        result.ranked.push_back(std::move(ranked));
    }

    std::sort(result.ranked.begin(), result.ranked.end(),
              [](const RankedSession& a, const RankedSession& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.session_index < b.session_index;
              });
    if (result.ranked.size() > static_cast<std::size_t>(k))
        result.ranked.resize(static_cast<std::size_t>(k));
    return result;
}

RetrievalResult truncate_result(const RetrievalResult& result, int k) {
    if (k < 1) throw ValidationError("truncate_result: k must be >= 1");
    RetrievalResult out = result;
    out.k = k;
    if (out.ranked.size() > static_cast<std::size_t>(k))
        out.ranked.resize(static_cast<std::size_t>(k));
    return out;
}

void save_index(const BankIndex& index, const std::string& path) {
    const std::string ns = sha256_hex(index.provider_fingerprint).substr(0, 16);

    json sessions = json::array();
    for (const auto& entry : index.per_session)
        sessions.push_back({{"session_id", entry.session_id}, {"turn_texts", entry.turn_texts}});
    json header{{"type", "index_header"}, {"version", 1},
                {"fingerprint", index.provider_fingerprint}, {"dim", index.dim},
                {"normalized", index.normalized}, {"sessions", sessions}};

    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out.is_open()) throw LoadError("cannot write index file " + tmp);
        out << header.dump() << '\n';
        std::unordered_map<std::string, bool> written;
        for (const auto& entry : index.per_session) {
            for (std::size_t j = 0; j < entry.turn_texts.size(); ++j) {
                const std::string key = sha256_hex(entry.turn_texts[j]);
                if (written.emplace(key, true).second) {
                    json record{{"ns", ns}, {"key", key}, {"dim", index.dim},
                                {"v", entry.turn_vectors[j]}};
                    out << record.dump() << '\n';
                }
            }
        }
        if (!out) throw LoadError("write to index file " + tmp + " failed");
    }
    std::filesystem::rename(tmp, path);
}

BankIndex load_index(const std::string& path,
                     const std::optional<std::string>& expected_fingerprint) {
    std::ifstream in(path);
    if (!in.is_open()) throw LoadError("cannot open index file " + path);

    std::string line;
    if (!std::getline(in, line)) throw LoadError("index file " + path + " is empty");
    json header = json::parse(line, nullptr, false);
    if (header.is_discarded() || header.value("type", "") != "index_header")
        throw LoadError("index file " + path + " has no valid header line");

    BankIndex index;
    index.provider_fingerprint = header.at("fingerprint").get<std::string>();
    index.dim = header.at("dim").get<int>();
    index.normalized = header.at("normalized").get<bool>();
    if (expected_fingerprint && index.provider_fingerprint != *expected_fingerprint)
        throw LoadError("index file " + path + " was built with \"" +
                        index.provider_fingerprint + "\" but \"" + *expected_fingerprint +
                        "\" was expected; rebuild the index");

    std::unordered_map<std::string, EmbeddingVector> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.contains("key") || !record.contains("v"))
            throw LoadError("index file " + path + " line " + std::to_string(line_no) +
                            " is malformed");
        auto v = record["v"].get<EmbeddingVector>();
        if (static_cast<int>(v.size()) != index.dim)
            throw LoadError("index file " + path + " line " + std::to_string(line_no) +
                            " has dim " + std::to_string(v.size()) + ", header says " +
                            std::to_string(index.dim));
        records[record["key"].get<std::string>()] = std::move(v);
    }

    for (const auto& session : header.at("sessions")) {
        SessionIndexEntry entry;
        entry.session_id = session.at("session_id").get<std::string>();
        entry.turn_texts = session.at("turn_texts").get<std::vector<std::string>>();
        for (const auto& text : entry.turn_texts) {
            auto it = records.find(sha256_hex(text));
            if (it == records.end())
                throw LoadError("index file " + path + " is missing the vector for a turn of session " +
                                entry.session_id);
            entry.turn_vectors.push_back(it->second);
        }
        index.per_session.push_back(std::move(entry));
    }
    return index;
}

} // namespace convmem
