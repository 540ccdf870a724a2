#pragma once

#include "convmem/embedding_cache.hpp"
#include "convmem/memory.hpp"
#include "convmem/providers.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace convmem {

struct SessionIndexEntry {
    std::string session_id;
    std::vector<std::string> turn_texts;
    std::vector<EmbeddingVector> turn_vectors;
};

/// Immutable per-turn vector index over one bank. per_session follows the
/// bank's chronological order; provider_fingerprint ties the vectors to the
/// embedding provider and the normalization policy they were built with.
struct BankIndex {
    int dim = 0;
    std::vector<SessionIndexEntry> per_session;
    std::string provider_fingerprint;
    bool normalized = true;
    std::vector<std::string> warnings;
};

enum class StrategyKind { max_activation, mean_pool, topk_turn_mean };

struct Strategy {
    StrategyKind kind = StrategyKind::max_activation;
    int m = 1;

    /// Accepts "max", "mean" and "topk_turn:<m>".
    static Strategy parse(const std::string& text);
    std::string name() const;
};

struct RankedSession {
    std::string session_id;
    std::size_t session_index = 0;
    double score = 0.0;
    // First turn attaining the maximum per-turn similarity, under every
    // strategy: it identifies the decisive evidence turn even when the
    // session score aggregates differently.
    std::size_t best_turn_index = 0;
    std::optional<std::vector<double>> per_turn_scores;
};

struct RetrievalResult {
    std::vector<RankedSession> ranked;
    Strategy strategy;
    int k = 0;
};

/// "<speaker>: <text>" for the request, plus "\n<speaker>: <text>" for the
/// response when present. This is the exact text embedded per turn and the
/// content-address for cache and index records.
std::string serialize_turn(const Turn& turn);

std::string index_fingerprint(const EmbeddingProvider& provider, bool normalize);

/// Embeds every turn of the bank. With normalize, each stored vector is
/// L2-normalized; zero vectors are left as-is and recorded in warnings.
/// A cache, when given, memoizes turn embeddings across runs. workers > 1
/// embeds contiguous chunks in parallel; assembly order is fixed, so the
/// result is deterministic regardless of scheduling.
BankIndex build_index(const MemoryBank& bank, EmbeddingProvider& provider, bool normalize,
                      EmbeddingCache* cache = nullptr, int workers = 1,
                      int max_batch_size = 64);

/// Inner product. Accumulated in ascending index order; callers comparing
/// against an equally-ordered reference sum get exact equality.
double turn_similarity(const EmbeddingVector& q, const EmbeddingVector& t);

struct SessionScore {
    double score = 0.0;
    std::size_t best_turn_index = 0;
    std::vector<double> per_turn_scores;
};

/// Max over per-turn similarities; best_turn_index is the first argmax.
SessionScore session_score_max(const EmbeddingVector& q,
                               const std::vector<EmbeddingVector>& session_vectors);

/// Inner product between q and the arithmetic mean of the turn vectors.
/// The mean is not re-normalized.
double session_score_mean(const EmbeddingVector& q,
                          const std::vector<EmbeddingVector>& session_vectors);

/// Mean of the m largest per-turn similarities, m clipped to the turn
/// count. m=1 reduces exactly to session_score_max.
double session_score_topk_turns(const EmbeddingVector& q,
                                const std::vector<EmbeddingVector>& session_vectors, int m);

/// Embeds the raw query text, scores every session under the strategy and
/// returns the top min(k, session count), sorted by score descending with
/// ties broken by ascending session_index. When the index was built
/// normalized the query vector is normalized the same way.
RetrievalResult retrieve(const BankIndex& index, const std::string& query_text, int k,
                         const Strategy& strategy, EmbeddingProvider& provider,
                         bool keep_per_turn_scores = false);

/// Same result truncated to the top k entries.
RetrievalResult truncate_result(const RetrievalResult& result, int k);

/// Single-file persistence: a header line carrying the fingerprint and the
/// session/turn layout, followed by one embedding record per unique turn
/// text in the cache file format. Written atomically.
void save_index(const BankIndex& index, const std::string& path);

/// Loads an index; when expected_fingerprint is given a mismatch is refused.
BankIndex load_index(const std::string& path,
                     const std::optional<std::string>& expected_fingerprint = std::nullopt);

} // namespace convmem
