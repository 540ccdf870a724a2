#pragma once

#include "convmem/ingest.hpp"
#include "convmem/providers.hpp"
#include "convmem/tir.hpp"

#include <nlohmann/json.hpp>

#include <vector>

namespace convmem {

/// Sessions sorted by turn count and split into four rank quartiles; per
/// bucket and strategy, the hit rate of (query, gt-session) pairs whose gt
/// session lands in the retriever's top k. Needs queries with gt ids.
nlohmann::json length_buckets_analysis(const BankIndex& index, const std::vector<Query>& queries,
                                       const std::vector<Strategy>& strategies, int k,
                                       EmbeddingProvider& provider);

/// Histogram of ground-truth set sizes across queries.
nlohmann::json gt_count_hist_analysis(const std::vector<Query>& queries);

/// Histogram of per-turn answer token density over all (query, turn) pairs,
/// binned 0, 1-10, ..., 91-100. Needs queries with gold answers.
nlohmann::json density_hist_analysis(const MemoryBank& bank, const std::vector<Query>& queries);

/// Recall@k and NDCG@k of the topk_turn_mean strategy as its turn count m
/// sweeps a list of values. Needs queries with gt ids.
nlohmann::json topk_turn_sweep_analysis(const BankIndex& index, const std::vector<Query>& queries,
                                        const std::vector<int>& ms, int k,
                                        EmbeddingProvider& provider);

/// Bin label for a density percentage: "0" for exact zero, then deciles.
std::string density_bin_label(double density_percent);

} // namespace convmem
