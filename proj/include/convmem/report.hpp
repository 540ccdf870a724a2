#pragma once

#include "convmem/metrics.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace convmem {

/// Everything recorded about one evaluated query. Metric blocks are absent
/// when the query lacks the ground truth they need; failure carries the
/// error message when the pipeline for this query did not complete.
struct QueryEvalRecord {
    std::size_t query_index = 0;
    std::string query_text;
    std::optional<std::string> query_type;
    std::optional<std::string> gold_answer;
    std::vector<std::string> gt_session_ids;
    std::vector<std::string> retrieved_ids;
    std::vector<std::string> context_session_ids;
    std::optional<RetrievalEval> retrieval;
    std::optional<QAEval> qa;
    std::string answer_text;
    std::string context_used;
    bool fallback_used = false;
    long prune_tokens_in = 0;
    long prune_tokens_out = 0;
    long prompt_tokens = 0;
    long completion_tokens = 0;
    double retrieval_ms = 0.0;
    double prune_ms = 0.0;
    double generation_ms = 0.0;
    std::optional<std::string> failure;
};

nlohmann::json record_to_json(const QueryEvalRecord& record);

/// Unweighted means per metric over the records that carry the metric,
/// with raw [0,1] values and their x100 two-decimal counterparts side by
/// side. Throws on an empty record list.
nlohmann::json aggregate_records(const std::vector<QueryEvalRecord>& records);

/// Full report document: resolved config and its fingerprint, per-query
/// rows, overall and per-type aggregates, token and timing totals.
nlohmann::json build_report(const nlohmann::json& config, const std::string& run_fingerprint,
                            const std::vector<QueryEvalRecord>& records, double construct_ms);

/// Copy with every timing field removed: keys named "timing" or ending in
/// "_ms", recursively. Two runs of the same config compare equal on this.
nlohmann::json strip_timing(const nlohmann::json& document);

/// Serializes with 2-space indentation and renames into place so readers
/// never observe a partial file.
void write_json_atomic(const nlohmann::json& document, const std::string& path);

/// x100, rounded to two decimals, as the tables report scores.
double scaled_score(double raw);

} // namespace convmem
