#include "convmem/report.hpp"

#include "convmem/errors.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

namespace convmem {

namespace {

using nlohmann::json;

struct Mean {
    double sum = 0.0;
    long n = 0;
    void add(double x) {
        sum += x;
        ++n;
    }
    double value() const { return sum / static_cast<double>(n); }
};

void emit_score(json& out, const std::string& name, const Mean& mean) {
    if (mean.n == 0) return;
    out[name] = mean.value();
    out[name + "_x100"] = scaled_score(mean.value());
}

json aggregate_span(const std::vector<const QueryEvalRecord*>& records) {
    json out;
    out["count"] = records.size();

    long failed = 0, fallbacks = 0, completed = 0;
    std::map<int, Mean> recall, ndcg;
    Mean f1, bleu, r1, r2, rl, tokens;
    long judged = 0, judge_yes = 0, judge_errors = 0;
    long retrieval_evals = 0, qa_evals = 0;

    for (const auto* record : records) {
        if (record->failure) {
            ++failed;
            continue;
        }
        ++completed;
        if (record->fallback_used) ++fallbacks;
        if (record->retrieval) {
            ++retrieval_evals;
            for (const auto& [k, v] : record->retrieval->recall_at) recall[k].add(v);
            for (const auto& [k, v] : record->retrieval->ndcg_at) ndcg[k].add(v);
        }
        if (record->qa) {
            ++qa_evals;
            f1.add(record->qa->token_f1);
            bleu.add(record->qa->bleu4);
            r1.add(record->qa->rouge1);
            r2.add(record->qa->rouge2);
            rl.add(record->qa->rougeL);
            tokens.add(record->qa->avg_tokens);
            if (record->qa->judge_verdict) {
                ++judged;
                if (*record->qa->judge_verdict) ++judge_yes;
            } else if (record->qa->judge_error) {
                ++judge_errors;
            }
        }
    }

    out["completed"] = completed;
    out["failed"] = failed;
    out["fallback_count"] = fallbacks;

    if (retrieval_evals > 0) {
        json block;
        block["count"] = retrieval_evals;
        for (const auto& [k, mean] : recall) emit_score(block, "recall_at_" + std::to_string(k), mean);
        for (const auto& [k, mean] : ndcg) emit_score(block, "ndcg_at_" + std::to_string(k), mean);
        out["retrieval"] = std::move(block);
    }
    if (qa_evals > 0) {
        json block;
        block["count"] = qa_evals;
        emit_score(block, "token_f1", f1);
        emit_score(block, "bleu4", bleu);
        emit_score(block, "rouge1", r1);
        emit_score(block, "rouge2", r2);
        emit_score(block, "rougeL", rl);
        block["avg_tokens"] = tokens.value();
        if (judged > 0) {
            block["judge_count"] = judged;
            block["judge_yes_rate"] = static_cast<double>(judge_yes) / static_cast<double>(judged);
            block["judge_yes_rate_x100"] = scaled_score(block["judge_yes_rate"].get<double>());
        }
        if (judge_errors > 0) block["judge_errors"] = judge_errors;
        out["qa"] = std::move(block);
    }
    return out;
}

} // namespace

json record_to_json(const QueryEvalRecord& record) {
    json out;
    out["query_index"] = record.query_index;
    out["query_text"] = record.query_text;
    if (record.query_type) out["query_type"] = *record.query_type;
    if (record.gold_answer) out["gold_answer"] = *record.gold_answer;
    if (!record.gt_session_ids.empty()) out["gt_session_ids"] = record.gt_session_ids;
    out["retrieved_ids"] = record.retrieved_ids;
    out["context_session_ids"] = record.context_session_ids;
    if (record.retrieval) {
        json block;
        for (const auto& [k, v] : record.retrieval->recall_at)
            block["recall_at_" + std::to_string(k)] = v;
        for (const auto& [k, v] : record.retrieval->ndcg_at)
            block["ndcg_at_" + std::to_string(k)] = v;
        out["retrieval"] = std::move(block);
    }
    if (record.qa) {
        json block;
        block["token_f1"] = record.qa->token_f1;
        block["bleu4"] = record.qa->bleu4;
        block["rouge1"] = record.qa->rouge1;
        block["rouge2"] = record.qa->rouge2;
        block["rougeL"] = record.qa->rougeL;
        block["avg_tokens"] = record.qa->avg_tokens;
        if (record.qa->judge_verdict) block["judge_verdict"] = *record.qa->judge_verdict;
        if (record.qa->judge_error) block["judge_error"] = *record.qa->judge_error;
        out["qa"] = std::move(block);
    }
    out["answer_text"] = record.answer_text;
    out["context_used"] = record.context_used;
    out["fallback_used"] = record.fallback_used;
    out["prune_tokens_in"] = record.prune_tokens_in;
    out["prune_tokens_out"] = record.prune_tokens_out;
    out["prompt_tokens"] = record.prompt_tokens;
    out["completion_tokens"] = record.completion_tokens;
    out["retrieval_ms"] = record.retrieval_ms;
    out["prune_ms"] = record.prune_ms;
    out["generation_ms"] = record.generation_ms;
    if (record.failure) out["failure"] = *record.failure;
    return out;
}

json aggregate_records(const std::vector<QueryEvalRecord>& records) {
    if (records.empty()) throw MetricError("aggregate_records: no records to aggregate");
    std::vector<const QueryEvalRecord*> all;
    all.reserve(records.size());
    for (const auto& record : records) all.push_back(&record);

    json out;
    out["overall"] = aggregate_span(all);

    std::map<std::string, std::vector<const QueryEvalRecord*>> by_type;
    for (const auto& record : records)
        by_type[record.query_type.value_or("untyped")].push_back(&record);
    json types;
    for (const auto& [type, span] : by_type) types[type] = aggregate_span(span);
    out["by_type"] = std::move(types);
    return out;
}

json build_report(const json& config, const std::string& run_fingerprint,
                  const std::vector<QueryEvalRecord>& records, double construct_ms) {
    json report = aggregate_records(records);
    report["config"] = config;
    report["run_fingerprint"] = run_fingerprint;

    json rows = json::array();
    json failures = json::array();
    long prompt_total = 0, completion_total = 0, prune_in_total = 0, prune_out_total = 0;
    double retrieval_ms = 0.0, prune_ms = 0.0, generation_ms = 0.0;
    Mean prompt_plus_completion, completion_only;
    for (const auto& record : records) {
        rows.push_back(record_to_json(record));
        if (record.failure)
            failures.push_back({{"query_index", record.query_index}, {"error", *record.failure}});
        prompt_total += record.prompt_tokens;
        completion_total += record.completion_tokens;
        prune_in_total += record.prune_tokens_in;
        prune_out_total += record.prune_tokens_out;
        retrieval_ms += record.retrieval_ms;
        prune_ms += record.prune_ms;
        generation_ms += record.generation_ms;
        if (!record.failure) {
            prompt_plus_completion.add(
                static_cast<double>(record.prompt_tokens + record.completion_tokens));
            completion_only.add(static_cast<double>(record.completion_tokens));
        }
    }
    report["per_query"] = std::move(rows);
    report["failures"] = std::move(failures);

    json tokens;
    tokens["prompt_total"] = prompt_total;
    tokens["completion_total"] = completion_total;
    tokens["prune_tokens_in_total"] = prune_in_total;
    tokens["prune_tokens_out_total"] = prune_out_total;
    if (prompt_plus_completion.n > 0) {
        tokens["avg_tokens_prompt_plus_completion"] = prompt_plus_completion.value();
        tokens["avg_tokens_completion_only"] = completion_only.value();
    }
    // avg_tokens in table-style summaries means prompt + completion of the
    // generation call.
    tokens["avg_tokens_definition"] = "prompt_plus_completion";
    report["tokens"] = std::move(tokens);

    json timing;
    timing["construct_ms"] = construct_ms;
    timing["retrieval_total_ms"] = retrieval_ms;
    timing["prune_total_ms"] = prune_ms;
    timing["generation_total_ms"] = generation_ms;
    report["timing"] = std::move(timing);
    return report;
}

json strip_timing(const json& document) {
    if (document.is_object()) {
        json out = json::object();
        for (const auto& [key, value] : document.items()) {
            if (key == "timing" || key.ends_with("_ms")) continue;
            out[key] = strip_timing(value);
        }
        return out;
    }
    if (document.is_array()) {
        json out = json::array();
        for (const auto& value : document) out.push_back(strip_timing(value));
        return out;
    }
    return document;
}

void write_json_atomic(const json& document, const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out.is_open()) throw LoadError("cannot write " + tmp);
        out << document.dump(2) << '\n';
        if (!out) throw LoadError("write to " + tmp + " failed");
    }
    std::filesystem::rename(tmp, path);
}

double scaled_score(double raw) {
    return std::round(raw * 10000.0) / 100.0;
}

} // namespace convmem
