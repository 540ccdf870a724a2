#include "convmem/commands.hpp"

#include "convmem/analyses.hpp"
#include "convmem/errors.hpp"
#include "convmem/metrics.hpp"
#include "convmem/qdp.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <ostream>
#include <set>
#include <thread>

namespace convmem {

namespace {

using nlohmann::json;

constexpr int kMetricDepths[] = {1, 3, 5, 10};

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(
               std::chrono::steady_clock::now() - start)
        .count();
}

std::string fixed2(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.2f", value);
    return buffer;
}

std::string fixed6(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6f", value);
    return buffer;
}

std::string index_path(const RunConfig& config) {
    return (std::filesystem::path(config.out_dir) / "index.jsonl").string();
}

std::string cache_path(const RunConfig& config) {
    return (std::filesystem::path(config.out_dir) / "emb_cache.jsonl").string();
}

std::string first_line(const std::string& text) {
    const std::size_t pos = text.find('\n');
    return pos == std::string::npos ? text : text.substr(0, pos);
}

DatasetBundle load_single(const RunConfig& config) {
    return load_dataset(config.dataset_path, config.format, config.sample_index);
}

RetrievalEval retrieval_eval(const std::vector<std::string>& ids,
                             const std::set<std::string>& gt) {
    RetrievalEval eval;
    for (int depth : kMetricDepths) {
        eval.recall_at[depth] = recall_at_k(ids, gt, depth);
        eval.ndcg_at[depth] = ndcg_at_k(ids, gt, depth);
    }
    return eval;
}

QueryEvalRecord eval_query(const DatasetBundle& bundle, const BankIndex& index,
                           const Query& query, std::size_t query_index,
                           const EvalEnvironment& env, const RunConfig& config) {
    QueryEvalRecord record;
    record.query_index = query_index;
    record.query_text = query.text;
    record.query_type = query.query_type;
    record.gold_answer = query.gold_answer;
    record.gt_session_ids = query.gt_session_ids;

    const int depth = std::max(10, config.k);
    const auto retrieval_start = std::chrono::steady_clock::now();
    const RetrievalResult deep =
        retrieve(index, query.text, depth, config.strategy, *env.embedding);
    record.retrieval_ms = elapsed_ms(retrieval_start);
    for (const auto& ranked : deep.ranked) record.retrieved_ids.push_back(ranked.session_id);

    if (!query.gt_session_ids.empty()) {
        const std::set<std::string> gt(query.gt_session_ids.begin(), query.gt_session_ids.end());
        record.retrieval = retrieval_eval(record.retrieved_ids, gt);
    }

    const RetrievalResult selected = truncate_result(deep, config.k);
    const FusedContext fused = fuse_sessions(bundle.bank, selected);
    record.context_session_ids = fused.source_session_ids;

    AnswerRecord answer;
    if (selected.ranked.empty()) {
        answer = generate_answer(*env.generator, "", ContextUsed::empty, query);
    } else if (!config.qdp_enabled) {
        answer = generate_answer(*env.generator, fused.text, ContextUsed::fused, query);
    } else {
        const PrunedContext pruned = prune(*env.pruner, fused, query);
        record.fallback_used = pruned.fallback_used;
        record.prune_tokens_in = pruned.prune_tokens_in;
        record.prune_tokens_out = pruned.prune_tokens_out;
        record.prune_ms = pruned.latency_ms;
        answer = generate_answer(
            *env.generator, pruned.text,
            pruned.fallback_used ? ContextUsed::fused_fallback : ContextUsed::pruned, query);
    }
    record.answer_text = answer.answer_text;
    record.context_used = to_string(answer.context_used);
    record.prompt_tokens = answer.generation_tokens.prompt;
    record.completion_tokens = answer.generation_tokens.completion;
    record.generation_ms = answer.total_latency_ms;

    if (query.gold_answer) {
        QAEval qa;
        qa.token_f1 = token_f1(record.answer_text, *query.gold_answer);
        qa.bleu4 = bleu4(record.answer_text, *query.gold_answer);
        qa.rouge1 = rouge_n(record.answer_text, *query.gold_answer, 1);
        qa.rouge2 = rouge_n(record.answer_text, *query.gold_answer, 2);
        qa.rougeL = rouge_l(record.answer_text, *query.gold_answer);
        qa.avg_tokens = static_cast<double>(record.prompt_tokens + record.completion_tokens);
        if (env.judge) {
            const JudgeOutcome outcome =
                judge(*env.judge, query.text, *query.gold_answer, record.answer_text);
            qa.judge_verdict = outcome.verdict;
            qa.judge_error = outcome.error;
        }
        record.qa = std::move(qa);
    }
    return record;
}

void run_parallel(std::size_t jobs, int workers, const std::function<void(std::size_t)>& body) {
    const int threads = std::max(1, std::min<int>(workers, static_cast<int>(jobs)));
    if (threads == 1) {
        for (std::size_t i = 0; i < jobs; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= jobs) return;
                body(i);
            }
        });
    }
    for (auto& thread : pool) thread.join();
}

void print_aggregate(std::ostream& out, const json& aggregate) {
    if (aggregate.contains("retrieval")) {
        const auto& block = aggregate["retrieval"];
        out << "  retrieval (" << block["count"].get<long>() << " queries):";
        for (int depth : kMetricDepths) {
            const std::string key = "recall_at_" + std::to_string(depth) + "_x100";
            if (block.contains(key))
                out << "  R@" << depth << " " << fixed2(block[key].get<double>());
        }
        for (int depth : kMetricDepths) {
            const std::string key = "ndcg_at_" + std::to_string(depth) + "_x100";
            if (block.contains(key))
                out << "  N@" << depth << " " << fixed2(block[key].get<double>());
        }
        out << "\n";
    }
    if (aggregate.contains("qa")) {
        const auto& block = aggregate["qa"];
        out << "  qa (" << block["count"].get<long>() << " queries):"
            << "  F1 " << fixed2(block["token_f1_x100"].get<double>())
            << "  BLEU " << fixed2(block["bleu4_x100"].get<double>())
            << "  R1 " << fixed2(block["rouge1_x100"].get<double>())
            << "  R2 " << fixed2(block["rouge2_x100"].get<double>())
            << "  RL " << fixed2(block["rougeL_x100"].get<double>())
            << "  avg tokens " << fixed2(block["avg_tokens"].get<double>());
        if (block.contains("judge_yes_rate_x100"))
            out << "  judge " << fixed2(block["judge_yes_rate_x100"].get<double>());
        out << "\n";
    }
}

} // namespace

EvalEnvironment make_environment(const RunConfig& config) {
    validate_run_config(config);

    EvalEnvironment env;
    env.embedding = make_embedding_provider(config.embedding);
    env.pruner = make_chat_provider(config.pruner);
    env.generator = make_chat_provider(config.generator);
    if (config.judge) env.judge = make_chat_provider(*config.judge);

    std::optional<int> cache_dim;
    if (env.embedding->dim() > 0)
        cache_dim = env.embedding->dim();
    else if (config.embedding.dim)
        cache_dim = config.embedding.dim;
    if (cache_dim)
        env.cache = EmbeddingCache::open(cache_path(config), env.embedding->fingerprint(),
                                         *cache_dim);
    return env;
}

void cmd_index(const RunConfig& config, std::ostream& out) {
    const DatasetBundle bundle = load_single(config);
    EvalEnvironment env = make_environment(config);

    const auto start = std::chrono::steady_clock::now();
    const BankIndex index = build_index(bundle.bank, *env.embedding, config.normalize,
                                        env.cache.get(), config.workers,
                                        config.embedding.max_batch_size);
    const double build_ms = elapsed_ms(start);
    save_index(index, index_path(config));

    out << "dataset " << bundle.dataset_name << ": " << bundle.stats.session_count
        << " sessions, " << bundle.stats.turn_count << " turns\n";
    out << "index " << index_path(config) << " dim " << index.dim << " fingerprint "
        << index.provider_fingerprint << "\n";
    out << "built in " << fixed2(build_ms) << " ms";
    if (env.cache)
        out << " (cache hits " << env.cache->hits() << ", misses " << env.cache->misses() << ")";
    out << "\n";
    for (const auto& warning : index.warnings) out << "warning: " << warning << "\n";
}

void cmd_answer(const RunConfig& config, const std::string& query_text,
                const std::optional<std::string>& query_date, std::ostream& out) {
    const DatasetBundle bundle = load_single(config);
    EvalEnvironment env = make_environment(config);

    BankIndex index;
    if (std::filesystem::exists(index_path(config))) {
        index = load_index(index_path(config),
                           index_fingerprint(*env.embedding, config.normalize));
    } else {
        index = build_index(bundle.bank, *env.embedding, config.normalize, env.cache.get(),
                            config.workers, config.embedding.max_batch_size);
        out << "index built in memory (" << bundle.stats.turn_count << " turns)\n";
    }

    Query query;
    query.text = query_text;
    query.date = query_date;

    PipelineOptions options;
    options.k = config.k;
    options.strategy = config.strategy;
    options.qdp_enabled = config.qdp_enabled;
    const PipelineResult result = answer_pipeline(bundle.bank, index, query, *env.embedding,
                                                  env.pruner.get(), *env.generator, options);

    out << "retrieved " << result.retrieval.ranked.size() << " sessions (strategy "
        << result.retrieval.strategy.name() << ", k " << config.k << "):\n";
    for (std::size_t rank = 0; rank < result.retrieval.ranked.size(); ++rank) {
        const auto& ranked = result.retrieval.ranked[rank];
        const auto& entry = index.per_session[ranked.session_index];
        out << "  " << rank + 1 << ". " << ranked.session_id << "  score "
            << fixed6(ranked.score) << "  decisive turn " << ranked.best_turn_index << ": "
            << first_line(entry.turn_texts[ranked.best_turn_index]) << "\n";
    }
    out << "context (" << to_string(result.answer.context_used) << "):\n";
    const std::string& context =
        result.pruned ? result.pruned->text : result.fused.text;
    out << context << "\n";
    if (result.pruned)
        out << "pruned " << result.pruned->prune_tokens_in << " -> "
            << result.pruned->prune_tokens_out << " tokens"
            << (result.pruned->fallback_used ? " (fallback)" : "") << "\n";
    out << "answer: " << result.answer.answer_text << "\n";
    out << "tokens: prompt " << result.answer.generation_tokens.prompt << ", completion "
        << result.answer.generation_tokens.completion << "\n";
}

void cmd_eval(const RunConfig& config, std::ostream& out) {
    std::vector<DatasetBundle> bundles;
    if (config.sample_index)
        bundles.push_back(load_single(config));
    else
        bundles = load_dataset_multi(config.dataset_path, config.format);
    if (bundles.empty()) throw ValidationError("cmd_eval: dataset has no samples");

    EvalEnvironment env = make_environment(config);

    std::vector<QueryEvalRecord> records;
    double construct_ms = 0.0;
    std::size_t query_base = 0;
    for (const auto& bundle : bundles) {
        if (bundle.queries.empty()) continue;
        const auto start = std::chrono::steady_clock::now();
        const BankIndex index = build_index(bundle.bank, *env.embedding, config.normalize,
                                            env.cache.get(), config.workers,
                                            config.embedding.max_batch_size);
        construct_ms += elapsed_ms(start);

        records.resize(query_base + bundle.queries.size());
        run_parallel(bundle.queries.size(), config.workers, [&](std::size_t i) {
            const std::size_t slot = query_base + i;
            try {
                records[slot] = eval_query(bundle, index, bundle.queries[i], slot, env, config);
            } catch (const std::exception& e) {
                QueryEvalRecord failed;
                failed.query_index = slot;
                failed.query_text = bundle.queries[i].text;
                failed.query_type = bundle.queries[i].query_type;
                failed.failure = e.what();
                records[slot] = std::move(failed);
            }
        });
        query_base += bundle.queries.size();
    }
    if (records.empty()) throw ValidationError("cmd_eval: dataset has no queries");

    const json report = build_report(run_config_to_json(config), run_fingerprint(config),
                                     records, construct_ms);
    const std::string path = (std::filesystem::path(config.out_dir) / "report.json").string();
    write_json_atomic(report, path);

    out << "evaluated " << records.size() << " queries across " << bundles.size()
        << " sample(s); report " << path << "\n";
    print_aggregate(out, report["overall"]);
    const auto& failures = report["failures"];
    if (!failures.empty()) out << "  failures: " << failures.size() << " (see report)\n";
}

void cmd_analyze(const RunConfig& config, const std::string& analysis, std::ostream& out) {
    const DatasetBundle bundle = load_single(config);

    json result;
    if (analysis == "gt_count_hist") {
        result = gt_count_hist_analysis(bundle.queries);
    } else if (analysis == "density_hist") {
        result = density_hist_analysis(bundle.bank, bundle.queries);
    } else if (analysis == "length_buckets" || analysis == "topk_turn_sweep") {
        EvalEnvironment env = make_environment(config);
        const BankIndex index = build_index(bundle.bank, *env.embedding, config.normalize,
                                            env.cache.get(), config.workers,
                                            config.embedding.max_batch_size);
        if (analysis == "length_buckets") {
            const std::vector<Strategy> strategies{{StrategyKind::max_activation, 1},
                                                   {StrategyKind::mean_pool, 1}};
            result = length_buckets_analysis(index, bundle.queries, strategies, config.k,
                                             *env.embedding);
        } else {
            result = topk_turn_sweep_analysis(index, bundle.queries, {1, 2, 3, 5, 10}, config.k,
                                              *env.embedding);
        }
    } else {
        throw ValidationError("unknown analysis: " + analysis +
                              " (expected length_buckets, gt_count_hist, density_hist or "
                              "topk_turn_sweep)");
    }

    const std::string path =
        (std::filesystem::path(config.out_dir) / ("analysis_" + analysis + ".json")).string();
    write_json_atomic(result, path);
    out << "analysis " << analysis << " over " << bundle.dataset_name << " written to " << path
        << "\n";
    if (result.contains("modal_bin"))
        out << "  modal bin: " << result["modal_bin"].get<std::string>() << "\n";
}

void cmd_synth(const SyntheticConfig& synth, const std::string& dataset_dir, std::ostream& out) {
    const DatasetBundle bundle = make_synthetic(synth);
    save_generic_jsonl(bundle, dataset_dir);
    out << "synthetic dataset " << bundle.dataset_name << " written to " << dataset_dir << ": "
        << bundle.stats.session_count << " sessions, " << bundle.stats.turn_count << " turns, "
        << bundle.queries.size() << " queries, ~" << bundle.stats.token_estimate << " tokens\n";
}

} // namespace convmem
