#pragma once

#include "convmem/embedding_cache.hpp"
#include "convmem/report.hpp"
#include "convmem/run_config.hpp"
#include "convmem/synthetic.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

namespace convmem {

/// Providers and cache resolved from a validated run config. The cache is
/// absent when the embedding width is unknown up front.
struct EvalEnvironment {
    std::unique_ptr<EmbeddingProvider> embedding;
    std::unique_ptr<ChatProvider> pruner;
    std::unique_ptr<ChatProvider> generator;
    std::unique_ptr<ChatProvider> judge;
    std::unique_ptr<EmbeddingCache> cache;
};

EvalEnvironment make_environment(const RunConfig& config);

/// Builds the index over the configured dataset sample, persists it under
/// <out_dir>/index.jsonl and prints build time plus cache statistics.
void cmd_index(const RunConfig& config, std::ostream& out);

/// Runs the full pipeline for one ad-hoc query and prints the retrieved
/// sessions with their decisive turns, the context fed to the generator,
/// the answer and the token usage. Loads <out_dir>/index.jsonl when
/// present, otherwise builds the index in memory.
void cmd_answer(const RunConfig& config, const std::string& query_text,
                const std::optional<std::string>& query_date, std::ostream& out);

/// Evaluates every query of the dataset (all samples unless sample_index
/// is set), writes <out_dir>/report.json and prints the headline means.
/// Per-query provider failures are recorded in the report, not fatal.
void cmd_eval(const RunConfig& config, std::ostream& out);

/// Runs one diagnostic analysis (length_buckets, gt_count_hist,
/// density_hist or topk_turn_sweep) and writes
/// <out_dir>/analysis_<kind>.json.
void cmd_analyze(const RunConfig& config, const std::string& analysis, std::ostream& out);

/// Generates a planted-evidence corpus and saves it in the generic_jsonl
/// layout under dataset_dir.
void cmd_synth(const SyntheticConfig& synth, const std::string& dataset_dir, std::ostream& out);

} // namespace convmem
