#include "convmem/commands.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct CliOptions {
    convmem::RunConfig config = convmem::default_run_config();
    std::string format = "generic_jsonl";
    std::string strategy = "max";
    std::string provider_config;
    long long sample = -1;
    bool no_qdp = false;
};

void add_run_options(CLI::App* cmd, CliOptions& opts) {
    cmd->add_option("--dataset", opts.config.dataset_path, "dataset file or directory")
        ->required();
    cmd->add_option("--format", opts.format, "generic_jsonl, locomo_like or longmemeval_like")
        ->capture_default_str();
    cmd->add_option("--sample", opts.sample,
                    "conversation index inside a multi-conversation file");
    cmd->add_option("--k", opts.config.k, "sessions retrieved per query")->capture_default_str();
    cmd->add_option("--strategy", opts.strategy, "max, mean or topk_turn:<m>")
        ->capture_default_str();
    cmd->add_flag("--no-qdp", opts.no_qdp, "skip pruning, feed fused context to the generator");
    cmd->add_flag("--normalize,!--no-normalize", opts.config.normalize,
                  "L2-normalize embeddings (cosine similarity)");
    cmd->add_option("--workers", opts.config.workers, "parallel pipelines")
        ->capture_default_str();
    cmd->add_option("--seed", opts.config.seed, "run seed recorded in the report")
        ->capture_default_str();
    cmd->add_option("--out", opts.config.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--provider-config", opts.provider_config,
                    "JSON file with embedding/pruner/generator/judge provider slots")
        ->check(CLI::ExistingFile);
}

convmem::RunConfig finalize(const CliOptions& opts) {
    convmem::RunConfig config = opts.config;
    config.format = convmem::dataset_format_from_string(opts.format);
    config.strategy = convmem::Strategy::parse(opts.strategy);
    config.qdp_enabled = !opts.no_qdp;
    if (opts.sample >= 0) config.sample_index = static_cast<std::size_t>(opts.sample);
    if (!opts.provider_config.empty())
        convmem::apply_provider_config_file(config, opts.provider_config);
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"conversational memory: per-turn retrieval, pruning, evaluation"};
    app.require_subcommand(1);

    CliOptions opts;

    auto* index = app.add_subcommand("index", "embed a dataset and persist the index");
    add_run_options(index, opts);
    index->callback([&] { convmem::cmd_index(finalize(opts), std::cout); });

    auto* answer = app.add_subcommand("answer", "answer one query over a dataset");
    add_run_options(answer, opts);
    std::string query_text;
    std::string query_date;
    answer->add_option("query", query_text, "question text")->required();
    answer->add_option("--date", query_date, "question date, included in the prompts");
    answer->callback([&] {
        const std::optional<std::string> date =
            query_date.empty() ? std::nullopt : std::optional<std::string>(query_date);
        convmem::cmd_answer(finalize(opts), query_text, date, std::cout);
    });

    auto* eval = app.add_subcommand("eval", "run every query and write report.json");
    add_run_options(eval, opts);
    eval->callback([&] { convmem::cmd_eval(finalize(opts), std::cout); });

    auto* analyze = app.add_subcommand("analyze", "write one diagnostic analysis file");
    add_run_options(analyze, opts);
    std::string analysis;
    analyze->add_option("analysis", analysis, "which analysis to run")
        ->required()
        ->check(CLI::IsMember(
            {"length_buckets", "gt_count_hist", "density_hist", "topk_turn_sweep"}));
    analyze->callback([&] { convmem::cmd_analyze(finalize(opts), analysis, std::cout); });

    auto* synth = app.add_subcommand("synth", "generate a planted-evidence dataset");
    convmem::SyntheticConfig synth_config;
    std::string synth_out;
    std::string placement = "unique";
    synth->add_option("--out", synth_out, "directory for sessions.jsonl and queries.jsonl")
        ->required();
    synth->add_option("--sessions", synth_config.n_sessions)->capture_default_str();
    synth->add_option("--turns", synth_config.turns_per_session)->capture_default_str();
    synth->add_option("--queries", synth_config.n_queries)->capture_default_str();
    synth->add_option("--placement", placement, "unique or random_assign")
        ->capture_default_str();
    synth->add_option("--noise-overlap", synth_config.noise_overlap,
                      "probability a filler utterance carries a query token")
        ->capture_default_str();
    synth->add_option("--seed", synth_config.seed)->capture_default_str();
    synth->add_flag("--mixed-lengths", synth_config.mixed_lengths,
                    "cycle session lengths through 4, 8, 16, --long-turns");
    synth->add_option("--long-turns", synth_config.long_turns)->capture_default_str();
    synth->callback([&] {
        synth_config.placement = convmem::placement_from_string(placement);
        convmem::cmd_synth(synth_config, synth_out, std::cout);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
