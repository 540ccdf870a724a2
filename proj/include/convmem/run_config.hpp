#pragma once

#include "convmem/ingest.hpp"
#include "convmem/providers.hpp"
#include "convmem/tir.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace convmem {

/// Fully resolved run parameters. Defaults run everything on the
/// deterministic mocks: keyword-filter pruner, context-echo generator,
/// hash-based embedding.
struct RunConfig {
    std::string dataset_path;
    DatasetFormat format = DatasetFormat::generic_jsonl;
    std::optional<std::size_t> sample_index;
    ProviderConfig embedding;
    ProviderConfig pruner;
    ProviderConfig generator;
    std::optional<ProviderConfig> judge;
    int k = 3;
    Strategy strategy;
    bool normalize = true;
    bool qdp_enabled = true;
    int workers = 4;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
};

RunConfig default_run_config();

nlohmann::json provider_config_to_json(const ProviderConfig& config);
ProviderConfig provider_config_from_json(const nlohmann::json& object);

/// Reads a provider config file with up to four slots: "embedding",
/// "pruner", "generator", "judge". Missing slots keep their defaults.
void apply_provider_config_file(RunConfig& config, const std::string& path);

/// Rejects infeasible values and, for http providers, credential env vars
/// that are not resolvable, before any network call is made.
void validate_run_config(const RunConfig& config);

/// The resolved config as embedded in reports. Credential values never
/// appear, only the env var names.
nlohmann::json run_config_to_json(const RunConfig& config);

/// Hash over the functional fields: dataset, providers, k, strategy,
/// normalize, qdp, seed. Workers and output paths do not change results
/// and are excluded, so reruns of the same experiment share a fingerprint.
std::string run_fingerprint(const RunConfig& config);

} // namespace convmem
