#include "convmem/run_config.hpp"

#include "convmem/errors.hpp"
#include "convmem/hash.hpp"

#include <cstdlib>
#include <fstream>

namespace convmem {

namespace {

using nlohmann::json;

void check_credentials(const ProviderConfig& config, const std::string& slot) {
    if (config.provider_kind != ProviderKind::http_embedding &&
        config.provider_kind != ProviderKind::http_chat)
        return;
    if (!config.endpoint)
        throw ValidationError(slot + " provider: http kind needs an endpoint");
    if (config.credentials_env_var) {
        const char* value = std::getenv(config.credentials_env_var->c_str());
        if (value == nullptr || *value == '\0')
            throw ValidationError(slot + " provider: credentials env var " +
                                  *config.credentials_env_var + " is not set");
    }
}

} // namespace

RunConfig default_run_config() {
    RunConfig config;
    config.embedding.provider_kind = ProviderKind::mock_embedding;
    config.embedding.dim = 64;
    config.embedding.seed = 0;
    config.pruner.provider_kind = ProviderKind::mock_chat;
    config.pruner.model_id = "keyword-filter";
    config.generator.provider_kind = ProviderKind::mock_chat;
    config.generator.model_id = "context-echo";
    return config;
}

json provider_config_to_json(const ProviderConfig& config) {
    json out;
    out["provider_kind"] = to_string(config.provider_kind);
    if (config.endpoint) out["endpoint"] = *config.endpoint;
    out["model_id"] = config.model_id;
    if (config.credentials_env_var) out["credentials_env_var"] = *config.credentials_env_var;
    out["request_timeout_ms"] = config.request_timeout.count();
    out["max_batch_size"] = config.max_batch_size;
    if (config.dim) out["dim"] = *config.dim;
    out["seed"] = config.seed;
    if (!config.script.empty()) out["script"] = config.script;
    if (config.default_response) out["default_response"] = *config.default_response;
    return out;
}

ProviderConfig provider_config_from_json(const json& object) {
    if (!object.is_object()) throw ValidationError("provider config must be a JSON object");
    ProviderConfig config;
    for (const auto& [key, value] : object.items()) {
        if (key == "provider_kind")
            config.provider_kind = provider_kind_from_string(value.get<std::string>());
        else if (key == "endpoint")
            config.endpoint = value.get<std::string>();
        else if (key == "model_id")
            config.model_id = value.get<std::string>();
        else if (key == "credentials_env_var")
            config.credentials_env_var = value.get<std::string>();
        else if (key == "request_timeout_ms")
            config.request_timeout = std::chrono::milliseconds(value.get<long>());
        else if (key == "max_batch_size")
            config.max_batch_size = value.get<int>();
        else if (key == "dim")
            config.dim = value.get<int>();
        else if (key == "seed")
            config.seed = value.get<std::uint64_t>();
        else if (key == "script")
            config.script = value.get<std::map<std::string, std::string>>();
        else if (key == "default_response")
            config.default_response = value.get<std::string>();
        else
            throw ValidationError("provider config has an unknown field: " + key);
    }
    return config;
}

void apply_provider_config_file(RunConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw LoadError("cannot open provider config " + path);
    json document = json::parse(in, nullptr, false);
    if (document.is_discarded() || !document.is_object())
        throw LoadError("provider config " + path + " is not a JSON object");

    for (const auto& [key, value] : document.items()) {
        if (key == "embedding")
            config.embedding = provider_config_from_json(value);
        else if (key == "pruner")
            config.pruner = provider_config_from_json(value);
        else if (key == "generator")
            config.generator = provider_config_from_json(value);
        else if (key == "judge")
            config.judge = provider_config_from_json(value);
        else
            throw LoadError("provider config " + path + " has an unknown slot: " + key +
                            " (expected embedding, pruner, generator, judge)");
    }
}

void validate_run_config(const RunConfig& config) {
    if (config.k < 1) throw ValidationError("k must be >= 1");
    if (config.workers < 1) throw ValidationError("workers must be >= 1");
    if (config.strategy.kind == StrategyKind::topk_turn_mean && config.strategy.m < 1)
        throw ValidationError("topk_turn strategy needs m >= 1");
    check_credentials(config.embedding, "embedding");
    check_credentials(config.pruner, "pruner");
    check_credentials(config.generator, "generator");
    if (config.judge) check_credentials(*config.judge, "judge");
}

json run_config_to_json(const RunConfig& config) {
    json out;
    out["dataset_path"] = config.dataset_path;
    out["format"] = to_string(config.format);
    if (config.sample_index) out["sample_index"] = *config.sample_index;
    out["embedding"] = provider_config_to_json(config.embedding);
    out["pruner"] = provider_config_to_json(config.pruner);
    out["generator"] = provider_config_to_json(config.generator);
    if (config.judge) out["judge"] = provider_config_to_json(*config.judge);
    out["k"] = config.k;
    out["strategy"] = config.strategy.name();
    out["normalize"] = config.normalize;
    out["qdp_enabled"] = config.qdp_enabled;
    out["workers"] = config.workers;
    out["out_dir"] = config.out_dir;
    out["seed"] = config.seed;
    return out;
}

std::string run_fingerprint(const RunConfig& config) {
    json functional = run_config_to_json(config);
    functional.erase("workers");
    functional.erase("out_dir");
    return sha256_hex(functional.dump());
}

} // namespace convmem
