#pragma once

#include "convmem/memory.hpp"

#include <optional>
#include <string>
#include <vector>

namespace convmem {

struct DatasetStats {
    std::size_t session_count = 0;
    std::size_t turn_count = 0;
    long token_estimate = 0;

    bool operator==(const DatasetStats&) const = default;
};

struct DatasetBundle {
    MemoryBank bank;
    std::vector<Query> queries;
    std::string dataset_name;
    DatasetStats stats;
};

enum class DatasetFormat { generic_jsonl, locomo_like, longmemeval_like };

DatasetFormat dataset_format_from_string(const std::string& name);
std::string to_string(DatasetFormat format);

/// Turn counts and a fallback-tokenizer estimate over the serialized turns.
DatasetStats compute_stats(const MemoryBank& bank);

/// generic_jsonl: path is a directory holding sessions.jsonl and
/// queries.jsonl. Session lines: {"session_id", "date"?, "utterances":
/// [{"speaker", "text"}]}. Query lines: {"text", "date"?, "type"?,
/// "gt_session_ids"?, "gold_answer"?}.
///
/// locomo_like and longmemeval_like read the benchmarks' native JSON
/// layouts; those files hold many independent conversations, so
/// sample_index picks one (default 0) and load_dataset_multi loads all.
/// Schema violations are collected and reported together in one error.
DatasetBundle load_dataset(const std::string& path, DatasetFormat format,
                           std::optional<std::size_t> sample_index = std::nullopt);

std::vector<DatasetBundle> load_dataset_multi(const std::string& path, DatasetFormat format);

/// Writes the bundle in the generic_jsonl layout. Reloading the directory
/// reproduces the bank, queries and stats exactly.
void save_generic_jsonl(const DatasetBundle& bundle, const std::string& dir);

} // namespace convmem
