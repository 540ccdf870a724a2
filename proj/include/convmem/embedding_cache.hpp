#pragma once

#include "convmem/providers.hpp"

#include <fstream>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace convmem {

/// Persistent append-only embedding store. One JSON record per line:
///   {"ns": namespace hash, "key": sha256 of the text, "dim": n, "v": [...]}
/// Duplicate keys resolve last-writer-wins at load. Records from other
/// namespaces are skipped; a record in this namespace with the wrong dim,
/// or any unparseable line, means the file needs a rebuild.
class EmbeddingCache {
public:
    /// namespace_fingerprint is the provider fingerprint; the stored
    /// namespace hash is derived from it.
    static std::unique_ptr<EmbeddingCache> open(const std::string& path,
                                                const std::string& namespace_fingerprint,
                                                int expected_dim);

    std::optional<EmbeddingVector> lookup(const std::string& text) const;
    void insert(const std::string& text, const EmbeddingVector& v);

    long hits() const;
    long misses() const;
    std::size_t size() const;
    const std::string& namespace_hash() const { return ns_; }

private:
    EmbeddingCache(std::string path, std::string ns, int dim);
    void load();
    void append_record(const std::string& key, const EmbeddingVector& v);

    std::string path_;
    std::string ns_;
    int dim_;
    std::unordered_map<std::string, EmbeddingVector> entries_;
    std::ofstream out_;
    mutable std::shared_mutex mutex_;
    mutable long hits_ = 0;
    mutable long misses_ = 0;
};

/// embed_batch with memoization. Hits are served from the cache; misses go
/// to the provider in slices of at most max_batch_size and are persisted.
/// Repeated texts within one call hit the provider once.
std::vector<EmbeddingVector> cached_embed(EmbeddingCache& cache, EmbeddingProvider& provider,
                                          const std::vector<std::string>& texts,
                                          int max_batch_size = 64);

} // namespace convmem
