#include "convmem/embedding_cache.hpp"

#include "convmem/errors.hpp"
#include "convmem/hash.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <mutex>
#include <unordered_map>

namespace convmem {

namespace {
using nlohmann::json;
}

std::unique_ptr<EmbeddingCache> EmbeddingCache::open(const std::string& path,
                                                     const std::string& namespace_fingerprint,
                                                     int expected_dim) {
    if (expected_dim < 1)
        throw ValidationError("embedding cache: expected_dim must be positive");
    const std::string ns = sha256_hex(namespace_fingerprint).substr(0, 16);
    std::unique_ptr<EmbeddingCache> cache(new EmbeddingCache(path, ns, expected_dim));
    cache->load();
    return cache;
}

EmbeddingCache::EmbeddingCache(std::string path, std::string ns, int dim)
    : path_(std::move(path)), ns_(std::move(ns)), dim_(dim) {}

void EmbeddingCache::load() {
    std::ifstream in(path_);
    if (in.is_open()) {
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            json record = json::parse(line, nullptr, false);
            if (record.is_discarded() || !record.is_object() || !record.contains("ns") ||
                !record.contains("key") || !record.contains("dim") || !record.contains("v"))
                throw CacheCorruptionError("embedding cache " + path_ + " line " +
                                           std::to_string(line_no) +
                                           " is malformed; delete the file and rebuild");
            if (record["ns"].get<std::string>() != ns_) continue;
            if (record["dim"].get<int>() != dim_)
                throw CacheCorruptionError(
                    "embedding cache " + path_ + " line " + std::to_string(line_no) +
                    " has dim " + record["dim"].dump() + " but this namespace expects " +
                    std::to_string(dim_) + "; delete the file and rebuild");
            auto v = record["v"].get<EmbeddingVector>();
            if (static_cast<int>(v.size()) != dim_)
                throw CacheCorruptionError("embedding cache " + path_ + " line " +
                                           std::to_string(line_no) +
                                           " has a truncated vector; delete the file and rebuild");
            entries_[record["key"].get<std::string>()] = std::move(v);
        }
    }

    const auto parent = std::filesystem::path(path_).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    out_.open(path_, std::ios::app);
    if (!out_.is_open())
        throw CacheCorruptionError("embedding cache " + path_ + " cannot be opened for append");
}

std::optional<EmbeddingVector> EmbeddingCache::lookup(const std::string& text) const {
    const std::string key = sha256_hex(text);
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        ++misses_;
        return std::nullopt;
    }
    ++hits_;
    return it->second;
}

void EmbeddingCache::insert(const std::string& text, const EmbeddingVector& v) {
    if (static_cast<int>(v.size()) != dim_)
        throw ValidationError("embedding cache insert: vector dim " + std::to_string(v.size()) +
                              " does not match namespace dim " + std::to_string(dim_));
    const std::string key = sha256_hex(text);
    std::unique_lock lock(mutex_);
    append_record(key, v);
    entries_[key] = v;
}

void EmbeddingCache::append_record(const std::string& key, const EmbeddingVector& v) {
    json record{{"ns", ns_}, {"key", key}, {"dim", dim_}, {"v", v}};
    out_ << record.dump() << '\n';
    out_.flush();
    if (!out_)
        throw CacheCorruptionError("embedding cache " + path_ + " write failed");
}

long EmbeddingCache::hits() const {
    std::shared_lock lock(mutex_);
    return hits_;
}

long EmbeddingCache::misses() const {
    std::shared_lock lock(mutex_);
    return misses_;
}

std::size_t EmbeddingCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

std::vector<EmbeddingVector> cached_embed(EmbeddingCache& cache, EmbeddingProvider& provider,
                                          const std::vector<std::string>& texts,
                                          int max_batch_size) {
    validate_embed_batch_input(texts);
    if (max_batch_size < 1)
        throw ValidationError("cached_embed: max_batch_size must be positive");

    std::vector<EmbeddingVector> out(texts.size());
    std::vector<char> resolved(texts.size(), 0);
    std::vector<std::string> missing;
    std::unordered_map<std::string, std::vector<std::size_t>> missing_slots;

    for (std::size_t i = 0; i < texts.size(); ++i) {
        auto slots = missing_slots.find(texts[i]);
        if (slots != missing_slots.end()) {
            slots->second.push_back(i);
            continue;
        }
        if (auto hit = cache.lookup(texts[i])) {
            out[i] = std::move(*hit);
            resolved[i] = 1;
        } else {
            missing_slots[texts[i]].push_back(i);
            missing.push_back(texts[i]);
        }
    }

    for (std::size_t begin = 0; begin < missing.size();
         begin += static_cast<std::size_t>(max_batch_size)) {
        const std::size_t end =
            std::min(missing.size(), begin + static_cast<std::size_t>(max_batch_size));
        std::vector<std::string> batch(missing.begin() + static_cast<std::ptrdiff_t>(begin),
                                       missing.begin() + static_cast<std::ptrdiff_t>(end));
        auto vectors = provider.embed_batch(batch);
        if (vectors.size() != batch.size())
            throw ProtocolError("cached_embed: provider returned " +
                                std::to_string(vectors.size()) + " vectors for " +
                                std::to_string(batch.size()) + " texts");
        for (std::size_t j = 0; j < batch.size(); ++j) {
            cache.insert(batch[j], vectors[j]);
            for (std::size_t slot : missing_slots.at(batch[j])) {
                out[slot] = vectors[j];
                resolved[slot] = 1;
            }
        }
    }

    for (std::size_t i = 0; i < texts.size(); ++i)
        if (!resolved[i])
            throw ProtocolError("cached_embed: unresolved slot " + std::to_string(i));
    return out;
}

} // namespace convmem
