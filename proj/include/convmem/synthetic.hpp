#pragma once

#include "convmem/ingest.hpp"

#include <cstdint>
#include <string>

namespace convmem {

enum class SignalPlacement { unique, random_assign };

SignalPlacement placement_from_string(const std::string& name);

/// Planted-evidence corpus generator. Per query exactly one evidence turn
/// carrying the gold answer span is planted inside one ground-truth
/// session; every other turn is filler drawn from a vocabulary disjoint
/// from all gold spans. noise_overlap is the probability that a filler
/// utterance also carries the token "about", which appears in every query
/// text: it raises embedding similarity between filler turns and queries
/// without ever adding answer tokens.
struct SyntheticConfig {
    int n_sessions = 12;
    int turns_per_session = 6;
    int n_queries = 6;
    SignalPlacement placement = SignalPlacement::unique;
    double noise_overlap = 0.0;
    std::uint64_t seed = 1;
    // Cycle session lengths through {4, 8, 16, long_turns} instead of the
    // flat turns_per_session, for length-sensitivity fixtures.
    bool mixed_lengths = false;
    int long_turns = 40;
};

/// Deterministic: a fixed config yields byte-identical bundles on every
/// platform and run.
DatasetBundle make_synthetic(const SyntheticConfig& config);

} // namespace convmem
