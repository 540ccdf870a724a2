#pragma once

#include "convmem/memory.hpp"
#include "convmem/providers.hpp"
#include "convmem/tir.hpp"

#include <optional>
#include <string>
#include <vector>

namespace convmem {

enum class ContextUsed { pruned, fused, fused_fallback, empty };

std::string to_string(ContextUsed used);

struct FusedLineRef {
    std::size_t line_index = 0;
    std::string session_id;
    int turn_index = 0;
};

/// Retrieved sessions flattened into one context. Each session contributes
/// a header line followed by its utterances, one per line; line_map covers
/// exactly the utterance lines (headers carry no map entry). Sessions
/// appear in chronological order regardless of retrieval rank.
struct FusedContext {
    std::string text;
    std::vector<std::string> source_session_ids;
    std::vector<FusedLineRef> line_map;

    bool empty() const { return text.empty(); }
};

struct PrunedContext {
    std::string text;
    long prune_tokens_in = 0;
    long prune_tokens_out = 0;
    bool fallback_used = false;
    double latency_ms = 0.0;
};

struct GenerationTokens {
    long prompt = 0;
    long completion = 0;
};

struct AnswerRecord {
    std::string answer_text;
    ContextUsed context_used = ContextUsed::empty;
    GenerationTokens generation_tokens;
    double total_latency_ms = 0.0;
};

/// Flattens the retrieved sessions in session_index order. Utterance text
/// is emitted as "<speaker>: <text>" with embedded newlines flattened to
/// spaces so every utterance stays a single line.
FusedContext fuse_sessions(const MemoryBank& bank, const RetrievalResult& retrieved);

/// Instantiates the pruning template with the fused text, the question and
/// its date. The date line is dropped when the query has no date.
std::string render_prune_prompt(const FusedContext& fused, const Query& query);

/// Asks the filter model for the query-relevant fragments. Any filter
/// failure or empty completion falls back to the unpruned fused text with
/// fallback_used set; this stage never throws past a valid fused context.
PrunedContext prune(ChatProvider& chat, const FusedContext& fused, const Query& query);

/// Instantiates the answer template. Empty context renders an empty
/// history section.
std::string render_qa_prompt(const std::string& context_text, const Query& query);

/// Calls the generator at temperature 0 with up to 4000 completion tokens.
/// Generator failures surface; there is no fallback at this stage.
AnswerRecord generate_answer(ChatProvider& chat, const std::string& context_text,
                             ContextUsed context_used, const Query& query);

struct PipelineOptions {
    int k = 3;
    Strategy strategy;
    bool qdp_enabled = true;
    bool keep_per_turn_scores = false;
};

struct PipelineResult {
    RetrievalResult retrieval;
    FusedContext fused;
    std::optional<PrunedContext> pruned;
    AnswerRecord answer;
};

/// retrieve -> fuse -> prune -> generate. With qdp disabled the generator
/// consumes the fused text directly and no prune call is made. Empty
/// retrieval still generates, over an empty history, with
/// context_used=empty.
PipelineResult answer_pipeline(const MemoryBank& bank, const BankIndex& index, const Query& query,
                               EmbeddingProvider& embedding, ChatProvider* pruner,
                               ChatProvider& generator, const PipelineOptions& options);

} // namespace convmem
