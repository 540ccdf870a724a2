#include "convmem/qdp.hpp"

#include "convmem/errors.hpp"
#include "convmem/prompts.hpp"
#include "convmem/tokenize.hpp"

#include <algorithm>
#include <chrono>

namespace convmem {

namespace {

constexpr ChatParams kChatParams{0.0, 4000};

std::string single_line(const std::string& text) {
    std::string out = text;
    std::replace(out.begin(), out.end(), '\n', ' ');
    return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(
               std::chrono::steady_clock::now() - start)
        .count();
}

} // namespace

std::string to_string(ContextUsed used) {
    switch (used) {
    case ContextUsed::pruned: return "pruned";
    case ContextUsed::fused: return "fused";
    case ContextUsed::fused_fallback: return "fused_fallback";
    case ContextUsed::empty: return "empty";
    }
    throw ValidationError("unknown context_used value");
}

FusedContext fuse_sessions(const MemoryBank& bank, const RetrievalResult& retrieved) {
    std::vector<const Session*> sessions;
    sessions.reserve(retrieved.ranked.size());
    for (const auto& ranked : retrieved.ranked) {
        const Session* session = bank.find_session(ranked.session_id);
        if (session == nullptr)
            throw ValidationError("fuse_sessions: session " + ranked.session_id +
                                  " is not in the bank");
        sessions.push_back(session);
    }
    std::sort(sessions.begin(), sessions.end(),
              [](const Session* a, const Session* b) { return a->session_index < b->session_index; });

    FusedContext fused;
    std::size_t line_index = 0;
    for (const Session* session : sessions) {
        fused.source_session_ids.push_back(session->session_id);
        if (!fused.text.empty()) fused.text += '\n';
        fused.text += "=== Session " + session->session_id;
        if (session->date) fused.text += " (" + *session->date + ")";
        fused.text += " ===";
        ++line_index;
        for (const auto& turn : session->turns) {
            fused.text += '\n' + turn.request.speaker + ": " + single_line(turn.request.text);
            fused.line_map.push_back({line_index++, session->session_id, turn.turn_index});
            if (turn.response) {
                fused.text += '\n' + turn.response->speaker + ": " + single_line(turn.response->text);
                fused.line_map.push_back({line_index++, session->session_id, turn.turn_index});
            }
        }
    }
    return fused;
}

std::string render_prune_prompt(const FusedContext& fused, const Query& query) {
    if (fused.empty()) throw ValidationError("render_prune_prompt: fused context is empty");
    std::string tpl = prune_template();
    if (!query.date) tpl = drop_line_with(tpl, "<question_date>");
    return render_template(tpl, {{"<fused_event>", fused.text},
                                 {"<question_date>", query.date.value_or("")},
                                 {"<question>", query.text}});
}

PrunedContext prune(ChatProvider& chat, const FusedContext& fused, const Query& query) {
    if (fused.empty()) throw ValidationError("prune: fused context is empty");

    PrunedContext pruned;
    pruned.prune_tokens_in = static_cast<long>(count_fallback_tokens(fused.text));
    const auto start = std::chrono::steady_clock::now();
    try {
        ChatResult result = chat.complete(render_prune_prompt(fused, query), kChatParams);
        if (result.text.empty()) {
            pruned.text = fused.text;
            pruned.fallback_used = true;
        } else {
            pruned.text = std::move(result.text);
        }
    } catch (const std::exception&) {
        pruned.text = fused.text;
        pruned.fallback_used = true;
    }
    pruned.latency_ms = elapsed_ms(start);
    pruned.prune_tokens_out = static_cast<long>(count_fallback_tokens(pruned.text));
    return pruned;
}

std::string render_qa_prompt(const std::string& context_text, const Query& query) {
    std::string tpl = qa_template();
    if (!query.date) tpl = drop_line_with(tpl, "<question_date>");
    return render_template(tpl, {{"<retrieved_texts>", context_text},
                                 {"<question_date>", query.date.value_or("")},
                                 {"<question>", query.text}});
}

AnswerRecord generate_answer(ChatProvider& chat, const std::string& context_text,
                             ContextUsed context_used, const Query& query) {
    const auto start = std::chrono::steady_clock::now();
    ChatResult result = chat.complete(render_qa_prompt(context_text, query), kChatParams);

    AnswerRecord answer;
    answer.answer_text = std::move(result.text);
    answer.context_used = context_used;
    answer.generation_tokens = {result.prompt_tokens, result.completion_tokens};
    answer.total_latency_ms = elapsed_ms(start);
    return answer;
}

PipelineResult answer_pipeline(const MemoryBank& bank, const BankIndex& index, const Query& query,
                               EmbeddingProvider& embedding, ChatProvider* pruner,
                               ChatProvider& generator, const PipelineOptions& options) {
    if (options.qdp_enabled && pruner == nullptr)
        throw ValidationError("answer_pipeline: pruning is enabled but no pruner is configured");

    PipelineResult result;
    result.retrieval = retrieve(index, query.text, options.k, options.strategy, embedding,
                                options.keep_per_turn_scores);
    result.fused = fuse_sessions(bank, result.retrieval);

    if (result.retrieval.ranked.empty()) {
        result.answer = generate_answer(generator, "", ContextUsed::empty, query);
        return result;
    }
    if (!options.qdp_enabled) {
        result.answer = generate_answer(generator, result.fused.text, ContextUsed::fused, query);
        return result;
    }

    result.pruned = prune(*pruner, result.fused, query);
    result.answer = generate_answer(
        generator, result.pruned->text,
        result.pruned->fallback_used ? ContextUsed::fused_fallback : ContextUsed::pruned, query);
    result.answer.total_latency_ms += result.pruned->latency_ms;
    return result;
}

} // namespace convmem
