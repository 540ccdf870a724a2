#include "convmem/metrics.hpp"

#include "convmem/errors.hpp"
#include "convmem/prompts.hpp"
#include "convmem/tokenize.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace convmem {

namespace {

void require_rank_args(const std::set<std::string>& gt_ids, int k) {
    if (k < 1) throw MetricError("rank metrics need k >= 1, got " + std::to_string(k));
    if (gt_ids.empty()) throw MetricError("rank metrics are undefined for an empty gt set");
}

std::map<std::string, long> token_counts(const std::vector<std::string>& tokens) {
    std::map<std::string, long> counts;
    for (const auto& tok : tokens) ++counts[tok];
    return counts;
}

long clipped_overlap(const std::map<std::string, long>& pred,
                     const std::map<std::string, long>& gold) {
    long overlap = 0;
    for (const auto& [tok, count] : pred) {
        auto it = gold.find(tok);
        if (it != gold.end()) overlap += std::min(count, it->second);
    }
    return overlap;
}

std::vector<std::string> ngrams(const std::vector<std::string>& tokens, int n) {
    std::vector<std::string> grams;
    if (static_cast<int>(tokens.size()) < n) return grams;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
        std::string gram = tokens[i];
        for (int j = 1; j < n; ++j) gram += '\x1f' + tokens[i + static_cast<std::size_t>(j)];
        grams.push_back(std::move(gram));
    }
    return grams;
}

double f_measure(long overlap, std::size_t pred_size, std::size_t gold_size) {
    if (overlap == 0 || pred_size == 0 || gold_size == 0) return 0.0;
    const double p = static_cast<double>(overlap) / static_cast<double>(pred_size);
    const double r = static_cast<double>(overlap) / static_cast<double>(gold_size);
    return 2.0 * p * r / (p + r);
}

} // namespace

double recall_at_k(const std::vector<std::string>& retrieved_ids,
                   const std::set<std::string>& gt_ids, int k) {
    require_rank_args(gt_ids, k);
    long found = 0;
    const std::size_t depth = std::min(retrieved_ids.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < depth; ++i)
        if (gt_ids.count(retrieved_ids[i])) ++found;
    return static_cast<double>(found) / static_cast<double>(gt_ids.size());
}

double ndcg_at_k(const std::vector<std::string>& retrieved_ids,
                 const std::set<std::string>& gt_ids, int k) {
    require_rank_args(gt_ids, k);
    double dcg = 0.0;
    const std::size_t depth = std::min(retrieved_ids.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < depth; ++i)
        if (gt_ids.count(retrieved_ids[i]))
            dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    const std::size_t ideal_hits = std::min(gt_ids.size(), static_cast<std::size_t>(k));
    double idcg = 0.0;
    for (std::size_t i = 0; i < ideal_hits; ++i)
        idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    return dcg / idcg;
}

double token_f1(const std::string& prediction, const std::string& gold) {
    const auto gold_tokens = normalized_answer_tokens(gold);
    if (gold_tokens.empty())
        throw MetricError("token_f1 is undefined: gold is empty after normalization");
    const auto pred_tokens = normalized_answer_tokens(prediction);
    if (pred_tokens.empty()) return 0.0;
    const long overlap = clipped_overlap(token_counts(pred_tokens), token_counts(gold_tokens));
    return f_measure(overlap, pred_tokens.size(), gold_tokens.size());
}

double bleu4(const std::string& prediction, const std::string& gold) {
    const auto gold_tokens = metric_tokens(gold);
    if (gold_tokens.empty()) throw MetricError("bleu4 is undefined: gold has no tokens");
    const auto pred_tokens = metric_tokens(prediction);
    if (pred_tokens.empty()) return 0.0;

    double log_precision_sum = 0.0;
    for (int n = 1; n <= 4; ++n) {
        const auto pred_grams = ngrams(pred_tokens, n);
        const auto gold_grams = ngrams(gold_tokens, n);
        const long total = static_cast<long>(pred_grams.size());
        const long matched = clipped_overlap(token_counts(pred_grams), token_counts(gold_grams));
        double p;
        if (total == 0) {
            p = 1.0;
        } else if (matched > 0) {
            p = static_cast<double>(matched) / static_cast<double>(total);
        } else if (n == 1) {
            return 0.0;
        } else {
            p = 1.0 / static_cast<double>(total + 1);
        }
        log_precision_sum += 0.25 * std::log(p);
    }

    const double c = static_cast<double>(pred_tokens.size());
    const double r = static_cast<double>(gold_tokens.size());
    const double brevity = c > r ? 1.0 : std::exp(1.0 - r / c);
    return brevity * std::exp(log_precision_sum);
}

double rouge_n(const std::string& prediction, const std::string& gold, int n) {
    if (n != 1 && n != 2) throw MetricError("rouge_n supports n in {1, 2}, got " + std::to_string(n));
    const auto gold_tokens = metric_tokens(gold);
    if (gold_tokens.empty()) throw MetricError("rouge_n is undefined: gold has no tokens");
    const auto pred_grams = ngrams(metric_tokens(prediction), n);
    const auto gold_grams = ngrams(gold_tokens, n);
    const long overlap = clipped_overlap(token_counts(pred_grams), token_counts(gold_grams));
    return f_measure(overlap, pred_grams.size(), gold_grams.size());
}

double rouge_l(const std::string& prediction, const std::string& gold) {
    const auto gold_tokens = metric_tokens(gold);
    if (gold_tokens.empty()) throw MetricError("rouge_l is undefined: gold has no tokens");
    const auto pred_tokens = metric_tokens(prediction);
    if (pred_tokens.empty()) return 0.0;

    // Two-row LCS table over the token sequences.
    std::vector<long> prev(gold_tokens.size() + 1, 0);
    std::vector<long> curr(gold_tokens.size() + 1, 0);
    for (std::size_t i = 1; i <= pred_tokens.size(); ++i) {
        for (std::size_t j = 1; j <= gold_tokens.size(); ++j) {
            if (pred_tokens[i - 1] == gold_tokens[j - 1])
                curr[j] = prev[j - 1] + 1;
            else
                curr[j] = std::max(prev[j], curr[j - 1]);
        }
        std::swap(prev, curr);
    }
    return f_measure(prev[gold_tokens.size()], pred_tokens.size(), gold_tokens.size());
}

std::string render_judge_prompt(const std::string& question, const std::string& gold,
                                const std::string& response) {
    return render_template(judge_template(), {{"<question>", question},
                                              {"<answer>", gold},
                                              {"<response>", response}});
}

JudgeOutcome judge(ChatProvider& chat, const std::string& question, const std::string& gold,
                   const std::string& response) {
    JudgeOutcome outcome;
    std::string completion;
    try {
        completion = chat.complete(render_judge_prompt(question, gold, response), {0.0, 16}).text;
    } catch (const std::exception& e) {
        outcome.error = std::string("judge provider failed: ") + e.what();
        return outcome;
    }
    for (const auto& tok : metric_tokens(completion)) {
        if (tok == "yes") {
            outcome.verdict = true;
            return outcome;
        }
        if (tok == "no") {
            outcome.verdict = false;
            return outcome;
        }
    }
    outcome.error = "judge verdict unparseable: \"" + completion + "\"";
    return outcome;
}

double answer_token_density(const std::string& turn_text, const std::string& gold_answer) {
    return token_f1(turn_text, gold_answer) * 100.0;
}

} // namespace convmem
