#pragma once

#include "convmem/providers.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace convmem {

struct RetrievalEval {
    std::map<int, double> recall_at;
    std::map<int, double> ndcg_at;
};

struct QAEval {
    double token_f1 = 0.0;
    double bleu4 = 0.0;
    double rouge1 = 0.0;
    double rouge2 = 0.0;
    double rougeL = 0.0;
    std::optional<bool> judge_verdict;
    std::optional<std::string> judge_error;
    // Prompt + completion tokens of the generation call for this record;
    // report aggregation averages it into the tokens column.
    double avg_tokens = 0.0;
};

/// |top-k retrieved ∩ gt| / |gt|.
double recall_at_k(const std::vector<std::string>& retrieved_ids,
                   const std::set<std::string>& gt_ids, int k);

/// Binary-gain DCG normalized by the ideal DCG of min(|gt|, k) relevant
/// items: gain 1/log2(rank+1), rank starting at 1.
double ndcg_at_k(const std::vector<std::string>& retrieved_ids,
                 const std::set<std::string>& gt_ids, int k);

/// F1 over normalized token multisets: case-folded, punctuation stripped,
/// articles dropped, overlap counted with multiplicity.
double token_f1(const std::string& prediction, const std::string& gold);

/// Sentence-level BLEU with uniform 1..4-gram weights and brevity penalty.
/// Higher-order precisions with zero matches are smoothed to 1/(t+1);
/// orders the prediction is too short to form count as 1. Zero unigram
/// overlap or an empty prediction scores 0.
double bleu4(const std::string& prediction, const std::string& gold);

/// Clipped n-gram overlap F-measure, n in {1, 2}.
double rouge_n(const std::string& prediction, const std::string& gold, int n);

/// Longest-common-subsequence F-measure.
double rouge_l(const std::string& prediction, const std::string& gold);

struct JudgeOutcome {
    std::optional<bool> verdict;
    std::optional<std::string> error;
};

std::string render_judge_prompt(const std::string& question, const std::string& gold,
                                const std::string& response);

/// Asks the judge model whether the response answers the question. The
/// completion is scanned for the first "yes" or "no" token, case-insensitive,
/// with or without angle brackets. Provider failures and unparseable
/// completions leave the verdict absent with the cause recorded.
JudgeOutcome judge(ChatProvider& chat, const std::string& question, const std::string& gold,
                   const std::string& response);

/// token_f1 as a percentage, for per-turn answer-support histograms.
double answer_token_density(const std::string& turn_text, const std::string& gold_answer);

} // namespace convmem
