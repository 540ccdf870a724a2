#include "convmem/analyses.hpp"

#include "convmem/errors.hpp"
#include "convmem/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace convmem {

namespace {

using nlohmann::json;

std::vector<const Query*> queries_with_gt(const std::vector<Query>& queries) {
    std::vector<const Query*> out;
    for (const auto& query : queries)
        if (!query.gt_session_ids.empty()) out.push_back(&query);
    if (out.empty())
        throw MetricError("analysis unavailable: no queries carry gt session ids");
    return out;
}

const std::vector<std::string>& bin_labels() {
    static const std::vector<std::string> labels{"0",     "1-10",  "11-20", "21-30",
                                                 "31-40", "41-50", "51-60", "61-70",
                                                 "71-80", "81-90", "91-100"};
    return labels;
}

} // namespace

std::string density_bin_label(double density_percent) {
    if (density_percent <= 0.0) return bin_labels()[0];
    const int decile =
        std::clamp(static_cast<int>(std::ceil(density_percent / 10.0)), 1, 10);
    return bin_labels()[static_cast<std::size_t>(decile)];
}

json length_buckets_analysis(const BankIndex& index, const std::vector<Query>& queries,
                             const std::vector<Strategy>& strategies, int k,
                             EmbeddingProvider& provider) {
    const auto usable = queries_with_gt(queries);
    if (index.per_session.empty()) throw MetricError("analysis unavailable: empty index");

    // Rank sessions by turn count; quartile b covers ranks [bN/4, (b+1)N/4).
    std::vector<std::size_t> order(index.per_session.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return index.per_session[a].turn_texts.size() < index.per_session[b].turn_texts.size();
    });

    const std::size_t n = order.size();
    std::map<std::string, std::size_t> bucket_of;
    struct Bucket {
        std::string label;
        std::size_t sessions = 0;
        std::size_t min_turns = 0;
        std::size_t max_turns = 0;
    };
    std::vector<Bucket> buckets(4);
    const char* labels[4] = {"0-25%", "25-50%", "50-75%", "75-100%"};
    for (std::size_t b = 0; b < 4; ++b) {
        buckets[b].label = labels[b];
        const std::size_t begin = b * n / 4;
        const std::size_t end = (b + 1) * n / 4;
        for (std::size_t r = begin; r < end; ++r) {
            const auto& entry = index.per_session[order[r]];
            bucket_of[entry.session_id] = b;
            ++buckets[b].sessions;
            const std::size_t turns = entry.turn_texts.size();
            if (buckets[b].sessions == 1) {
                buckets[b].min_turns = buckets[b].max_turns = turns;
            } else {
                buckets[b].min_turns = std::min(buckets[b].min_turns, turns);
                buckets[b].max_turns = std::max(buckets[b].max_turns, turns);
            }
        }
    }

    struct Tally {
        long pairs = 0;
        long hits = 0;
    };
    std::vector<std::vector<Tally>> tallies(strategies.size(), std::vector<Tally>(4));
    for (std::size_t s = 0; s < strategies.size(); ++s) {
        for (const Query* query : usable) {
            const auto result = retrieve(index, query->text, k, strategies[s], provider);
            std::set<std::string> top;
            for (const auto& ranked : result.ranked) top.insert(ranked.session_id);
            for (const auto& gt : query->gt_session_ids) {
                auto it = bucket_of.find(gt);
                if (it == bucket_of.end())
                    throw ValidationError("length_buckets: gt session " + gt +
                                          " is not in the index");
                auto& tally = tallies[s][it->second];
                ++tally.pairs;
                if (top.count(gt)) ++tally.hits;
            }
        }
    }

    json out;
    out["analysis"] = "length_buckets";
    out["k"] = k;
    json bucket_rows = json::array();
    for (std::size_t b = 0; b < 4; ++b) {
        json row;
        row["label"] = buckets[b].label;
        row["sessions"] = buckets[b].sessions;
        if (buckets[b].sessions > 0) {
            row["min_turns"] = buckets[b].min_turns;
            row["max_turns"] = buckets[b].max_turns;
        }
        json per_strategy = json::array();
        for (std::size_t s = 0; s < strategies.size(); ++s) {
            json cell;
            cell["strategy"] = strategies[s].name();
            cell["pairs"] = tallies[s][b].pairs;
            cell["hits"] = tallies[s][b].hits;
            if (tallies[s][b].pairs > 0)
                cell["hit_rate"] = static_cast<double>(tallies[s][b].hits) /
                                   static_cast<double>(tallies[s][b].pairs);
            per_strategy.push_back(std::move(cell));
        }
        row["per_strategy"] = std::move(per_strategy);
        bucket_rows.push_back(std::move(row));
    }
    out["buckets"] = std::move(bucket_rows);
    return out;
}

json gt_count_hist_analysis(const std::vector<Query>& queries) {
    if (queries.empty()) throw MetricError("analysis unavailable: no queries");
    std::map<std::size_t, long> counts;
    for (const auto& query : queries) ++counts[query.gt_session_ids.size()];

    json bins = json::array();
    for (const auto& [size, n] : counts)
        bins.push_back({{"gt_count", size}, {"queries", n}});
    json out;
    out["analysis"] = "gt_count_hist";
    out["total"] = queries.size();
    out["bins"] = std::move(bins);
    return out;
}

json density_hist_analysis(const MemoryBank& bank, const std::vector<Query>& queries) {
    std::vector<const Query*> usable;
    for (const auto& query : queries)
        if (query.gold_answer) usable.push_back(&query);
    if (usable.empty())
        throw MetricError("analysis unavailable: no queries carry gold answers");

    std::map<std::string, long> counts;
    for (const auto& label : bin_labels()) counts[label] = 0;
    long pairs = 0;
    for (const Query* query : usable) {
        for (const auto& session : bank.sessions) {
            for (const auto& turn : session.turns) {
                const double density =
                    answer_token_density(serialize_turn(turn), *query->gold_answer);
                ++counts[density_bin_label(density)];
                ++pairs;
            }
        }
    }

    std::string modal = bin_labels()[0];
    for (const auto& label : bin_labels())
        if (counts[label] > counts[modal]) modal = label;

    json bins = json::array();
    for (const auto& label : bin_labels())
        bins.push_back({{"bin", label}, {"pairs", counts[label]}});
    json out;
    out["analysis"] = "density_hist";
    out["queries_used"] = usable.size();
    out["pairs_total"] = pairs;
    out["modal_bin"] = modal;
    out["bins"] = std::move(bins);
    return out;
}

json topk_turn_sweep_analysis(const BankIndex& index, const std::vector<Query>& queries,
                              const std::vector<int>& ms, int k, EmbeddingProvider& provider) {
    const auto usable = queries_with_gt(queries);
    if (ms.empty()) throw ValidationError("topk_turn_sweep: no m values given");

    json points = json::array();
    for (int m : ms) {
        const Strategy strategy{StrategyKind::topk_turn_mean, m};
        double recall_sum = 0.0, ndcg_sum = 0.0;
        for (const Query* query : usable) {
            const auto result = retrieve(index, query->text, k, strategy, provider);
            std::vector<std::string> ids;
            for (const auto& ranked : result.ranked) ids.push_back(ranked.session_id);
            const std::set<std::string> gt(query->gt_session_ids.begin(),
                                           query->gt_session_ids.end());
            recall_sum += recall_at_k(ids, gt, k);
            ndcg_sum += ndcg_at_k(ids, gt, k);
        }
        points.push_back({{"m", m},
                          {"recall", recall_sum / static_cast<double>(usable.size())},
                          {"ndcg", ndcg_sum / static_cast<double>(usable.size())}});
    }
    json out;
    out["analysis"] = "topk_turn_sweep";
    out["k"] = k;
    out["queries_used"] = usable.size();
    out["points"] = std::move(points);
    return out;
}

} // namespace convmem
