#pragma once

#include "dilemma/metrics.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dilemma {

/// An ordering of items where rank 1 is best and tied items share a rank.
struct Ranking {
    std::vector<std::string> items;
    std::map<std::string, int> rank_of;

    /// Throws InvalidArgument on duplicate items, missing ranks or ranks < 1.
    void validate() const;
};

/// Builds a ranking from explicit per-item ranks, item order as given.
Ranking make_ranking(std::vector<std::string> items, std::map<std::string, int> rank_of);
/// Ranks items by position: items[0] gets 1, items[1] gets 2, ...
Ranking ranking_from_order(const std::vector<std::string>& items);

/// Number of pairs strictly ordered in `pi` whose order `sigma` strictly
/// reverses. Pairs tied in either ranking count 0. O(n^2).
/// Throws ItemSetMismatch when the two rankings cover different items.
std::uint64_t inversion_loss(const Ranking& sigma, const Ranking& pi);

/// Same count via merge sort, O(n log n).
std::uint64_t inversion_loss_fast(const Ranking& sigma, const Ranking& pi);

using ScoreList = std::vector<std::pair<std::string, double>>;

/// Competition ranking ("1224") of scored items. Items come out sorted by
/// score, ties ordered by id. Throws NonFiniteScore.
Ranking scores_to_ranking(const ScoreList& scores, bool higher_is_better = true);

struct RankingStudy {
    Ranking ground_truth;
    std::map<MetricId, ScoreList> per_metric_scores;
};

struct CategoryWinner {
    MetricCategory category;
    MetricId metric;
    std::uint64_t inversions = 0;
    /// Another metric in the category had the same count; resolved by MetricId order.
    bool tied = false;
    bool excluded = false;
};

struct SelectionResult {
    std::map<MetricId, std::uint64_t> inversions;
    std::map<MetricId, Ranking> metric_rankings;
    std::vector<CategoryWinner> winners;

    const CategoryWinner* winner(MetricCategory category) const;
    /// Winners of the categories that take part in weighting.
    std::map<MetricCategory, std::uint64_t> weighted_category_inversions() const;
};

/// Per category, the metric with the fewest inversions. Throws EmptyCategory if
/// a weighted category has no metric.
SelectionResult select_by_inversions(const std::map<MetricId, std::uint64_t>& inversions);

/// Ranks each metric's scores, counts inversions against the ground truth, then
/// selects per category. Throws ItemSetMismatch if a score list does not cover
/// exactly the ground-truth items.
SelectionResult run_selection_study(const RankingStudy& study);

/// {"items": [...], "ranks": {"id": int}}
Ranking ranking_from_json(const std::string& json_text);
std::string ranking_to_json(const Ranking& ranking);

}  // namespace dilemma
