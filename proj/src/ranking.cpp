#include "dilemma/ranking.hpp"

#include "dilemma/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

using nlohmann::json;

namespace dilemma {

void Ranking::validate() const {
    std::set<std::string> seen;
    for (const auto& item : items) {
        if (!seen.insert(item).second) throw Error(ErrorCode::InvalidArgument, "duplicate item '" + item + "'");
        auto it = rank_of.find(item);
        if (it == rank_of.end()) throw Error(ErrorCode::InvalidArgument, "no rank for item '" + item + "'");
        if (it->second < 1) throw Error(ErrorCode::InvalidArgument, "rank of '" + item + "' must be >= 1");
    }
    if (rank_of.size() != items.size()) throw Error(ErrorCode::InvalidArgument, "ranks name items not in the list");
}

Ranking make_ranking(std::vector<std::string> items, std::map<std::string, int> rank_of) {
    Ranking r{std::move(items), std::move(rank_of)};
    r.validate();
    return r;
}

Ranking ranking_from_order(const std::vector<std::string>& items) {
    std::map<std::string, int> ranks;
    for (std::size_t i = 0; i < items.size(); ++i) ranks[items[i]] = static_cast<int>(i + 1);
    return make_ranking(items, std::move(ranks));
}

namespace {

void require_same_items(const Ranking& sigma, const Ranking& pi) {
    if (sigma.items.size() != pi.items.size()) {
        throw Error(ErrorCode::ItemSetMismatch, "rankings have " + std::to_string(sigma.items.size()) + " and " +
                                                    std::to_string(pi.items.size()) + " items");
    }
    for (const auto& item : pi.items) {
        if (!sigma.rank_of.contains(item)) throw Error(ErrorCode::ItemSetMismatch, "'" + item + "' missing from sigma");
    }
}

std::uint64_t merge_count(std::vector<int>& v, std::vector<int>& scratch, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t count = merge_count(v, scratch, lo, mid) + merge_count(v, scratch, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        // Strict: equal values are not inversions, so the left side goes first.
        if (v[j] < v[i]) {
            count += mid - i;
            scratch[k++] = v[j++];
        } else {
            scratch[k++] = v[i++];
        }
    }
    while (i < mid) scratch[k++] = v[i++];
    while (j < hi) scratch[k++] = v[j++];
    std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return count;
}

}  // namespace

std::uint64_t inversion_loss(const Ranking& sigma, const Ranking& pi) {
    require_same_items(sigma, pi);
    std::uint64_t loss = 0;
    const auto& items = pi.items;
    for (std::size_t i = 0; i < items.size(); ++i) {
        for (std::size_t j = i + 1; j < items.size(); ++j) {
            const int pi_i = pi.rank_of.at(items[i]), pi_j = pi.rank_of.at(items[j]);
            const int s_i = sigma.rank_of.at(items[i]), s_j = sigma.rank_of.at(items[j]);
            if ((pi_i < pi_j && s_i > s_j) || (pi_j < pi_i && s_j > s_i)) ++loss;
        }
    }
    return loss;
}

std::uint64_t inversion_loss_fast(const Ranking& sigma, const Ranking& pi) {
    require_same_items(sigma, pi);
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(pi.items.size());
    for (const auto& item : pi.items) pairs.emplace_back(pi.rank_of.at(item), sigma.rank_of.at(item));
    // Within a pi-tie, ascending sigma leaves no strict inversion to count.
    std::sort(pairs.begin(), pairs.end());
    std::vector<int> seq(pairs.size()), scratch(pairs.size());
    std::transform(pairs.begin(), pairs.end(), seq.begin(), [](const auto& p) { return p.second; });
    return merge_count(seq, scratch, 0, seq.size());
}

Ranking scores_to_ranking(const ScoreList& scores, bool higher_is_better) {
    if (scores.empty()) throw Error(ErrorCode::InvalidArgument, "no scores to rank");
    for (const auto& [item, score] : scores) {
        if (!std::isfinite(score)) throw Error(ErrorCode::NonFiniteScore, "score of '" + item + "'");
    }
    ScoreList sorted = scores;
    std::stable_sort(sorted.begin(), sorted.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second) return higher_is_better ? a.second > b.second : a.second < b.second;
        return a.first < b.first;
    });
    Ranking r;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const bool tie_with_prev = i > 0 && sorted[i].second == sorted[i - 1].second;
        const int rank = tie_with_prev ? r.rank_of.at(sorted[i - 1].first) : static_cast<int>(i + 1);
        r.items.push_back(sorted[i].first);
        r.rank_of[sorted[i].first] = rank;
    }
    r.validate();
    return r;
}

const CategoryWinner* SelectionResult::winner(MetricCategory category) const {
    for (const auto& w : winners) {
        if (w.category == category) return &w;
    }
    return nullptr;
}

std::map<MetricCategory, std::uint64_t> SelectionResult::weighted_category_inversions() const {
    std::map<MetricCategory, std::uint64_t> out;
    for (const auto& w : winners) {
        if (!w.excluded) out[w.category] = w.inversions;
    }
    return out;
}

SelectionResult select_by_inversions(const std::map<MetricId, std::uint64_t>& inversions) {
    SelectionResult result;
    result.inversions = inversions;
    for (auto category : kAllCategories) {
        std::optional<CategoryWinner> best;
        // std::map iterates in MetricId order, which is the tie-break order.
        for (const auto& [metric, count] : inversions) {
            if (category_of(metric) != category) continue;
            if (!best || count < best->inversions) {
                best = CategoryWinner{category, metric, count, false, excluded_from_weighting(category)};
            } else if (count == best->inversions) {
                best->tied = true;
            }
        }
        if (!best) {
            if (!excluded_from_weighting(category)) {
                throw Error(ErrorCode::EmptyCategory, "no metric in category " + std::string(to_string(category)));
            }
            continue;
        }
        result.winners.push_back(*best);
    }
    return result;
}

SelectionResult run_selection_study(const RankingStudy& study) {
    study.ground_truth.validate();
    std::map<MetricId, std::uint64_t> counts;
    std::map<MetricId, Ranking> rankings;
    for (const auto& [metric, scores] : study.per_metric_scores) {
        auto sigma = scores_to_ranking(scores);
        counts[metric] = inversion_loss(sigma, study.ground_truth);
        rankings.emplace(metric, std::move(sigma));
    }
    auto result = select_by_inversions(counts);
    result.metric_rankings = std::move(rankings);
    return result;
}

Ranking ranking_from_json(const std::string& json_text) {
    try {
        const auto j = json::parse(json_text);
        return make_ranking(j.at("items").get<std::vector<std::string>>(),
                            j.at("ranks").get<std::map<std::string, int>>());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("ranking file: ") + e.what());
    }
}

std::string ranking_to_json(const Ranking& ranking) {
    return json{{"items", ranking.items}, {"ranks", ranking.rank_of}}.dump(2) + "\n";
}

}  // namespace dilemma
