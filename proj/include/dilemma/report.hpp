#pragma once

#include "dilemma/scoring.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dilemma {

inline constexpr std::string_view kQuantileConvention = "linear interpolation at p*(n-1)";

struct SummaryStats {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double mean = 0.0;
    std::size_t n = 0;
};

/// Quantile by linear interpolation at p·(n−1) on the sorted values.
double quantile(std::vector<double> values, double p);
/// Throws InvalidArgument on empty input.
SummaryStats summarize(const std::vector<double>& values);

/// Columns: Intro, Factors, Historical, Resolution, Takeaways, Final.
struct CategoryTableRow {
    std::string model;
    std::array<std::optional<double>, 6> cells;
};

/// Mean per section and of finals, one row per LLM report in input order.
std::vector<CategoryTableRow> table_by_category(const std::vector<ScoreReport>& reports);
std::string table_to_csv(const std::vector<CategoryTableRow>& rows);
std::vector<CategoryTableRow> table_from_csv(const std::string& csv);

/// (author label, metric) -> stats over every case-section value.
using MetricDistributions = std::map<std::string, std::map<MetricId, SummaryStats>>;

MetricDistributions metric_distributions(const std::vector<ScoreReport>& reports);
std::string distributions_to_json(const MetricDistributions& d, const std::string& manifest_hash);
MetricDistributions distributions_from_json(const std::string& json_text);

struct CohortRow {
    std::string author;
    AuthorKind kind = AuthorKind::Llm;
    /// Means of the KeyFactors section only.
    std::map<MetricId, double> key_factor_metrics;
    double key_factor_weighted = 0.0;
    std::size_t cases = 0;
};

/// Human participants first, then models. Throws MissingCohort if either group is absent.
std::vector<CohortRow> human_vs_llm_table(const std::vector<ScoreReport>& reports);
std::string cohort_to_csv(const std::vector<CohortRow>& rows, const std::array<MetricId, 4>& metrics);

/// Label used for a report in emitted tables ("gpt-4o-mini", "human:p1").
std::string report_label(const Author& author);

}  // namespace dilemma
