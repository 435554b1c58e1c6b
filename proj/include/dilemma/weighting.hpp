#pragma once

#include "dilemma/metrics.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace dilemma {

enum class WeightProvenance { Softmax, Ahp, Combined, Published, Custom };

std::string_view to_string(WeightProvenance p);
WeightProvenance provenance_from_string(std::string_view name);

/// Positive weights over a subset of the weighted categories, summing to 1.
struct CategoryWeights {
    std::map<MetricCategory, double> weights;
    WeightProvenance provenance = WeightProvenance::Custom;

    double at(MetricCategory category) const;
    /// Throws InvalidArgument unless every weight is positive and finite, no
    /// excluded category appears, and the sum is 1 within `tolerance`.
    void validate(double tolerance = 1e-9) const;
};

/// The published final weights: lexical 0.0768, ngram 0.1547, cosine 0.2299,
/// semantic 0.5386.
CategoryWeights published_weights();

/// Min-max scale, flip (1 - x), softmax. All-equal input gives uniform weights.
std::vector<double> inverted_softmax_values(std::span<const double> inversions);

/// Throws TooFewCategories for fewer than two entries.
CategoryWeights inverted_softmax(const std::map<MetricCategory, double>& inversions);

/// Reciprocal pairwise-comparison matrix, row-major.
class JudgmentMatrix {
public:
    /// Throws NonPositiveEntry, NotReciprocal, InvalidArgument (shape, n < 2, n > 10,
    /// repeated or excluded categories).
    JudgmentMatrix(std::vector<MetricCategory> order, std::vector<std::vector<double>> rows);

    std::size_t size() const { return order_.size(); }
    const std::vector<MetricCategory>& order() const { return order_; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * size() + j]; }
    std::vector<std::vector<double>> rows() const;

    /// {"order": [...], "matrix": [[...]]}; entries may be numbers or "p/q" strings.
    static JudgmentMatrix from_json(const std::string& json_text);

private:
    std::vector<MetricCategory> order_;
    std::vector<double> a_;
};

struct ConsistencyReport {
    double lambda_max = 0.0;
    double ci = 0.0;
    double cr = 0.0;
    double ri_used = 0.0;
    bool consistent = true;
    std::size_t iterations = 0;
};

/// Saaty's random consistency index for n = 1..10.
double random_index(std::size_t n);

struct AhpOptions {
    double tolerance = 1e-10;
    std::size_t max_iterations = 10000;
    /// Emit weights even when CR >= 0.1.
    bool allow_inconsistent = false;
};

struct AhpResult {
    CategoryWeights weights;
    ConsistencyReport consistency;
};

struct PriorityVector {
    std::vector<double> weights;
    ConsistencyReport consistency;
};

/// The unlabeled core of ahp_weights: any reciprocal matrix of order 2..10.
PriorityVector ahp_priority_vector(const std::vector<std::vector<double>>& a, const AhpOptions& options = {});

/// Principal right eigenvector by power iteration, normalized to sum 1.
/// lambda_max is the Rayleigh quotient; CR = CI / RI for n >= 3, 0 below.
/// Throws NoConvergence, or Inconsistent when CR >= 0.1 without override.
AhpResult ahp_weights(const JudgmentMatrix& m, const AhpOptions& options = {});

enum class CombineMethod { ArithmeticMean, GeometricMeanRenormalized, ConvexBlend };

std::string_view to_string(CombineMethod m);
CombineMethod combine_method_from_string(std::string_view name);

/// Throws CategoryMismatch if the inputs cover different categories. `alpha`
/// is the softmax share for ConvexBlend.
CategoryWeights combine_weights(const CategoryWeights& softmax_w, const CategoryWeights& ahp_w, CombineMethod method,
                                double alpha = 0.5);

std::string weights_to_json(const CategoryWeights& w);
CategoryWeights weights_from_json(const std::string& json_text);

}  // namespace dilemma
