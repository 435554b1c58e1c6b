#include "dilemma/weighting.hpp"

#include "dilemma/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

using nlohmann::json;

namespace dilemma {

std::string_view to_string(WeightProvenance p) {
    switch (p) {
        case WeightProvenance::Softmax: return "softmax";
        case WeightProvenance::Ahp: return "ahp";
        case WeightProvenance::Combined: return "combined";
        case WeightProvenance::Published: return "published";
        case WeightProvenance::Custom: return "custom";
    }
    return "";
}

WeightProvenance provenance_from_string(std::string_view name) {
    for (auto p : {WeightProvenance::Softmax, WeightProvenance::Ahp, WeightProvenance::Combined,
                   WeightProvenance::Published, WeightProvenance::Custom}) {
        if (to_string(p) == name) return p;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown weight provenance '" + std::string(name) + "'");
}

double CategoryWeights::at(MetricCategory category) const {
    auto it = weights.find(category);
    if (it == weights.end()) {
        throw Error(ErrorCode::CategoryMismatch, "no weight for " + std::string(to_string(category)));
    }
    return it->second;
}

void CategoryWeights::validate(double tolerance) const {
    if (weights.empty()) throw Error(ErrorCode::InvalidArgument, "no category weights");
    double sum = 0.0;
    for (const auto& [category, w] : weights) {
        if (excluded_from_weighting(category)) {
            throw Error(ErrorCode::InvalidArgument, std::string(to_string(category)) + " is excluded from weighting");
        }
        if (!std::isfinite(w) || w <= 0.0) {
            throw Error(ErrorCode::InvalidArgument, "weight of " + std::string(to_string(category)) + " must be > 0");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > tolerance) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "weights sum to " << sum;
        throw Error(ErrorCode::InvalidArgument, msg.str());
    }
}

CategoryWeights published_weights() {
    return {{{MetricCategory::Lexical, 0.0768},
             {MetricCategory::Ngram, 0.1547},
             {MetricCategory::Cosine, 0.2299},
             {MetricCategory::Semantic, 0.5386}},
            WeightProvenance::Published};
}

std::vector<double> inverted_softmax_values(std::span<const double> s) {
    if (s.size() < 2) throw Error(ErrorCode::TooFewCategories, "need at least two inversion counts");
    for (double v : s) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "inversion counts must be finite");
    }
    const auto [lo_it, hi_it] = std::minmax_element(s.begin(), s.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<double> out(s.size());
    if (hi == lo) {
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(s.size()));
        return out;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        out[i] = std::exp(1.0 - (s[i] - lo) / (hi - lo));
        total += out[i];
    }
    for (double& v : out) v /= total;
    return out;
}

CategoryWeights inverted_softmax(const std::map<MetricCategory, double>& inversions) {
    if (inversions.size() < 2) throw Error(ErrorCode::TooFewCategories, "need at least two categories");
    std::vector<double> s;
    for (const auto& [category, count] : inversions) {
        if (excluded_from_weighting(category)) {
            throw Error(ErrorCode::InvalidArgument, std::string(to_string(category)) + " is excluded from weighting");
        }
        s.push_back(count);
    }
    const auto w = inverted_softmax_values(s);
    CategoryWeights out{{}, WeightProvenance::Softmax};
    std::size_t i = 0;
    for (const auto& [category, count] : inversions) out.weights[category] = w[i++];
    return out;
}

namespace {

void validate_reciprocal(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    if (n < 2 || n > 10) throw Error(ErrorCode::InvalidArgument, "judgment matrix order must be 2..10");
    for (const auto& row : rows) {
        if (row.size() != n) throw Error(ErrorCode::InvalidArgument, "matrix is not square");
        for (double v : row) {
            if (!std::isfinite(v) || v <= 0.0) throw Error(ErrorCode::NonPositiveEntry, std::to_string(v));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(rows[i][i] - 1.0) > 1e-9) {
            throw Error(ErrorCode::NotReciprocal, "diagonal entry " + std::to_string(i) + " is not 1");
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(rows[i][j] * rows[j][i] - 1.0) > 1e-6) {
                throw Error(ErrorCode::NotReciprocal,
                            "a[" + std::to_string(i) + "][" + std::to_string(j) + "] * a[" + std::to_string(j) + "][" +
                                std::to_string(i) + "] != 1");
            }
        }
    }
}

}  // namespace

JudgmentMatrix::JudgmentMatrix(std::vector<MetricCategory> order, std::vector<std::vector<double>> rows)
    : order_(std::move(order)) {
    const std::size_t n = order_.size();
    if (n < 2 || n > 10) throw Error(ErrorCode::InvalidArgument, "judgment matrix order must be 2..10");
    if (std::set<MetricCategory>(order_.begin(), order_.end()).size() != n) {
        throw Error(ErrorCode::InvalidArgument, "repeated category in judgment matrix order");
    }
    for (auto c : order_) {
        if (excluded_from_weighting(c)) {
            throw Error(ErrorCode::InvalidArgument, std::string(to_string(c)) + " is excluded from weighting");
        }
    }
    if (rows.size() != n) throw Error(ErrorCode::InvalidArgument, "matrix row count differs from order");
    validate_reciprocal(rows);
    a_.reserve(n * n);
    for (const auto& row : rows) a_.insert(a_.end(), row.begin(), row.end());
}

std::vector<std::vector<double>> JudgmentMatrix::rows() const {
    const std::size_t n = size();
    std::vector<std::vector<double>> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i].assign(a_.begin() + static_cast<std::ptrdiff_t>(i * n),
                                                      a_.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
    return out;
}

namespace {

double parse_entry(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        const auto slash = s.find('/');
        try {
            if (slash == std::string::npos) return std::stod(s);
            return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidArgument, "bad matrix entry '" + s + "'");
        }
    }
    throw Error(ErrorCode::InvalidArgument, "matrix entries must be numbers or \"p/q\" strings");
}

}  // namespace

JudgmentMatrix JudgmentMatrix::from_json(const std::string& json_text) {
    try {
        const auto j = json::parse(json_text);
        std::vector<MetricCategory> order;
        for (const auto& name : j.at("order")) order.push_back(category_from_string(name.get<std::string>()));
        std::vector<std::vector<double>> rows;
        for (const auto& row : j.at("matrix")) {
            auto& out = rows.emplace_back();
            for (const auto& v : row) out.push_back(parse_entry(v));
        }
        return JudgmentMatrix(std::move(order), std::move(rows));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("judgment matrix file: ") + e.what());
    }
}

double random_index(std::size_t n) {
    // Saaty (1980), random consistency index.
    static constexpr std::array<double, 11> kRandomIndex = {0.0,  0.0,  0.0,  0.58, 0.90, 1.12,
                                                            1.24, 1.32, 1.41, 1.45, 1.49};
    if (n >= kRandomIndex.size()) throw Error(ErrorCode::InvalidArgument, "no random index for n > 10");
    return kRandomIndex[n];
}

PriorityVector ahp_priority_vector(const std::vector<std::vector<double>>& a, const AhpOptions& options) {
    validate_reciprocal(a);
    const std::size_t n = a.size();
    std::vector<double> w(n, 1.0 / static_cast<double>(n)), next(n);
    bool converged = false;
    std::size_t iter = 0;
    while (iter < options.max_iterations) {
        ++iter;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += a[i][j] * w[j];
            next[i] = acc;
            total += acc;
        }
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] /= total;
            change = std::max(change, std::abs(next[i] - w[i]) / next[i]);
        }
        w.swap(next);
        if (change < options.tolerance) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw Error(ErrorCode::NoConvergence, "power iteration exceeded " + std::to_string(options.max_iterations));
    }

    double wAw = 0.0, ww = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += a[i][j] * w[j];
        wAw += w[i] * row;
        ww += w[i] * w[i];
    }

    ConsistencyReport report;
    report.lambda_max = wAw / ww;
    report.ci = (report.lambda_max - static_cast<double>(n)) / static_cast<double>(n - 1);
    report.ri_used = random_index(n);
    report.cr = n >= 3 ? report.ci / report.ri_used : 0.0;
    report.consistent = report.cr < 0.1;
    report.iterations = iter;
    if (!report.consistent && !options.allow_inconsistent) {
        throw Error(ErrorCode::Inconsistent, "CR = " + std::to_string(report.cr));
    }

    return {std::move(w), report};
}

AhpResult ahp_weights(const JudgmentMatrix& m, const AhpOptions& options) {
    auto pv = ahp_priority_vector(m.rows(), options);
    AhpResult result{{{}, WeightProvenance::Ahp}, pv.consistency};
    for (std::size_t i = 0; i < m.size(); ++i) result.weights.weights[m.order()[i]] = pv.weights[i];
    return result;
}

std::string_view to_string(CombineMethod m) {
    switch (m) {
        case CombineMethod::ArithmeticMean: return "arithmetic_mean";
        case CombineMethod::GeometricMeanRenormalized: return "geometric_mean_renormalized";
        case CombineMethod::ConvexBlend: return "convex_blend";
    }
    return "";
}

CombineMethod combine_method_from_string(std::string_view name) {
    for (auto m : {CombineMethod::ArithmeticMean, CombineMethod::GeometricMeanRenormalized, CombineMethod::ConvexBlend}) {
        if (to_string(m) == name) return m;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown combine method '" + std::string(name) + "'");
}

CategoryWeights combine_weights(const CategoryWeights& softmax_w, const CategoryWeights& ahp_w, CombineMethod method,
                                double alpha) {
    if (softmax_w.weights.size() != ahp_w.weights.size() ||
        !std::equal(softmax_w.weights.begin(), softmax_w.weights.end(), ahp_w.weights.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
        throw Error(ErrorCode::CategoryMismatch, "weight vectors cover different categories");
    }
    if (method == CombineMethod::ConvexBlend && !(alpha >= 0.0 && alpha <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "blend alpha must lie in [0, 1]");
    }
    CategoryWeights out{{}, WeightProvenance::Combined};
    double total = 0.0;
    for (const auto& [category, a] : softmax_w.weights) {
        const double b = ahp_w.weights.at(category);
        double v = 0.0;
        switch (method) {
            case CombineMethod::ArithmeticMean: v = 0.5 * (a + b); break;
            case CombineMethod::GeometricMeanRenormalized: v = std::sqrt(a * b); break;
            case CombineMethod::ConvexBlend: v = alpha * a + (1.0 - alpha) * b; break;
        }
        out.weights[category] = v;
        total += v;
    }
    for (auto& [category, v] : out.weights) v /= total;
    return out;
}

std::string weights_to_json(const CategoryWeights& w) {
    json weights = json::object();
    for (const auto& [category, v] : w.weights) weights[std::string(to_string(category))] = v;
    return json{{"provenance", to_string(w.provenance)}, {"weights", weights}}.dump(2) + "\n";
}

CategoryWeights weights_from_json(const std::string& json_text) {
    try {
        const auto j = json::parse(json_text);
        CategoryWeights w;
        w.provenance = provenance_from_string(j.value("provenance", "custom"));
        for (const auto& [name, v] : j.at("weights").items()) w.weights[category_from_string(name)] = v.get<double>();
        w.validate(1e-6);
        return w;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("weights file: ") + e.what());
    }
}

}  // namespace dilemma
