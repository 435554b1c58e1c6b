#include "dilemma/metrics.hpp"

#include "dilemma/error.hpp"
#include "dilemma/util.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <vector>

namespace dilemma {

namespace {

double clamp01(double v) {
    if (std::isnan(v)) return 0.0;
    return std::clamp(v, 0.0, 1.0);
}

}  // namespace

MetricCategory category_of(MetricId id) {
    switch (id) {
        case MetricId::DlLexical:
        case MetricId::ExactMatch:
        case MetricId::Gestalt:
            return MetricCategory::Lexical;
        case MetricId::BleuNgram:
        case MetricId::RougeN:
            return MetricCategory::Ngram;
        case MetricId::Jaccard:
        case MetricId::OverlapCoeff:
            return MetricCategory::SetBased;
        case MetricId::TfidfCosine:
        case MetricId::WordfreqCosine:
            return MetricCategory::Cosine;
        case MetricId::EmbedSemantic:
            return MetricCategory::Semantic;
    }
    throw Error(ErrorCode::UnknownMetric, "unmapped metric id");
}

bool excluded_from_weighting(MetricCategory category) { return category == MetricCategory::SetBased; }

std::string_view to_string(MetricId id) {
    switch (id) {
        case MetricId::DlLexical: return "dl_lexical";
        case MetricId::BleuNgram: return "bleu_ngram";
        case MetricId::TfidfCosine: return "tfidf_cosine";
        case MetricId::EmbedSemantic: return "embed_semantic";
        case MetricId::ExactMatch: return "exact_match";
        case MetricId::Gestalt: return "gestalt";
        case MetricId::RougeN: return "rouge_n";
        case MetricId::Jaccard: return "jaccard";
        case MetricId::OverlapCoeff: return "overlap_coeff";
        case MetricId::WordfreqCosine: return "wordfreq_cosine";
    }
    return "";
}

std::string_view to_string(MetricCategory category) {
    switch (category) {
        case MetricCategory::Lexical: return "lexical";
        case MetricCategory::Ngram: return "ngram";
        case MetricCategory::SetBased: return "setbased";
        case MetricCategory::Cosine: return "cosine";
        case MetricCategory::Semantic: return "semantic";
    }
    return "";
}

MetricId metric_from_string(std::string_view name) {
    for (auto id : kAllMetrics) {
        if (to_string(id) == name) return id;
    }
    throw Error(ErrorCode::UnknownMetric, std::string(name));
}

MetricCategory category_from_string(std::string_view name) {
    for (auto c : kAllCategories) {
        if (to_string(c) == name) return c;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown metric category '" + std::string(name) + "'");
}

std::size_t dl_distance(std::u32string_view a, std::u32string_view b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    if (n == 0) return m;
    if (m == 0) return n;
    // Three rolling rows: i-2, i-1, i.
    std::vector<std::size_t> prev2(m + 1), prev(m + 1), cur(m + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
            std::size_t best = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
            if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
                best = std::min(best, prev2[j - 2] + 1);
            }
            cur[j] = best;
        }
        std::swap(prev2, prev);
        std::swap(prev, cur);
    }
    return prev[m];
}

std::size_t dl_distance(std::string_view a_utf8, std::string_view b_utf8) {
    return dl_distance(utf8_decode(a_utf8), utf8_decode(b_utf8));
}

double dl_similarity(std::string_view a_utf8, std::string_view b_utf8) {
    const auto a = utf8_decode(a_utf8);
    const auto b = utf8_decode(b_utf8);
    const auto longest = std::max(a.size(), b.size());
    if (longest == 0) return 1.0;
    return clamp01(1.0 - static_cast<double>(dl_distance(a, b)) / static_cast<double>(longest));
}

double bleu(const TokenStream& candidate, const TokenStream& reference, const BleuParams& params) {
    if (params.max_n < 1) throw Error(ErrorCode::InvalidN, "bleu max_n must be >= 1");
    if (candidate.empty()) return 0.0;

    double log_sum = 0.0;
    for (std::size_t n = 1; n <= params.max_n; ++n) {
        const auto cand = ngrams(candidate, n);
        const auto ref = ngrams(reference, n);
        std::size_t clipped = 0;
        for (const auto& [gram, count] : cand.counts) clipped += std::min(count, ref.count(gram));
        const auto total = cand.total();
        double precision = total == 0 ? 0.0 : static_cast<double>(clipped) / static_cast<double>(total);
        if (clipped == 0) precision = params.epsilon;
        log_sum += std::log(precision);
    }
    const double c = static_cast<double>(candidate.size());
    const double r = static_cast<double>(reference.size());
    const double bp = std::min(1.0, std::exp(1.0 - r / c));
    return clamp01(bp * std::exp(log_sum / static_cast<double>(params.max_n)));
}

double rouge_n(const TokenStream& candidate, const TokenStream& reference, std::size_t n) {
    const auto cand = ngrams(candidate, n);
    const auto ref = ngrams(reference, n);
    const auto ref_total = ref.total();
    if (ref_total == 0) return cand.total() == 0 ? 1.0 : 0.0;
    std::size_t overlap = 0;
    for (const auto& [gram, count] : ref.counts) overlap += std::min(count, cand.count(gram));
    return clamp01(static_cast<double>(overlap) / static_cast<double>(ref_total));
}

IdfTable::IdfTable(std::size_t documents, std::unordered_map<std::string, std::size_t> df)
    : documents_(documents), df_(std::move(df)) {}

std::size_t IdfTable::document_frequency(const std::string& term) const {
    auto it = df_.find(term);
    return it == df_.end() ? 0 : it->second;
}

double IdfTable::idf(const std::string& term) const {
    const auto n = static_cast<double>(documents_);
    const auto df = static_cast<double>(document_frequency(term));
    return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

IdfTable build_idf(const std::vector<TokenStream>& documents) {
    if (documents.empty()) throw Error(ErrorCode::EmptyCollection, "idf needs at least one document");
    std::unordered_map<std::string, std::size_t> df;
    for (const auto& doc : documents) {
        std::set<std::string> seen(doc.begin(), doc.end());
        for (const auto& term : seen) ++df[term];
    }
    return IdfTable(documents.size(), std::move(df));
}

namespace {

std::map<std::string, double> term_counts(const TokenStream& tokens) {
    std::map<std::string, double> tf;
    for (const auto& t : tokens) tf[t] += 1.0;
    return tf;
}

double sparse_cosine(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [term, v] : a) {
        na += v * v;
        if (auto it = b.find(term); it != b.end()) dot += v * it->second;
    }
    for (const auto& [term, v] : b) nb += v * v;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return clamp01(dot / std::sqrt(na * nb));
}

}  // namespace

double tfidf_cosine(const TokenStream& candidate, const TokenStream& reference, const IdfTable& idf) {
    auto a = term_counts(candidate);
    auto b = term_counts(reference);
    for (auto& [term, v] : a) v *= idf.idf(term);
    for (auto& [term, v] : b) v *= idf.idf(term);
    return sparse_cosine(a, b);
}

double wordfreq_cosine(const TokenStream& candidate, const TokenStream& reference) {
    return sparse_cosine(term_counts(candidate), term_counts(reference));
}

double jaccard(const TokenStream& a, const TokenStream& b) {
    const std::set<std::string> sa(a.begin(), a.end());
    const std::set<std::string> sb(b.begin(), b.end());
    if (sa.empty() && sb.empty()) return 1.0;
    std::vector<std::string> inter;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
    const auto uni = sa.size() + sb.size() - inter.size();
    return static_cast<double>(inter.size()) / static_cast<double>(uni);
}

double overlap_coefficient(const TokenStream& a, const TokenStream& b) {
    const std::set<std::string> sa(a.begin(), a.end());
    const std::set<std::string> sb(b.begin(), b.end());
    if (sa.empty() && sb.empty()) return 1.0;
    if (sa.empty() || sb.empty()) return 0.0;
    std::vector<std::string> inter;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
    return static_cast<double>(inter.size()) / static_cast<double>(std::min(sa.size(), sb.size()));
}

double exact_match(const TokenStream& a, const TokenStream& b) { return a == b ? 1.0 : 0.0; }

namespace {

struct Match {
    std::size_t a_pos = 0;
    std::size_t b_pos = 0;
    std::size_t size = 0;
};

// Leftmost-in-a, then leftmost-in-b longest common substring in the windows.
Match longest_match(std::u32string_view a, std::size_t alo, std::size_t ahi, std::u32string_view b,
                    std::size_t blo, std::size_t bhi) {
    Match best{alo, blo, 0};
    std::vector<std::size_t> prev(bhi - blo + 1, 0), cur(bhi - blo + 1, 0);
    for (std::size_t i = alo; i < ahi; ++i) {
        for (std::size_t j = blo; j < bhi; ++j) {
            const std::size_t k = j - blo + 1;
            cur[k] = a[i] == b[j] ? prev[k - 1] + 1 : 0;
            if (cur[k] > best.size) best = {i + 1 - cur[k], j + 1 - cur[k], cur[k]};
        }
        std::swap(prev, cur);
        std::fill(cur.begin(), cur.end(), 0);
    }
    return best;
}

std::size_t matching_characters(std::u32string_view a, std::u32string_view b) {
    std::size_t total = 0;
    std::vector<std::array<std::size_t, 4>> stack{{0, a.size(), 0, b.size()}};
    while (!stack.empty()) {
        const auto [alo, ahi, blo, bhi] = stack.back();
        stack.pop_back();
        if (alo >= ahi || blo >= bhi) continue;
        const auto m = longest_match(a, alo, ahi, b, blo, bhi);
        if (m.size == 0) continue;
        total += m.size;
        stack.push_back({alo, m.a_pos, blo, m.b_pos});
        stack.push_back({m.a_pos + m.size, ahi, m.b_pos + m.size, bhi});
    }
    return total;
}

}  // namespace

double gestalt_ratio_directional(std::u32string_view a, std::u32string_view b) {
    const auto len = a.size() + b.size();
    if (len == 0) return 1.0;
    return 2.0 * static_cast<double>(matching_characters(a, b)) / static_cast<double>(len);
}

double gestalt_similarity(std::string_view a_utf8, std::string_view b_utf8) {
    const auto a = utf8_decode(a_utf8);
    const auto b = utf8_decode(b_utf8);
    return clamp01(std::max(gestalt_ratio_directional(a, b), gestalt_ratio_directional(b, a)));
}

MetricScore candidate_metric(MetricId metric, std::string_view candidate, std::string_view reference) {
    switch (metric) {
        case MetricId::ExactMatch:
            return {metric, exact_match(tokenize(candidate), tokenize(reference))};
        case MetricId::Gestalt:
            return {metric, gestalt_similarity(candidate, reference)};
        case MetricId::RougeN:
            return {metric, rouge_n(tokenize(candidate), tokenize(reference))};
        case MetricId::Jaccard:
            return {metric, jaccard(tokenize(candidate), tokenize(reference))};
        case MetricId::OverlapCoeff:
            return {metric, overlap_coefficient(tokenize(candidate), tokenize(reference))};
        case MetricId::WordfreqCosine:
            return {metric, wordfreq_cosine(tokenize(candidate), tokenize(reference))};
        default:
            throw Error(ErrorCode::UnknownMetric,
                        std::string(to_string(metric)) + " is not in the candidate subset");
    }
}

}  // namespace dilemma
