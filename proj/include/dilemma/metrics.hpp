#pragma once

#include "dilemma/textprep.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

namespace dilemma {

/// Declaration order doubles as the tie-break order in metric selection.
enum class MetricId {
    DlLexical,
    BleuNgram,
    TfidfCosine,
    EmbedSemantic,
    ExactMatch,
    Gestalt,
    RougeN,
    Jaccard,
    OverlapCoeff,
    WordfreqCosine,
};

inline constexpr std::array<MetricId, 10> kAllMetrics = {
    MetricId::DlLexical,  MetricId::BleuNgram, MetricId::TfidfCosine,  MetricId::EmbedSemantic,
    MetricId::ExactMatch, MetricId::Gestalt,   MetricId::RougeN,       MetricId::Jaccard,
    MetricId::OverlapCoeff, MetricId::WordfreqCosine};

inline constexpr std::array<MetricId, 4> kSelectedMetrics = {
    MetricId::DlLexical, MetricId::BleuNgram, MetricId::TfidfCosine, MetricId::EmbedSemantic};

enum class MetricCategory { Lexical, Ngram, SetBased, Cosine, Semantic };

inline constexpr std::array<MetricCategory, 5> kAllCategories = {
    MetricCategory::Lexical, MetricCategory::Ngram, MetricCategory::SetBased, MetricCategory::Cosine,
    MetricCategory::Semantic};

/// Categories that receive a weight in the composite score.
inline constexpr std::array<MetricCategory, 4> kWeightedCategories = {
    MetricCategory::Lexical, MetricCategory::Ngram, MetricCategory::Cosine, MetricCategory::Semantic};

MetricCategory category_of(MetricId id);
bool excluded_from_weighting(MetricCategory category);

std::string_view to_string(MetricId id);
std::string_view to_string(MetricCategory category);
MetricId metric_from_string(std::string_view name);
MetricCategory category_from_string(std::string_view name);

struct MetricScore {
    MetricId metric;
    double value = 0.0;
};

// Lexical --------------------------------------------------------------------

/// Optimal string alignment distance over Unicode scalar values.
std::size_t dl_distance(std::u32string_view a, std::u32string_view b);
std::size_t dl_distance(std::string_view a_utf8, std::string_view b_utf8);

/// 1 - distance / max length; 1 when both are empty.
double dl_similarity(std::string_view a_utf8, std::string_view b_utf8);

// N-gram ---------------------------------------------------------------------

struct BleuParams {
    std::size_t max_n = 4;
    /// Floor applied to an n-gram precision with zero matches.
    double epsilon = 1e-9;
};

/// Single-reference sentence BLEU with brevity penalty min(1, e^{1-r/c}).
/// Empty candidate scores 0.
double bleu(const TokenStream& candidate, const TokenStream& reference, const BleuParams& params = {});

/// ROUGE-N recall of reference n-grams; 1 when the reference has no n-grams
/// and neither has the candidate, 0 when only the candidate has some.
double rouge_n(const TokenStream& candidate, const TokenStream& reference, std::size_t n = 1);

// Cosine ---------------------------------------------------------------------

class IdfTable {
public:
    IdfTable() = default;
    IdfTable(std::size_t documents, std::unordered_map<std::string, std::size_t> df);

    /// ln((1+N)/(1+df)) + 1; unseen terms use df = 0.
    double idf(const std::string& term) const;
    std::size_t documents() const { return documents_; }
    std::size_t document_frequency(const std::string& term) const;

private:
    std::size_t documents_ = 0;
    std::unordered_map<std::string, std::size_t> df_;
};

/// Throws EmptyCollection when `documents` is empty.
IdfTable build_idf(const std::vector<TokenStream>& documents);

/// Cosine between raw-count TF x IDF vectors; 0 when either side is empty.
double tfidf_cosine(const TokenStream& candidate, const TokenStream& reference, const IdfTable& idf);

/// Cosine between raw term-frequency vectors; 0 when either side is empty.
double wordfreq_cosine(const TokenStream& candidate, const TokenStream& reference);

// Set-based ------------------------------------------------------------------

/// |A∩B| / |A∪B| over token sets; 1 when both are empty.
double jaccard(const TokenStream& a, const TokenStream& b);
/// |A∩B| / min(|A|,|B|) over token sets; 1 when both are empty, 0 when one is.
double overlap_coefficient(const TokenStream& a, const TokenStream& b);

// Other lexical --------------------------------------------------------------

/// 1 if the token streams are equal, else 0.
double exact_match(const TokenStream& a, const TokenStream& b);

/// Ratcliff/Obershelp matching-character ratio 2M/(|a|+|b|) over Unicode
/// scalars. The recursive longest-match search breaks ties by position, which
/// makes the one-directional ratio order dependent; the larger of both
/// directions is returned so the metric is symmetric. 1 when both are empty.
double gestalt_similarity(std::string_view a_utf8, std::string_view b_utf8);
double gestalt_ratio_directional(std::u32string_view a, std::u32string_view b);

/// Dispatches one of the candidate-subset metrics on raw texts. Throws
/// UnknownMetric for the four selected metrics, which need run context.
MetricScore candidate_metric(MetricId metric, std::string_view candidate, std::string_view reference);

}  // namespace dilemma
