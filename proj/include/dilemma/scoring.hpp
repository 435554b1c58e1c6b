#pragma once

#include "dilemma/corpus.hpp"
#include "dilemma/embeddings.hpp"
#include "dilemma/metrics.hpp"
#include "dilemma/weighting.hpp"

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dilemma {

enum class EmptySectionPolicy {
    /// Compare against empty reference text as-is.
    ScoreAsEmpty,
    /// Drop references whose section is empty; drop a section no reference
    /// covers and renormalize the remaining section weights.
    SkipAndRenormalize,
};

std::string_view to_string(EmptySectionPolicy p);
EmptySectionPolicy empty_policy_from_string(std::string_view name);

struct ScoringConfig {
    CategoryWeights metric_weights = published_weights();
    /// Uniform by default. These are not the weights behind any published
    /// "Final" column; those were never stated.
    std::map<SectionKind, double> section_weights = {
        {SectionKind::Introduction, 0.2}, {SectionKind::KeyFactors, 0.2}, {SectionKind::Historical, 0.2},
        {SectionKind::Resolution, 0.2},   {SectionKind::Takeaways, 0.2}};
    EmptySectionPolicy empty_section_policy = EmptySectionPolicy::ScoreAsEmpty;
    std::array<MetricId, 4> selected_metrics = kSelectedMetrics;
    BleuParams bleu;
    std::size_t fallback_embedding_dim = 256;

    /// Throws InvalidArgument.
    void validate() const;
};

std::string config_to_json(const ScoringConfig& cfg);
/// Unknown top-level keys are ignored so one file can also carry provider settings.
ScoringConfig config_from_json(const std::string& json_text);

/// Everything a metric may need beyond the two texts.
struct MetricContext {
    const IdfTable* idf = nullptr;
    EmbeddingProvider* embedder = nullptr;
    BleuParams bleu;
};

/// Any metric on two raw texts, clamped to [0,1]. TF-IDF needs ctx.idf and
/// the semantic metric needs ctx.embedder (InvalidArgument otherwise).
double evaluate_metric(MetricId metric, const std::string& candidate, const std::string& reference,
                       const MetricContext& ctx);

struct SectionScore {
    SectionKind section = SectionKind::Introduction;
    /// Mean over the references used.
    std::map<MetricId, double> per_metric;
    /// Σ category weight · per_metric.
    double weighted = 0.0;
    /// Share of this section in the final score after any renormalization.
    double section_weight = 0.0;
    std::size_t references_used = 0;
};

struct ResponseScore {
    std::string case_id;
    std::vector<SectionScore> sections;
    double final_score = 0.0;

    const SectionScore* section(SectionKind kind) const;
};

/// Throws CaseMismatch, NoReferences.
ResponseScore score_response(const StructuredResponse& candidate, const ReferenceSet& refs, const ScoringConfig& cfg,
                             const MetricContext& ctx);

struct ReportAggregate {
    /// Mean weighted score per section over the cases that carry it.
    std::map<SectionKind, double> section_means;
    /// Mean per metric over every (case, section) value.
    std::map<MetricId, double> metric_means;
    double final_mean = 0.0;
    std::size_t cases = 0;
};

struct ScoreReport {
    Author author;
    std::vector<ResponseScore> cases;
    ReportAggregate aggregate;
    std::string manifest_hash;
};

ReportAggregate aggregate_scores(const std::vector<ResponseScore>& cases);

struct RunManifest {
    ScoringConfig config;
    std::string provider_id;
    std::string corpus_hash;
    std::vector<std::string> scored_cases;
    std::vector<std::pair<std::string, std::string>> missing;  // (author, case)
    std::map<std::string, std::string> conventions;

    /// SHA-256 of the manifest's canonical JSON (without the hash itself).
    std::string hash() const;
};

struct RunResult {
    RunManifest manifest;
    std::vector<ScoreReport> reports;
};

struct RunOptions {
    /// Worker threads; 0 picks hardware concurrency.
    std::size_t workers = 0;
};

/// Scores every author against every case that has references. Missing
/// (author, case) pairs are collected in the manifest rather than skipped
/// silently. The IDF table is built once over all non-empty section texts of
/// the run. Output is independent of worker count.
RunResult score_run(const Corpus& corpus, const std::vector<Author>& authors, const ScoringConfig& cfg,
                    EmbeddingProvider& embedder, const RunOptions& options = {});

std::string run_to_json(const RunResult& run);
RunResult run_from_json(const std::string& json_text);

/// Non-negative simplex section weights minimizing Σ (rows·w − finals)²,
/// by projected gradient descent. Diagnostic only.
struct SectionWeightFit {
    std::array<double, 5> weights{};
    double residual_norm = 0.0;
    std::size_t iterations = 0;
};
SectionWeightFit fit_section_weights(const std::vector<std::array<double, 5>>& section_scores,
                                     const std::vector<double>& finals);

/// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::vector<double> v);

}  // namespace dilemma
