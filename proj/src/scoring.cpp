#include "dilemma/scoring.hpp"

#include "dilemma/error.hpp"
#include "dilemma/textprep.hpp"
#include "dilemma/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace dilemma {

std::string_view to_string(EmptySectionPolicy p) {
    return p == EmptySectionPolicy::ScoreAsEmpty ? "score_as_empty" : "skip_and_renormalize";
}

EmptySectionPolicy empty_policy_from_string(std::string_view name) {
    if (name == "score_as_empty") return EmptySectionPolicy::ScoreAsEmpty;
    if (name == "skip_and_renormalize") return EmptySectionPolicy::SkipAndRenormalize;
    throw Error(ErrorCode::InvalidArgument, "unknown empty_section_policy '" + std::string(name) + "'");
}

void ScoringConfig::validate() const {
    metric_weights.validate(1e-6);
    std::set<MetricCategory> selected_categories;
    for (auto m : selected_metrics) {
        const auto c = category_of(m);
        if (excluded_from_weighting(c)) {
            throw Error(ErrorCode::InvalidArgument, std::string(to_string(m)) + " is in an excluded category");
        }
        if (!selected_categories.insert(c).second) {
            throw Error(ErrorCode::InvalidArgument, "two selected metrics share category " + std::string(to_string(c)));
        }
        if (!metric_weights.weights.contains(c)) {
            throw Error(ErrorCode::InvalidArgument, "no weight for category " + std::string(to_string(c)));
        }
    }
    if (metric_weights.weights.size() != selected_categories.size()) {
        throw Error(ErrorCode::InvalidArgument, "metric weights name a category with no selected metric");
    }
    double sum = 0.0;
    for (auto kind : kAllSections) {
        auto it = section_weights.find(kind);
        if (it == section_weights.end()) {
            throw Error(ErrorCode::InvalidArgument, "missing section weight for " + std::string(section_key(kind)));
        }
        if (!std::isfinite(it->second) || it->second < 0.0) {
            throw Error(ErrorCode::InvalidArgument, "section weights must be non-negative");
        }
        sum += it->second;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "section weights must sum to 1");
    if (bleu.max_n < 1) throw Error(ErrorCode::InvalidN, "bleu max_n must be >= 1");
    if (!(bleu.epsilon > 0.0 && bleu.epsilon < 1.0)) throw Error(ErrorCode::InvalidArgument, "bleu epsilon must be in (0,1)");
    if (fallback_embedding_dim < 8) throw Error(ErrorCode::InvalidArgument, "fallback embedding dim must be >= 8");
}

namespace {

ordered_json config_json(const ScoringConfig& cfg) {
    ordered_json weights = ordered_json::object();
    for (const auto& [c, w] : cfg.metric_weights.weights) weights[std::string(to_string(c))] = w;
    ordered_json sections = ordered_json::object();
    for (auto kind : kAllSections) sections[std::string(section_key(kind))] = cfg.section_weights.at(kind);
    ordered_json metrics = ordered_json::array();
    for (auto m : cfg.selected_metrics) metrics.push_back(to_string(m));
    return ordered_json{
        {"metric_weights", {{"provenance", to_string(cfg.metric_weights.provenance)}, {"weights", weights}}},
        {"section_weights", sections},
        {"empty_section_policy", to_string(cfg.empty_section_policy)},
        {"selected_metrics", metrics},
        {"bleu", {{"max_n", cfg.bleu.max_n}, {"epsilon", cfg.bleu.epsilon}}},
        {"embedding", {{"fallback_dim", cfg.fallback_embedding_dim}}},
    };
}

ScoringConfig config_from(const json& j) {
    ScoringConfig cfg;
    if (j.contains("metric_weights")) {
        const auto& mw = j.at("metric_weights");
        cfg.metric_weights.weights.clear();
        cfg.metric_weights.provenance = provenance_from_string(mw.value("provenance", "custom"));
        for (const auto& [name, v] : mw.at("weights").items()) {
            cfg.metric_weights.weights[category_from_string(name)] = v.get<double>();
        }
    }
    if (j.contains("section_weights")) {
        cfg.section_weights.clear();
        for (const auto& [name, v] : j.at("section_weights").items()) {
            cfg.section_weights[section_from_key(name)] = v.get<double>();
        }
    }
    if (j.contains("empty_section_policy")) {
        cfg.empty_section_policy = empty_policy_from_string(j.at("empty_section_policy").get<std::string>());
    }
    if (j.contains("selected_metrics")) {
        const auto names = j.at("selected_metrics").get<std::vector<std::string>>();
        if (names.size() != cfg.selected_metrics.size()) {
            throw Error(ErrorCode::InvalidArgument, "selected_metrics must name four metrics");
        }
        for (std::size_t i = 0; i < names.size(); ++i) cfg.selected_metrics[i] = metric_from_string(names[i]);
    }
    if (j.contains("bleu")) {
        cfg.bleu.max_n = j.at("bleu").value("max_n", cfg.bleu.max_n);
        cfg.bleu.epsilon = j.at("bleu").value("epsilon", cfg.bleu.epsilon);
    }
    if (j.contains("embedding")) {
        cfg.fallback_embedding_dim = j.at("embedding").value("fallback_dim", cfg.fallback_embedding_dim);
    }
    cfg.validate();
    return cfg;
}

}  // namespace

std::string config_to_json(const ScoringConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

ScoringConfig config_from_json(const std::string& json_text) {
    try {
        return config_from(json::parse(json_text));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
    }
}

double evaluate_metric(MetricId metric, const std::string& candidate, const std::string& reference,
                       const MetricContext& ctx) {
    switch (metric) {
        case MetricId::DlLexical:
            return dl_similarity(candidate, reference);
        case MetricId::BleuNgram:
            return bleu(tokenize(candidate), tokenize(reference), ctx.bleu);
        case MetricId::TfidfCosine:
            if (ctx.idf == nullptr) throw Error(ErrorCode::InvalidArgument, "tfidf_cosine needs an IDF table");
            return tfidf_cosine(tokenize(candidate), tokenize(reference), *ctx.idf);
        case MetricId::EmbedSemantic:
            if (ctx.embedder == nullptr) throw Error(ErrorCode::InvalidArgument, "embed_semantic needs a provider");
            return embed_semantic_similarity(candidate, reference, *ctx.embedder);
        default:
            return candidate_metric(metric, candidate, reference).value;
    }
}

const SectionScore* ResponseScore::section(SectionKind kind) const {
    for (const auto& s : sections) {
        if (s.section == kind) return &s;
    }
    return nullptr;
}

ResponseScore score_response(const StructuredResponse& candidate, const ReferenceSet& refs, const ScoringConfig& cfg,
                             const MetricContext& ctx) {
    if (candidate.case_id != refs.case_id) {
        throw Error(ErrorCode::CaseMismatch, "candidate for '" + candidate.case_id + "' vs references for '" +
                                                 refs.case_id + "'");
    }
    if (refs.references.empty()) throw Error(ErrorCode::NoReferences, refs.case_id);
    for (const auto& r : refs.references) {
        if (r.case_id != refs.case_id) throw Error(ErrorCode::CaseMismatch, "reference set mixes cases");
    }
    validate_sections(candidate);

    const bool human = candidate.author.kind == AuthorKind::Human;
    ResponseScore out{candidate.case_id, {}, 0.0};
    for (auto kind : kAllSections) {
        if (human && kind != SectionKind::KeyFactors) continue;
        std::vector<const std::string*> texts;
        for (const auto& r : refs.references) {
            const auto& t = section_text(r.sections, kind);
            if (cfg.empty_section_policy == EmptySectionPolicy::SkipAndRenormalize && trim(t).empty()) continue;
            texts.push_back(&t);
        }
        if (texts.empty()) continue;

        const auto& cand_text = section_text(candidate.sections, kind);
        SectionScore score;
        score.section = kind;
        score.references_used = texts.size();
        for (auto m : cfg.selected_metrics) {
            double sum = 0.0;
            for (const auto* t : texts) sum += evaluate_metric(m, cand_text, *t, ctx);
            const double mean = sum / static_cast<double>(texts.size());
            score.per_metric[m] = mean;
            score.weighted += cfg.metric_weights.at(category_of(m)) * mean;
        }
        score.weighted = std::clamp(score.weighted, 0.0, 1.0);
        score.section_weight = human ? 1.0 : cfg.section_weights.at(kind);
        out.sections.push_back(std::move(score));
    }

    double weight_total = 0.0;
    for (const auto& s : out.sections) weight_total += s.section_weight;
    for (auto& s : out.sections) {
        s.section_weight = weight_total > 0.0 ? s.section_weight / weight_total : 0.0;
        out.final_score += s.section_weight * s.weighted;
    }
    out.final_score = std::clamp(out.final_score, 0.0, 1.0);
    return out;
}

ReportAggregate aggregate_scores(const std::vector<ResponseScore>& cases) {
    ReportAggregate agg;
    agg.cases = cases.size();
    std::map<SectionKind, std::pair<double, std::size_t>> sections;
    std::map<MetricId, std::pair<double, std::size_t>> metrics;
    double final_sum = 0.0;
    for (const auto& c : cases) {
        final_sum += c.final_score;
        for (const auto& s : c.sections) {
            auto& [ssum, sn] = sections[s.section];
            ssum += s.weighted;
            ++sn;
            for (const auto& [m, v] : s.per_metric) {
                auto& [msum, mn] = metrics[m];
                msum += v;
                ++mn;
            }
        }
    }
    for (const auto& [k, p] : sections) agg.section_means[k] = p.first / static_cast<double>(p.second);
    for (const auto& [m, p] : metrics) agg.metric_means[m] = p.first / static_cast<double>(p.second);
    agg.final_mean = cases.empty() ? 0.0 : final_sum / static_cast<double>(cases.size());
    return agg;
}

namespace {

ordered_json manifest_json(const RunManifest& m, bool with_hash) {
    ordered_json missing = ordered_json::array();
    for (const auto& [author, c] : m.missing) missing.push_back({{"author", author}, {"case_id", c}});
    ordered_json conventions = ordered_json::object();
    for (const auto& [k, v] : m.conventions) conventions[k] = v;
    ordered_json j{
        {"config", config_json(m.config)},
        {"provider_id", m.provider_id},
        {"corpus_hash", m.corpus_hash},
        {"scored_cases", m.scored_cases},
        {"missing", missing},
        {"conventions", conventions},
    };
    if (with_hash) j["hash"] = m.hash();
    return j;
}

std::string author_label(const Author& a) { return std::string(to_string(a.kind)) + ":" + a.name; }

std::map<std::string, std::string> default_conventions(const ScoringConfig& cfg) {
    return {
        {"tokenizer", std::string(kTokenizerConvention)},
        {"dl_variant", "optimal_string_alignment"},
        {"dl_normalization", "1 - d / max(len_a, len_b) over unicode scalars"},
        {"bleu", "single reference, max_n=" + std::to_string(cfg.bleu.max_n) +
                     ", uniform weights, zero-match precision floored at epsilon"},
        {"idf", "ln((1+N)/(1+df)) + 1 over all non-empty section texts in the run"},
        {"tf", "raw counts"},
        {"semantic_clamp", "negative cosine clamps to 0"},
        {"reference_averaging", "arithmetic mean over reference sets"},
        {"empty_section_policy", std::string(to_string(cfg.empty_section_policy))},
    };
}

}  // namespace

std::string RunManifest::hash() const { return sha256_hex(manifest_json(*this, false).dump()); }

RunResult score_run(const Corpus& corpus, const std::vector<Author>& authors, const ScoringConfig& cfg,
                    EmbeddingProvider& embedder, const RunOptions& options) {
    cfg.validate();
    RunResult run;
    run.manifest.config = cfg;
    run.manifest.provider_id = embedder.id();
    run.manifest.corpus_hash = corpus.content_hash;
    run.manifest.conventions = default_conventions(cfg);
    for (const auto& [case_id, refs] : corpus.references) run.manifest.scored_cases.push_back(case_id);

    struct Task {
        std::size_t report;
        const StructuredResponse* response;
        const ReferenceSet* refs;
    };
    std::vector<Task> tasks;
    std::vector<TokenStream> documents;
    const auto add_documents = [&](const StructuredResponse& r) {
        for (const auto& [kind, text] : r.sections) {
            if (!trim(text).empty()) documents.push_back(tokenize(text));
        }
    };
    for (const auto& [case_id, refs] : corpus.references) {
        for (const auto& r : refs.references) add_documents(r);
    }

    for (std::size_t a = 0; a < authors.size(); ++a) {
        run.reports.push_back(ScoreReport{authors[a], {}, {}, {}});
        for (const auto& [case_id, refs] : corpus.references) {
            const auto* response = corpus.find_response(authors[a], case_id);
            if (!response) {
                run.manifest.missing.emplace_back(author_label(authors[a]), case_id);
                continue;
            }
            add_documents(*response);
            tasks.push_back({a, response, &refs});
        }
    }

    const IdfTable idf = documents.empty() ? IdfTable() : build_idf(documents);
    const MetricContext ctx{&idf, &embedder, cfg.bleu};

    std::vector<ResponseScore> results(tasks.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                results[i] = score_response(*tasks[i].response, *tasks[i].refs, cfg, ctx);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = tasks.size();
            }
        }
    };
    std::size_t workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(1, tasks.size()));
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t i = 0; i < tasks.size(); ++i) run.reports[tasks[i].report].cases.push_back(std::move(results[i]));
    const auto manifest_hash = run.manifest.hash();
    for (auto& report : run.reports) {
        report.aggregate = aggregate_scores(report.cases);
        report.manifest_hash = manifest_hash;
    }
    return run;
}

namespace {

ordered_json section_json(const SectionScore& s) {
    ordered_json per_metric = ordered_json::object();
    for (const auto& [m, v] : s.per_metric) per_metric[std::string(to_string(m))] = v;
    return {{"section", section_key(s.section)},
            {"weighted", s.weighted},
            {"section_weight", s.section_weight},
            {"references_used", s.references_used},
            {"per_metric", per_metric}};
}

ordered_json report_json(const ScoreReport& r) {
    ordered_json cases = ordered_json::array();
    for (const auto& c : r.cases) {
        ordered_json sections = ordered_json::array();
        for (const auto& s : c.sections) sections.push_back(section_json(s));
        cases.push_back({{"case_id", c.case_id}, {"final", c.final_score}, {"sections", sections}});
    }
    ordered_json section_means = ordered_json::object();
    for (const auto& [k, v] : r.aggregate.section_means) section_means[std::string(section_key(k))] = v;
    ordered_json metric_means = ordered_json::object();
    for (const auto& [m, v] : r.aggregate.metric_means) metric_means[std::string(to_string(m))] = v;
    return {{"author", {{"kind", to_string(r.author.kind)}, {"name", r.author.name}}},
            {"manifest_hash", r.manifest_hash},
            {"cases", cases},
            {"aggregate",
             {{"cases", r.aggregate.cases},
              {"final", r.aggregate.final_mean},
              {"sections", section_means},
              {"metrics", metric_means}}}};
}

AuthorKind author_kind_from_string(const std::string& s) {
    for (auto k : {AuthorKind::ExpertRef, AuthorKind::Llm, AuthorKind::Human}) {
        if (to_string(k) == s) return k;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown author kind '" + s + "'");
}

}  // namespace

std::string run_to_json(const RunResult& run) {
    ordered_json reports = ordered_json::array();
    for (const auto& r : run.reports) reports.push_back(report_json(r));
    return ordered_json{{"manifest", manifest_json(run.manifest, true)}, {"reports", reports}}.dump(2) + "\n";
}

RunResult run_from_json(const std::string& json_text) {
    try {
        const auto j = json::parse(json_text);
        RunResult run;
        const auto& m = j.at("manifest");
        run.manifest.config = config_from(m.at("config"));
        run.manifest.provider_id = m.at("provider_id").get<std::string>();
        run.manifest.corpus_hash = m.at("corpus_hash").get<std::string>();
        run.manifest.scored_cases = m.at("scored_cases").get<std::vector<std::string>>();
        for (const auto& entry : m.at("missing")) {
            run.manifest.missing.emplace_back(entry.at("author").get<std::string>(), entry.at("case_id").get<std::string>());
        }
        run.manifest.conventions = m.at("conventions").get<std::map<std::string, std::string>>();

        for (const auto& rj : j.at("reports")) {
            ScoreReport r;
            r.author = {author_kind_from_string(rj.at("author").at("kind").get<std::string>()),
                        rj.at("author").at("name").get<std::string>()};
            r.manifest_hash = rj.at("manifest_hash").get<std::string>();
            for (const auto& cj : rj.at("cases")) {
                ResponseScore c;
                c.case_id = cj.at("case_id").get<std::string>();
                c.final_score = cj.at("final").get<double>();
                for (const auto& sj : cj.at("sections")) {
                    SectionScore s;
                    s.section = section_from_key(sj.at("section").get<std::string>());
                    s.weighted = sj.at("weighted").get<double>();
                    s.section_weight = sj.at("section_weight").get<double>();
                    s.references_used = sj.at("references_used").get<std::size_t>();
                    for (const auto& [name, v] : sj.at("per_metric").items()) {
                        s.per_metric[metric_from_string(name)] = v.get<double>();
                    }
                    c.sections.push_back(std::move(s));
                }
                r.cases.push_back(std::move(c));
            }
            r.aggregate = aggregate_scores(r.cases);
            run.reports.push_back(std::move(r));
        }
        return run;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, std::string("score report: ") + e.what());
    }
}

std::vector<double> project_to_simplex(std::vector<double> v) {
    if (v.empty()) return v;
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        cumulative += sorted[i];
        const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (sorted[i] - t > 0.0) theta = t;
    }
    for (double& x : v) x = std::max(0.0, x - theta);
    return v;
}

SectionWeightFit fit_section_weights(const std::vector<std::array<double, 5>>& rows, const std::vector<double>& finals) {
    if (rows.empty() || rows.size() != finals.size()) {
        throw Error(ErrorCode::InvalidArgument, "calibration needs one final per row");
    }
    // Step 1/L with L the largest eigenvalue bound of 2·XᵀX (Frobenius norm).
    double frob = 0.0;
    for (const auto& r : rows) {
        for (double x : r) frob += x * x;
    }
    const double step = frob > 0.0 ? 1.0 / (2.0 * frob) : 1.0;

    std::vector<double> w(5, 0.2);
    SectionWeightFit fit;
    for (fit.iterations = 1; fit.iterations <= 200000; ++fit.iterations) {
        std::vector<double> grad(5, 0.0);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            double pred = 0.0;
            for (std::size_t k = 0; k < 5; ++k) pred += rows[i][k] * w[k];
            const double r = pred - finals[i];
            for (std::size_t k = 0; k < 5; ++k) grad[k] += 2.0 * r * rows[i][k];
        }
        std::vector<double> next(5);
        for (std::size_t k = 0; k < 5; ++k) next[k] = w[k] - step * grad[k];
        next = project_to_simplex(std::move(next));
        double change = 0.0;
        for (std::size_t k = 0; k < 5; ++k) change = std::max(change, std::abs(next[k] - w[k]));
        w = std::move(next);
        if (change < 1e-13) break;
    }
    double rss = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double pred = 0.0;
        for (std::size_t k = 0; k < 5; ++k) pred += rows[i][k] * w[k];
        rss += (pred - finals[i]) * (pred - finals[i]);
    }
    std::copy(w.begin(), w.end(), fit.weights.begin());
    fit.residual_norm = std::sqrt(rss);
    return fit;
}

}  // namespace dilemma
