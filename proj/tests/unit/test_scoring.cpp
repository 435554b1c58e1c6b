#include "dilemma/error.hpp"
#include "dilemma/scoring.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

using namespace dilemma;

namespace {

const std::filesystem::path kDemo = std::filesystem::path(DILEMMA_SOURCE_DIR) / "data" / "demo";

SectionMap full(const std::string& prefix) {
    return {{SectionKind::Introduction, prefix + " opens the case with a short framing."},
            {SectionKind::KeyFactors, prefix + " weighs safety, honesty and duty to the public."},
            {SectionKind::Historical, prefix + " recalls professional codes and earlier failures."},
            {SectionKind::Resolution, prefix + " proposes documenting the problem and escalating."},
            {SectionKind::Takeaways, prefix + " concludes that trust depends on accurate records."}};
}

ReferenceSet refs_for(const std::string& case_id, const std::vector<SectionMap>& texts) {
    ReferenceSet r{case_id, {}};
    for (std::size_t i = 0; i < texts.size(); ++i)
        r.references.push_back({case_id, {AuthorKind::ExpertRef, "prep" + std::to_string(i)}, texts[i]});
    return r;
}

IdfTable idf_over(const ReferenceSet& refs, const StructuredResponse& cand) {
    std::vector<TokenStream> docs;
    for (const auto& r : refs.references)
        for (const auto& [k, t] : r.sections)
            if (!t.empty()) docs.push_back(tokenize(t));
    for (const auto& [k, t] : cand.sections)
        if (!t.empty()) docs.push_back(tokenize(t));
    return build_idf(docs);
}

}  // namespace

TEST_CASE("identical candidate scores one") {
    FallbackEmbedder e;
    auto refs = refs_for("c1", {full("The expert")});
    StructuredResponse cand{"c1", {AuthorKind::Llm, "m"}, full("The expert")};
    auto idf = idf_over(refs, cand);
    ScoringConfig cfg;
    auto s = score_response(cand, refs, cfg, {&idf, &e, cfg.bleu});
    CHECK(std::abs(s.final_score - 1.0) < 1e-9);
    CHECK(s.sections.size() == 5);
    for (const auto& sec : s.sections) {
        CHECK(sec.section_weight == doctest::Approx(0.2));
        for (const auto& [m, v] : sec.per_metric) CHECK(v == doctest::Approx(1.0));
    }
}

TEST_CASE("final score is the weighted combination of its parts") {
    FallbackEmbedder e;
    auto refs = refs_for("c1", {full("The expert"), full("A reviewer")});
    StructuredResponse cand{"c1", {AuthorKind::Llm, "m"}, full("Some model")};
    auto idf = idf_over(refs, cand);
    ScoringConfig cfg;
    auto s = score_response(cand, refs, cfg, {&idf, &e, cfg.bleu});
    double expected = 0.0;
    for (const auto& sec : s.sections) {
        double weighted = 0.0;
        for (const auto& [m, v] : sec.per_metric) weighted += cfg.metric_weights.at(category_of(m)) * v;
        CHECK(sec.weighted == doctest::Approx(weighted).epsilon(1e-12));
        CHECK(sec.references_used == 2);
        expected += sec.section_weight * sec.weighted;
    }
    CHECK(s.final_score == doctest::Approx(expected).epsilon(1e-12));
    CHECK(s.final_score > 0.0);
    CHECK(s.final_score < 1.0);
}

TEST_CASE("reference order does not matter") {
    FallbackEmbedder e;
    std::vector<SectionMap> texts = {full("The expert"), full("A reviewer"), full("Another reader")};
    StructuredResponse cand{"c1", {AuthorKind::Llm, "m"}, full("Some model")};
    auto refs = refs_for("c1", texts);
    auto idf = idf_over(refs, cand);
    ScoringConfig cfg;
    double base = score_response(cand, refs, cfg, {&idf, &e, cfg.bleu}).final_score;
    std::reverse(texts.begin(), texts.end());
    double swapped = score_response(cand, refs_for("c1", texts), cfg, {&idf, &e, cfg.bleu}).final_score;
    CHECK(swapped == doctest::Approx(base).epsilon(1e-14));
}

TEST_CASE("more overlap with the reference never scores lower") {
    FallbackEmbedder e;
    auto refs = refs_for("c1", {full("The expert")});
    StructuredResponse far{"c1", {AuthorKind::Llm, "m"}, full("Zebras quietly")};
    StructuredResponse near{"c1", {AuthorKind::Llm, "m"}, full("The expert also")};
    auto idf = idf_over(refs, far);
    ScoringConfig cfg;
    MetricContext ctx{&idf, &e, cfg.bleu};
    CHECK(score_response(near, refs, cfg, ctx).final_score > score_response(far, refs, cfg, ctx).final_score);
}

TEST_CASE("human responses are scored on key factors only") {
    FallbackEmbedder e;
    auto refs = refs_for("c1", {full("The expert"), full("A reviewer")});
    const std::string text = "I would weigh safety and honesty first.";
    StructuredResponse human{"c1", {AuthorKind::Human, "p1"}, {{SectionKind::KeyFactors, text}}};
    auto idf = idf_over(refs, human);
    ScoringConfig cfg;
    auto hs = score_response(human, refs, cfg, {&idf, &e, cfg.bleu});
    REQUIRE(hs.sections.size() == 1);
    CHECK(hs.sections[0].section == SectionKind::KeyFactors);
    CHECK(hs.sections[0].section_weight == 1.0);
    CHECK(hs.final_score == hs.sections[0].weighted);

    // Same text as an LLM key-factors section under one-hot section weights.
    SectionMap llm_sections = complete_sections({{SectionKind::KeyFactors, text}});
    StructuredResponse llm{"c1", {AuthorKind::Llm, "m"}, llm_sections};
    ScoringConfig one_hot = cfg;
    for (auto& [k, w] : one_hot.section_weights) w = k == SectionKind::KeyFactors ? 1.0 : 0.0;
    auto ls = score_response(llm, refs, one_hot, {&idf, &e, cfg.bleu});
    CHECK(ls.final_score == doctest::Approx(hs.final_score).epsilon(1e-14));
    CHECK(ls.section(SectionKind::KeyFactors)->weighted == hs.sections[0].weighted);
}

TEST_CASE("empty reference sections under both policies") {
    FallbackEmbedder e;
    auto with_gap = full("A reviewer");
    with_gap[SectionKind::Historical] = "";
    auto refs = refs_for("c1", {full("The expert"), with_gap});
    StructuredResponse cand{"c1", {AuthorKind::Llm, "m"}, full("The expert")};
    auto idf = idf_over(refs, cand);

    ScoringConfig cfg;
    auto as_empty = score_response(cand, refs, cfg, {&idf, &e, cfg.bleu});
    CHECK(as_empty.section(SectionKind::Historical)->references_used == 2);

    cfg.empty_section_policy = EmptySectionPolicy::SkipAndRenormalize;
    auto skipped = score_response(cand, refs, cfg, {&idf, &e, cfg.bleu});
    CHECK(skipped.section(SectionKind::Historical)->references_used == 1);
    CHECK(skipped.section(SectionKind::Historical)->weighted == doctest::Approx(1.0));
    CHECK(skipped.final_score > as_empty.final_score);

    // A section no reference covers is dropped and the rest renormalized.
    auto none = full("The expert");
    none[SectionKind::Takeaways] = "";
    auto refs2 = refs_for("c1", {none});
    auto s = score_response(cand, refs2, cfg, {&idf, &e, cfg.bleu});
    CHECK(s.sections.size() == 4);
    CHECK(s.section(SectionKind::Takeaways) == nullptr);
    for (const auto& sec : s.sections) CHECK(sec.section_weight == doctest::Approx(0.25));
}

TEST_CASE("scoring errors") {
    FallbackEmbedder e;
    ScoringConfig cfg;
    IdfTable idf = build_idf({{"x"}});
    StructuredResponse cand{"c1", {AuthorKind::Llm, "m"}, full("x")};
    CHECK_THROWS_WITH_AS(score_response(cand, refs_for("c2", {full("y")}), cfg, {&idf, &e, cfg.bleu}),
                         doctest::Contains("CaseMismatch"), Error);
    CHECK_THROWS_WITH_AS(score_response(cand, ReferenceSet{"c1", {}}, cfg, {&idf, &e, cfg.bleu}),
                         doctest::Contains("NoReferences"), Error);
    CHECK_THROWS_AS(evaluate_metric(MetricId::TfidfCosine, "a", "b", MetricContext{}), Error);
    CHECK_THROWS_AS(evaluate_metric(MetricId::EmbedSemantic, "a", "b", MetricContext{}), Error);
    CHECK(evaluate_metric(MetricId::Jaccard, "a b", "a b", MetricContext{}) == 1.0);
}

TEST_CASE("config json round trip and validation") {
    ScoringConfig cfg;
    cfg.empty_section_policy = EmptySectionPolicy::SkipAndRenormalize;
    cfg.bleu.max_n = 3;
    auto back = config_from_json(config_to_json(cfg));
    CHECK(config_to_json(back) == config_to_json(cfg));
    CHECK(back.bleu.max_n == 3);

    CHECK_NOTHROW(config_from_json(R"({"provider": {"name": "openai"}})"));
    CHECK_THROWS_AS(config_from_json(R"({"section_weights": {"introduction": 1.0}})"), Error);
    CHECK_THROWS_AS(config_from_json(R"({"selected_metrics": ["dl_lexical", "gestalt", "tfidf_cosine", "embed_semantic"]})"),
                    Error);
    CHECK_THROWS_AS(config_from_json(R"({"selected_metrics": ["dl_lexical", "bleu_ngram", "jaccard", "embed_semantic"]})"),
                    Error);
    CHECK_THROWS_AS(config_from_json("{not json"), Error);
}

TEST_CASE("score_run on the demo corpus") {
    Corpus corpus = load_corpus(kDemo);
    ScoringConfig cfg;
    FallbackEmbedder e;
    auto one = score_run(corpus, corpus.authors(), cfg, e, {1});
    auto many = score_run(corpus, corpus.authors(), cfg, e, {4});
    const auto text = run_to_json(one);
    CHECK(text == run_to_json(many));
    CHECK(run_to_json(run_from_json(text)) == text);
    CHECK(one.reports.size() == 8);
    CHECK(one.manifest.missing.empty());
    CHECK(one.manifest.provider_id == "fallback-trigram-256");
    CHECK(one.manifest.hash().size() == 64);
    for (const auto& r : one.reports) {
        CHECK(r.cases.size() == 3);
        CHECK(r.manifest_hash == one.manifest.hash());
        for (const auto& c : r.cases) {
            CHECK(c.final_score >= 0.0);
            CHECK(c.final_score <= 1.0);
            CHECK(c.sections.size() == (r.author.kind == AuthorKind::Human ? 1u : 5u));
        }
    }
}

TEST_CASE("score_run records missing pairs") {
    Corpus corpus = load_corpus(kDemo);
    corpus.responses.erase(corpus.responses.begin());
    FallbackEmbedder e;
    auto run = score_run(corpus, corpus.authors(), ScoringConfig{}, e);
    REQUIRE(run.manifest.missing.size() == 1);
    CHECK(run.manifest.missing[0].first == "llm:model-alpha");
    CHECK(run.manifest.missing[0].second == "demo-001");
}

TEST_CASE("simplex projection") {
    auto p = project_to_simplex({0.5, 0.5, 0.5});
    for (double x : p) CHECK(x == doctest::Approx(1.0 / 3));
    auto q = project_to_simplex({2.0, 0.0, -1.0});
    CHECK(q[0] == doctest::Approx(1.0));
    CHECK(q[1] == 0.0);
    CHECK(q[2] == 0.0);
}

TEST_CASE("section weight fit recovers known weights") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::array<double, 5> truth = {0.1, 0.3, 0.0, 0.4, 0.2};
    std::vector<std::array<double, 5>> rows;
    std::vector<double> finals;
    for (int i = 0; i < 40; ++i) {
        std::array<double, 5> r{};
        double f = 0;
        for (std::size_t k = 0; k < 5; ++k) {
            r[k] = u(rng);
            f += r[k] * truth[k];
        }
        rows.push_back(r);
        finals.push_back(f);
    }
    auto fit = fit_section_weights(rows, finals);
    for (std::size_t k = 0; k < 5; ++k) CHECK(fit.weights[k] == doctest::Approx(truth[k]).epsilon(1e-5));
    CHECK(fit.residual_norm < 1e-5);
    CHECK_THROWS_AS(fit_section_weights(rows, {}), Error);
}
