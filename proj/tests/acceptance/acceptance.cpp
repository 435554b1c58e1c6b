// Prints one PASS/FAIL line per acceptance criterion; exits nonzero on any failure.

#include "dilemma/corpus.hpp"
#include "dilemma/embeddings.hpp"
#include "dilemma/error.hpp"
#include "dilemma/harness.hpp"
#include "dilemma/metrics.hpp"
#include "dilemma/ranking.hpp"
#include "dilemma/report.hpp"
#include "dilemma/scoring.hpp"
#include "dilemma/textprep.hpp"
#include "dilemma/util.hpp"
#include "dilemma/weighting.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace dilemma;
namespace fs = std::filesystem;

namespace {

const fs::path kSource(DILEMMA_SOURCE_DIR);

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects failure notes; the first few are kept for the report line.
class Checker {
public:
    void expect(bool ok, const std::string& what) {
        if (ok) return;
        ++failures_;
        if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
    }
    Outcome outcome(const std::string& summary) const {
        if (failures_ == 0) return {true, summary};
        return {false, std::to_string(failures_) + " failed check(s): " + notes_};
    }

private:
    int failures_ = 0;
    std::string notes_;
};

std::string fmt(double v, int precision = 6) {
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

int g_failed = 0;

void run(const std::string& name, double budget_seconds, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (budget_seconds > 0 && secs >= budget_seconds) {
        o.pass = false;
        o.detail += "; runtime " + fmt(secs, 3) + " s exceeds " + fmt(budget_seconds, 3) + " s";
    }
    if (!o.pass) ++g_failed;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << " (" << fmt(secs, 3) << " s): " << o.detail << std::endl;
}

// Ranking oracle ----------------------------------------------------------------

Ranking ranking_of(const std::vector<int>& ranks) {
    std::vector<std::string> items;
    std::map<std::string, int> r;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        items.push_back("i" + std::to_string(i));
        r[items.back()] = ranks[i];
    }
    return make_ranking(items, r);
}

std::uint64_t discordant_pairs(const std::vector<int>& a, const std::vector<int>& b) {
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if ((a[i] - a[j]) * (b[i] - b[j]) < 0) ++n;
    return n;
}

// Metric oracles ----------------------------------------------------------------

std::size_t osa_dp(const std::u32string& a, const std::u32string& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
            if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1])
                d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
        }
    }
    return d[a.size()][b.size()];
}

double naive_bleu(const TokenStream& c, const TokenStream& r, std::size_t max_n, double eps) {
    if (c.empty()) return 0.0;
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        std::vector<TokenStream> cg, rg;
        for (std::size_t i = 0; i + n <= c.size(); ++i) cg.emplace_back(c.begin() + i, c.begin() + i + n);
        for (std::size_t i = 0; i + n <= r.size(); ++i) rg.emplace_back(r.begin() + i, r.begin() + i + n);
        std::size_t clipped = 0;
        std::vector<bool> seen(cg.size(), false);
        for (std::size_t i = 0; i < cg.size(); ++i) {
            if (seen[i]) continue;
            std::size_t in_c = 0, in_r = 0;
            for (std::size_t k = 0; k < cg.size(); ++k)
                if (cg[k] == cg[i]) {
                    ++in_c;
                    seen[k] = true;
                }
            for (const auto& g : rg) in_r += g == cg[i];
            clipped += std::min(in_c, in_r);
        }
        const double p = clipped == 0 ? eps : static_cast<double>(clipped) / static_cast<double>(cg.size());
        log_sum += std::log(p) / static_cast<double>(max_n);
    }
    const double cl = static_cast<double>(c.size()), rl = static_cast<double>(r.size());
    const double bp = cl >= rl ? 1.0 : std::exp(1.0 - rl / cl);
    return bp * std::exp(log_sum);
}

std::vector<double> eigen_principal(const std::vector<std::vector<double>>& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    Eigen::EigenSolver<Eigen::MatrixXd> es(a);
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < n; ++k)
        if (es.eigenvalues()[k].real() > es.eigenvalues()[best].real()) best = k;
    Eigen::VectorXd v = es.eigenvectors().col(best).real().cwiseAbs();
    v /= v.sum();
    return {v.data(), v.data() + n};
}

// End-to-end helpers ------------------------------------------------------------

fs::path fresh_dir(const std::string& tag) {
    std::random_device rd;
    auto p = fs::temp_directory_path() / ("dilemma-acceptance-" + tag + "-" + std::to_string(rd()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// Rebuilds the demo corpus from raw inputs through the replay client only.
void rebuild_demo(const fs::path& corpus) {
    const auto demo = kSource / "data" / "demo";
    for (const char* sub : {"cases", "raw", "replay"}) {
        fs::create_directories(corpus / sub);
        fs::copy(demo / sub, corpus / sub, fs::copy_options::recursive);
    }
    const auto cases = load_cases(corpus);
    const ReplayCache cache(corpus / "replay");
    const auto expect_clean = [](const BatchOutcome& o, const std::string& what) {
        if (!o.failures.empty()) throw std::runtime_error(what + ": " + o.failures.front().second);
    };
    for (const char* prep : {"prep-a", "prep-b", "prep-c", "prep-d"}) {
        ReplayClient c(prep, cache);
        expect_clean(preprocess_expert_batch(cases, c, corpus), prep);
    }
    ReplayClient human("prep-a", cache);
    expect_clean(preprocess_human_batch(cases, human, corpus), "human preprocessing");
    for (const char* model : {"model-alpha", "model-beta", "model-gamma", "model-delta"}) {
        ReplayClient c(model, cache);
        expect_clean(generate_batch(cases, c, corpus), model);
    }
}

struct EvaluateOutput {
    RunResult run;
    std::string provider_id;
    std::string bytes;  // run json + every report artifact, concatenated
};

EvaluateOutput evaluate_once(const std::string& tag, std::size_t workers) {
    const auto root = fresh_dir(tag);
    const auto corpus_dir = root / "corpus";
    rebuild_demo(corpus_dir);
    const Corpus corpus = load_corpus(corpus_dir);
    const ScoringConfig cfg;
    auto embedder = make_provider_from_env(cfg.fallback_embedding_dim);
    EvaluateOutput out;
    out.provider_id = embedder->id();
    out.run = score_run(corpus, corpus.authors(), cfg, *embedder, RunOptions{workers});
    out.bytes = run_to_json(out.run);
    out.bytes += table_to_csv(table_by_category(out.run.reports));
    out.bytes += distributions_to_json(metric_distributions(out.run.reports), out.run.manifest.hash());
    out.bytes += cohort_to_csv(human_vs_llm_table(out.run.reports), cfg.selected_metrics);
    fs::remove_all(root);
    return out;
}

}  // namespace

int main() {
    std::cout << std::unitbuf;

    run("inversion loss: example equals 2, exhaustive agreement for n <= 6", 5.0, [] {
        Checker c;
        const auto example = inversion_loss(ranking_of({3, 1, 2}), ranking_of({1, 2, 3}));
        c.expect(example == 2, "example gave " + std::to_string(example));
        std::size_t pairs = 0;
        for (int n = 1; n <= 6; ++n) {
            std::vector<int> p(static_cast<std::size_t>(n));
            std::iota(p.begin(), p.end(), 1);
            std::vector<std::vector<int>> perms;
            do perms.push_back(p);
            while (std::next_permutation(p.begin(), p.end()));
            std::vector<Ranking> rankings;
            for (const auto& q : perms) rankings.push_back(ranking_of(q));
            for (std::size_t a = 0; a < perms.size(); ++a) {
                for (std::size_t b = 0; b < perms.size(); ++b) {
                    const auto expected = discordant_pairs(perms[a], perms[b]);
                    const auto slow = inversion_loss(rankings[a], rankings[b]);
                    const auto fast = inversion_loss_fast(rankings[a], rankings[b]);
                    c.expect(slow == expected && fast == expected, "mismatch at n=" + std::to_string(n));
                    ++pairs;
                }
            }
        }
        return c.outcome("example = " + std::to_string(example) + ", " + std::to_string(pairs) +
                         " permutation pairs agree (quadratic and merge-sort counts)");
    });

    run("selection regression: DL, BLEU, TF-IDF, embedding win their categories", 0, [] {
        Checker c;
        const std::map<MetricId, std::uint64_t> inv = {{MetricId::DlLexical, 1},
                                                       {MetricId::BleuNgram, 5},
                                                       {MetricId::TfidfCosine, 3},
                                                       {MetricId::EmbedSemantic, 1},
                                                       {MetricId::Gestalt, 23}};
        const auto r = select_by_inversions(inv);
        const std::map<MetricCategory, MetricId> want = {{MetricCategory::Lexical, MetricId::DlLexical},
                                                         {MetricCategory::Ngram, MetricId::BleuNgram},
                                                         {MetricCategory::Cosine, MetricId::TfidfCosine},
                                                         {MetricCategory::Semantic, MetricId::EmbedSemantic}};
        std::string got;
        for (const auto& [cat, metric] : want) {
            const auto* w = r.winner(cat);
            c.expect(w != nullptr && w->metric == metric, std::string(to_string(cat)) + " winner wrong");
            if (w) got += std::string(got.empty() ? "" : ", ") + std::string(to_string(w->metric));
        }
        c.expect(r.weighted_category_inversions().size() == 4, "expected four weighted categories");
        return c.outcome("winners " + got);
    });

    run("default weights match to 4 dp and sum to 1", 0, [] {
        Checker c;
        const auto w = published_weights();
        const std::map<MetricCategory, double> want = {{MetricCategory::Lexical, 0.0768},
                                                       {MetricCategory::Ngram, 0.1547},
                                                       {MetricCategory::Cosine, 0.2299},
                                                       {MetricCategory::Semantic, 0.5386}};
        double sum = 0.0;
        for (const auto& [cat, v] : want) {
            const double got = w.at(cat);
            sum += got;
            c.expect(std::round(got * 1e4) == std::round(v * 1e4), std::string(to_string(cat)) + " = " + fmt(got));
        }
        c.expect(w.weights.size() == 4, "expected four categories");
        c.expect(std::abs(sum - 1.0) <= 1e-4, "sum " + fmt(sum, 10));
        c.expect(ScoringConfig{}.metric_weights.weights == w.weights, "scoring default differs");
        return c.outcome("lexical 0.0768, ngram 0.1547, cosine 0.2299, semantic 0.5386, sum " + fmt(sum, 6));
    });

    run("AHP: eigensolver agreement, ordering, CR, consistent generators", 10.0, [] {
        Checker c;
        const auto m = JudgmentMatrix::from_json(read_file(kSource / "assets" / "ahp_judgments.json"));
        const auto r = ahp_weights(m);
        const auto oracle = eigen_principal(m.rows());
        double max_diff = 0.0;
        std::vector<double> w;
        for (std::size_t i = 0; i < m.size(); ++i) {
            w.push_back(r.weights.at(m.order()[i]));
            max_diff = std::max(max_diff, std::abs(w[i] - oracle[i]));
        }
        c.expect(m.size() == 4, "matrix is not 4x4");
        c.expect(max_diff <= 1e-6, "eigensolver difference " + fmt(max_diff));
        c.expect(w[3] > w[2] && w[2] > w[0] && w[0] > w[1], "ordering row4 > row3 > row1 > row2 violated");
        const auto& cr = r.consistency;
        c.expect(std::isfinite(cr.cr) && cr.cr >= 0.0, "CR not reported");

        std::mt19937 rng(20240611);
        std::uniform_real_distribution<double> u(0.02, 1.0);
        double worst_w = 0.0, worst_ci = 0.0;
        for (int k = 0; k < 100; ++k) {
            const std::size_t n = 3 + static_cast<std::size_t>(k % 4);
            std::vector<double> g(n);
            double total = 0.0;
            for (auto& x : g) total += (x = u(rng));
            for (auto& x : g) x /= total;
            std::vector<std::vector<double>> rows(n, std::vector<double>(n));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) rows[i][j] = i == j ? 1.0 : g[i] / g[j];
            const auto pv = ahp_priority_vector(rows);
            for (std::size_t i = 0; i < n; ++i) worst_w = std::max(worst_w, std::abs(pv.weights[i] - g[i]));
            worst_ci = std::max(worst_ci, std::abs(pv.consistency.ci));
        }
        c.expect(worst_w <= 1e-8, "generator recovery error " + fmt(worst_w));
        c.expect(worst_ci < 1e-8, "CI " + fmt(worst_ci));
        return c.outcome("max |w - eigen| " + fmt(max_diff, 3) + ", lambda_max " + fmt(cr.lambda_max, 8) + ", CI " +
                         fmt(cr.ci, 6) + ", CR " + fmt(cr.cr, 6) + "; 100 generators: max error " + fmt(worst_w, 3) +
                         ", max CI " + fmt(worst_ci, 3));
    });

    run("inverted softmax: fixture values, monotonicity, shift invariance", 0, [] {
        Checker c;
        const std::vector<double> s = {1, 5, 3, 1};
        const std::vector<double> want = {0.3362, 0.1237, 0.2039, 0.3362};
        const auto w = inverted_softmax_values(s);
        std::string got;
        for (std::size_t i = 0; i < 4; ++i) {
            c.expect(std::abs(w[i] - want[i]) <= 1e-4, "component " + std::to_string(i) + " = " + fmt(w[i]));
            got += (i ? ", " : "") + fmt(w[i], 4);
        }
        std::mt19937 rng(7);
        std::uniform_int_distribution<int> len(2, 10), count(0, 40);
        std::uniform_real_distribution<double> shift(-100.0, 100.0);
        for (int k = 0; k < 1000; ++k) {
            std::vector<double> v(static_cast<std::size_t>(len(rng)));
            for (auto& x : v) x = count(rng);
            const auto a = inverted_softmax_values(v);
            for (std::size_t i = 0; i < v.size(); ++i)
                for (std::size_t j = 0; j < v.size(); ++j) {
                    if (v[i] < v[j]) c.expect(a[i] > a[j], "monotonicity");
                    if (v[i] == v[j]) c.expect(a[i] == a[j], "equal inputs differ");
                }
            auto moved = v;
            const double d = shift(rng);
            for (auto& x : moved) x += d;
            const auto b = inverted_softmax_values(moved);
            for (std::size_t i = 0; i < v.size(); ++i) c.expect(std::abs(a[i] - b[i]) <= 1e-12, "shift invariance");
        }
        return c.outcome("[" + got + "]; 1000 random vectors satisfy both properties");
    });

    run("metric oracles: DL, BLEU, identity and disjoint anchors", 0, [] {
        Checker c;
        c.expect(dl_distance(std::string_view("CA"), std::string_view("ABC")) == 3, "(CA, ABC) != 3");
        std::mt19937 rng(42);
        std::uniform_int_distribution<int> len(0, 20), ch(0, 3);
        for (int k = 0; k < 500; ++k) {
            std::u32string a(static_cast<std::size_t>(len(rng)), U'a'), b(static_cast<std::size_t>(len(rng)), U'a');
            for (auto& x : a) x = U'a' + static_cast<char32_t>(ch(rng));
            for (auto& x : b) x = U'a' + static_cast<char32_t>(ch(rng));
            c.expect(dl_distance(a, b) == osa_dp(a, b), "dl mismatch");
        }

        const TokenStream vocab = {"a", "b", "c", "d", "e", "f"};
        std::uniform_int_distribution<std::size_t> tlen(0, 15), pick(0, vocab.size() - 1);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            TokenStream x(tlen(rng)), y(tlen(rng));
            for (auto& t : x) t = vocab[pick(rng)];
            for (auto& t : y) t = vocab[pick(rng)];
            const double got = bleu(x, y), want = naive_bleu(x, y, 4, 1e-9);
            const double err = std::abs(got - want) / std::max(1e-300, std::abs(want));
            worst = std::max(worst, got == want ? 0.0 : err);
        }
        c.expect(worst <= 1e-12, "bleu relative error " + fmt(worst));
        const double fixture =
            bleu(tokenize("the cat sat"), tokenize("the cat sat on the mat"), BleuParams{3, 1e-9});
        c.expect(std::abs(fixture - std::exp(-1.0)) <= 1e-6, "fixture " + fmt(fixture, 12));

        const std::string text = "The committee reviewed the draft report and asked for raw data.";
        const std::string other = "Bridges need yearly inspections.";
        const auto ta = tokenize(text), tb = tokenize(other);
        const auto idf = build_idf({ta, tb});
        c.expect(tfidf_cosine(ta, ta, idf) == 1.0, "tfidf identity");
        c.expect(tfidf_cosine(ta, tb, idf) == 0.0, "tfidf disjoint");
        const std::vector<MetricId> candidates = {MetricId::ExactMatch, MetricId::Gestalt,      MetricId::RougeN,
                                                  MetricId::Jaccard,    MetricId::OverlapCoeff, MetricId::WordfreqCosine};
        for (auto m : candidates) {
            c.expect(candidate_metric(m, text, text).value == 1.0, std::string(to_string(m)) + " identity");
            // Character-disjoint as well, so gestalt has no matching block.
            c.expect(candidate_metric(m, "abc", "xyz").value == 0.0, std::string(to_string(m)) + " disjoint");
        }
        return c.outcome("500 DL pairs, 100 BLEU pairs (max rel error " + fmt(worst, 3) + "), fixture " +
                         fmt(fixture, 10) + ", tfidf and 6 candidate metrics anchored");
    });

    EvaluateOutput first, second;
    run("end-to-end determinism on the demo corpus", 60.0, [&] {
        Checker c;
        first = evaluate_once("a", 0);
        second = evaluate_once("b", 1);
        c.expect(first.bytes == second.bytes, "two runs differ");
        c.expect(first.run.reports.size() == 8, "expected 4 models and 4 participants");
        c.expect(first.run.manifest.missing.empty(), "missing (author, case) pairs");

        // A candidate identical to its reference, scored against that reference alone.
        const Corpus corpus = [] {
            const auto root = fresh_dir("identity");
            rebuild_demo(root / "corpus");
            auto loaded = load_corpus(root / "corpus");
            fs::remove_all(root);
            return loaded;
        }();
        std::vector<TokenStream> docs;
        for (const auto& [id, set] : corpus.references)
            for (const auto& r : set.references)
                for (const auto& [kind, t] : r.sections)
                    if (!trim(t).empty()) docs.push_back(tokenize(t));
        const auto idf = build_idf(docs);
        FallbackEmbedder embedder;
        const ScoringConfig cfg;
        MetricContext ctx{&idf, &embedder, cfg.bleu};
        double worst = 0.0;
        for (const auto& [id, set] : corpus.references) {
            for (const auto& ref : set.references) {
                StructuredResponse candidate{id, {AuthorKind::Llm, "mirror"}, ref.sections};
                const auto s = score_response(candidate, ReferenceSet{id, {ref}}, cfg, ctx);
                worst = std::max(worst, std::abs(s.final_score - 1.0));
            }
        }
        c.expect(worst <= 1e-9, "identical candidate off by " + fmt(worst));
        return c.outcome(std::to_string(first.bytes.size()) + " report bytes identical across runs; identical " +
                         "candidate |final - 1| max " + fmt(worst, 3));
    });

    run("human path: KeyFactors-only candidates scored on one section", 0, [&] {
        Checker c;
        const auto& reports = first.run.reports;
        std::size_t humans = 0;
        std::map<std::string, double> model_kf;
        for (const auto& r : reports) {
            if (r.author.kind == AuthorKind::Human) {
                ++humans;
                for (const auto& cs : r.cases) {
                    c.expect(cs.sections.size() == 1 && cs.sections[0].section == SectionKind::KeyFactors,
                             "human case scored on more than KeyFactors");
                    c.expect(cs.sections.size() == 1 && cs.sections[0].section_weight == 1.0, "section weight not 1");
                    c.expect(cs.sections.size() == 1 && cs.final_score == cs.sections[0].weighted,
                             "final differs from KeyFactors score");
                }
            } else {
                double sum = 0.0;
                for (const auto& cs : r.cases) sum += cs.section(SectionKind::KeyFactors)->weighted;
                model_kf[r.author.name] = sum / static_cast<double>(r.cases.size());
            }
        }
        c.expect(humans == 4, "expected four participants");
        const auto rows = human_vs_llm_table(reports);
        std::size_t model_rows = 0, human_rows = 0;
        for (const auto& row : rows) {
            if (row.kind == AuthorKind::Human) {
                ++human_rows;
                continue;
            }
            ++model_rows;
            auto it = model_kf.find(row.author);
            c.expect(it != model_kf.end(), "unknown model row " + row.author);
            if (it != model_kf.end())
                c.expect(std::abs(row.key_factor_weighted - it->second) <= 1e-12,
                         row.author + " row is not its KeyFactors mean");
        }
        c.expect(human_rows == 4 && model_rows == 4, "cohort table has wrong rows");
        return c.outcome(std::to_string(humans) + " participants scored on KeyFactors only; " +
                         std::to_string(model_rows) + " model rows use KeyFactors means");
    });

    run("offline: no network and no embedding service", 0, [&] {
        Checker c;
        const char* endpoint = std::getenv("EMBED_ENDPOINT");
        c.expect(endpoint == nullptr || *endpoint == '\0', "EMBED_ENDPOINT is set");
        c.expect(first.provider_id.rfind("fallback", 0) == 0, "provider " + first.provider_id);
        c.expect(first.run.manifest.provider_id == first.provider_id, "manifest provider differs");
        return c.outcome("embedder " + first.provider_id + ", chat replies served from the replay cache");
    });

    std::cout << (g_failed == 0 ? "all criteria passed" : std::to_string(g_failed) + " criteria failed") << std::endl;
    return g_failed == 0 ? 0 : 1;
}
