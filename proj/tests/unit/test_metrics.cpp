#include "dilemma/error.hpp"
#include "dilemma/metrics.hpp"
#include "dilemma/util.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <random>

using namespace dilemma;

namespace {

// Recursive OSA definition with memoization.
std::size_t osa_oracle(const std::u32string& a, const std::u32string& b) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    std::function<std::size_t(std::size_t, std::size_t)> d = [&](std::size_t i, std::size_t j) -> std::size_t {
        if (i == 0) return j;
        if (j == 0) return i;
        auto key = std::make_pair(i, j);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        std::size_t best = std::min({d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1])});
        if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) best = std::min(best, d(i - 2, j - 2) + 1);
        memo[key] = best;
        return best;
    };
    return d(a.size(), b.size());
}

// Straight-line BLEU over plain vectors, no shared helpers.
double bleu_oracle(const TokenStream& c, const TokenStream& r, std::size_t max_n, double eps) {
    if (c.empty()) return 0.0;
    double prod = 1.0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        std::vector<TokenStream> cg, rg;
        for (std::size_t i = 0; i + n <= c.size(); ++i) cg.emplace_back(c.begin() + i, c.begin() + i + n);
        for (std::size_t i = 0; i + n <= r.size(); ++i) rg.emplace_back(r.begin() + i, r.begin() + i + n);
        std::vector<bool> used(rg.size(), false);
        std::size_t hit = 0;
        for (const auto& g : cg) {
            for (std::size_t k = 0; k < rg.size(); ++k) {
                if (!used[k] && rg[k] == g) {
                    used[k] = true;
                    ++hit;
                    break;
                }
            }
        }
        double p = hit == 0 ? eps : static_cast<double>(hit) / static_cast<double>(cg.size());
        prod *= std::pow(p, 1.0 / static_cast<double>(max_n));
    }
    double bp = c.size() >= r.size() ? 1.0 : std::exp(1.0 - static_cast<double>(r.size()) / static_cast<double>(c.size()));
    return bp * prod;
}

TokenStream random_tokens(std::mt19937& rng, std::size_t max_len) {
    static const TokenStream vocab = {"a", "b", "c", "d", "e"};
    std::uniform_int_distribution<std::size_t> len(0, max_len), pick(0, vocab.size() - 1);
    TokenStream out(len(rng));
    for (auto& t : out) t = vocab[pick(rng)];
    return out;
}

}  // namespace

TEST_CASE("dl distance known values") {
    CHECK(dl_distance(std::string_view("CA"), std::string_view("ABC")) == 3);
    CHECK(dl_distance(std::string_view("ab"), std::string_view("ba")) == 1);
    CHECK(dl_distance(std::string_view("kitten"), std::string_view("sitting")) == 3);
    CHECK(dl_distance(std::string_view(""), std::string_view("abc")) == 3);
    CHECK(dl_distance(std::string_view("é"), std::string_view("e")) == 1);
}

TEST_CASE("dl distance matches recursive definition") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> len(0, 12), ch(0, 3);
    for (int i = 0; i < 500; ++i) {
        std::u32string a(static_cast<std::size_t>(len(rng)), U'a'), b(static_cast<std::size_t>(len(rng)), U'a');
        for (auto& c : a) c = U'a' + static_cast<char32_t>(ch(rng));
        for (auto& c : b) c = U'a' + static_cast<char32_t>(ch(rng));
        CHECK(dl_distance(a, b) == osa_oracle(a, b));
        CHECK(dl_distance(a, b) == dl_distance(b, a));
    }
}

TEST_CASE("dl similarity anchors") {
    CHECK(dl_similarity("same text", "same text") == 1.0);
    CHECK(dl_similarity("", "") == 1.0);
    CHECK(dl_similarity("abc", "xyz") == 0.0);
    CHECK(dl_similarity("abcd", "abce") == doctest::Approx(0.75));
}

TEST_CASE("bleu fixture gives e^-1") {
    BleuParams p;
    p.max_n = 3;
    double v = bleu({"the", "cat", "sat"}, {"the", "cat", "sat", "on", "the", "mat"}, p);
    CHECK(std::abs(v - std::exp(-1.0)) < 1e-12);
}

TEST_CASE("bleu matches naive oracle") {
    std::mt19937 rng(5);
    for (int i = 0; i < 300; ++i) {
        auto c = random_tokens(rng, 12);
        auto r = random_tokens(rng, 12);
        for (std::size_t n : {1, 2, 4}) {
            BleuParams p{n, 1e-9};
            CHECK(bleu(c, r, p) == doctest::Approx(bleu_oracle(c, r, n, 1e-9)).epsilon(1e-12));
        }
    }
}

TEST_CASE("bleu anchors") {
    TokenStream s{"one", "two", "three", "four", "five"};
    CHECK(bleu(s, s) == 1.0);
    CHECK(bleu({}, s) == 0.0);
    CHECK(bleu({"x", "y", "z", "w"}, s) < 1e-8);
    CHECK_THROWS_AS(bleu(s, s, {0, 1e-9}), Error);
}

TEST_CASE("rouge recall") {
    CHECK(rouge_n({"a", "b"}, {"a", "b", "c", "d"}) == doctest::Approx(0.5));
    CHECK(rouge_n({"a", "b", "c"}, {"a", "b", "c"}, 2) == 1.0);
    CHECK(rouge_n({"x"}, {"y"}) == 0.0);
    CHECK(rouge_n({}, {}) == 1.0);
}

TEST_CASE("tfidf idf formula and cosine against dense oracle") {
    std::vector<TokenStream> docs = {{"a", "b", "b"}, {"b", "c"}, {"c", "d", "d", "d"}};
    auto idf = build_idf(docs);
    CHECK(idf.documents() == 3);
    CHECK(idf.idf("b") == doctest::Approx(std::log(4.0 / 3.0) + 1.0));
    CHECK(idf.idf("zzz") == doctest::Approx(std::log(4.0) + 1.0));

    std::mt19937 rng(9);
    const TokenStream vocab = {"a", "b", "c", "d", "e"};
    for (int i = 0; i < 100; ++i) {
        auto x = random_tokens(rng, 10);
        auto y = random_tokens(rng, 10);
        std::vector<double> vx(vocab.size(), 0.0), vy(vocab.size(), 0.0);
        for (std::size_t k = 0; k < vocab.size(); ++k) {
            for (const auto& t : x) vx[k] += t == vocab[k];
            for (const auto& t : y) vy[k] += t == vocab[k];
            vx[k] *= idf.idf(vocab[k]);
            vy[k] *= idf.idf(vocab[k]);
        }
        double dot = 0, nx = 0, ny = 0;
        for (std::size_t k = 0; k < vocab.size(); ++k) {
            dot += vx[k] * vy[k];
            nx += vx[k] * vx[k];
            ny += vy[k] * vy[k];
        }
        double expected = (nx == 0 || ny == 0) ? 0.0 : dot / std::sqrt(nx * ny);
        CHECK(tfidf_cosine(x, y, idf) == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK_THROWS_AS(build_idf({}), Error);
}

TEST_CASE("identity and disjoint anchors are exact") {
    std::vector<TokenStream> docs = {{"alpha", "beta", "beta"}, {"gamma"}};
    auto idf = build_idf(docs);
    TokenStream x{"alpha", "beta", "beta", "alpha"}, y{"gamma", "delta"};
    CHECK(tfidf_cosine(x, x, idf) == 1.0);
    CHECK(tfidf_cosine(x, y, idf) == 0.0);
    CHECK(tfidf_cosine({}, x, idf) == 0.0);
    CHECK(wordfreq_cosine(x, x) == 1.0);
    CHECK(wordfreq_cosine(x, y) == 0.0);

    const std::string s = "The cat sat on the mat.";
    const std::string t = "Quick brown foxes jump!";
    for (MetricId m : {MetricId::ExactMatch, MetricId::Gestalt, MetricId::RougeN, MetricId::Jaccard,
                       MetricId::OverlapCoeff, MetricId::WordfreqCosine}) {
        CAPTURE(to_string(m));
        CHECK(candidate_metric(m, s, s).value == 1.0);
        CHECK(candidate_metric(m, "abc", "xyz").value == 0.0);
        CHECK(candidate_metric(m, s, t).value < 1.0);
    }
    CHECK_THROWS_AS(candidate_metric(MetricId::DlLexical, s, s), Error);
}

TEST_CASE("set metrics") {
    CHECK(jaccard({"a", "b", "c"}, {"b", "c", "d"}) == doctest::Approx(0.5));
    CHECK(overlap_coefficient({"a", "b"}, {"a", "b", "c", "d"}) == 1.0);
    CHECK(jaccard({}, {}) == 1.0);
    CHECK(overlap_coefficient({}, {"a"}) == 0.0);
}

TEST_CASE("gestalt matches difflib reference values") {
    auto dir = [](const char* a, const char* b) { return gestalt_ratio_directional(utf8_decode(a), utf8_decode(b)); };
    CHECK(dir("abcd", "bcde") == doctest::Approx(0.75));
    CHECK(dir("kitten", "sitting") == doctest::Approx(0.6153846153846154));
    CHECK(dir("the cat sat", "the mat sat") == doctest::Approx(0.9090909090909091));
    CHECK(dir("GESTALT PATTERN MATCHING", "GESTALT PRACTICE") == doctest::Approx(0.6));
    CHECK(dir("GESTALT PRACTICE", "GESTALT PATTERN MATCHING") == doctest::Approx(0.65));
    CHECK(gestalt_similarity("GESTALT PATTERN MATCHING", "GESTALT PRACTICE") == doctest::Approx(0.65));
    CHECK(gestalt_similarity("", "") == 1.0);
}

TEST_CASE("metric names and categories") {
    for (MetricId m : kAllMetrics) CHECK(metric_from_string(to_string(m)) == m);
    for (MetricCategory c : kAllCategories) CHECK(category_from_string(to_string(c)) == c);
    CHECK(category_of(MetricId::DlLexical) == MetricCategory::Lexical);
    CHECK(category_of(MetricId::Gestalt) == MetricCategory::Lexical);
    CHECK(category_of(MetricId::BleuNgram) == MetricCategory::Ngram);
    CHECK(category_of(MetricId::TfidfCosine) == MetricCategory::Cosine);
    CHECK(category_of(MetricId::EmbedSemantic) == MetricCategory::Semantic);
    CHECK(excluded_from_weighting(MetricCategory::SetBased));
    CHECK_THROWS_AS(metric_from_string("nope"), Error);
}
