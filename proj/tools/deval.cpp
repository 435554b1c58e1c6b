#include "dilemma/corpus.hpp"
#include "dilemma/embeddings.hpp"
#include "dilemma/error.hpp"
#include "dilemma/harness.hpp"
#include "dilemma/ranking.hpp"
#include "dilemma/report.hpp"
#include "dilemma/scoring.hpp"
#include "dilemma/util.hpp"
#include "dilemma/weighting.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace dilemma;

namespace {

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
    } else {
        write_file_atomic(out, text);
    }
}

std::vector<DilemmaCase> filter_cases(std::vector<DilemmaCase> cases, const std::vector<std::string>& only) {
    if (only.empty()) return cases;
    std::vector<DilemmaCase> out;
    for (auto& c : cases)
        for (const auto& id : only)
            if (c.id == id) out.push_back(c);
    return out;
}

void print_outcome(const BatchOutcome& o) {
    for (const auto& w : o.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& [id, msg] : o.failures) std::cerr << "failed " << id << ": " << msg << '\n';
    std::cout << "wrote " << o.written.size() << " file(s), " << o.failures.size() << " failure(s)\n";
}

std::map<MetricId, std::uint64_t> parse_inversions(const std::string& text) {
    std::map<MetricId, std::uint64_t> out;
    const auto j = json::parse(text);
    for (const auto& [k, v] : j.items()) out[metric_from_string(k)] = v.get<std::uint64_t>();
    return out;
}

json selection_to_json(const SelectionResult& r) {
    json j;
    j["inversions"] = json::object();
    for (const auto& [m, n] : r.inversions) j["inversions"][std::string(to_string(m))] = n;
    j["winners"] = json::array();
    for (const auto& w : r.winners) {
        j["winners"].push_back({{"category", std::string(to_string(w.category))},
                                {"metric", std::string(to_string(w.metric))},
                                {"inversions", w.inversions},
                                {"tied", w.tied},
                                {"excluded", w.excluded}});
    }
    j["weighted_category_inversions"] = json::object();
    for (const auto& [c, n] : r.weighted_category_inversions())
        j["weighted_category_inversions"][std::string(to_string(c))] = n;
    return j;
}

// Scores every (metric, response) for one case so a ranking study can run on
// real texts. A response's score for a metric is its mean over sections and references.
RankingStudy study_from_corpus(const Corpus& corpus, const std::string& case_id, const Ranking& gt,
                               const ScoringConfig& cfg, EmbeddingProvider& embedder) {
    auto refs_it = corpus.references.find(case_id);
    if (refs_it == corpus.references.end()) throw Error(ErrorCode::MissingCase, case_id);
    std::vector<TokenStream> docs;
    for (const auto& r : refs_it->second.references)
        for (const auto& [k, t] : r.sections)
            if (!t.empty()) docs.push_back(tokenize(t));
    std::vector<const StructuredResponse*> cands;
    for (const auto& item : gt.items) {
        const StructuredResponse* found = nullptr;
        for (const auto& r : corpus.responses)
            if (r.case_id == case_id && r.author.name == item) found = &r;
        if (!found) throw Error(ErrorCode::ItemSetMismatch, "no response from " + item + " for " + case_id);
        for (const auto& [k, t] : found->sections)
            if (!t.empty()) docs.push_back(tokenize(t));
        cands.push_back(found);
    }
    IdfTable idf = build_idf(docs);
    MetricContext ctx{&idf, &embedder, cfg.bleu};
    RankingStudy study{gt, {}};
    for (MetricId m : kAllMetrics) {
        ScoreList list;
        for (const auto* c : cands) {
            double sum = 0.0;
            std::size_t n = 0;
            for (SectionKind s : kAllSections)
                for (const auto& ref : refs_it->second.references) {
                    sum += evaluate_metric(m, section_text(c->sections, s), section_text(ref.sections, s), ctx);
                    ++n;
                }
            list.emplace_back(c->author.name, n ? sum / static_cast<double>(n) : 0.0);
        }
        study.per_metric_scores[m] = std::move(list);
    }
    return study;
}

std::vector<Author> pick_authors(const Corpus& corpus, const std::vector<std::string>& models, bool no_humans) {
    std::vector<Author> out;
    for (const auto& a : corpus.authors()) {
        if (a.kind == AuthorKind::Human) {
            if (!no_humans) out.push_back(a);
            continue;
        }
        if (models.empty() || std::find(models.begin(), models.end(), a.name) != models.end()) out.push_back(a);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ethical-dilemma answer evaluation"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Build a corpus skeleton from a raw JSON dump");
    std::string ingest_in, corpus_dir;
    ingest->add_option("--input", ingest_in, "JSON array of cases")->required()->check(CLI::ExistingFile);
    ingest->add_option("--corpus", corpus_dir, "Corpus root")->required();

    // shared LLM flow options
    std::string client_spec, replay_dir, flow_name;
    bool record = false;
    std::size_t jobs = 4;
    std::vector<std::string> only_cases;
    std::optional<double> temperature;
    std::optional<int> max_tokens;
    auto add_llm_opts = [&](CLI::App* sc) {
        sc->add_option("--corpus", corpus_dir, "Corpus root")->required()->check(CLI::ExistingDirectory);
        sc->add_option("--client", client_spec, "replay:<id> or <provider>:<model>")->required();
        sc->add_option("--replay-dir", replay_dir, "Replay cache directory");
        sc->add_flag("--record", record, "Store live replies in the replay cache");
        sc->add_option("--jobs", jobs, "Concurrent requests");
        sc->add_option("--case", only_cases, "Restrict to these case ids");
        sc->add_option("--temperature", temperature);
        sc->add_option("--max-tokens", max_tokens);
    };
    auto* preprocess = app.add_subcommand("preprocess", "Structure expert opinions or human answers");
    preprocess->add_option("--flow", flow_name, "expert or human")->required()->check(CLI::IsMember({"expert", "human"}));
    add_llm_opts(preprocess);
    auto* generate = app.add_subcommand("generate", "Ask a model for structured answers");
    add_llm_opts(generate);

    // select-metrics
    auto* select = app.add_subcommand("select-metrics", "Ranking study: pick one metric per category");
    std::string gt_file, scores_file, inv_file, study_case, config_file, out_file;
    select->add_option("--ground-truth", gt_file, "Ranking JSON {items, ranks}")->check(CLI::ExistingFile);
    auto* opt_scores =
        select->add_option("--scores", scores_file, "{metric: {item: score}}")->check(CLI::ExistingFile);
    auto* opt_inv = select->add_option("--inversions", inv_file, "{metric: count}")->check(CLI::ExistingFile);
    auto* opt_study_corpus = select->add_option("--corpus", corpus_dir, "Score responses of one case from a corpus");
    select->add_option("--case", study_case, "Case used with --corpus");
    select->add_option("--config", config_file, "Scoring config JSON")->check(CLI::ExistingFile);
    select->add_option("--out", out_file, "Output JSON (default stdout)");
    opt_scores->excludes(opt_inv);
    opt_study_corpus->excludes(opt_inv)->excludes(opt_scores);

    // weigh
    auto* weigh = app.add_subcommand("weigh", "Derive category weights");
    std::string method, matrix_file, combine_name = "arithmetic_mean", softmax_file, ahp_file;
    double alpha = 0.5;
    bool allow_inconsistent = false;
    weigh->add_option("--method", method, "softmax, ahp or combine")
        ->required()
        ->check(CLI::IsMember({"softmax", "ahp", "combine"}));
    weigh->add_option("--inversions", inv_file, "{category or metric: count} for softmax")->check(CLI::ExistingFile);
    weigh->add_option("--matrix", matrix_file, "Judgment matrix JSON for ahp")->check(CLI::ExistingFile);
    weigh->add_option("--softmax", softmax_file, "Weights JSON for combine")->check(CLI::ExistingFile);
    weigh->add_option("--ahp", ahp_file, "Weights JSON for combine")->check(CLI::ExistingFile);
    weigh->add_option("--combine", combine_name, "arithmetic_mean, geometric_mean_renormalized, convex_blend");
    weigh->add_option("--alpha", alpha, "Softmax share for convex_blend")->check(CLI::Range(0.0, 1.0));
    weigh->add_flag("--allow-inconsistent", allow_inconsistent, "Emit weights even when CR >= 0.1");
    weigh->add_option("--out", out_file, "Output JSON (default stdout)");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Score every author against the references");
    std::vector<std::string> models;
    bool no_humans = false;
    std::optional<std::size_t> refs_per_case;
    bool any_refs = false;
    evaluate->add_option("--corpus", corpus_dir, "Corpus root")->required()->check(CLI::ExistingDirectory);
    evaluate->add_option("--config", config_file, "Scoring config JSON")->check(CLI::ExistingFile);
    evaluate->add_option("--out", out_file, "Run JSON (default stdout)");
    evaluate->add_option("--models", models, "Restrict to these models");
    evaluate->add_flag("--no-humans", no_humans, "Skip human participants");
    evaluate->add_option("--jobs", jobs, "Worker threads (0 = all cores)");
    evaluate->add_option("--references-per-case", refs_per_case, "Required references per case (default 4)");
    evaluate->add_flag("--any-references", any_refs, "Accept any number of references");

    // report
    auto* report = app.add_subcommand("report", "Emit tables from a run JSON");
    std::string report_in, out_dir;
    report->add_option("--input", report_in, "Run JSON from evaluate")->required()->check(CLI::ExistingFile);
    report->add_option("--out-dir", out_dir, "Output directory")->required();

    // cache-import
    auto* cache_import = app.add_subcommand(
        "cache-import", "Seed the replay cache from structured texts already in a corpus");
    std::string client_id;
    cache_import->add_option("--corpus", corpus_dir, "Corpus root")->required()->check(CLI::ExistingDirectory);
    cache_import->add_option("--flow", flow_name, "expert, human or generate")
        ->required()
        ->check(CLI::IsMember({"expert", "human", "generate"}));
    cache_import->add_option("--client", client_id, "Client id the replies are stored under")->required();
    cache_import->add_option("--replay-dir", replay_dir, "Replay cache directory")->required();

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate", "Fit section weights to known finals (diagnostic)");
    calibrate->add_option("--input", report_in, "{\"rows\": [[5 section scores]], \"finals\": [...]}")
        ->required()
        ->check(CLI::ExistingFile);
    calibrate->add_option("--out", out_file, "Output JSON (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) {
            std::size_t n = ingest_raw(ingest_in, corpus_dir);
            std::cout << "ingested " << n << " case(s) into " << corpus_dir << '\n';
            return 0;
        }

        if (*preprocess || *generate) {
            ClientFactoryOptions fo;
            fo.replay_dir = replay_dir.empty() ? fs::path(corpus_dir) / "replay" : fs::path(replay_dir);
            fo.record = record;
            auto client = make_chat_client(client_spec, fo);
            BatchOptions bo;
            bo.concurrency = jobs == 0 ? 1 : jobs;
            bo.flow.params.temperature = temperature;
            bo.flow.params.max_tokens = max_tokens;
            bo.flow.failures_dir = fs::path(corpus_dir) / "failures";
            auto cases = filter_cases(load_cases(corpus_dir), only_cases);
            BatchOutcome o;
            if (*generate)
                o = generate_batch(cases, *client, corpus_dir, bo);
            else if (flow_name == "expert")
                o = preprocess_expert_batch(cases, *client, corpus_dir, bo);
            else
                o = preprocess_human_batch(cases, *client, corpus_dir, bo);
            print_outcome(o);
            return o.failures.empty() ? 0 : 3;
        }

        if (*select) {
            SelectionResult r;
            if (!inv_file.empty()) {
                r = select_by_inversions(parse_inversions(read_file(inv_file)));
            } else {
                if (gt_file.empty()) throw Error(ErrorCode::InvalidArgument, "--ground-truth is required");
                Ranking gt = ranking_from_json(read_file(gt_file));
                RankingStudy study;
                if (!scores_file.empty()) {
                    study.ground_truth = gt;
                    const auto scores = json::parse(read_file(scores_file));
                    for (const auto& [m, items] : scores.items()) {
                        ScoreList list;
                        for (const auto& [item, v] : items.items()) list.emplace_back(item, v.get<double>());
                        study.per_metric_scores[metric_from_string(m)] = std::move(list);
                    }
                } else if (!corpus_dir.empty()) {
                    if (study_case.empty()) throw Error(ErrorCode::InvalidArgument, "--case is required with --corpus");
                    ScoringConfig cfg = config_file.empty() ? ScoringConfig{} : config_from_json(read_file(config_file));
                    LoadOptions lo;
                    lo.references_per_case.reset();
                    Corpus corpus = load_corpus(corpus_dir, lo);
                    auto embedder = make_provider_from_env(cfg.fallback_embedding_dim);
                    study = study_from_corpus(corpus, study_case, gt, cfg, *embedder);
                } else {
                    throw Error(ErrorCode::InvalidArgument, "one of --inversions, --scores, --corpus is required");
                }
                r = run_selection_study(study);
            }
            emit(selection_to_json(r).dump(2), out_file);
            return 0;
        }

        if (*weigh) {
            json out;
            if (method == "softmax") {
                if (inv_file.empty()) throw Error(ErrorCode::InvalidArgument, "--inversions is required");
                std::map<MetricCategory, double> inv;
                const auto counts = json::parse(read_file(inv_file));
                for (const auto& [k, v] : counts.items()) {
                    MetricCategory c;
                    try {
                        c = category_from_string(k);
                    } catch (const Error&) {
                        c = category_of(metric_from_string(k));
                    }
                    inv[c] = v.get<double>();
                }
                out = json::parse(weights_to_json(inverted_softmax(inv)));
            } else if (method == "ahp") {
                if (matrix_file.empty()) throw Error(ErrorCode::InvalidArgument, "--matrix is required");
                AhpOptions ao;
                ao.allow_inconsistent = allow_inconsistent;
                AhpResult r = ahp_weights(JudgmentMatrix::from_json(read_file(matrix_file)), ao);
                out = json::parse(weights_to_json(r.weights));
                out["consistency"] = {{"lambda_max", r.consistency.lambda_max}, {"ci", r.consistency.ci},
                                      {"cr", r.consistency.cr},                 {"ri", r.consistency.ri_used},
                                      {"consistent", r.consistency.consistent}, {"iterations", r.consistency.iterations}};
            } else {
                if (softmax_file.empty() || ahp_file.empty())
                    throw Error(ErrorCode::InvalidArgument, "--softmax and --ahp are required");
                auto w = combine_weights(weights_from_json(read_file(softmax_file)),
                                         weights_from_json(read_file(ahp_file)),
                                         combine_method_from_string(combine_name), alpha);
                out = json::parse(weights_to_json(w));
            }
            emit(out.dump(2), out_file);
            return 0;
        }

        if (*evaluate) {
            ScoringConfig cfg = config_file.empty() ? ScoringConfig{} : config_from_json(read_file(config_file));
            LoadOptions lo;
            if (any_refs)
                lo.references_per_case.reset();
            else if (refs_per_case)
                lo.references_per_case = *refs_per_case;
            Corpus corpus = load_corpus(corpus_dir, lo);
            auto embedder = make_provider_from_env(cfg.fallback_embedding_dim);
            RunOptions ro;
            ro.workers = jobs;
            RunResult run = score_run(corpus, pick_authors(corpus, models, no_humans), cfg, *embedder, ro);
            for (const auto& [a, c] : run.manifest.missing) std::cerr << "missing: " << a << " / " << c << '\n';
            emit(run_to_json(run), out_file);
            return 0;
        }

        if (*report) {
            RunResult run = run_from_json(read_file(report_in));
            fs::create_directories(out_dir);
            fs::path dir(out_dir);
            write_file_atomic(dir / "table_by_category.csv", table_to_csv(table_by_category(run.reports)));
            write_file_atomic(dir / "metric_distributions.json",
                              distributions_to_json(metric_distributions(run.reports), run.manifest.hash()));
            try {
                write_file_atomic(dir / "human_vs_llm.csv",
                                  cohort_to_csv(human_vs_llm_table(run.reports), run.manifest.config.selected_metrics));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::MissingCohort) throw;
                std::cerr << "skipping human_vs_llm.csv: " << e.detail() << '\n';
            }
            std::cout << "wrote reports to " << out_dir << '\n';
            return 0;
        }

        if (*cache_import) {
            ReplayCache cache(replay_dir);
            fs::path root(corpus_dir);
            std::size_t stored = 0;
            for (const auto& c : load_cases(root)) {
                if (flow_name == "generate") {
                    fs::path src = root / "responses" / safe_path_component(client_id) / (c.id + ".txt");
                    if (!fs::exists(src)) continue;
                    auto p = render_prompt(builtin_template(PromptTemplateId::LlmGenerate), {{"dilemma", c.description}});
                    cache.store(client_id, p, read_file(src));
                    ++stored;
                } else if (flow_name == "expert") {
                    fs::path src = root / "references" / c.id / (safe_path_component(client_id) + ".txt");
                    fs::path raw = root / "raw" / "expert" / (c.id + ".txt");
                    if (!fs::exists(src) || !fs::exists(raw)) continue;
                    auto p = render_prompt(builtin_template(PromptTemplateId::ExpertPreprocess),
                                           {{"dilemma", c.description}, {"opinion", read_file(raw)}});
                    cache.store(client_id, p, read_file(src));
                    ++stored;
                } else {
                    fs::path raw_dir = root / "raw" / "human";
                    if (!fs::exists(raw_dir)) continue;
                    std::vector<fs::path> participants;
                    for (const auto& e : fs::directory_iterator(raw_dir))
                        if (e.is_directory()) participants.push_back(e.path());
                    std::sort(participants.begin(), participants.end());
                    for (const auto& pdir : participants) {
                        fs::path raw = pdir / (c.id + ".txt");
                        fs::path src = root / "humans" / pdir.filename() / (c.id + ".txt");
                        if (!fs::exists(raw) || !fs::exists(src)) continue;
                        auto p = render_prompt(builtin_template(PromptTemplateId::HumanPreprocess),
                                               {{"dilemma", c.description}, {"answer", read_file(raw)}});
                        cache.store(client_id, p,
                                    section_text(parse_sectioned_text(read_file(src)), SectionKind::KeyFactors));
                        ++stored;
                    }
                }
            }
            std::cout << "stored " << stored << " repl" << (stored == 1 ? "y" : "ies") << '\n';
            return 0;
        }

        if (*calibrate) {
            auto in = json::parse(read_file(report_in));
            std::vector<std::array<double, 5>> rows;
            for (const auto& r : in.at("rows")) {
                std::array<double, 5> a{};
                if (r.size() != 5) throw Error(ErrorCode::InvalidArgument, "each row needs 5 section scores");
                for (std::size_t i = 0; i < 5; ++i) a[i] = r[i].get<double>();
                rows.push_back(a);
            }
            auto finals = in.at("finals").get<std::vector<double>>();
            SectionWeightFit fit = fit_section_weights(rows, finals);
            json out;
            out["section_weights"] = json::object();
            for (std::size_t i = 0; i < 5; ++i)
                out["section_weights"][std::string(section_key(kAllSections[i]))] = fit.weights[i];
            out["residual_norm"] = fit.residual_norm;
            out["iterations"] = fit.iterations;
            out["note"] = "diagnostic fit; not used by evaluate unless copied into a config";
            emit(out.dump(2), out_file);
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
