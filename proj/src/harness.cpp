#include "dilemma/harness.hpp"

#include "dilemma/textprep.hpp"
#include "dilemma/util.hpp"
#include "prompt_assets.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace dilemma {

std::string_view to_string(PromptTemplateId id) {
    switch (id) {
        case PromptTemplateId::ExpertPreprocess: return "expert_preprocess";
        case PromptTemplateId::HumanPreprocess: return "human_preprocess";
        case PromptTemplateId::LlmGenerate: return "llm_generate";
    }
    return "";
}

PromptTemplateId template_from_string(std::string_view name) {
    for (auto id : {PromptTemplateId::ExpertPreprocess, PromptTemplateId::HumanPreprocess, PromptTemplateId::LlmGenerate}) {
        if (to_string(id) == name) return id;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown template '" + std::string(name) + "'");
}

namespace {

std::string_view asset_text(std::string_view file) {
    for (const auto& a : detail::kPromptAssets) {
        if (a.file == file) return a.text;
    }
    throw Error(ErrorCode::TemplateTampered, "no compiled template " + std::string(file));
}

PromptTemplate load_builtin(PromptTemplateId id) {
    const std::string base(to_string(id));
    return {id, std::string(asset_text(base + ".system.txt")), std::string(asset_text(base + ".user.txt"))};
}

bool is_placeholder_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

const PromptTemplate& builtin_template(PromptTemplateId id) {
    static const std::array<PromptTemplate, 3> kTemplates = {load_builtin(PromptTemplateId::ExpertPreprocess),
                                                             load_builtin(PromptTemplateId::HumanPreprocess),
                                                             load_builtin(PromptTemplateId::LlmGenerate)};
    return kTemplates[static_cast<std::size_t>(id)];
}

std::vector<std::string> placeholders(std::string_view text) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{') continue;
        std::size_t j = i + 1;
        while (j < text.size() && is_placeholder_char(text[j])) ++j;
        if (j < text.size() && text[j] == '}' && j > i + 1) {
            std::string name(text.substr(i + 1, j - i - 1));
            if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(std::move(name));
            i = j;
        }
    }
    return names;
}

namespace {

std::string substitute(std::string_view text, const std::map<std::string, std::string>& bindings) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '{') {
            std::size_t j = i + 1;
            while (j < text.size() && is_placeholder_char(text[j])) ++j;
            if (j < text.size() && text[j] == '}' && j > i + 1) {
                const std::string name(text.substr(i + 1, j - i - 1));
                auto it = bindings.find(name);
                if (it == bindings.end()) throw Error(ErrorCode::UnboundPlaceholder, name);
                out += it->second;
                i = j;
                continue;
            }
        }
        out.push_back(text[i]);
    }
    return out;
}

}  // namespace

RenderedPrompt render_prompt(const PromptTemplate& tpl, const std::map<std::string, std::string>& bindings) {
    return {substitute(tpl.system, bindings), substitute(tpl.user, bindings)};
}

std::map<std::string, std::string> builtin_template_hashes() {
    std::map<std::string, std::string> out;
    for (const auto& a : detail::kPromptAssets) out[std::string(a.file)] = sha256_hex(a.text);
    return out;
}

void verify_template_assets(const fs::path& dir) {
    const auto sums_path = dir / "SHA256SUMS";
    if (!fs::exists(sums_path)) throw Error(ErrorCode::TemplateTampered, "missing " + sums_path.string());
    std::map<std::string, std::string> expected;
    std::istringstream sums(read_file(sums_path));
    std::string hash, file;
    while (sums >> hash >> file) expected[file] = hash;

    const auto compiled = builtin_template_hashes();
    for (const auto& [name, compiled_hash] : compiled) {
        auto it = expected.find(name);
        if (it == expected.end()) throw Error(ErrorCode::TemplateTampered, name + " not listed in SHA256SUMS");
        const auto on_disk = sha256_hex(read_file(dir / name));
        if (on_disk != it->second) throw Error(ErrorCode::TemplateTampered, name + " on disk differs from SHA256SUMS");
        if (compiled_hash != it->second) {
            throw Error(ErrorCode::TemplateTampered, name + " compiled copy differs from SHA256SUMS; rebuild");
        }
    }
}

std::string params_to_json(const ChatParams& p) {
    json j = json::object();
    if (p.temperature) j["temperature"] = *p.temperature;
    if (p.max_tokens) j["max_tokens"] = *p.max_tokens;
    return j.dump();
}

std::string prompt_hash(const RenderedPrompt& prompt) {
    std::string bytes = prompt.system;
    bytes.push_back('\x1e');
    bytes += prompt.user;
    return sha256_hex(bytes);
}

std::string safe_path_component(std::string_view name) {
    std::string out;
    for (char c : name) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    if (out.empty() || out == "." || out == "..") out = "_" + out;
    return out;
}

ReplayCache::ReplayCache(fs::path dir) : dir_(std::move(dir)) {}

fs::path ReplayCache::path_for(const std::string& client_id, const RenderedPrompt& prompt) const {
    return dir_ / safe_path_component(client_id) / (prompt_hash(prompt) + ".txt");
}

std::optional<std::string> ReplayCache::lookup(const std::string& client_id, const RenderedPrompt& prompt) const {
    const auto p = path_for(client_id, prompt);
    if (!fs::exists(p)) return std::nullopt;
    return read_file(p);
}

void ReplayCache::store(const std::string& client_id, const RenderedPrompt& prompt, const std::string& reply) const {
    write_file_atomic(path_for(client_id, prompt), reply);
}

ReplayClient::ReplayClient(std::string id, ReplayCache cache) : id_(std::move(id)), cache_(std::move(cache)) {}

std::string ReplayClient::complete(const std::string& system, const std::string& user, const ChatParams&) {
    const RenderedPrompt prompt{system, user};
    if (auto hit = cache_.lookup(id_, prompt)) return *hit;
    throw Error(ErrorCode::ReplayMiss, id_ + " has no reply for prompt " + prompt_hash(prompt));
}

RecordingClient::RecordingClient(std::unique_ptr<ChatClient> inner, ReplayCache cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

std::string RecordingClient::complete(const std::string& system, const std::string& user, const ChatParams& params) {
    const RenderedPrompt prompt{system, user};
    if (auto hit = cache_.lookup(inner_->id(), prompt)) return *hit;
    auto reply = inner_->complete(system, user, params);
    cache_.store(inner_->id(), prompt, reply);
    return reply;
}

namespace {

class OpenAiAdapter final : public ProviderAdapter {
public:
    std::string name() const override { return "openai"; }
    HttpRequestSpec build(const std::string& model, const std::string& api_key, const std::string& system,
                          const std::string& user, const ChatParams& params) const override {
        json body{{"model", model},
                  {"messages", json::array({{{"role", "system"}, {"content", system}},
                                            {{"role", "user"}, {"content", user}}})}};
        if (params.temperature) body["temperature"] = *params.temperature;
        if (params.max_tokens) body["max_tokens"] = *params.max_tokens;
        return {"/v1/chat/completions", {{"Authorization", "Bearer " + api_key}}, body.dump()};
    }
    std::string parse(const std::string& body) const override {
        try {
            return json::parse(body).at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ClientError, std::string("openai reply: ") + e.what());
        }
    }
};

class AnthropicAdapter final : public ProviderAdapter {
public:
    std::string name() const override { return "anthropic"; }
    HttpRequestSpec build(const std::string& model, const std::string& api_key, const std::string& system,
                          const std::string& user, const ChatParams& params) const override {
        json body{{"model", model},
                  {"max_tokens", params.max_tokens.value_or(4096)},
                  {"system", system},
                  {"messages", json::array({{{"role", "user"}, {"content", user}}})}};
        if (params.temperature) body["temperature"] = *params.temperature;
        return {"/v1/messages", {{"x-api-key", api_key}, {"anthropic-version", "2023-06-01"}}, body.dump()};
    }
    std::string parse(const std::string& body) const override {
        try {
            const auto reply = json::parse(body);
            std::string text;
            for (const auto& block : reply.at("content")) {
                if (block.value("type", "") == "text") text += block.at("text").get<std::string>();
            }
            if (text.empty()) throw Error(ErrorCode::ClientError, "anthropic reply has no text block");
            return text;
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ClientError, std::string("anthropic reply: ") + e.what());
        }
    }
};

class GeminiAdapter final : public ProviderAdapter {
public:
    std::string name() const override { return "gemini"; }
    HttpRequestSpec build(const std::string& model, const std::string& api_key, const std::string& system,
                          const std::string& user, const ChatParams& params) const override {
        json body{{"system_instruction", {{"parts", json::array({{{"text", system}}})}}},
                  {"contents", json::array({{{"role", "user"}, {"parts", json::array({{{"text", user}}})}}})}};
        json gen = json::object();
        if (params.temperature) gen["temperature"] = *params.temperature;
        if (params.max_tokens) gen["maxOutputTokens"] = *params.max_tokens;
        if (!gen.empty()) body["generationConfig"] = gen;
        return {"/v1beta/models/" + model + ":generateContent", {{"x-goog-api-key", api_key}}, body.dump()};
    }
    std::string parse(const std::string& body) const override {
        try {
            const auto reply = json::parse(body);
            std::string text;
            for (const auto& part : reply.at("candidates").at(0).at("content").at("parts")) {
                text += part.value("text", "");
            }
            if (text.empty()) throw Error(ErrorCode::ClientError, "gemini reply has no text part");
            return text;
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ClientError, std::string("gemini reply: ") + e.what());
        }
    }
};

}  // namespace

std::unique_ptr<ProviderAdapter> make_adapter(std::string_view name) {
    if (name == "openai") return std::make_unique<OpenAiAdapter>();
    if (name == "anthropic") return std::make_unique<AnthropicAdapter>();
    if (name == "gemini") return std::make_unique<GeminiAdapter>();
    throw Error(ErrorCode::InvalidArgument, "unknown provider adapter '" + std::string(name) + "'");
}

HttpChatClient::HttpChatClient(std::unique_ptr<ProviderAdapter> adapter, HttpClientOptions options)
    : adapter_(std::move(adapter)), options_(std::move(options)) {}

std::string HttpChatClient::complete(const std::string& system, const std::string& user, const ChatParams& params) {
    const auto request = adapter_->build(options_.model, options_.api_key, system, user, params);
    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);
    std::string last_error;
    for (int attempt = 0; attempt < std::max(1, options_.max_attempts); ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(options_.backoff * attempt);
        httplib::Client http(options_.base_url);
        http.set_connection_timeout(options_.timeout);
        http.set_read_timeout(options_.timeout);
        auto res = http.Post(request.path, headers, request.body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw Error(ErrorCode::ClientError, adapter_->name() + " HTTP " + std::to_string(res->status) + ": " + res->body);
        }
        return adapter_->parse(res->body);
    }
    throw Error(ErrorCode::ClientError, adapter_->name() + " gave up after retries: " + last_error);
}

std::unique_ptr<ChatClient> make_chat_client(std::string_view spec, const ClientFactoryOptions& options) {
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == spec.size()) {
        throw Error(ErrorCode::InvalidArgument, "client spec must look like provider:model, got '" + std::string(spec) + "'");
    }
    const std::string provider(spec.substr(0, colon));
    const std::string model(spec.substr(colon + 1));
    if (provider == "replay") return std::make_unique<ReplayClient>(model, ReplayCache(options.replay_dir));

    struct Known {
        const char* adapter;
        const char* base_url;
        const char* env;
    };
    static const std::map<std::string, Known> kProviders = {
        {"openai", {"openai", "https://api.openai.com", "OPENAI"}},
        {"deepseek", {"openai", "https://api.deepseek.com", "DEEPSEEK"}},
        {"anthropic", {"anthropic", "https://api.anthropic.com", "ANTHROPIC"}},
        {"gemini", {"gemini", "https://generativelanguage.googleapis.com", "GEMINI"}},
    };
    auto it = kProviders.find(provider);
    if (it == kProviders.end()) throw Error(ErrorCode::InvalidArgument, "unknown provider '" + provider + "'");
    const std::string env(it->second.env);
    const char* key = std::getenv((env + "_API_KEY").c_str());
    if (key == nullptr || *key == '\0') throw Error(ErrorCode::ClientError, env + "_API_KEY is not set");
    const char* base = std::getenv((env + "_BASE_URL").c_str());
    HttpClientOptions http{.base_url = base && *base ? base : it->second.base_url, .api_key = key, .model = model};
    std::unique_ptr<ChatClient> client = std::make_unique<HttpChatClient>(make_adapter(it->second.adapter), std::move(http));
    if (options.record) client = std::make_unique<RecordingClient>(std::move(client), ReplayCache(options.replay_dir));
    return client;
}

namespace {

[[noreturn]] void fail_parse(std::string_view flow, const std::string& client_id, const std::string& case_id,
                             const std::string& raw, const std::string& why, const FlowOptions& options) {
    if (options.failures_dir) {
        write_file_atomic(*options.failures_dir / std::string(flow) / safe_path_component(client_id) /
                              (safe_path_component(case_id) + ".txt"),
                          raw);
    }
    throw ParseFailureError(std::string(flow) + " reply from " + client_id + " for " + case_id + ": " + why, raw);
}

StructuredResponse five_section_reply(std::string_view flow, const DilemmaCase& dilemma, ChatClient& client,
                                      const RenderedPrompt& prompt, Author author, const FlowOptions& options) {
    const auto raw = client.complete(prompt.system, prompt.user, options.params);
    StructuredResponse r{dilemma.id, std::move(author), {}};
    try {
        r.sections = complete_sections(parse_sectioned_text(raw));
    } catch (const Error& e) {
        fail_parse(flow, client.id(), dilemma.id, raw, e.what(), options);
    }
    return r;
}

}  // namespace

StructuredResponse preprocess_expert(const DilemmaCase& dilemma, const std::string& opinion, ChatClient& client,
                                     const FlowOptions& options) {
    const auto prompt = render_prompt(builtin_template(PromptTemplateId::ExpertPreprocess),
                                      {{"dilemma", dilemma.description}, {"opinion", opinion}});
    return five_section_reply("expert_preprocess", dilemma, client, prompt, {AuthorKind::ExpertRef, client.id()},
                              options);
}

HumanPreprocessResult preprocess_human(const DilemmaCase& dilemma, const std::string& participant,
                                       const std::string& answer, ChatClient& client, const FlowOptions& options) {
    const auto prompt = render_prompt(builtin_template(PromptTemplateId::HumanPreprocess),
                                      {{"dilemma", dilemma.description}, {"answer", answer}});
    const auto raw = client.complete(prompt.system, prompt.user, options.params);
    if (trim(raw).empty()) fail_parse("human_preprocess", client.id(), dilemma.id, raw, "empty reply", options);

    std::string key_factors;
    try {
        const auto sections = parse_sectioned_text(raw);
        for (const auto& [kind, text] : sections) {
            if (kind != SectionKind::KeyFactors) {
                fail_parse("human_preprocess", client.id(), dilemma.id, raw,
                           "reply contains section " + std::string(section_heading(kind)), options);
            }
        }
        key_factors = section_text(sections, SectionKind::KeyFactors);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ParseFailure) throw;
        if (e.code() != ErrorCode::NoSectionsFound) {
            fail_parse("human_preprocess", client.id(), dilemma.id, raw, e.what(), options);
        }
        // The human template asks for a plain paragraph.
        key_factors = std::string(trim(raw));
    }

    HumanPreprocessResult result{{dilemma.id, {AuthorKind::Human, participant}, {{SectionKind::KeyFactors, key_factors}}},
                                 {}};
    const auto reply_tokens = tokenize(key_factors).size();
    const auto answer_tokens = tokenize(answer).size();
    if (reply_tokens > 3 * answer_tokens) {
        result.warnings.push_back(participant + "/" + dilemma.id + ": reply has " + std::to_string(reply_tokens) +
                                  " tokens, more than three times the answer's " + std::to_string(answer_tokens));
    }
    return result;
}

StructuredResponse generate_llm_answer(const DilemmaCase& dilemma, ChatClient& client, const FlowOptions& options) {
    const auto prompt =
        render_prompt(builtin_template(PromptTemplateId::LlmGenerate), {{"dilemma", dilemma.description}});
    return five_section_reply("llm_generate", dilemma, client, prompt, {AuthorKind::Llm, client.id()}, options);
}

ReferenceSet build_reference_set(const DilemmaCase& dilemma, const std::string& opinion,
                                 const std::vector<ChatClient*>& clients, const FlowOptions& options) {
    ReferenceSet set{dilemma.id, {}};
    for (auto* client : clients) set.references.push_back(preprocess_expert(dilemma, opinion, *client, options));
    return set;
}

namespace {

template <typename Job>
BatchOutcome run_batch(std::size_t count, std::size_t concurrency, Job job) {
    BatchOutcome outcome;
    std::mutex mutex;
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            BatchOutcome local;
            job(i, local);
            std::lock_guard lock(mutex);
            for (auto& w : local.written) outcome.written.push_back(std::move(w));
            for (auto& f : local.failures) outcome.failures.push_back(std::move(f));
            for (auto& w : local.warnings) outcome.warnings.push_back(std::move(w));
        }
    };
    {
        std::vector<std::jthread> pool;
        const std::size_t threads = std::clamp<std::size_t>(concurrency, 1, std::max<std::size_t>(1, count));
        for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }
    std::sort(outcome.written.begin(), outcome.written.end());
    std::sort(outcome.failures.begin(), outcome.failures.end());
    std::sort(outcome.warnings.begin(), outcome.warnings.end());
    return outcome;
}

void write_flow_manifest(const fs::path& corpus_root, std::string_view flow, ChatClient& client,
                         const BatchOptions& options, const BatchOutcome& outcome) {
    json j{{"flow", flow},
           {"client", client.id()},
           {"params", json::parse(params_to_json(options.flow.params))},
           {"templates", builtin_template_hashes()},
           {"written", outcome.written.size()},
           {"failures", outcome.failures.size()}};
    write_file_atomic(corpus_root / "manifests" / (std::string(flow) + "-" + safe_path_component(client.id()) + ".json"),
                      j.dump(2) + "\n");
}

FlowOptions with_failures_dir(const fs::path& corpus_root, const FlowOptions& flow) {
    FlowOptions out = flow;
    if (!out.failures_dir) out.failures_dir = corpus_root / "failures";
    return out;
}

}  // namespace

BatchOutcome generate_batch(const std::vector<DilemmaCase>& cases, ChatClient& client, const fs::path& corpus_root,
                            const BatchOptions& options) {
    const auto flow = with_failures_dir(corpus_root, options.flow);
    auto outcome = run_batch(cases.size(), options.concurrency, [&](std::size_t i, BatchOutcome& out) {
        const auto& c = cases[i];
        try {
            const auto r = generate_llm_answer(c, client, flow);
            const auto path = corpus_root / "responses" / safe_path_component(client.id()) / (c.id + ".txt");
            write_file_atomic(path, render_sectioned_text(r.sections));
            out.written.push_back(path.string());
        } catch (const Error& e) {
            out.failures.emplace_back(c.id, e.what());
        }
    });
    write_flow_manifest(corpus_root, "llm_generate", client, options, outcome);
    return outcome;
}

BatchOutcome preprocess_expert_batch(const std::vector<DilemmaCase>& cases, ChatClient& client,
                                     const fs::path& corpus_root, const BatchOptions& options) {
    const auto flow = with_failures_dir(corpus_root, options.flow);
    auto outcome = run_batch(cases.size(), options.concurrency, [&](std::size_t i, BatchOutcome& out) {
        const auto& c = cases[i];
        const auto raw_path = corpus_root / "raw" / "expert" / (c.id + ".txt");
        if (!fs::exists(raw_path)) {
            out.failures.emplace_back(c.id, "no expert opinion at " + raw_path.string());
            return;
        }
        try {
            const auto r = preprocess_expert(c, read_file(raw_path), client, flow);
            const auto path = corpus_root / "references" / c.id / (safe_path_component(client.id()) + ".txt");
            write_file_atomic(path, render_sectioned_text(r.sections));
            out.written.push_back(path.string());
        } catch (const Error& e) {
            out.failures.emplace_back(c.id, e.what());
        }
    });
    write_flow_manifest(corpus_root, "expert_preprocess", client, options, outcome);
    return outcome;
}

BatchOutcome preprocess_human_batch(const std::vector<DilemmaCase>& cases, ChatClient& client,
                                    const fs::path& corpus_root, const BatchOptions& options) {
    const auto flow = with_failures_dir(corpus_root, options.flow);
    struct Job {
        const DilemmaCase* dilemma;
        std::string participant;
        fs::path raw;
    };
    std::vector<Job> jobs;
    const auto raw_root = corpus_root / "raw" / "human";
    std::vector<fs::path> participants;
    if (fs::is_directory(raw_root)) {
        for (const auto& e : fs::directory_iterator(raw_root)) {
            if (e.is_directory()) participants.push_back(e.path());
        }
    }
    std::sort(participants.begin(), participants.end());
    for (const auto& dir : participants) {
        for (const auto& c : cases) {
            const auto raw = dir / (c.id + ".txt");
            if (fs::exists(raw)) jobs.push_back({&c, dir.filename().string(), raw});
        }
    }
    auto outcome = run_batch(jobs.size(), options.concurrency, [&](std::size_t i, BatchOutcome& out) {
        const auto& job = jobs[i];
        try {
            auto result = preprocess_human(*job.dilemma, job.participant, read_file(job.raw), client, flow);
            const auto path = corpus_root / "humans" / job.participant / (job.dilemma->id + ".txt");
            write_file_atomic(path, render_present_sections(result.response.sections));
            out.written.push_back(path.string());
            for (auto& w : result.warnings) out.warnings.push_back(std::move(w));
        } catch (const Error& e) {
            out.failures.emplace_back(job.dilemma->id, job.participant + ": " + e.what());
        }
    });
    write_flow_manifest(corpus_root, "human_preprocess", client, options, outcome);
    return outcome;
}

std::size_t ingest_raw(const fs::path& input_json, const fs::path& corpus_root) {
    json items;
    try {
        items = json::parse(read_file(input_json));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, input_json.string() + ": " + e.what());
    }
    if (!items.is_array()) throw Error(ErrorCode::MalformedRecord, "ingest input must be a JSON array");
    std::size_t written = 0;
    for (const auto& item : items) {
        json case_json{{"id", item.value("id", "")},
                       {"title", item.value("title", "")},
                       {"description", item.value("description", "")},
                       {"category", item.value("category", "")},
                       {"source", item.value("source", "georgia_ctsa")}};
        const auto c = case_from_json(case_json.dump());
        write_file_atomic(corpus_root / "cases" / (c.id + ".json"), case_to_json(c));
        if (item.contains("expert_opinion")) {
            write_file_atomic(corpus_root / "raw" / "expert" / (c.id + ".txt"), item.at("expert_opinion").get<std::string>());
        }
        if (item.contains("human_answers")) {
            for (const auto& [participant, text] : item.at("human_answers").items()) {
                write_file_atomic(corpus_root / "raw" / "human" / safe_path_component(participant) / (c.id + ".txt"),
                                  text.get<std::string>());
            }
        }
        ++written;
    }
    return written;
}

std::vector<DilemmaCase> load_cases(const fs::path& corpus_root) {
    std::vector<fs::path> files;
    const auto dir = corpus_root / "cases";
    if (fs::is_directory(dir)) {
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<DilemmaCase> cases;
    for (const auto& f : files) cases.push_back(case_from_json(read_file(f)));
    return cases;
}

}  // namespace dilemma
