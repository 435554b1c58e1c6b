#pragma once

#include "dilemma/corpus.hpp"
#include "dilemma/error.hpp"

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dilemma {

// Prompt templates -------------------------------------------------------------

enum class PromptTemplateId { ExpertPreprocess, HumanPreprocess, LlmGenerate };

std::string_view to_string(PromptTemplateId id);
PromptTemplateId template_from_string(std::string_view name);

struct PromptTemplate {
    PromptTemplateId id;
    std::string system;
    std::string user;
};

/// The templates compiled from assets/prompts. Placeholders are `{name}`:
/// {dilemma}, {opinion} (expert), {answer} (human).
const PromptTemplate& builtin_template(PromptTemplateId id);

struct RenderedPrompt {
    std::string system;
    std::string user;
};

/// Placeholder names in order of first appearance.
std::vector<std::string> placeholders(std::string_view text);

/// Substitutes every `{name}`; throws UnboundPlaceholder for a missing binding.
RenderedPrompt render_prompt(const PromptTemplate& tpl, const std::map<std::string, std::string>& bindings);

/// Checks every template file in `dir` against its SHA256SUMS entry and
/// against the compiled-in copy. Throws TemplateTampered.
void verify_template_assets(const std::filesystem::path& dir);

/// SHA-256 of each compiled-in template file, keyed by file name.
std::map<std::string, std::string> builtin_template_hashes();

// Chat clients -----------------------------------------------------------------

struct ChatParams {
    std::optional<double> temperature;
    std::optional<int> max_tokens;
};

std::string params_to_json(const ChatParams& p);

class ChatClient {
public:
    virtual ~ChatClient() = default;
    /// Model identity; used as the author name and the cache namespace.
    virtual std::string id() const = 0;
    virtual std::string complete(const std::string& system, const std::string& user, const ChatParams& params) = 0;
};

/// Cache key: SHA-256 over system prompt, a 0x1E separator, and user prompt.
std::string prompt_hash(const RenderedPrompt& prompt);

/// Replies on disk at <dir>/<client id>/<prompt hash>.txt.
class ReplayCache {
public:
    explicit ReplayCache(std::filesystem::path dir);

    std::optional<std::string> lookup(const std::string& client_id, const RenderedPrompt& prompt) const;
    /// Atomic write-temp-then-rename.
    void store(const std::string& client_id, const RenderedPrompt& prompt, const std::string& reply) const;
    std::filesystem::path path_for(const std::string& client_id, const RenderedPrompt& prompt) const;

private:
    std::filesystem::path dir_;
};

/// Serves only cached replies; throws ReplayMiss otherwise.
class ReplayClient final : public ChatClient {
public:
    ReplayClient(std::string id, ReplayCache cache);
    std::string id() const override { return id_; }
    std::string complete(const std::string& system, const std::string& user, const ChatParams& params) override;

private:
    std::string id_;
    ReplayCache cache_;
};

/// Serves cached replies and records fresh ones from the wrapped client.
class RecordingClient final : public ChatClient {
public:
    RecordingClient(std::unique_ptr<ChatClient> inner, ReplayCache cache);
    std::string id() const override { return inner_->id(); }
    std::string complete(const std::string& system, const std::string& user, const ChatParams& params) override;

private:
    std::unique_ptr<ChatClient> inner_;
    ReplayCache cache_;
};

/// One provider's request and response shapes.
struct HttpRequestSpec {
    std::string path;
    std::map<std::string, std::string> headers;
    std::string body;
};

class ProviderAdapter {
public:
    virtual ~ProviderAdapter() = default;
    virtual std::string name() const = 0;
    virtual HttpRequestSpec build(const std::string& model, const std::string& api_key, const std::string& system,
                                  const std::string& user, const ChatParams& params) const = 0;
    /// Throws ClientError when the body has no completion text.
    virtual std::string parse(const std::string& body) const = 0;
};

/// "openai" (also DeepSeek and other compatible servers), "anthropic", "gemini".
std::unique_ptr<ProviderAdapter> make_adapter(std::string_view name);

struct HttpClientOptions {
    std::string base_url;
    std::string api_key;
    std::string model;
    int max_attempts = 4;
    std::chrono::milliseconds backoff{500};
    std::chrono::seconds timeout{120};
};

/// Generic chat-completion client over a provider adapter. Retries transport
/// errors, 429 and 5xx with linear backoff.
class HttpChatClient final : public ChatClient {
public:
    HttpChatClient(std::unique_ptr<ProviderAdapter> adapter, HttpClientOptions options);
    std::string id() const override { return options_.model; }
    std::string complete(const std::string& system, const std::string& user, const ChatParams& params) override;

private:
    std::unique_ptr<ProviderAdapter> adapter_;
    HttpClientOptions options_;
};

struct ClientFactoryOptions {
    std::filesystem::path replay_dir;
    /// Wrap live clients so their replies land in the replay cache.
    bool record = false;
};

/// "replay:<id>", or "<provider>:<model>" with provider in openai, deepseek,
/// anthropic, gemini. Keys come from <PROVIDER>_API_KEY, base URLs from
/// <PROVIDER>_BASE_URL.
std::unique_ptr<ChatClient> make_chat_client(std::string_view spec, const ClientFactoryOptions& options);

// Preprocessing and generation flows ------------------------------------------

/// A reply that could not be parsed. The raw text is kept.
class ParseFailureError : public Error {
public:
    ParseFailureError(const std::string& detail, std::string raw)
        : Error(ErrorCode::ParseFailure, detail), raw_(std::move(raw)) {}
    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

struct FlowOptions {
    ChatParams params;
    /// When set, unparseable replies are archived under <dir>/<flow>/<client>/<case>.txt.
    std::optional<std::filesystem::path> failures_dir;
};

StructuredResponse preprocess_expert(const DilemmaCase& dilemma, const std::string& opinion, ChatClient& client,
                                     const FlowOptions& options = {});

struct HumanPreprocessResult {
    StructuredResponse response;
    std::vector<std::string> warnings;
};

/// The reply becomes the participant's KeyFactors section. Replies longer than
/// three times the answer (in tokens) are kept with a warning.
HumanPreprocessResult preprocess_human(const DilemmaCase& dilemma, const std::string& participant,
                                       const std::string& answer, ChatClient& client, const FlowOptions& options = {});

StructuredResponse generate_llm_answer(const DilemmaCase& dilemma, ChatClient& client, const FlowOptions& options = {});

/// One reference per client, in client order.
ReferenceSet build_reference_set(const DilemmaCase& dilemma, const std::string& opinion,
                                 const std::vector<ChatClient*>& clients, const FlowOptions& options = {});

struct BatchOptions {
    FlowOptions flow;
    std::size_t concurrency = 4;
};

struct BatchOutcome {
    std::vector<std::string> written;
    /// (case id, message)
    std::vector<std::pair<std::string, std::string>> failures;
    std::vector<std::string> warnings;
};

/// Writes responses/<client>/<case>.txt for every case, plus a generation
/// manifest under manifests/.
BatchOutcome generate_batch(const std::vector<DilemmaCase>& cases, ChatClient& client,
                            const std::filesystem::path& corpus_root, const BatchOptions& options = {});

/// Reads raw/expert/<case>.txt and writes references/<case>/<client>.txt.
BatchOutcome preprocess_expert_batch(const std::vector<DilemmaCase>& cases, ChatClient& client,
                                     const std::filesystem::path& corpus_root, const BatchOptions& options = {});

/// Reads raw/human/<participant>/<case>.txt and writes humans/<participant>/<case>.txt.
BatchOutcome preprocess_human_batch(const std::vector<DilemmaCase>& cases, ChatClient& client,
                                    const std::filesystem::path& corpus_root, const BatchOptions& options = {});

/// Builds a corpus skeleton from a JSON array of
/// {id, title, description, category, source, expert_opinion, human_answers: {participant: text}}.
/// Returns the number of cases written.
std::size_t ingest_raw(const std::filesystem::path& input_json, const std::filesystem::path& corpus_root);

/// Loads every cases/*.json under a corpus root without requiring references.
std::vector<DilemmaCase> load_cases(const std::filesystem::path& corpus_root);

/// Client ids and participant names as directory names.
std::string safe_path_component(std::string_view name);

}  // namespace dilemma
