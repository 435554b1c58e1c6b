#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dilemma {

struct EmbeddingVector {
    std::vector<double> values;
    std::string provider_id;

    std::size_t dim() const { return values.size(); }
};

/// Produces sentence embeddings. Implementations must be deterministic: the
/// same text always yields the same vector for one instance.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::string id() const = 0;
    virtual std::size_t dim() const = 0;
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;

    EmbeddingVector embed_one(const std::string& text);
};

/// Cosine of two vectors. Zero vectors give 0 unless both are zero.
/// Throws DimensionMismatch.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Cosine of the two embeddings, negative values clamped to 0.
double embed_semantic_similarity(const std::string& candidate, const std::string& reference,
                                 EmbeddingProvider& provider);

/// L2-normalized hashed character-trigram counts. Texts shorter than three
/// scalars hash as one feature; the empty string maps to a fixed sentinel
/// feature so every output is a unit vector. Throws InvalidArgument for dim < 8.
EmbeddingVector fallback_embed(std::string_view text, std::size_t dim = 256);

class FallbackEmbedder final : public EmbeddingProvider {
public:
    explicit FallbackEmbedder(std::size_t dim = 256);

    std::string id() const override;
    std::size_t dim() const override { return dim_; }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

private:
    std::size_t dim_;
};

struct RemoteEmbedderOptions {
    /// Base URL such as http://127.0.0.1:8080; the client posts to <endpoint>/embed.
    std::string endpoint;
    std::size_t max_batch = 64;
    int max_attempts = 3;
    std::chrono::milliseconds backoff{200};
    std::chrono::seconds timeout{30};
};

/// Posts {"texts": [...]} to /embed and expects {"dim", "vectors", "model"}.
std::vector<EmbeddingVector> remote_embed(std::span<const std::string> texts, const RemoteEmbedderOptions& options);

class RemoteEmbedder final : public EmbeddingProvider {
public:
    explicit RemoteEmbedder(RemoteEmbedderOptions options);

    /// "remote:<model>" once the service has answered, else "remote:<endpoint>".
    std::string id() const override;
    std::size_t dim() const override;
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

private:
    RemoteEmbedderOptions options_;
    mutable std::mutex mutex_;
    mutable std::string model_;
    mutable std::size_t dim_ = 0;
};

/// Memoizes another provider by SHA-256 of the text. Safe for concurrent use.
class CachingProvider final : public EmbeddingProvider {
public:
    explicit CachingProvider(std::unique_ptr<EmbeddingProvider> inner);

    std::string id() const override { return inner_->id(); }
    std::size_t dim() const override { return inner_->dim(); }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

    std::size_t cached_entries() const;
    std::size_t misses() const;

private:
    std::unique_ptr<EmbeddingProvider> inner_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, EmbeddingVector> cache_;
    std::size_t misses_ = 0;
};

/// Embeds a probe batch twice and throws NonDeterministicProvider on any difference.
void verify_deterministic(EmbeddingProvider& provider);

/// Remote provider when EMBED_ENDPOINT is set, fallback otherwise; wrapped in
/// a cache and checked for determinism.
std::unique_ptr<EmbeddingProvider> make_provider_from_env(std::size_t fallback_dim = 256);

}  // namespace dilemma
