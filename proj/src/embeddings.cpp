#include "dilemma/embeddings.hpp"

#include "dilemma/error.hpp"
#include "dilemma/util.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

using nlohmann::json;

namespace dilemma {

EmbeddingVector EmbeddingProvider::embed_one(const std::string& text) {
    auto out = embed(std::span<const std::string>(&text, 1));
    if (out.size() != 1) throw Error(ErrorCode::MalformedServiceReply, "expected one vector");
    return std::move(out.front());
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorCode::DimensionMismatch, std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) return (na == 0.0 && nb == 0.0) ? 1.0 : 0.0;
    return dot / std::sqrt(na * nb);
}

double embed_semantic_similarity(const std::string& candidate, const std::string& reference,
                                 EmbeddingProvider& provider) {
    const std::string pair[2] = {candidate, reference};
    auto vectors = provider.embed(pair);
    if (vectors.size() != 2) throw Error(ErrorCode::MalformedServiceReply, "expected two vectors");
    const double cos = cosine_similarity(vectors[0], vectors[1]);
    if (std::isnan(cos)) return 0.0;
    return std::clamp(cos, 0.0, 1.0);
}

EmbeddingVector fallback_embed(std::string_view text, std::size_t dim) {
    if (dim < 8) throw Error(ErrorCode::InvalidArgument, "fallback embedding dim must be >= 8");
    EmbeddingVector v{std::vector<double>(dim, 0.0), "fallback-trigram-" + std::to_string(dim)};
    const auto scalars = utf8_decode(text);
    const auto bump = [&](std::u32string_view gram) { v.values[fnv1a64(utf8_encode(gram)) % dim] += 1.0; };
    if (scalars.empty()) {
        v.values[fnv1a64("\x01<empty>") % dim] = 1.0;
        return v;
    }
    if (scalars.size() < 3) {
        bump(scalars);
    } else {
        for (std::size_t i = 0; i + 3 <= scalars.size(); ++i) bump(std::u32string_view(scalars).substr(i, 3));
    }
    double norm = 0.0;
    for (double x : v.values) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v.values) x /= norm;
    return v;
}

FallbackEmbedder::FallbackEmbedder(std::size_t dim) : dim_(dim) {
    if (dim < 8) throw Error(ErrorCode::InvalidArgument, "fallback embedding dim must be >= 8");
}

std::string FallbackEmbedder::id() const { return "fallback-trigram-" + std::to_string(dim_); }

std::vector<EmbeddingVector> FallbackEmbedder::embed(std::span<const std::string> texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(fallback_embed(t, dim_));
    return out;
}

namespace {

struct ServiceReply {
    std::size_t dim = 0;
    std::string model;
    std::vector<std::vector<double>> vectors;
};

ServiceReply decode_reply(const std::string& body, std::size_t expected_count) {
    ServiceReply reply;
    try {
        const auto j = json::parse(body);
        reply.dim = j.at("dim").get<std::size_t>();
        reply.model = j.at("model").get<std::string>();
        reply.vectors = j.at("vectors").get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedServiceReply, e.what());
    }
    if (reply.vectors.size() != expected_count) {
        throw Error(ErrorCode::MalformedServiceReply, "expected " + std::to_string(expected_count) +
                                                          " vectors, got " + std::to_string(reply.vectors.size()));
    }
    if (reply.dim == 0) throw Error(ErrorCode::MalformedServiceReply, "dim must be positive");
    for (const auto& vec : reply.vectors) {
        if (vec.size() != reply.dim) throw Error(ErrorCode::MalformedServiceReply, "vector length differs from dim");
        if (!std::all_of(vec.begin(), vec.end(), [](double x) { return std::isfinite(x); })) {
            throw Error(ErrorCode::MalformedServiceReply, "non-finite vector component");
        }
    }
    return reply;
}

ServiceReply post_batch(std::span<const std::string> texts, const RemoteEmbedderOptions& options) {
    const std::string body = json{{"texts", std::vector<std::string>(texts.begin(), texts.end())}}.dump();
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt < std::max(1, options.max_attempts); ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(options.backoff * attempt);
        httplib::Client client(options.endpoint);
        client.set_connection_timeout(options.timeout);
        client.set_read_timeout(options.timeout);
        auto res = client.Post("/embed", body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500 || res->status == 429) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw Error(ErrorCode::ProviderUnavailable, options.endpoint + " answered HTTP " + std::to_string(res->status));
        }
        return decode_reply(res->body, texts.size());
    }
    throw Error(ErrorCode::ProviderUnavailable, options.endpoint + ": " + last_error);
}

}  // namespace

std::vector<EmbeddingVector> remote_embed(std::span<const std::string> texts, const RemoteEmbedderOptions& options) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    const std::size_t batch = std::max<std::size_t>(1, options.max_batch);
    std::size_t dim = 0;
    for (std::size_t start = 0; start < texts.size(); start += batch) {
        const auto chunk = texts.subspan(start, std::min(batch, texts.size() - start));
        auto reply = post_batch(chunk, options);
        if (dim != 0 && reply.dim != dim) throw Error(ErrorCode::DimensionMismatch, "dim changed between batches");
        dim = reply.dim;
        for (auto& vec : reply.vectors) out.push_back({std::move(vec), "remote:" + reply.model});
    }
    return out;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderOptions options) : options_(std::move(options)) {}

std::string RemoteEmbedder::id() const {
    std::lock_guard lock(mutex_);
    return model_.empty() ? "remote:" + options_.endpoint : "remote:" + model_;
}

std::size_t RemoteEmbedder::dim() const {
    {
        std::lock_guard lock(mutex_);
        if (dim_ != 0) return dim_;
    }
    const std::string probe = "dimension probe";
    auto v = remote_embed(std::span<const std::string>(&probe, 1), options_);
    std::lock_guard lock(mutex_);
    dim_ = v.front().dim();
    model_ = v.front().provider_id.substr(std::string("remote:").size());
    return dim_;
}

std::vector<EmbeddingVector> RemoteEmbedder::embed(std::span<const std::string> texts) {
    auto out = remote_embed(texts, options_);
    if (!out.empty()) {
        std::lock_guard lock(mutex_);
        if (dim_ != 0 && out.front().dim() != dim_) throw Error(ErrorCode::DimensionMismatch, "provider changed dim");
        dim_ = out.front().dim();
        model_ = out.front().provider_id.substr(std::string("remote:").size());
    }
    return out;
}

CachingProvider::CachingProvider(std::unique_ptr<EmbeddingProvider> inner) : inner_(std::move(inner)) {}

std::vector<EmbeddingVector> CachingProvider::embed(std::span<const std::string> texts) {
    std::vector<std::string> keys;
    keys.reserve(texts.size());
    for (const auto& t : texts) keys.push_back(sha256_hex(t));

    std::vector<std::string> missing;
    std::vector<std::string> missing_keys;
    {
        std::lock_guard lock(mutex_);
        for (std::size_t i = 0; i < texts.size(); ++i) {
            if (!cache_.contains(keys[i]) &&
                std::find(missing_keys.begin(), missing_keys.end(), keys[i]) == missing_keys.end()) {
                missing.push_back(texts[i]);
                missing_keys.push_back(keys[i]);
            }
        }
    }
    if (!missing.empty()) {
        auto fresh = inner_->embed(missing);
        if (fresh.size() != missing.size()) throw Error(ErrorCode::MalformedServiceReply, "provider dropped vectors");
        std::lock_guard lock(mutex_);
        for (std::size_t i = 0; i < fresh.size(); ++i) {
            if (cache_.try_emplace(missing_keys[i], std::move(fresh[i])).second) ++misses_;
        }
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    std::lock_guard lock(mutex_);
    for (const auto& k : keys) out.push_back(cache_.at(k));
    return out;
}

std::size_t CachingProvider::cached_entries() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

std::size_t CachingProvider::misses() const {
    std::lock_guard lock(mutex_);
    return misses_;
}

void verify_deterministic(EmbeddingProvider& provider) {
    const std::vector<std::string> probe = {"determinism probe", "", "Ethical dilemmas reveal values."};
    const auto first = provider.embed(probe);
    const auto second = provider.embed(probe);
    if (first.size() != probe.size() || second.size() != probe.size()) {
        throw Error(ErrorCode::MalformedServiceReply, "probe returned wrong vector count");
    }
    for (std::size_t i = 0; i < probe.size(); ++i) {
        if (first[i].values != second[i].values) {
            throw Error(ErrorCode::NonDeterministicProvider, provider.id() + " returned differing vectors");
        }
    }
}

std::unique_ptr<EmbeddingProvider> make_provider_from_env(std::size_t fallback_dim) {
    std::unique_ptr<EmbeddingProvider> inner;
    if (const char* endpoint = std::getenv("EMBED_ENDPOINT"); endpoint != nullptr && *endpoint != '\0') {
        inner = std::make_unique<RemoteEmbedder>(RemoteEmbedderOptions{.endpoint = endpoint});
    } else {
        inner = std::make_unique<FallbackEmbedder>(fallback_dim);
    }
    verify_deterministic(*inner);
    return std::make_unique<CachingProvider>(std::move(inner));
}

}  // namespace dilemma
