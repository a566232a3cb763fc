#include "evopat/embed.hpp"

#include "evopat/errors.hpp"
#include "evopat/http_client.hpp"
#include "evopat/kernels.hpp"
#include "evopat/tokenize.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>

namespace evopat {

EmbeddingVector EmbeddingVector::normalized(std::vector<float> values) {
    if (values.empty()) throw std::invalid_argument("embedding vector must be non-empty");
    for (const float v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("embedding vector has non-finite value");
    }
    const double norm = std::sqrt(kern::squared_norm(values.data(), values.size()));
    if (norm == 0.0) throw std::invalid_argument("cannot normalize zero vector");
    for (float& v : values) v = static_cast<float>(v / norm);
    return EmbeddingVector(std::move(values));
}

double EmbeddingVector::cosine(const EmbeddingVector& other) const {
    if (dim() != other.dim()) {
        raise(ErrorCode::DimensionMismatch,
              "cosine over dims " + std::to_string(dim()) + " and " + std::to_string(other.dim()));
    }
    return kern::dot(data(), other.data(), dim());
}

std::vector<EmbeddingVector> EmbeddingProvider::embed_batch(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const std::string& text : texts) out.push_back(embed(text));
    return out;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const char c : data) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

LocalHashEmbedder::LocalHashEmbedder(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw std::invalid_argument("embedder dim must be positive");
}

std::size_t LocalHashEmbedder::bucket(std::string_view ngram) const {
    return static_cast<std::size_t>(fnv1a64(ngram) % dim_);
}

EmbeddingVector LocalHashEmbedder::embed(std::string_view text) {
    const std::vector<std::string> tokens = tokenize(text);
    if (tokens.empty()) raise(ErrorCode::EmptyInput, "no tokens to embed");
    std::vector<float> values(dim_, 0.0f);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        values[bucket(tokens[i])] += 1.0f;
        if (i + 1 < tokens.size()) {
            values[bucket(tokens[i] + '\x1f' + tokens[i + 1])] += 1.0f;
        }
    }
    return EmbeddingVector::normalized(std::move(values));
}

namespace {

class HttpEmbedder : public EmbeddingProvider {
public:
    explicit HttpEmbedder(HttpEmbedderConfig config) : config_(std::move(config)) {
        if (config_.endpoint.empty()) {
            raise(ErrorCode::ProviderUnavailable, "embedding endpoint not configured");
        }
        if (config_.dim == 0) {
            raise(ErrorCode::ProviderUnavailable, "embedding dim not declared");
        }
    }

    std::size_t dim() const override { return config_.dim; }

    EmbeddingVector embed(std::string_view text) override {
        return embed_batch({std::string(text)}).front();
    }

    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override {
        nlohmann::json request;
        request["input"] = texts;

        http::Headers headers;
        if (!config_.auth_env.empty()) {
            const char* key = std::getenv(config_.auth_env.c_str());
            if (key == nullptr || *key == '\0') {
                raise(ErrorCode::ProviderUnavailable,
                      "auth env var " + config_.auth_env + " is not set");
            }
            headers.emplace_back("Authorization", std::string("Bearer ") + key);
        }

        const http::Response response =
            http::post_json(config_.endpoint, request.dump(), headers, config_.timeout_seconds);
        if (response.transport_failed()) {
            raise(ErrorCode::ProviderUnavailable, "embedding request failed: " + response.error);
        }
        if (response.status != 200) {
            raise(ErrorCode::ProviderUnavailable,
                  "embedding endpoint returned status " + std::to_string(response.status));
        }

        nlohmann::json body = nlohmann::json::parse(response.body, nullptr, false);
        if (body.is_discarded() || !body.contains("data") || !body["data"].is_array() ||
            body["data"].size() != texts.size()) {
            raise(ErrorCode::ProviderUnavailable, "malformed embedding response");
        }

        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (const auto& item : body["data"]) {
            if (!item.contains("embedding") || !item["embedding"].is_array()) {
                raise(ErrorCode::ProviderUnavailable, "malformed embedding response entry");
            }
            std::vector<float> values;
            values.reserve(item["embedding"].size());
            for (const auto& v : item["embedding"]) values.push_back(v.get<float>());
            if (values.size() != config_.dim) {
                raise(ErrorCode::DimensionMismatch,
                      "provider returned dim " + std::to_string(values.size()) + ", declared " +
                          std::to_string(config_.dim));
            }
            out.push_back(EmbeddingVector::normalized(std::move(values)));
        }
        return out;
    }

private:
    HttpEmbedderConfig config_;
};

} // namespace

std::unique_ptr<EmbeddingProvider> make_http_embedder(HttpEmbedderConfig config) {
    return std::make_unique<HttpEmbedder>(std::move(config));
}

} // namespace evopat
