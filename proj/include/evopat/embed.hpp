#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace evopat {

// Unit-norm f32 vector; normalization is enforced at construction.
class EmbeddingVector {
public:
    static EmbeddingVector normalized(std::vector<float> values);

    std::size_t dim() const { return values_.size(); }
    const std::vector<float>& values() const { return values_; }
    const float* data() const { return values_.data(); }

    // cosine similarity; dims must match
    double cosine(const EmbeddingVector& other) const;

private:
    explicit EmbeddingVector(std::vector<float> values) : values_(std::move(values)) {}
    std::vector<float> values_;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dim() const = 0;
    virtual EmbeddingVector embed(std::string_view text) = 0;
    virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts);
};

// Deterministic offline embedder: feature-hashed bag of token 1/2-grams,
// L2-normalized. Same text always yields the same vector.
class LocalHashEmbedder : public EmbeddingProvider {
public:
    explicit LocalHashEmbedder(std::size_t dim = 4096);

    std::size_t dim() const override { return dim_; }
    EmbeddingVector embed(std::string_view text) override;

    // Bucket assignment for one n-gram, exposed so tests can verify
    // collision-freedom independently.
    std::size_t bucket(std::string_view ngram) const;

private:
    std::size_t dim_;
};

struct HttpEmbedderConfig {
    std::string endpoint;     // e.g. http://host:port/v1/embeddings
    std::string auth_env;     // env var holding the bearer token; may be empty
    std::size_t dim = 0;      // declared dimension; mismatches are errors
    int timeout_seconds = 30;
};

// POSTs {"input": [texts]} and reads {"data": [{"embedding": [...]}]}.
std::unique_ptr<EmbeddingProvider> make_http_embedder(HttpEmbedderConfig config);

std::uint64_t fnv1a64(std::string_view data);

} // namespace evopat
