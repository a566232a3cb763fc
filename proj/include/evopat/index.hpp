#pragma once

#include "evopat/embed.hpp"
#include "evopat/ingest.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace evopat {

struct Chunk {
    std::string doc_id;
    std::size_t seq_no = 0;
    std::string text;
    std::size_t token_begin = 0; // [begin, end) into the document token sequence
    std::size_t token_end = 0;
};

// Sliding token windows of `chunk_size` advancing by `chunk_size - overlap`.
// Consecutive chunks share exactly `overlap` tokens except the final one.
std::vector<Chunk> chunk_document(const CleanDocument& doc, std::size_t chunk_size,
                                  std::size_t overlap);

struct SearchHit {
    std::string chunk_key;
    double similarity = 0.0;
};

// Exact cosine top-k over unit-norm vectors (flat scan, SIMD-dispatched dot
// products). Reads are thread-safe; add() requires exclusive access.
class VectorIndex {
public:
    explicit VectorIndex(std::size_t dim);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return keys_.size(); }
    const std::vector<std::string>& keys() const { return keys_; }

    void add(std::string chunk_key, const EmbeddingVector& vector);

    // min(k, size()) hits sorted by similarity descending, ties broken by
    // ascending chunk_key.
    std::vector<SearchHit> search(const EmbeddingVector& query, std::size_t k) const;

    void save(const std::string& path) const;
    static VectorIndex load(const std::string& path);

    const float* row(std::size_t i) const { return data_.data() + i * dim_; }

private:
    std::size_t dim_;
    std::vector<std::string> keys_;
    std::vector<float> data_; // row-major, keys_.size() x dim_
};

} // namespace evopat
