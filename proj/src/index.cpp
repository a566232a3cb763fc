#include "evopat/index.hpp"

#include "evopat/errors.hpp"
#include "evopat/kernels.hpp"
#include "evopat/tokenize.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>
#include <unordered_set>

namespace evopat {

std::vector<Chunk> chunk_document(const CleanDocument& doc, std::size_t chunk_size,
                                  std::size_t overlap) {
    if (chunk_size == 0 || overlap >= chunk_size) {
        raise(ErrorCode::InvalidChunkParams,
              "need 0 <= overlap < chunk_size, got chunk_size=" + std::to_string(chunk_size) +
                  " overlap=" + std::to_string(overlap));
    }
    const std::vector<std::string> tokens = tokenize(doc.text);
    std::vector<Chunk> chunks;
    if (tokens.empty()) return chunks;

    const std::size_t stride = chunk_size - overlap;
    std::size_t begin = 0;
    while (true) {
        const std::size_t end = std::min(begin + chunk_size, tokens.size());
        Chunk chunk;
        chunk.doc_id = doc.doc_id;
        chunk.seq_no = chunks.size();
        chunk.token_begin = begin;
        chunk.token_end = end;
        std::string text;
        for (std::size_t i = begin; i < end; ++i) {
            if (!text.empty()) text.push_back(' ');
            text += tokens[i];
        }
        chunk.text = std::move(text);
        chunks.push_back(std::move(chunk));
        if (end == tokens.size()) break;
        begin += stride;
    }
    return chunks;
}

VectorIndex::VectorIndex(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw std::invalid_argument("index dim must be positive");
}

void VectorIndex::add(std::string chunk_key, const EmbeddingVector& vector) {
    if (vector.dim() != dim_) {
        raise(ErrorCode::DimensionMismatch,
              "vector dim " + std::to_string(vector.dim()) + " != index dim " +
                  std::to_string(dim_));
    }
    if (std::find(keys_.begin(), keys_.end(), chunk_key) != keys_.end()) {
        throw std::invalid_argument("duplicate chunk key: " + chunk_key);
    }
    keys_.push_back(std::move(chunk_key));
    data_.insert(data_.end(), vector.values().begin(), vector.values().end());
}

std::vector<SearchHit> VectorIndex::search(const EmbeddingVector& query, std::size_t k) const {
    if (query.dim() != dim_) {
        raise(ErrorCode::DimensionMismatch,
              "query dim " + std::to_string(query.dim()) + " != index dim " +
                  std::to_string(dim_));
    }
    const std::size_t n = keys_.size();
    const std::size_t take = std::min(k, n);
    if (take == 0) return {};

    std::vector<double> sims(n);
    for (std::size_t i = 0; i < n; ++i) {
        sims[i] = kern::dot(row(i), query.data(), dim_);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const auto better = [&](std::size_t a, std::size_t b) {
        if (sims[a] != sims[b]) return sims[a] > sims[b];
        return keys_[a] < keys_[b];
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                      order.end(), better);

    std::vector<SearchHit> hits;
    hits.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        hits.push_back({keys_[order[i]], sims[order[i]]});
    }
    return hits;
}

namespace {

constexpr char kMagic[8] = {'E', 'V', 'P', 'I', 'D', 'X', '1', '\0'};

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v & 0xFFFFFFFFULL));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void put_f32(std::string& out, float v) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
}

struct Reader {
    std::string_view data;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > data.size()) raise(ErrorCode::CorruptIndex, "truncated index file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) {
            v = (v << 8) | static_cast<unsigned char>(data[pos + static_cast<std::size_t>(i)]);
        }
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        const std::uint64_t lo = u32();
        const std::uint64_t hi = u32();
        return (hi << 32) | lo;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string_view bytes(std::size_t n) {
        need(n);
        const std::string_view out = data.substr(pos, n);
        pos += n;
        return out;
    }
};

std::uint32_t crc_of(std::string_view data) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
}

} // namespace

void VectorIndex::save(const std::string& path) const {
    std::string buffer;
    buffer.reserve(16 + data_.size() * 4);
    buffer.append(kMagic, sizeof(kMagic));
    put_u32(buffer, static_cast<std::uint32_t>(dim_));
    put_u64(buffer, keys_.size());
    for (std::size_t i = 0; i < keys_.size(); ++i) {
        put_u32(buffer, static_cast<std::uint32_t>(keys_[i].size()));
        buffer.append(keys_[i]);
        for (std::size_t d = 0; d < dim_; ++d) put_f32(buffer, row(i)[d]);
    }
    put_u32(buffer, crc_of(std::string_view(buffer)));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::IoError, "cannot open " + path + " for writing");
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (!out) raise(ErrorCode::IoError, "short write to " + path);
}

VectorIndex VectorIndex::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open index file " + path);
    std::string buffer((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buffer.size() < sizeof(kMagic) + 4 + 8 + 4) {
        raise(ErrorCode::CorruptIndex, "file too small");
    }
    if (std::memcmp(buffer.data(), kMagic, sizeof(kMagic)) != 0) {
        raise(ErrorCode::CorruptIndex, "bad magic");
    }
    const std::string_view payload(buffer.data(), buffer.size() - 4);
    Reader crc_reader{std::string_view(buffer), buffer.size() - 4};
    if (crc_reader.u32() != crc_of(payload)) {
        raise(ErrorCode::CorruptIndex, "checksum mismatch");
    }

    Reader reader{payload, sizeof(kMagic)};
    const std::uint32_t dim = reader.u32();
    if (dim == 0) raise(ErrorCode::CorruptIndex, "zero dimension");
    const std::uint64_t count = reader.u64();

    VectorIndex index(dim);
    index.keys_.reserve(count);
    index.data_.reserve(count * dim);
    std::unordered_set<std::string> seen;
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint32_t key_len = reader.u32();
        std::string key(reader.bytes(key_len));
        if (!seen.insert(key).second) raise(ErrorCode::CorruptIndex, "duplicate key " + key);
        index.keys_.push_back(std::move(key));
        for (std::uint32_t d = 0; d < dim; ++d) index.data_.push_back(reader.f32());
    }
    if (reader.pos != payload.size()) raise(ErrorCode::CorruptIndex, "trailing bytes");
    return index;
}

} // namespace evopat
