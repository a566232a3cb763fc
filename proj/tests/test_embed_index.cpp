#include "evopat/embed.hpp"
#include "evopat/errors.hpp"
#include "evopat/index.hpp"
#include "evopat/kernels.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <tuple>
#include <unistd.h>

using namespace evopat;

namespace {

EmbeddingVector random_unit_vector(std::size_t dim, std::mt19937& rng) {
    std::normal_distribution<float> dist(0.0f, 1.0f);
    std::vector<float> values(dim);
    for (float& v : values) v = dist(rng);
    return EmbeddingVector::normalized(std::move(values));
}

// independent linear-scan ranking: own cosine loop, same documented tie-break
std::vector<SearchHit> oracle_search(const VectorIndex& index, const EmbeddingVector& query,
                                     std::size_t k) {
    std::vector<SearchHit> all;
    for (std::size_t i = 0; i < index.size(); ++i) {
        double sim = 0.0;
        for (std::size_t d = 0; d < index.dim(); ++d) {
            sim += static_cast<double>(index.row(i)[d]) * static_cast<double>(query.data()[d]);
        }
        all.push_back({index.keys()[i], sim});
    }
    std::sort(all.begin(), all.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.chunk_key < b.chunk_key;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

CleanDocument doc_of_n_tokens(std::size_t n) {
    CleanDocument doc;
    doc.doc_id = "doc";
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) doc.text += " ";
        doc.text += "tok" + std::to_string(i);
    }
    doc.token_count = n;
    return doc;
}

std::string temp_path(const char* name) {
    return std::string("/tmp/evopat_test_") + name + "_" + std::to_string(::getpid());
}

} // namespace

TEST_CASE("local embedder is deterministic and unit-norm") {
    LocalHashEmbedder embedder(512);
    const auto a = embedder.embed("nanoimprint lithography resist");
    const auto b = embedder.embed("nanoimprint lithography resist");
    CHECK(a.values() == b.values());
    CHECK(std::abs(std::sqrt(kern::squared_norm(a.data(), a.dim())) - 1.0) <= 1e-6);
}

TEST_CASE("disjoint vocabularies with disjoint buckets are orthogonal") {
    LocalHashEmbedder embedder(4096);
    const std::string text_a = "alpha beta";
    const std::string text_b = "gamma delta";
    // verify bucket disjointness with the exposed hash before asserting
    const std::set<std::size_t> buckets_a = {embedder.bucket("alpha"), embedder.bucket("beta"),
                                             embedder.bucket("alpha\x1f" "beta")};
    const std::set<std::size_t> buckets_b = {embedder.bucket("gamma"), embedder.bucket("delta"),
                                             embedder.bucket("gamma\x1f" "delta")};
    for (const std::size_t b : buckets_b) REQUIRE(buckets_a.count(b) == 0);
    CHECK(std::abs(embedder.embed(text_a).cosine(embedder.embed(text_b))) <= 1e-6);
}

TEST_CASE("embedding empty text errors") {
    LocalHashEmbedder embedder(64);
    CHECK_THROWS_AS(embedder.embed("   "), Error);
}

TEST_CASE("chunking covers the document with the configured overlap") {
    SUBCASE("single chunk") {
        const auto chunks = chunk_document(doc_of_n_tokens(10), 10, 0);
        REQUIRE(chunks.size() == 1);
        CHECK(chunks[0].token_begin == 0);
        CHECK(chunks[0].token_end == 10);
    }
    SUBCASE("stride walk") {
        const auto chunks = chunk_document(doc_of_n_tokens(10), 6, 2);
        REQUIRE(chunks.size() == 2);
        CHECK(chunks[0].token_begin == 0);
        CHECK(chunks[0].token_end == 6);
        CHECK(chunks[1].token_begin == 4);
        CHECK(chunks[1].token_end == 10);
    }
    SUBCASE("empty document") {
        CleanDocument empty;
        empty.doc_id = "empty";
        CHECK(chunk_document(empty, 8, 2).empty());
    }
    SUBCASE("bad params") {
        CHECK_THROWS_AS(chunk_document(doc_of_n_tokens(4), 4, 4), Error);
        CHECK_THROWS_AS(chunk_document(doc_of_n_tokens(4), 0, 0), Error);
    }
}

TEST_CASE("every token is covered and reconstruction works") {
    for (const auto& [n, size, overlap] :
         std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>{
             {1, 8, 2}, {7, 8, 2}, {8, 8, 2}, {9, 8, 2}, {23, 8, 2}, {100, 16, 5}}) {
        const auto doc = doc_of_n_tokens(n);
        const auto chunks = chunk_document(doc, size, overlap);
        std::vector<bool> covered(n, false);
        std::size_t expected_next = 0;
        for (const Chunk& c : chunks) {
            CHECK(c.token_end - c.token_begin <= size);
            for (std::size_t i = c.token_begin; i < c.token_end; ++i) covered[i] = true;
            // dedup by skipping the overlapping prefix reconstructs the sequence
            CHECK(c.token_begin <= expected_next);
            expected_next = c.token_end;
        }
        CHECK(expected_next == n);
        for (const bool c : covered) CHECK(c);
    }
}

TEST_CASE("self-retrieval ranks the stored vector first with similarity 1") {
    std::mt19937 rng(7);
    VectorIndex index(32);
    for (int i = 0; i < 20; ++i) {
        index.add("key" + std::to_string(i), random_unit_vector(32, rng));
    }
    const auto probe = random_unit_vector(32, rng);
    index.add("probe", probe);
    const auto hits = index.search(probe, 1);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].chunk_key == "probe");
    CHECK(hits[0].similarity == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("orthogonal basis vectors retrieve exactly") {
    VectorIndex index(4);
    for (std::size_t i = 0; i < 4; ++i) {
        std::vector<float> v(4, 0.0f);
        v[i] = 1.0f;
        index.add("e" + std::to_string(i + 1), EmbeddingVector::normalized(std::move(v)));
    }
    std::vector<float> q(4, 0.0f);
    q[1] = 1.0f;
    const auto hits = index.search(EmbeddingVector::normalized(std::move(q)), 1);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].chunk_key == "e2");
    CHECK(hits[0].similarity == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("search matches the linear-scan oracle") {
    std::mt19937 rng(99);
    VectorIndex index(16);
    for (int i = 0; i < 50; ++i) {
        index.add("c" + std::to_string(i), random_unit_vector(16, rng));
    }
    for (int round = 0; round < 5; ++round) {
        const auto query = random_unit_vector(16, rng);
        const auto expected = oracle_search(index, query, 10);
        const auto actual = index.search(query, 10);
        REQUIRE(actual.size() == expected.size());
        for (std::size_t i = 0; i < actual.size(); ++i) {
            CHECK(actual[i].chunk_key == expected[i].chunk_key);
            CHECK(actual[i].similarity == doctest::Approx(expected[i].similarity).epsilon(1e-9));
        }
    }
}

TEST_CASE("top-k lists are prefixes of top-(k+1)") {
    std::mt19937 rng(123);
    VectorIndex index(8);
    for (int i = 0; i < 30; ++i) {
        index.add("k" + std::to_string(i), random_unit_vector(8, rng));
    }
    const auto query = random_unit_vector(8, rng);
    for (std::size_t k = 1; k < 12; ++k) {
        const auto smaller = index.search(query, k);
        const auto larger = index.search(query, k + 1);
        REQUIRE(smaller.size() == k);
        for (std::size_t i = 0; i < k; ++i) {
            CHECK(smaller[i].chunk_key == larger[i].chunk_key);
        }
    }
}

TEST_CASE("k of zero and dimension mismatches") {
    std::mt19937 rng(5);
    VectorIndex index(8);
    index.add("a", random_unit_vector(8, rng));
    CHECK(index.search(random_unit_vector(8, rng), 0).empty());
    CHECK_THROWS_AS(index.search(random_unit_vector(4, rng), 1), Error);
    CHECK_THROWS_AS(index.add("b", random_unit_vector(4, rng)), Error);
}

TEST_CASE("index save/load round-trip is byte-identical") {
    const std::string path = temp_path("idx");
    std::mt19937 rng(2024);

    SUBCASE("empty index") {
        VectorIndex empty(8);
        empty.save(path);
        const VectorIndex loaded = VectorIndex::load(path);
        CHECK(loaded.size() == 0);
        CHECK(loaded.dim() == 8);
    }

    SUBCASE("100 random entries") {
        VectorIndex index(24);
        for (int i = 0; i < 100; ++i) {
            index.add("entry" + std::to_string(i), random_unit_vector(24, rng));
        }
        index.save(path);
        const VectorIndex loaded = VectorIndex::load(path);
        REQUIRE(loaded.size() == index.size());
        CHECK(loaded.keys() == index.keys());
        for (std::size_t i = 0; i < index.size(); ++i) {
            for (std::size_t d = 0; d < index.dim(); ++d) {
                // byte-identical: compare exact float bits
                CHECK(loaded.row(i)[d] == index.row(i)[d]);
            }
        }
        // second save produces identical bytes
        const std::string path2 = temp_path("idx2");
        loaded.save(path2);
        std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
        const std::string bytes1((std::istreambuf_iterator<char>(f1)), {});
        const std::string bytes2((std::istreambuf_iterator<char>(f2)), {});
        CHECK(bytes1 == bytes2);
        std::remove(path2.c_str());
    }

    std::remove(path.c_str());
}

TEST_CASE("truncated or corrupt index files are rejected") {
    const std::string path = temp_path("bad_idx");
    std::mt19937 rng(31);
    VectorIndex index(8);
    index.add("only", random_unit_vector(8, rng));
    index.save(path);

    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    in.close();

    SUBCASE("truncated") {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
        out.close();
        try {
            VectorIndex::load(path);
            FAIL("expected CorruptIndex");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::CorruptIndex);
        }
    }
    SUBCASE("flipped byte") {
        bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x5A);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.close();
        try {
            VectorIndex::load(path);
            FAIL("expected CorruptIndex");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::CorruptIndex);
        }
    }
    SUBCASE("missing file") {
        std::remove(path.c_str());
        CHECK_THROWS_AS(VectorIndex::load(path), Error);
    }
    std::remove(path.c_str());
}
