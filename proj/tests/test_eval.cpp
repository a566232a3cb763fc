#include "evopat/eval.hpp"

#include "evopat/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

using namespace evopat;

namespace {

// direct clipped-count evaluation with plain vector scans (no maps), kept
// independent of the implementation
double rouge1_oracle(const TokenSeq& gen, const TokenSeq& ref) {
    double matched = 0;
    TokenSeq seen;
    for (const std::string& token : ref) {
        if (std::count(seen.begin(), seen.end(), token) > 0) continue;
        seen.push_back(token);
        const auto in_gen = std::count(gen.begin(), gen.end(), token);
        const auto in_ref = std::count(ref.begin(), ref.end(), token);
        matched += static_cast<double>(std::min(in_gen, in_ref));
    }
    return matched / static_cast<double>(ref.size());
}

double rouge2_oracle(const TokenSeq& gen, const TokenSeq& ref) {
    const auto bigrams = [](const TokenSeq& t) {
        std::vector<std::pair<std::string, std::string>> out;
        for (std::size_t i = 0; i + 1 < t.size(); ++i) out.emplace_back(t[i], t[i + 1]);
        return out;
    };
    const auto gen_bi = bigrams(gen);
    const auto ref_bi = bigrams(ref);
    double matched = 0;
    std::vector<std::pair<std::string, std::string>> seen;
    for (const auto& bi : ref_bi) {
        if (std::count(seen.begin(), seen.end(), bi) > 0) continue;
        seen.push_back(bi);
        const auto in_gen = std::count(gen_bi.begin(), gen_bi.end(), bi);
        const auto in_ref = std::count(ref_bi.begin(), ref_bi.end(), bi);
        matched += static_cast<double>(std::min(in_gen, in_ref));
    }
    return matched / static_cast<double>(ref_bi.size());
}

// exponential-time LCS: enumerate every subsequence of `gen` (lengths <= 12)
// and keep the longest that is a subsequence of `ref`
std::size_t lcs_bruteforce(const TokenSeq& gen, const TokenSeq& ref) {
    REQUIRE(gen.size() <= 12);
    std::size_t best = 0;
    for (std::uint32_t mask = 0; mask < (1u << gen.size()); ++mask) {
        TokenSeq candidate;
        for (std::size_t i = 0; i < gen.size(); ++i) {
            if (mask & (1u << i)) candidate.push_back(gen[i]);
        }
        std::size_t j = 0;
        for (const std::string& token : ref) {
            if (j < candidate.size() && candidate[j] == token) ++j;
        }
        if (j == candidate.size()) best = std::max(best, candidate.size());
    }
    return best;
}

TokenSeq random_seq(std::mt19937& rng, std::size_t max_len, std::size_t alphabet) {
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet - 1);
    TokenSeq out(len(rng));
    for (std::string& token : out) token = std::string(1, static_cast<char>('a' + pick(rng)));
    return out;
}

// fixed per-token vectors for hand-checkable BERTScore cases
TokenEmbedder table_embedder(std::map<std::string, std::vector<float>> table) {
    return [table = std::move(table)](const std::string& token) {
        return EmbeddingVector::normalized(table.at(token));
    };
}

} // namespace

TEST_CASE("rouge-1 hand-anchored values") {
    CHECK(rouge1({"a", "b", "d"}, {"a", "b", "c"}) == doctest::Approx(2.0 / 3.0));
    CHECK(rouge1({"x", "y"}, {"x", "y"}) == doctest::Approx(1.0));
    CHECK(rouge1({"a", "a", "a"}, {"a", "b"}) == doctest::Approx(0.5));
    CHECK(rouge1({"q"}, {"a", "b"}) == doctest::Approx(0.0));
}

TEST_CASE("rouge-2 hand-anchored values") {
    CHECK(rouge2({"a", "b", "d"}, {"a", "b", "c"}) == doctest::Approx(0.5));
    CHECK(rouge2({"a", "b", "c"}, {"a", "b", "c"}) == doctest::Approx(1.0));
    CHECK(rouge2({"x", "y", "z"}, {"a", "b", "c"}) == doctest::Approx(0.0));
}

TEST_CASE("rouge-L hand-anchored values") {
    CHECK(rougeL({"a", "b", "d"}, {"a", "b", "c"}) == doctest::Approx(2.0 / 3.0));
    CHECK(rougeL({"a", "b", "c"}, {"a", "b", "c"}) == doctest::Approx(1.0));
    CHECK(lcs_length({"a", "x", "b", "y", "c"}, {"a", "b", "c"}) == 3);
}

TEST_CASE("degenerate references raise the documented errors") {
    try {
        rouge1({"a"}, {});
        FAIL("expected EmptyReference");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyReference);
    }
    try {
        rouge2({"a", "b"}, {"only"});
        FAIL("expected NoReferenceBigrams");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoReferenceBigrams);
    }
    CHECK_THROWS_AS(rougeL({"a"}, {}), Error);
}

TEST_CASE("rouge matches independent oracles on random pairs") {
    std::mt19937 rng(12345);
    for (int round = 0; round < 300; ++round) {
        const TokenSeq gen = random_seq(rng, 12, 6);
        const TokenSeq ref = random_seq(rng, 12, 6);
        if (!ref.empty()) {
            CHECK(std::abs(rouge1(gen, ref) - rouge1_oracle(gen, ref)) <= 1e-12);
            CHECK(std::abs(rougeL(gen, ref) -
                           static_cast<double>(lcs_bruteforce(gen, ref)) /
                               static_cast<double>(ref.size())) <= 1e-12);
        }
        if (ref.size() >= 2) {
            CHECK(std::abs(rouge2(gen, ref) - rouge2_oracle(gen, ref)) <= 1e-12);
        }
    }
}

TEST_CASE("clipping keeps rouge in [0,1] even for long generated texts") {
    std::mt19937 rng(777);
    for (int round = 0; round < 100; ++round) {
        TokenSeq gen = random_seq(rng, 12, 3);
        const TokenSeq ref = random_seq(rng, 6, 3);
        gen.insert(gen.end(), gen.begin(), gen.end()); // duplicate everything
        if (ref.empty()) continue;
        const double r1 = rouge1(gen, ref);
        CHECK(r1 >= 0.0);
        CHECK(r1 <= 1.0);
        if (ref.size() >= 2) {
            const double r2 = rouge2(gen, ref);
            CHECK(r2 >= 0.0);
            CHECK(r2 <= 1.0);
        }
        CHECK(rougeL(gen, ref) <= 1.0);
    }
}

TEST_CASE("bert precision and recall on a hand-built table") {
    const TokenEmbedder embedder = table_embedder({
        {"x", {1.0f, 0.0f, 0.0f}},
        {"y", {0.6f, 0.8f, 0.0f}},
        {"z", {0.0f, 0.0f, 1.0f}},
    });
    const TokenSeq gen = {"x", "y"};
    const TokenSeq ref = {"y", "z"};
    CHECK(bert_precision(gen, ref, embedder) == doctest::Approx(0.8).epsilon(1e-6));
    CHECK(bert_recall(gen, ref, embedder) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(bert_f1(0.8, 0.5) == doctest::Approx(0.8 / 1.3).epsilon(1e-9));
}

TEST_CASE("identical sequences score 1 under any embedder") {
    LocalHashEmbedder provider(256);
    const TokenEmbedder embedder = token_embedder_from(provider);
    const TokenSeq tokens = {"resist", "layer", "cured", "resist"};
    CHECK(bert_precision(tokens, tokens, embedder) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(bert_recall(tokens, tokens, embedder) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("mutually orthogonal embeddings score 0") {
    const TokenEmbedder embedder = table_embedder({
        {"a", {1.0f, 0.0f}},
        {"b", {0.0f, 1.0f}},
    });
    CHECK(bert_precision({"a"}, {"b"}, embedder) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(bert_recall({"a"}, {"b"}, embedder) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("bert recall is precision with the roles swapped") {
    LocalHashEmbedder provider(512);
    const TokenEmbedder embedder = token_embedder_from(provider);
    std::mt19937 rng(4242);
    const std::vector<std::string> vocab = {"one", "two", "three", "four", "five"};
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    for (int round = 0; round < 20; ++round) {
        TokenSeq g(1 + round % 5);
        TokenSeq r(1 + (round * 3) % 5);
        for (auto& t : g) t = vocab[pick(rng)];
        for (auto& t : r) t = vocab[pick(rng)];
        CHECK(bert_recall(g, r, embedder) ==
              doctest::Approx(bert_precision(r, g, embedder)).epsilon(1e-12));
    }
}

TEST_CASE("empty sequences raise EmptySequence") {
    LocalHashEmbedder provider(64);
    const TokenEmbedder embedder = token_embedder_from(provider);
    CHECK_THROWS_AS(bert_precision({}, {"a"}, embedder), Error);
    CHECK_THROWS_AS(bert_recall({"a"}, {}, embedder), Error);
}

TEST_CASE("f1 hand values and degenerate case") {
    CHECK(bert_f1(1.0, 1.0) == doctest::Approx(1.0));
    CHECK(bert_f1(0.5, 1.0) == doctest::Approx(2.0 * 0.5 * 1.0 / 1.5).epsilon(1e-9));
    CHECK(bert_f1(0.5, 1.0) == doctest::Approx(0.6667).epsilon(1e-3));
    CHECK(bert_f1(0.0, 0.0) == 0.0);
}

TEST_CASE("f1 lies between min and max of precision and recall") {
    std::mt19937 rng(555);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int round = 0; round < 200; ++round) {
        const double p = dist(rng);
        const double r = dist(rng);
        const double f1 = bert_f1(p, r);
        CHECK(f1 >= std::min(p, r) - 1e-12);
        CHECK(f1 <= std::max(p, r) + 1e-12);
    }
}

TEST_CASE("metric identity on random sequences") {
    LocalHashEmbedder provider(1024);
    const TokenEmbedder embedder = token_embedder_from(provider);
    std::mt19937 rng(31337);
    for (int round = 0; round < 50; ++round) {
        TokenSeq seq = random_seq(rng, 10, 6);
        if (seq.size() < 2) seq = {"a", "b"};
        const MetricReport m = evaluate_pair(seq, seq, embedder);
        CHECK(m.rouge1 == doctest::Approx(1.0));
        CHECK(m.rouge2 == doctest::Approx(1.0));
        CHECK(m.rougeL == doctest::Approx(1.0));
        CHECK(m.bert_precision == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(m.bert_recall == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(m.bert_f1 == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("metrics are deterministic") {
    LocalHashEmbedder provider(512);
    const TokenEmbedder embedder = token_embedder_from(provider);
    const TokenSeq gen = {"resist", "cured", "at", "93.5", "percent"};
    const TokenSeq ref = {"the", "resist", "is", "cured", "at", "93.5", "percent", "fidelity"};
    const MetricReport a = evaluate_pair(gen, ref, embedder);
    const MetricReport b = evaluate_pair(gen, ref, embedder);
    CHECK(a.rouge1 == b.rouge1);
    CHECK(a.rouge2 == b.rouge2);
    CHECK(a.rougeL == b.rougeL);
    CHECK(a.bert_precision == b.bert_precision);
    CHECK(a.bert_recall == b.bert_recall);
    CHECK(a.bert_f1 == b.bert_f1);
}

TEST_CASE("expert score aggregation is the per-dimension mean") {
    const ExpertScores one{4.0, 5.0, 3.0, 2.0, 1.0};
    const auto same = aggregate_expert_scores({one});
    CHECK(same.informative == doctest::Approx(4.0));
    CHECK(same.extensible == doctest::Approx(1.0));

    const auto two = aggregate_expert_scores({{4, 4, 4, 4, 4}, {5, 5, 5, 5, 5}});
    CHECK(two.informative == doctest::Approx(4.5));
    CHECK(two.rich == doctest::Approx(4.5));

    const std::vector<ExpertScores> four = {
        {4.82, 4.85, 4.63, 4.89, 4.34},
        {4.13, 3.95, 4.55, 4.72, 2.79},
        {5.00, 4.00, 3.00, 2.00, 1.00},
        {1.00, 2.00, 3.00, 4.00, 5.00},
    };
    const auto mean = aggregate_expert_scores(four);
    double informative = 0;
    for (const auto& s : four) informative += s.informative;
    CHECK(mean.informative == doctest::Approx(informative / 4.0).epsilon(1e-12));

    CHECK_THROWS_AS(aggregate_expert_scores({}), Error);
}
