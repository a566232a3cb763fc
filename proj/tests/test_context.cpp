#include "evopat/context.hpp"

#include "evopat/errors.hpp"
#include "evopat/ingest.hpp"
#include "evopat/tokenize.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace evopat;

namespace {

const StopwordList kStops = StopwordList::default_list();

std::vector<HistoryMessage> messages_of_lengths(const std::vector<std::size_t>& lengths) {
    std::vector<HistoryMessage> out;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        std::string content;
        for (std::size_t t = 0; t < lengths[i]; ++t) {
            if (!content.empty()) content += " ";
            content += "m" + std::to_string(i) + "t" + std::to_string(t);
        }
        out.push_back({content, false});
    }
    return out;
}

// independent keep-set: stable-sort (score desc, position asc), take the top
// ceil(num/den * n) with integer arithmetic
std::vector<std::string> compression_oracle(const std::string& text, std::size_t num,
                                            std::size_t den, const CompressionConfig& config,
                                            const CorpusStats& stats) {
    const auto scored = score_tokens(text, stats, config, kStops);
    std::vector<std::size_t> order(scored.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scored[a].score != scored[b].score) return scored[a].score > scored[b].score;
        return scored[a].position < scored[b].position;
    });
    const std::size_t keep = std::min(scored.size(), (scored.size() * num + den - 1) / den);
    order.resize(keep);
    std::sort(order.begin(), order.end());
    std::vector<std::string> out;
    for (const std::size_t i : order) out.push_back(scored[i].surface);
    return out;
}

bool is_subsequence(const std::vector<std::string>& small, const std::vector<std::string>& big) {
    std::size_t i = 0;
    for (const std::string& token : big) {
        if (i < small.size() && small[i] == token) ++i;
    }
    return i == small.size();
}

std::string random_text(std::mt19937& rng, std::size_t n) {
    static const std::vector<std::string> vocab = {
        "the",  "resist",   "layer", "is",    "cured", "at",      "substrate",
        "93.5", "exposure", "with",  "a",     "dose",  "of",      "25mJ",
        "and",  "baked",    "green", "laser", "beam",  "through", "mask"};
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (!out.empty()) out += " ";
        out += vocab[pick(rng)];
    }
    return out;
}

} // namespace

TEST_CASE("limit_history keeps the most recent messages") {
    TokenBudget budget{10, 1000, 3};
    const auto messages = messages_of_lengths({2, 2, 2, 2, 2});
    const auto kept = limit_history(messages, budget);
    REQUIRE(kept.size() == 3);
    CHECK(kept[0].content == messages[2].content);
    CHECK(kept[2].content == messages[4].content);
}

TEST_CASE("limit_history leaves a single in-budget message unchanged") {
    TokenBudget budget{10, 100, 5};
    const auto messages = messages_of_lengths({4});
    const auto kept = limit_history(messages, budget);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].content == messages[0].content);
}

TEST_CASE("limit_history enforces the token total") {
    TokenBudget budget{40, 90, 3};
    const auto messages = messages_of_lengths({40, 40, 40});
    const auto kept = limit_history(messages, budget);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].content == messages[1].content);
    CHECK(kept[1].content == messages[2].content);
}

TEST_CASE("protected system messages are always retained and not counted") {
    TokenBudget budget{10, 20, 1};
    std::vector<HistoryMessage> messages = messages_of_lengths({5, 5, 5});
    messages[0].protected_system = true;
    const auto kept = limit_history(messages, budget);
    REQUIRE(kept.size() == 2); // protected + 1 suffix message
    CHECK(kept[0].protected_system);
    CHECK(kept[1].content == messages[2].content);
}

TEST_CASE("oversized protected message is BudgetImpossible") {
    TokenBudget budget{10, 4, 3};
    std::vector<HistoryMessage> messages = messages_of_lengths({8});
    messages[0].protected_system = true;
    try {
        limit_history(messages, budget);
        FAIL("expected BudgetImpossible");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BudgetImpossible);
    }
}

TEST_CASE("limit_history output is a contiguous suffix on random transcripts") {
    std::mt19937 rng(42);
    std::uniform_int_distribution<std::size_t> len(0, 30);
    std::uniform_int_distribution<std::size_t> count(0, 12);
    for (int round = 0; round < 200; ++round) {
        std::vector<std::size_t> lengths(count(rng));
        for (auto& l : lengths) l = len(rng);
        const auto messages = messages_of_lengths(lengths);
        TokenBudget budget{50, 1 + len(rng) * 4, 1 + count(rng)};
        const auto kept = limit_history(messages, budget);

        CHECK(kept.size() <= budget.max_history_messages);
        std::size_t total = 0;
        for (const auto& m : kept) total += count_tokens(m.content);
        CHECK(total <= budget.max_total_tokens);
        // suffix check: kept equals the tail of messages
        REQUIRE(kept.size() <= messages.size());
        for (std::size_t i = 0; i < kept.size(); ++i) {
            CHECK(kept[kept.size() - 1 - i].content ==
                  messages[messages.size() - 1 - i].content);
        }
    }
}

TEST_CASE("truncate_tokens cuts at the token boundary and appends the marker") {
    CHECK(truncate_tokens("one two three four five six seven eight", 5) ==
          "one two three four five …[truncated]");
    CHECK(truncate_tokens("one two three four five", 5) == "one two three four five");
    CHECK(truncate_tokens("alpha beta, gamma", 2) == "alpha beta …[truncated]");
}

TEST_CASE("truncate_tokens is idempotent") {
    const std::vector<std::string> inputs = {
        "a b c d e f g h i j", "short", "punctuated, text; with! marks?",
        "word " + std::string(100, 'x') + " more words here"};
    for (const std::string& input : inputs) {
        for (const std::size_t max : {1u, 3u, 5u, 50u}) {
            const std::string once = truncate_tokens(input, max);
            CHECK(truncate_tokens(once, max) == once);
        }
    }
}

TEST_CASE("score_tokens penalizes stop words and rewards force-keep matches") {
    CorpusStats stats;
    stats.document_count = 10;
    stats.document_frequency["the"] = 4;
    stats.document_frequency["photoresist"] = 4;
    const CompressionConfig config = CompressionConfig::defaults();

    const auto scored = score_tokens("the photoresist", stats, config, kStops);
    REQUIRE(scored.size() == 2);
    CHECK(scored[0].token == "the");
    CHECK(scored[1].token == "photoresist");
    CHECK(scored[0].score < scored[1].score);
    CHECK(scored[1].score - scored[0].score == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("force-keep bonus is exactly 2.0 over an equal-df plain word") {
    CorpusStats stats;
    stats.document_count = 7;
    stats.document_frequency["93.5"] = 2;
    stats.document_frequency["widget"] = 2;
    const CompressionConfig config = CompressionConfig::defaults();
    const auto scored = score_tokens("93.5 widget", stats, config, kStops);
    REQUIRE(scored.size() == 2);
    CHECK(scored[0].score - scored[1].score == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("score_tokens matches a hand-computed table") {
    CorpusStats stats;
    stats.document_count = 3;
    stats.document_frequency = {{"resist", 2}, {"layer", 1}, {"the", 3}};
    CompressionConfig config;
    config.force_keep_patterns = {R"([0-9]+(\.[0-9]+)?%?)"};

    const auto scored =
        score_tokens("the resist layer cures at 120 degrees", stats, config, kStops);
    REQUIRE(scored.size() == 7);
    const double log_df3 = std::log(4.0 / 4.0);
    const double log_df2 = std::log(4.0 / 3.0);
    const double log_df1 = std::log(4.0 / 2.0);
    const double log_df0 = std::log(4.0 / 1.0);
    CHECK(scored[0].score == doctest::Approx(log_df3 - 1.0).epsilon(1e-12)); // the
    CHECK(scored[1].score == doctest::Approx(log_df2).epsilon(1e-12));       // resist
    CHECK(scored[2].score == doctest::Approx(log_df1).epsilon(1e-12));       // layer
    CHECK(scored[3].score == doctest::Approx(log_df0).epsilon(1e-12));       // cures
    CHECK(scored[4].score == doctest::Approx(log_df0 - 1.0).epsilon(1e-12)); // at
    CHECK(scored[5].score == doctest::Approx(log_df0 + 2.0).epsilon(1e-12)); // 120
    CHECK(scored[6].score == doctest::Approx(log_df0).epsilon(1e-12));       // degrees
}

TEST_CASE("compress_prompt at ratio 1.0 is the identity on tokens") {
    CompressionConfig config = CompressionConfig::defaults();
    config.target_ratio = 1.0;
    const std::string text = "Exposure dose of 25mJ at 193nm, resist thickness 60nm.";
    const std::string out = compress_prompt(text, config, {}, kStops);
    CHECK(tokenize(out) == tokenize(text));
}

TEST_CASE("compress_prompt keeps exactly ceil(ratio*n) tokens as a subsequence") {
    CompressionConfig config = CompressionConfig::defaults();
    config.target_ratio = 0.5;
    const std::string text = "one two three four five six seven eight nine ten";
    const std::string out = compress_prompt(text, config, {}, kStops);
    const auto out_tokens = tokenize(out);
    CHECK(out_tokens.size() == 5);
    CHECK(is_subsequence(out_tokens, tokenize(text)));
}

TEST_CASE("ratio 0.05 on 40 tokens keeps 2, matching the sort oracle") {
    std::mt19937 rng(7);
    const std::string text = random_text(rng, 40);
    CompressionConfig config = CompressionConfig::defaults();
    config.target_ratio = 0.05;
    CorpusStats stats;
    stats.document_count = 5;
    stats.document_frequency["resist"] = 3;
    stats.document_frequency["the"] = 5;

    const std::string out = compress_prompt(text, config, stats, kStops);
    const auto oracle = compression_oracle(text, 1, 20, config, stats);
    CHECK(oracle.size() == 2);
    std::vector<std::string> out_surfaces;
    for (const auto& span : tokenize_spans(out)) {
        out_surfaces.push_back(std::string(out.substr(span.begin, span.end - span.begin)));
    }
    CHECK(out_surfaces == oracle);
}

TEST_CASE("compression budget and subsequence hold over random texts") {
    std::mt19937 rng(99);
    const CorpusStats stats;
    for (int round = 0; round < 100; ++round) {
        const std::string text = random_text(rng, 1 + round % 60);
        const std::size_t n = count_tokens(text);
        for (const auto& [num, den] : std::vector<std::pair<std::size_t, std::size_t>>{
                 {1, 20}, {1, 4}, {1, 2}, {1, 1}}) {
            CompressionConfig config = CompressionConfig::defaults();
            config.target_ratio = static_cast<double>(num) / static_cast<double>(den);
            const std::string out = compress_prompt(text, config, stats, kStops);
            const auto out_tokens = tokenize(out);
            CHECK(out_tokens.size() <= (n * num + den - 1) / den);
            CHECK(is_subsequence(out_tokens, tokenize(text)));
        }
    }
}

TEST_CASE("raising the ratio never drops a previously kept token") {
    std::mt19937 rng(123);
    const CorpusStats stats;
    const CompressionConfig base = CompressionConfig::defaults();
    for (int round = 0; round < 20; ++round) {
        const std::string text = random_text(rng, 30);
        std::vector<std::string> previous;
        for (const double ratio : {0.05, 0.2, 0.4, 0.7, 1.0}) {
            CompressionConfig config = base;
            config.target_ratio = ratio;
            const auto kept = tokenize(compress_prompt(text, config, stats, kStops));
            CHECK(is_subsequence(previous, kept));
            previous = kept;
        }
    }
}
