#include "evopat/tokenize.hpp"

#include <doctest.h>

using namespace evopat;

TEST_CASE("tokenize lowercases, splits and strips edge punctuation") {
    CHECK(tokenize("The cat, sat.") == std::vector<std::string>{"the", "cat", "sat"});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(tokenize("A a A.") == std::vector<std::string>{"a", "a", "a"});
}

TEST_CASE("tokenize keeps interior punctuation") {
    CHECK(tokenize("state-of-the-art 93.5%") ==
          std::vector<std::string>{"state-of-the-art", "93.5"});
}

TEST_CASE("tokenize splits on unicode whitespace") {
    // U+00A0 and U+3000 both separate tokens
    CHECK(tokenize("a\xC2\xA0z") == std::vector<std::string>{"a", "z"});
    CHECK(tokenize("a\xE3\x80\x80z") == std::vector<std::string>{"a", "z"});
}

TEST_CASE("tokenize is deterministic") {
    const std::string text = "Repeated runs; over the SAME input, give (equal) results 42%.";
    CHECK(tokenize(text) == tokenize(text));
}

TEST_CASE("tokenize_spans reports byte ranges of token cores") {
    const std::string text = "  Hello, world! ";
    const auto spans = tokenize_spans(text);
    REQUIRE(spans.size() == 2);
    CHECK(text.substr(spans[0].begin, spans[0].end - spans[0].begin) == "Hello");
    CHECK(text.substr(spans[1].begin, spans[1].end - spans[1].begin) == "world");
}

TEST_CASE("count_tokens equals tokenize length") {
    for (const std::string text : {"", "a b c", "one. two? THREE!!", "x\ny\tz"}) {
        CHECK(count_tokens(text) == tokenize(text).size());
    }
}

TEST_CASE("utf8 validation") {
    CHECK(is_valid_utf8("plain ascii"));
    CHECK(is_valid_utf8("caf\xC3\xA9"));
    CHECK_FALSE(is_valid_utf8("broken \xC3"));
    CHECK_FALSE(is_valid_utf8("broken \xFF byte"));
}
