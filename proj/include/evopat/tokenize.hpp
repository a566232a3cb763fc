#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace evopat {

// Byte range [begin, end) of a token core inside the source text, after edge
// punctuation has been stripped.
struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

// Shared tokenizer used by filtering, token budgets, and the evaluation
// metrics so all token counts agree. Lowercases (ASCII), splits on Unicode
// whitespace, strips leading/trailing ASCII punctuation from each token and
// drops empty results.
std::vector<std::string> tokenize(std::string_view text);

// Same segmentation as tokenize(), but reports byte spans into the original
// text instead of lowercased copies. Used where the original surface form
// must be preserved (truncation, compression).
std::vector<TokenSpan> tokenize_spans(std::string_view text);

std::size_t count_tokens(std::string_view text);

std::string to_lower_ascii(std::string_view text);

// Decodes one UTF-8 codepoint at byte offset `pos`; advances `pos` past it.
// Invalid sequences decode as U+FFFD and advance one byte.
char32_t decode_utf8(std::string_view text, std::size_t& pos);

bool is_unicode_space(char32_t cp);

bool is_valid_utf8(std::string_view text);

} // namespace evopat
