#include "evopat/tokenize.hpp"

#include <cctype>

namespace evopat {

namespace {

bool is_ascii_punct(unsigned char c) {
    return std::ispunct(c) != 0;
}

} // namespace

char32_t decode_utf8(std::string_view text, std::size_t& pos) {
    const auto first = static_cast<unsigned char>(text[pos]);
    if (first < 0x80) {
        ++pos;
        return first;
    }
    int extra = 0;
    char32_t cp = 0;
    if ((first & 0xE0) == 0xC0) {
        extra = 1;
        cp = first & 0x1F;
    } else if ((first & 0xF0) == 0xE0) {
        extra = 2;
        cp = first & 0x0F;
    } else if ((first & 0xF8) == 0xF0) {
        extra = 3;
        cp = first & 0x07;
    } else {
        ++pos;
        return 0xFFFD;
    }
    if (pos + static_cast<std::size_t>(extra) >= text.size()) {
        ++pos;
        return 0xFFFD;
    }
    for (int i = 1; i <= extra; ++i) {
        const auto cont = static_cast<unsigned char>(text[pos + static_cast<std::size_t>(i)]);
        if ((cont & 0xC0) != 0x80) {
            ++pos;
            return 0xFFFD;
        }
        cp = (cp << 6) | (cont & 0x3F);
    }
    pos += static_cast<std::size_t>(extra) + 1;
    return cp;
}

bool is_unicode_space(char32_t cp) {
    switch (cp) {
        case U'\t':
        case U'\n':
        case 0x0B:
        case 0x0C:
        case U'\r':
        case U' ':
        case 0x85:   // NEL
        case 0xA0:   // NBSP
        case 0x1680:
        case 0x2028:
        case 0x2029:
        case 0x202F:
        case 0x205F:
        case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

bool is_valid_utf8(std::string_view text) {
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto first = static_cast<unsigned char>(text[pos]);
        if (first < 0x80) {
            ++pos;
            continue;
        }
        int extra = 0;
        if ((first & 0xE0) == 0xC0) {
            extra = 1;
        } else if ((first & 0xF0) == 0xE0) {
            extra = 2;
        } else if ((first & 0xF8) == 0xF0) {
            extra = 3;
        } else {
            return false;
        }
        if (pos + static_cast<std::size_t>(extra) >= text.size()) return false;
        for (int i = 1; i <= extra; ++i) {
            if ((static_cast<unsigned char>(text[pos + static_cast<std::size_t>(i)]) & 0xC0) != 0x80) {
                return false;
            }
        }
        pos += static_cast<std::size_t>(extra) + 1;
    }
    return true;
}

std::string to_lower_ascii(std::string_view text) {
    std::string out(text);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::vector<TokenSpan> tokenize_spans(std::string_view text) {
    std::vector<TokenSpan> spans;
    std::size_t pos = 0;
    while (pos < text.size()) {
        // skip whitespace
        std::size_t probe = pos;
        const char32_t cp = decode_utf8(text, probe);
        if (is_unicode_space(cp)) {
            pos = probe;
            continue;
        }
        // consume a whitespace-delimited word
        const std::size_t word_begin = pos;
        std::size_t word_end = pos;
        while (word_end < text.size()) {
            std::size_t next = word_end;
            if (is_unicode_space(decode_utf8(text, next))) break;
            word_end = next;
        }
        pos = word_end;
        // strip ASCII punctuation at both edges
        std::size_t begin = word_begin;
        std::size_t end = word_end;
        while (begin < end && is_ascii_punct(static_cast<unsigned char>(text[begin]))) ++begin;
        while (end > begin && is_ascii_punct(static_cast<unsigned char>(text[end - 1]))) --end;
        if (begin < end) spans.push_back({begin, end});
    }
    return spans;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    for (const TokenSpan& span : tokenize_spans(text)) {
        tokens.push_back(to_lower_ascii(text.substr(span.begin, span.end - span.begin)));
    }
    return tokens;
}

std::size_t count_tokens(std::string_view text) {
    return tokenize_spans(text).size();
}

} // namespace evopat
