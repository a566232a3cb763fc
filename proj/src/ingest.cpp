#include "evopat/ingest.hpp"

#include "evopat/errors.hpp"
#include "evopat/tokenize.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace evopat {

namespace {

constexpr std::array<const char*, 127> kDefaultStopwords = {
    "a",        "about",   "above",      "after",   "again",     "against",
    "all",      "am",      "an",         "and",     "any",       "are",
    "as",       "at",      "be",         "because", "been",      "before",
    "being",    "below",   "between",    "both",    "but",       "by",
    "can",      "cannot",  "could",      "did",     "do",        "does",
    "doing",    "down",    "during",     "each",    "few",       "for",
    "from",     "further", "had",        "has",     "have",      "having",
    "he",       "her",     "here",       "hers",    "herself",   "him",
    "himself",  "his",     "how",        "i",       "if",        "in",
    "into",     "is",      "it",         "its",     "itself",    "just",
    "me",       "more",    "most",       "my",      "myself",    "no",
    "nor",      "not",     "now",        "of",      "off",       "on",
    "once",     "only",    "or",         "other",   "our",       "ours",
    "ourselves","out",     "over",       "own",     "same",      "she",
    "should",   "so",      "some",       "such",    "than",      "that",
    "the",      "their",   "theirs",     "them",    "themselves","then",
    "there",    "these",   "they",       "this",    "those",     "through",
    "to",       "too",     "under",      "until",   "up",        "very",
    "was",      "we",      "were",       "what",    "when",      "where",
    "which",    "while",   "who",        "whom",    "why",       "will",
    "with",     "would",   "you",        "your",    "yours",     "yourself",
    "yourselves",
};

bool is_allowed_ascii_punct(char c) {
    switch (c) {
        case '.': case ',': case ';': case ':': case '!': case '?':
        case '\'': case '"': case '(': case ')': case '-': case '%':
            return true;
        default:
            return false;
    }
}

// Normalizes typographic punctuation to its ASCII equivalent, or 0 when the
// codepoint has no mapping.
char ascii_equivalent(char32_t cp) {
    if ((cp >= 0x2010 && cp <= 0x2015) || cp == 0x2212) return '-';
    if (cp >= 0x2018 && cp <= 0x201B) return '\'';
    if (cp >= 0x201C && cp <= 0x201F) return '"';
    switch (cp) {
        case 0x3001: return ',';  // ideographic comma
        case 0x3002: return '.';  // ideographic full stop
        case 0xFF01: return '!';
        case 0xFF05: return '%';
        case 0xFF08: return '(';
        case 0xFF09: return ')';
        case 0xFF0C: return ',';
        case 0xFF0E: return '.';
        case 0xFF1A: return ':';
        case 0xFF1B: return ';';
        case 0xFF1F: return '?';
        default: return 0;
    }
}

// Non-ASCII codepoints in symbol blocks count as "special characters"; the
// rest (letters and digits of any script) pass through so multilingual patent
// text survives filtering.
bool is_symbol_codepoint(char32_t cp) {
    if (cp <= 0xBF) return true;              // C1 controls, Latin-1 symbols
    if (cp == 0xD7 || cp == 0xF7) return true;
    if (cp >= 0x2000 && cp <= 0x206F) return true;   // general punctuation
    if (cp >= 0x2070 && cp <= 0x2BFF) return true;   // arrows, math, shapes
    if (cp >= 0x3003 && cp <= 0x303F) return true;   // CJK punctuation
    if (cp >= 0xFE00 && cp <= 0xFE4F) return true;
    if (cp >= 0xFF00 && cp <= 0xFF0F) return true;   // fullwidth punctuation,
    if (cp >= 0xFF1A && cp <= 0xFF20) return true;   // keeping fullwidth
    if (cp >= 0xFF3B && cp <= 0xFF40) return true;   // letters and digits
    if (cp >= 0xFF5B && cp <= 0xFF65) return true;
    if (cp >= 0xFFF0 && cp <= 0xFFFD) return true;
    if (cp >= 0x1F000) return true;                  // emoji and beyond
    return false;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Strips <tag>, </tag> and <!-- --> spans, replacing each with a space.
std::string strip_html_tags(std::string_view text, std::size_t& removed) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '<') {
            // comment
            if (text.compare(i, 4, "<!--") == 0) {
                const std::size_t end = text.find("-->", i + 4);
                if (end != std::string_view::npos) {
                    i = end + 3;
                    ++removed;
                    out.push_back(' ');
                    continue;
                }
            }
            std::size_t j = i + 1;
            if (j < text.size() && (text[j] == '/' || text[j] == '!')) ++j;
            if (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) {
                const std::size_t close = text.find_first_of("<>", j);
                if (close != std::string_view::npos && text[close] == '>') {
                    i = close + 1;
                    ++removed;
                    out.push_back(' ');
                    continue;
                }
            }
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

bool iequals_at(std::string_view text, std::size_t pos, std::string_view prefix) {
    if (pos + prefix.size() > text.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(text[pos + i])) != prefix[i]) return false;
    }
    return true;
}

// Removes http://, https:// and www.-prefixed runs up to the next whitespace.
std::string strip_urls(std::string_view text, std::size_t& removed) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (iequals_at(text, i, "http://") || iequals_at(text, i, "https://") ||
            iequals_at(text, i, "www.")) {
            std::size_t j = i;
            while (j < text.size()) {
                std::size_t probe = j;
                if (is_unicode_space(decode_utf8(text, probe))) break;
                j = probe;
            }
            i = j;
            ++removed;
            out.push_back(' ');
            continue;
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

std::string filter_special_chars(std::string_view text, std::size_t& removed) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        const char32_t cp = decode_utf8(text, pos);
        if (cp < 0x80) {
            const char c = static_cast<char>(cp);
            if (std::isalnum(static_cast<unsigned char>(c)) ||
                std::isspace(static_cast<unsigned char>(c)) || is_allowed_ascii_punct(c)) {
                out.push_back(c);
            } else {
                ++removed;
                out.push_back(' ');
            }
        } else if (is_unicode_space(cp)) {
            out.push_back(' ');
        } else if (is_symbol_codepoint(cp)) {
            ++removed;
            out.push_back(' ');
        } else {
            append_utf8(out, cp);
        }
    }
    return out;
}

// Fancy punctuation mapped before URL detection so runs like "www。x" are
// recognized and removed in the same pass as plain ones.
std::string normalize_punctuation(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t start = pos;
        const char32_t cp = decode_utf8(text, pos);
        const char mapped = cp >= 0x80 ? ascii_equivalent(cp) : 0;
        if (mapped != 0) {
            out.push_back(mapped);
        } else {
            out.append(text.substr(start, pos - start));
        }
    }
    return out;
}

std::string collapse_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t start = pos;
        const char32_t cp = decode_utf8(text, pos);
        if (is_unicode_space(cp)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.append(text.substr(start, pos - start));
        }
    }
    return out;
}

std::string drop_stopwords(std::string_view text, const StopwordList& stopwords,
                           std::size_t& removed) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t end = text.find(' ', i);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view word = text.substr(i, end - i);
        // strip edge punctuation to get the comparable core
        std::size_t b = 0;
        std::size_t e = word.size();
        while (b < e && std::ispunct(static_cast<unsigned char>(word[b]))) ++b;
        while (e > b && std::ispunct(static_cast<unsigned char>(word[e - 1]))) --e;
        const std::string core = to_lower_ascii(word.substr(b, e - b));
        if (!core.empty() && stopwords.contains(core)) {
            ++removed;
        } else {
            if (!out.empty()) out.push_back(' ');
            out.append(word);
        }
        i = end + 1;
    }
    return out;
}

std::string read_file_or_throw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string make_temp_path(const char* suffix) {
    static int counter = 0;
    std::string path = "/tmp/evopat_" + std::to_string(::getpid()) + "_" +
                       std::to_string(counter++) + suffix;
    return path;
}

std::string run_external_extractor(const RawDocument& raw, const ExtractorConfig& config) {
    const std::string input_path = make_temp_path(".pdf");
    const std::string output_path = make_temp_path(".txt");
    {
        std::ofstream out(input_path, std::ios::binary);
        out.write(raw.payload.data(), static_cast<std::streamsize>(raw.payload.size()));
        if (!out) raise(ErrorCode::IoError, "cannot write " + input_path);
    }
    std::string cmd = config.command_template;
    auto substitute = [&cmd](std::string_view placeholder, const std::string& value) {
        std::size_t pos;
        while ((pos = cmd.find(placeholder)) != std::string::npos) {
            cmd.replace(pos, placeholder.size(), value);
        }
    };
    substitute("{input}", input_path);
    substitute("{output}", output_path);
    const int rc = std::system(cmd.c_str());
    std::remove(input_path.c_str());
    if (rc != 0) {
        std::remove(output_path.c_str());
        raise(ErrorCode::ExtractorFailed,
              "extractor exited with status " + std::to_string(rc));
    }
    std::string text = read_file_or_throw(output_path);
    std::remove(output_path.c_str());
    return text;
}

} // namespace

StopwordList::StopwordList(std::vector<std::string> words) {
    for (std::string& w : words) words_.insert(to_lower_ascii(w));
}

StopwordList StopwordList::default_list() {
    std::vector<std::string> words(kDefaultStopwords.begin(), kDefaultStopwords.end());
    return StopwordList(std::move(words));
}

StopwordList StopwordList::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open stopword list " + path);
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty() && line.front() != '#') words.push_back(line);
    }
    return StopwordList(std::move(words));
}

bool StopwordList::contains(std::string_view lowercase_token) const {
    return words_.count(std::string(lowercase_token)) > 0;
}

std::string extract_text(const RawDocument& raw, const ExtractorConfig& config) {
    if (raw.payload.empty()) raise(ErrorCode::EncodingError, "empty payload for " + raw.doc_id);
    switch (raw.source_kind) {
        case SourceKind::plain_text:
        case SourceKind::pre_extracted: {
            if (!is_valid_utf8(raw.payload)) {
                raise(ErrorCode::EncodingError, "payload of " + raw.doc_id + " is not valid UTF-8");
            }
            return raw.payload;
        }
        case SourceKind::pdf_text_layer: {
            if (config.mode == "command") {
                if (config.command_template.empty()) {
                    raise(ErrorCode::ExtractorFailed, "extractor command not configured");
                }
                std::string text = run_external_extractor(raw, config);
                if (!is_valid_utf8(text)) {
                    raise(ErrorCode::EncodingError, "extractor output is not valid UTF-8");
                }
                return text;
            }
            return extract_pdf_text_layer(raw.payload);
        }
    }
    raise(ErrorCode::ExtractorFailed, "unknown source kind");
}

CleanDocument filter_text(std::string_view text, FilterProfile profile,
                          const StopwordList& stopwords, std::string doc_id) {
    CleanDocument doc;
    doc.doc_id = std::move(doc_id);
    doc.profile = profile;

    std::string stage = strip_html_tags(text, doc.removals.html_tags);
    stage = normalize_punctuation(stage);
    stage = strip_urls(stage, doc.removals.urls);
    stage = filter_special_chars(stage, doc.removals.special_chars);
    stage = collapse_whitespace(stage);
    if (profile == FilterProfile::index) {
        stage = drop_stopwords(stage, stopwords, doc.removals.stop_words);
    }
    if (stage.empty()) raise(ErrorCode::EmptyAfterFilter, "no text left after filtering");

    doc.text = std::move(stage);
    doc.token_count = count_tokens(doc.text);
    return doc;
}

} // namespace evopat
