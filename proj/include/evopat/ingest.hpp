#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace evopat {

enum class SourceKind { plain_text, pdf_text_layer, pre_extracted };

struct RawDocument {
    std::string doc_id;
    SourceKind source_kind = SourceKind::plain_text;
    std::string payload; // bytes for PDFs, UTF-8 text otherwise
    std::optional<std::string> language_hint;
};

enum class FilterProfile { llm, index };

struct RemovalCounts {
    std::size_t special_chars = 0;
    std::size_t html_tags = 0;
    std::size_t urls = 0;
    std::size_t stop_words = 0;
};

struct CleanDocument {
    std::string doc_id;
    std::string text;
    std::size_t token_count = 0;
    FilterProfile profile = FilterProfile::llm;
    RemovalCounts removals;
};

// mode "builtin" uses the bundled PDF text-layer reader; mode "command" runs
// an external extractor: the template's {input} is replaced with the PDF path
// and {output} with a temp file the command must fill with UTF-8 text.
struct ExtractorConfig {
    std::string mode = "builtin";
    std::string command_template;
};

class StopwordList {
public:
    StopwordList() = default;
    explicit StopwordList(std::vector<std::string> words);

    static StopwordList default_list();
    static StopwordList from_file(const std::string& path);

    bool contains(std::string_view lowercase_token) const;
    std::size_t size() const { return words_.size(); }

private:
    std::unordered_set<std::string> words_;
};

std::string extract_text(const RawDocument& raw, const ExtractorConfig& config);

CleanDocument filter_text(std::string_view text, FilterProfile profile,
                          const StopwordList& stopwords, std::string doc_id = {});

// Text-layer extraction from PDF bytes. Handles uncompressed and FlateDecode
// content streams with Tj/TJ/'/" text operators; throws ImageOnlyPdf when no
// text layer is present.
std::string extract_pdf_text_layer(std::string_view pdf_bytes);

} // namespace evopat
