#pragma once

#include "evopat/agents.hpp"
#include "evopat/tools.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace evopat {

struct AnalysisReport {
    std::string patent_id;
    std::string generated_at; // UTC, ISO-8601
    std::optional<PatentRecord> metadata;
    std::vector<std::pair<std::string, std::string>> sections; // (title, markdown)
    std::vector<std::pair<std::string, std::string>> citations; // (title, url)
};

struct AssembledReport {
    AnalysisReport report;
    std::string markdown;
};

// Fixed five-section document: H1 title, metadata block, one H2 per section in
// pipeline order, then a References H2 when any tool citations exist. Section
// bodies get their own headings demoted below H2.
AssembledReport assemble_markdown(const TeamState& state);

// Renders the supported Markdown subset (ATX headings, lists, bold, italics,
// inline code, links, pipe tables, paragraphs) into a complete HTML5
// document. Total: unsupported constructs come through as escaped text.
std::string render_html(std::string_view markdown);

struct ConverterConfig {
    std::string command_template; // must contain {input} and {output}
};

// Writes the HTML to a temp file, runs the converter, and checks the output
// starts with the PDF magic.
std::string export_pdf(const std::string& html, const ConverterConfig& config,
                       const std::string& output_path);

std::string current_utc_timestamp();

} // namespace evopat
