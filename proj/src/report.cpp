#include "evopat/report.hpp"

#include "evopat/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

namespace evopat {

namespace {

std::string escape_html(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (const char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string escape_attr(std::string_view text) {
    std::string out;
    for (const char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

// Finds `close` at or after `from`, not crossing a newline.
std::size_t find_inline(std::string_view text, std::string_view close, std::size_t from) {
    const std::size_t pos = text.find(close, from);
    if (pos == std::string_view::npos) return pos;
    const std::size_t nl = text.find('\n', from);
    if (nl != std::string_view::npos && nl < pos) return std::string_view::npos;
    return pos;
}

std::string render_inline(std::string_view text) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const char c = text[pos];
        if (c == '`') {
            const std::size_t close = find_inline(text, "`", pos + 1);
            if (close != std::string_view::npos) {
                out += "<code>" + escape_html(text.substr(pos + 1, close - pos - 1)) + "</code>";
                pos = close + 1;
                continue;
            }
        } else if (text.compare(pos, 2, "**") == 0) {
            const std::size_t close = find_inline(text, "**", pos + 2);
            if (close != std::string_view::npos && close > pos + 2) {
                out += "<strong>" + render_inline(text.substr(pos + 2, close - pos - 2)) +
                       "</strong>";
                pos = close + 2;
                continue;
            }
        } else if (c == '*' || c == '_') {
            const std::size_t close = find_inline(text, text.substr(pos, 1), pos + 1);
            if (close != std::string_view::npos && close > pos + 1) {
                out += "<em>" + render_inline(text.substr(pos + 1, close - pos - 1)) + "</em>";
                pos = close + 1;
                continue;
            }
        } else if (c == '[') {
            const std::size_t mid = find_inline(text, "](", pos + 1);
            if (mid != std::string_view::npos) {
                const std::size_t close = find_inline(text, ")", mid + 2);
                if (close != std::string_view::npos) {
                    const std::string_view label = text.substr(pos + 1, mid - pos - 1);
                    const std::string_view url = text.substr(mid + 2, close - mid - 2);
                    out += "<a href=\"" + escape_attr(url) + "\">" + render_inline(label) + "</a>";
                    pos = close + 1;
                    continue;
                }
            }
        }
        out += escape_html(text.substr(pos, 1));
        ++pos;
    }
    return out;
}

int heading_level(std::string_view line) {
    std::size_t hashes = 0;
    while (hashes < line.size() && line[hashes] == '#') ++hashes;
    if (hashes >= 1 && hashes <= 6 && hashes < line.size() && line[hashes] == ' ') {
        return static_cast<int>(hashes);
    }
    return 0;
}

bool is_unordered_item(std::string_view line) {
    return line.size() >= 2 && (line[0] == '-' || line[0] == '*') && line[1] == ' ';
}

bool is_ordered_item(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    return i > 0 && i + 1 < line.size() && line[i] == '.' && line[i + 1] == ' ';
}

std::vector<std::string> split_table_row(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t begin = line.size() > 0 && line[0] == '|' ? 1 : 0;
    std::size_t end = line.size();
    if (end > begin && line[end - 1] == '|') --end;
    std::string cell;
    for (std::size_t i = begin; i < end; ++i) {
        if (line[i] == '|') {
            cells.push_back(cell);
            cell.clear();
        } else {
            cell.push_back(line[i]);
        }
    }
    cells.push_back(cell);
    for (std::string& c : cells) {
        while (!c.empty() && c.front() == ' ') c.erase(c.begin());
        while (!c.empty() && c.back() == ' ') c.pop_back();
    }
    return cells;
}

bool is_table_separator(std::string_view line) {
    const std::vector<std::string> cells = split_table_row(line);
    if (cells.empty()) return false;
    for (const std::string& cell : cells) {
        if (cell.empty()) return false;
        std::size_t i = 0;
        std::size_t e = cell.size();
        if (cell[i] == ':') ++i;
        if (e > i && cell[e - 1] == ':') --e;
        if (i >= e) return false;
        for (; i < e; ++i) {
            if (cell[i] != '-') return false;
        }
    }
    return true;
}

class HtmlWriter {
public:
    void add_line(std::string_view line) {
        const int level = heading_level(line);
        if (level > 0) {
            flush();
            body_ << "<h" << level << ">" << render_inline(line.substr(level + 1)) << "</h"
                  << level << ">\n";
            if (title_.empty()) title_ = std::string(line.substr(level + 1));
            return;
        }
        if (is_unordered_item(line)) {
            flush_except(Block::ul);
            if (block_ != Block::ul) {
                body_ << "<ul>\n";
                block_ = Block::ul;
            }
            body_ << "<li>" << render_inline(line.substr(2)) << "</li>\n";
            return;
        }
        if (is_ordered_item(line)) {
            flush_except(Block::ol);
            if (block_ != Block::ol) {
                body_ << "<ol>\n";
                block_ = Block::ol;
            }
            body_ << "<li>" << render_inline(line.substr(line.find(' ') + 1)) << "</li>\n";
            return;
        }
        if (!line.empty() && line[0] == '|') {
            flush_except(Block::table);
            table_rows_.push_back(std::string(line));
            block_ = Block::table;
            return;
        }
        if (line.empty()) {
            flush();
            return;
        }
        flush_except(Block::paragraph);
        block_ = Block::paragraph;
        if (!paragraph_.empty()) paragraph_ += "\n";
        paragraph_ += std::string(line);
    }

    std::string finish() {
        flush();
        std::ostringstream doc;
        doc << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
            << "<title>" << escape_html(title_.empty() ? "Report" : title_) << "</title>\n"
            << "<style>\n"
            << "body { font-family: serif; max-width: 50rem; margin: 2rem auto; "
               "line-height: 1.5; }\n"
            << "table { border-collapse: collapse; }\n"
            << "th, td { border: 1px solid #999; padding: 0.3rem 0.6rem; }\n"
            << "code { background: #f2f2f2; padding: 0 0.2rem; }\n"
            << "</style>\n</head>\n<body>\n"
            << body_.str() << "</body>\n</html>\n";
        return doc.str();
    }

private:
    enum class Block { none, paragraph, ul, ol, table };

    void flush_except(Block keep) {
        if (block_ != keep) flush();
    }

    void flush() {
        switch (block_) {
            case Block::none:
                break;
            case Block::paragraph:
                body_ << "<p>" << render_inline(paragraph_) << "</p>\n";
                paragraph_.clear();
                break;
            case Block::ul:
                body_ << "</ul>\n";
                break;
            case Block::ol:
                body_ << "</ol>\n";
                break;
            case Block::table:
                write_table();
                break;
        }
        block_ = Block::none;
    }

    void write_table() {
        if (table_rows_.size() < 2 || !is_table_separator(table_rows_[1])) {
            // not a well-formed pipe table: pass rows through as a paragraph
            std::string text;
            for (const std::string& row : table_rows_) {
                if (!text.empty()) text += "\n";
                text += row;
            }
            body_ << "<p>" << render_inline(text) << "</p>\n";
            table_rows_.clear();
            return;
        }
        body_ << "<table>\n<thead>\n<tr>";
        for (const std::string& cell : split_table_row(table_rows_[0])) {
            body_ << "<th>" << render_inline(cell) << "</th>";
        }
        body_ << "</tr>\n</thead>\n<tbody>\n";
        for (std::size_t i = 2; i < table_rows_.size(); ++i) {
            body_ << "<tr>";
            for (const std::string& cell : split_table_row(table_rows_[i])) {
                body_ << "<td>" << render_inline(cell) << "</td>";
            }
            body_ << "</tr>\n";
        }
        body_ << "</tbody>\n</table>\n";
        table_rows_.clear();
    }

    Block block_ = Block::none;
    std::string paragraph_;
    std::vector<std::string> table_rows_;
    std::ostringstream body_;
    std::string title_;
};

// Section bodies may carry their own headings; push them below the fixed H2s.
std::string demote_headings(std::string_view markdown) {
    std::string out;
    std::istringstream in{std::string(markdown)};
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const int level = heading_level(line);
        if (level > 0) {
            const int target = std::min(6, level + 2);
            line = std::string(static_cast<std::size_t>(target), '#') +
                   line.substr(static_cast<std::size_t>(level));
        }
        if (!first) out += "\n";
        out += line;
        first = false;
    }
    return out;
}

std::string format_worldwide(const std::vector<WorldwideApplication>& apps) {
    std::string out;
    for (const WorldwideApplication& app : apps) {
        if (!out.empty()) out += ", ";
        out += app.jurisdiction + " (" + std::to_string(app.year) + ")";
    }
    return out;
}

} // namespace

std::string current_utc_timestamp() {
    std::time_t now = std::time(nullptr);
    // reproducible-builds convention: freeze the clock when set
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        now = static_cast<std::time_t>(std::atoll(epoch));
    }
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

AssembledReport assemble_markdown(const TeamState& state) {
    for (const AgentRole role : kPipelineOrder) {
        if (state.sections.find(role) == state.sections.end()) {
            raise(ErrorCode::MissingSection,
                  std::string("section missing for role ") + agent_role_name(role));
        }
    }

    AssembledReport out;
    out.report.patent_id = state.patent_id;
    out.report.generated_at = current_utc_timestamp();
    out.report.metadata = state.metadata;

    std::ostringstream md;
    md << "# Patent Analysis: " << state.patent_id << "\n\n";

    md << "- **Generated:** " << out.report.generated_at << "\n";
    if (state.metadata) {
        const PatentRecord& rec = *state.metadata;
        if (!rec.title.empty()) md << "- **Title:** " << rec.title << "\n";
        if (!rec.inventor.empty()) md << "- **Inventor:** " << rec.inventor << "\n";
        if (!rec.assignee.empty()) md << "- **Assignee:** " << rec.assignee << "\n";
        if (!rec.application_date.empty()) {
            md << "- **Application date:** " << rec.application_date << "\n";
        }
        if (!rec.worldwide_applications.empty()) {
            md << "- **Worldwide applications:** " << format_worldwide(rec.worldwide_applications)
               << "\n";
        }
        if (!rec.pdf_url.empty()) {
            md << "- **Source PDF:** [" << rec.pdf_url << "](" << rec.pdf_url << ")\n";
        }
    }

    std::set<std::pair<std::string, std::string>> seen;
    for (const AgentRole role : kPipelineOrder) {
        const SectionOutput& section = state.sections.at(role);
        md << "\n## " << section_title(role) << "\n\n"
           << demote_headings(section.markdown) << "\n";
        out.report.sections.emplace_back(section_title(role), demote_headings(section.markdown));
        for (const ToolCitation& citation : section.tool_citations) {
            for (const auto& ref : citation.references) {
                if (seen.insert(ref).second) out.report.citations.push_back(ref);
            }
        }
    }

    if (!out.report.citations.empty()) {
        md << "\n## References\n\n";
        for (const auto& [title, url] : out.report.citations) {
            md << "- [" << title << "](" << url << ")\n";
        }
    }

    out.markdown = md.str();
    return out;
}

std::string render_html(std::string_view markdown) {
    HtmlWriter writer;
    std::size_t pos = 0;
    while (pos <= markdown.size()) {
        std::size_t end = markdown.find('\n', pos);
        if (end == std::string_view::npos) end = markdown.size();
        std::string_view line = markdown.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        writer.add_line(line);
        if (end == markdown.size()) break;
        pos = end + 1;
    }
    return writer.finish();
}

std::string export_pdf(const std::string& html, const ConverterConfig& config,
                       const std::string& output_path) {
    if (config.command_template.empty()) {
        raise(ErrorCode::ConverterUnconfigured, "no HTML-to-PDF converter configured");
    }
    const std::string input_path =
        "/tmp/evopat_report_" + std::to_string(::getpid()) + ".html";
    {
        std::ofstream out(input_path, std::ios::trunc);
        if (!out) raise(ErrorCode::IoError, "cannot write " + input_path);
        out << html;
    }
    std::string cmd = config.command_template;
    const auto substitute = [&cmd](std::string_view placeholder, const std::string& value) {
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
        raise(ErrorCode::ConverterFailed, "converter exited with status " + std::to_string(rc));
    }
    std::ifstream in(output_path, std::ios::binary);
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::string_view(magic, 4) != "%PDF") {
        raise(ErrorCode::ConverterFailed, output_path + " is empty or not a PDF");
    }
    return output_path;
}

} // namespace evopat
