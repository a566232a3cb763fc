// Minimal text-layer reader for well-formed text PDFs: object scan, page-tree
// walk in /Kids order, FlateDecode via zlib, and Tj/TJ/'/" show operators.
// Image-only pages yield no text and surface as ImageOnlyPdf.

#include "evopat/errors.hpp"
#include "evopat/ingest.hpp"

#include <zlib.h>

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace evopat {

namespace {

struct PdfObject {
    std::string body;   // dict and content up to stream/endobj
    std::string stream; // raw stream bytes (may be empty)
};

bool is_pdf_delim(char c) {
    return c == '(' || c == ')' || c == '<' || c == '>' || c == '[' || c == ']' ||
           c == '{' || c == '}' || c == '/' || c == '%';
}

bool is_pdf_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\0';
}

std::string inflate_stream(std::string_view data) {
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) raise(ErrorCode::ExtractorFailed, "zlib init failed");
    std::string out;
    std::vector<unsigned char> buf(16384);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    int rc = Z_OK;
    do {
        zs.next_out = buf.data();
        zs.avail_out = static_cast<uInt>(buf.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            raise(ErrorCode::ExtractorFailed, "corrupt FlateDecode stream");
        }
        out.append(reinterpret_cast<char*>(buf.data()), buf.size() - zs.avail_out);
    } while (rc != Z_STREAM_END && zs.avail_in > 0);
    inflateEnd(&zs);
    return out;
}

// Parses "N G obj ... [stream ... endstream] endobj" blocks by linear scan;
// no xref table required.
std::map<int, PdfObject> scan_objects(std::string_view pdf) {
    std::map<int, PdfObject> objects;
    std::size_t pos = 0;
    while (true) {
        const std::size_t obj_kw = pdf.find(" obj", pos);
        if (obj_kw == std::string_view::npos) break;
        // backtrack over "N G"
        std::size_t p = obj_kw;
        while (p > 0 && is_pdf_space(pdf[p - 1])) --p;
        std::size_t gen_end = p;
        while (p > 0 && std::isdigit(static_cast<unsigned char>(pdf[p - 1]))) --p;
        const std::size_t gen_begin = p;
        while (p > 0 && is_pdf_space(pdf[p - 1])) --p;
        std::size_t num_end = p;
        while (p > 0 && std::isdigit(static_cast<unsigned char>(pdf[p - 1]))) --p;
        const std::size_t num_begin = p;
        if (num_begin == num_end || gen_begin == gen_end) {
            pos = obj_kw + 4;
            continue;
        }
        const int obj_num = std::stoi(std::string(pdf.substr(num_begin, num_end - num_begin)));

        std::size_t body_begin = obj_kw + 4;
        std::size_t endobj = pdf.find("endobj", body_begin);
        if (endobj == std::string_view::npos) endobj = pdf.size();

        PdfObject obj;
        const std::size_t stream_kw = pdf.find("stream", body_begin);
        if (stream_kw != std::string_view::npos && stream_kw < endobj &&
            pdf.compare(stream_kw, 9, "endstream") != 0) {
            obj.body = std::string(pdf.substr(body_begin, stream_kw - body_begin));
            std::size_t data_begin = stream_kw + 6;
            if (data_begin < pdf.size() && pdf[data_begin] == '\r') ++data_begin;
            if (data_begin < pdf.size() && pdf[data_begin] == '\n') ++data_begin;
            const std::size_t endstream = pdf.find("endstream", data_begin);
            if (endstream == std::string_view::npos) {
                raise(ErrorCode::ExtractorFailed, "unterminated stream object");
            }
            std::size_t data_end = endstream;
            if (data_end > data_begin && pdf[data_end - 1] == '\n') --data_end;
            if (data_end > data_begin && pdf[data_end - 1] == '\r') --data_end;
            obj.stream = std::string(pdf.substr(data_begin, data_end - data_begin));
            endobj = pdf.find("endobj", endstream);
            if (endobj == std::string_view::npos) endobj = pdf.size();
        } else {
            obj.body = std::string(pdf.substr(body_begin, endobj - body_begin));
        }
        objects[obj_num] = std::move(obj);
        pos = endobj + 6;
    }
    return objects;
}

// True when `body` contains "/Key" followed by a delimiter (so /Page does not
// match /Pages).
bool has_name_value(std::string_view body, std::string_view key, std::string_view name) {
    std::size_t pos = 0;
    const std::string needle = "/" + std::string(key);
    while ((pos = body.find(needle, pos)) != std::string_view::npos) {
        std::size_t p = pos + needle.size();
        while (p < body.size() && is_pdf_space(body[p])) ++p;
        if (p < body.size() && body[p] == '/' &&
            body.compare(p + 1, name.size(), name) == 0) {
            const std::size_t after = p + 1 + name.size();
            if (after >= body.size() || is_pdf_space(body[after]) || is_pdf_delim(body[after])) {
                return true;
            }
        }
        pos += needle.size();
    }
    return false;
}

std::optional<int> parse_ref_at(std::string_view body, std::size_t pos, std::size_t* end = nullptr) {
    while (pos < body.size() && is_pdf_space(body[pos])) ++pos;
    std::size_t num_begin = pos;
    while (pos < body.size() && std::isdigit(static_cast<unsigned char>(body[pos]))) ++pos;
    if (pos == num_begin) return std::nullopt;
    const int num = std::stoi(std::string(body.substr(num_begin, pos - num_begin)));
    while (pos < body.size() && is_pdf_space(body[pos])) ++pos;
    std::size_t gen_begin = pos;
    while (pos < body.size() && std::isdigit(static_cast<unsigned char>(body[pos]))) ++pos;
    if (pos == gen_begin) return std::nullopt;
    while (pos < body.size() && is_pdf_space(body[pos])) ++pos;
    if (pos >= body.size() || body[pos] != 'R') return std::nullopt;
    if (end) *end = pos + 1;
    return num;
}

std::optional<int> find_ref(std::string_view body, std::string_view key) {
    const std::string needle = "/" + std::string(key);
    std::size_t pos = 0;
    while ((pos = body.find(needle, pos)) != std::string_view::npos) {
        const std::size_t after = pos + needle.size();
        if (after < body.size() && !is_pdf_space(body[after]) && !is_pdf_delim(body[after])) {
            pos = after;
            continue;
        }
        if (auto ref = parse_ref_at(body, after)) return ref;
        pos = after;
    }
    return std::nullopt;
}

std::vector<int> find_ref_array(std::string_view body, std::string_view key) {
    std::vector<int> refs;
    const std::string needle = "/" + std::string(key);
    const std::size_t pos = body.find(needle);
    if (pos == std::string_view::npos) return refs;
    std::size_t p = pos + needle.size();
    while (p < body.size() && is_pdf_space(body[p])) ++p;
    if (p >= body.size()) return refs;
    if (body[p] != '[') {
        if (auto ref = parse_ref_at(body, p)) refs.push_back(*ref);
        return refs;
    }
    ++p;
    while (p < body.size() && body[p] != ']') {
        std::size_t end = p;
        if (auto ref = parse_ref_at(body, p, &end)) {
            refs.push_back(*ref);
            p = end;
        } else {
            ++p;
        }
    }
    return refs;
}

// Reads a PDF literal or hex string starting at pos; returns decoded bytes
// and advances pos past the closing delimiter.
std::string read_pdf_string(std::string_view data, std::size_t& pos) {
    std::string out;
    if (data[pos] == '(') {
        ++pos;
        int depth = 1;
        while (pos < data.size() && depth > 0) {
            const char c = data[pos];
            if (c == '\\' && pos + 1 < data.size()) {
                const char esc = data[pos + 1];
                pos += 2;
                switch (esc) {
                    case 'n': out.push_back('\n'); break;
                    case 'r': out.push_back('\r'); break;
                    case 't': out.push_back('\t'); break;
                    case 'b': out.push_back('\b'); break;
                    case 'f': out.push_back('\f'); break;
                    case '\n': break; // line continuation
                    case '\r':
                        if (pos < data.size() && data[pos] == '\n') ++pos;
                        break;
                    default:
                        if (esc >= '0' && esc <= '7') {
                            int val = esc - '0';
                            for (int k = 0; k < 2 && pos < data.size() &&
                                            data[pos] >= '0' && data[pos] <= '7'; ++k) {
                                val = val * 8 + (data[pos] - '0');
                                ++pos;
                            }
                            out.push_back(static_cast<char>(val & 0xFF));
                        } else {
                            out.push_back(esc);
                        }
                }
                continue;
            }
            if (c == '(') ++depth;
            if (c == ')') {
                --depth;
                if (depth == 0) {
                    ++pos;
                    break;
                }
            }
            out.push_back(c);
            ++pos;
        }
    } else if (data[pos] == '<') {
        ++pos;
        int hi = -1;
        while (pos < data.size() && data[pos] != '>') {
            const char c = data[pos];
            ++pos;
            int v;
            if (c >= '0' && c <= '9') v = c - '0';
            else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
            else continue;
            if (hi < 0) {
                hi = v;
            } else {
                out.push_back(static_cast<char>((hi << 4) | v));
                hi = -1;
            }
        }
        if (hi >= 0) out.push_back(static_cast<char>(hi << 4));
        if (pos < data.size()) ++pos; // '>'
    }
    return out;
}

// Bytes in PDF strings are treated as Latin-1 and re-encoded as UTF-8.
void append_latin1(std::string& out, std::string_view bytes) {
    for (const char c : bytes) {
        const auto u = static_cast<unsigned char>(c);
        if (u < 0x80) {
            out.push_back(c);
        } else {
            out.push_back(static_cast<char>(0xC0 | (u >> 6)));
            out.push_back(static_cast<char>(0x80 | (u & 0x3F)));
        }
    }
}

std::string extract_content_text(std::string_view content) {
    std::string text;
    bool in_text_block = false;
    std::string pending;       // last string operand
    std::string pending_array; // concatenated strings of last array operand
    std::size_t pos = 0;

    auto emit_newline = [&text]() {
        if (!text.empty() && text.back() != '\n') text.push_back('\n');
    };

    while (pos < content.size()) {
        const char c = content[pos];
        if (is_pdf_space(c)) {
            ++pos;
            continue;
        }
        if (c == '%') { // comment to end of line
            while (pos < content.size() && content[pos] != '\n') ++pos;
            continue;
        }
        if (c == '(') {
            pending = read_pdf_string(content, pos);
            continue;
        }
        if (c == '<') {
            if (pos + 1 < content.size() && content[pos + 1] == '<') { // dict
                pos += 2;
                continue;
            }
            pending = read_pdf_string(content, pos);
            continue;
        }
        if (c == '[') {
            ++pos;
            pending_array.clear();
            while (pos < content.size() && content[pos] != ']') {
                if (content[pos] == '(' || content[pos] == '<') {
                    pending_array += read_pdf_string(content, pos);
                } else {
                    ++pos;
                }
            }
            if (pos < content.size()) ++pos;
            continue;
        }
        if (c == '/') { // name token
            ++pos;
            while (pos < content.size() && !is_pdf_space(content[pos]) &&
                   !is_pdf_delim(content[pos])) {
                ++pos;
            }
            continue;
        }
        // bare token (number or operator)
        const std::size_t tok_begin = pos;
        while (pos < content.size() && !is_pdf_space(content[pos]) &&
               !is_pdf_delim(content[pos])) {
            ++pos;
        }
        if (pos == tok_begin) {
            ++pos;
            continue;
        }
        const std::string_view tok = content.substr(tok_begin, pos - tok_begin);
        if (tok == "BT") {
            in_text_block = true;
        } else if (tok == "ET") {
            in_text_block = false;
            emit_newline();
        } else if (!in_text_block) {
            continue;
        } else if (tok == "Tj") {
            append_latin1(text, pending);
        } else if (tok == "TJ") {
            append_latin1(text, pending_array);
        } else if (tok == "'" || tok == "\"") {
            emit_newline();
            append_latin1(text, pending);
        } else if (tok == "Td" || tok == "TD" || tok == "T*") {
            emit_newline();
        }
    }
    return text;
}

void collect_pages(const std::map<int, PdfObject>& objects, int node_num,
                   std::vector<int>& pages, int depth = 0) {
    if (depth > 32) return;
    const auto it = objects.find(node_num);
    if (it == objects.end()) return;
    const std::string& body = it->second.body;
    if (has_name_value(body, "Type", "Page")) {
        pages.push_back(node_num);
        return;
    }
    for (const int kid : find_ref_array(body, "Kids")) {
        collect_pages(objects, kid, pages, depth + 1);
    }
}

std::string trimmed(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

} // namespace

std::string extract_pdf_text_layer(std::string_view pdf_bytes) {
    if (pdf_bytes.size() < 5 || pdf_bytes.substr(0, 5) != "%PDF-") {
        raise(ErrorCode::ExtractorFailed, "missing %PDF header");
    }
    const auto objects = scan_objects(pdf_bytes);
    if (objects.empty()) raise(ErrorCode::ExtractorFailed, "no objects found");

    // catalog via trailer /Root, falling back to a /Type /Catalog scan
    std::optional<int> catalog;
    const std::size_t trailer = pdf_bytes.rfind("trailer");
    if (trailer != std::string_view::npos) {
        catalog = find_ref(pdf_bytes.substr(trailer), "Root");
    }
    if (!catalog) {
        for (const auto& [num, obj] : objects) {
            if (has_name_value(obj.body, "Type", "Catalog")) {
                catalog = num;
                break;
            }
        }
    }
    if (!catalog || objects.find(*catalog) == objects.end()) {
        raise(ErrorCode::ExtractorFailed, "no document catalog");
    }

    const auto pages_root = find_ref(objects.at(*catalog).body, "Pages");
    if (!pages_root) raise(ErrorCode::ExtractorFailed, "catalog has no page tree");

    std::vector<int> pages;
    collect_pages(objects, *pages_root, pages);
    if (pages.empty()) raise(ErrorCode::ExtractorFailed, "page tree has no pages");

    std::string full_text;
    for (const int page_num : pages) {
        const PdfObject& page = objects.at(page_num);
        std::string page_text;
        for (const int content_ref : find_ref_array(page.body, "Contents")) {
            const auto cit = objects.find(content_ref);
            if (cit == objects.end()) continue;
            std::string data = cit->second.stream;
            if (has_name_value(cit->second.body, "Filter", "FlateDecode")) {
                data = inflate_stream(data);
            } else if (cit->second.body.find("/Filter") != std::string::npos) {
                continue; // unsupported filter; no text from this stream
            }
            page_text += extract_content_text(data);
        }
        const std::string t = trimmed(page_text);
        if (!t.empty()) {
            if (!full_text.empty()) full_text.push_back('\n');
            full_text += t;
        }
    }
    if (trimmed(full_text).empty()) {
        raise(ErrorCode::ImageOnlyPdf, "no extractable text layer");
    }
    return full_text;
}

} // namespace evopat
