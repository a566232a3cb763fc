#include "evopat/tools.hpp"

#include "evopat/errors.hpp"
#include "evopat/http_client.hpp"
#include "evopat/tokenize.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>

namespace evopat {

namespace {

constexpr std::size_t kMaxPaperKeywords = 3;

std::string getenv_or(const std::string& name, const std::string& fallback = {}) {
    if (name.empty()) return fallback;
    const char* v = std::getenv(name.c_str());
    return v ? std::string(v) : fallback;
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    nlohmann::json parsed = nlohmann::json::parse(in, nullptr, false);
    if (parsed.is_discarded()) raise(ErrorCode::IoError, "invalid JSON in " + path);
    return parsed;
}

// number of query keywords appearing (whole-token, case-insensitive) in the
// record's searchable text
std::size_t keyword_overlap(const std::vector<std::string>& keywords,
                            const std::string& searchable) {
    const std::vector<std::string> tokens = tokenize(searchable);
    const std::set<std::string> token_set(tokens.begin(), tokens.end());
    std::size_t overlap = 0;
    for (const std::string& kw : keywords) {
        if (token_set.count(to_lower_ascii(kw)) > 0) ++overlap;
    }
    return overlap;
}

void check_keywords(const std::vector<std::string>& keywords) {
    if (keywords.empty()) raise(ErrorCode::EmptyKeywords, "keyword list is empty");
}

std::string url_encode(std::string_view s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (const char c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(c);
        } else {
            out.push_back('%');
            out.push_back(hex[u >> 4]);
            out.push_back(hex[u & 0xF]);
        }
    }
    return out;
}

} // namespace

std::string normalize_patent_id(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (const char c : raw) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '/') continue;
        out.push_back(c);
    }
    return out;
}

bool is_iso_date(std::string_view date) {
    if (date.size() != 10 || date[4] != '-' || date[7] != '-') return false;
    for (const std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (!std::isdigit(static_cast<unsigned char>(date[i]))) return false;
    }
    const int month = (date[5] - '0') * 10 + (date[6] - '0');
    const int day = (date[8] - '0') * 10 + (date[9] - '0');
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

nlohmann::json PatentRecord::to_json() const {
    nlohmann::json apps = nlohmann::json::array();
    for (const WorldwideApplication& app : worldwide_applications) {
        apps.push_back({{"jurisdiction", app.jurisdiction}, {"year", app.year}});
    }
    return {{"patent_id", patent_id},
            {"title", title},
            {"abstract", abstract},
            {"inventor", inventor},
            {"assignee", assignee},
            {"application_date", application_date},
            {"worldwide_applications", apps},
            {"pdf_url", pdf_url}};
}

PatentRecord PatentRecord::from_json(const nlohmann::json& j) {
    PatentRecord rec;
    rec.patent_id = j.at("patent_id").get<std::string>();
    if (rec.patent_id.empty()) raise(ErrorCode::Backend, "patent record with empty id");
    rec.title = j.value("title", "");
    rec.abstract = j.value("abstract", "");
    rec.inventor = j.value("inventor", "");
    rec.assignee = j.value("assignee", "");
    rec.application_date = j.value("application_date", "");
    if (!rec.application_date.empty() && !is_iso_date(rec.application_date)) {
        raise(ErrorCode::Backend,
              "unparseable application_date for " + rec.patent_id + ": " + rec.application_date);
    }
    if (j.contains("worldwide_applications")) {
        for (const auto& app : j["worldwide_applications"]) {
            rec.worldwide_applications.push_back(
                {app.at("jurisdiction").get<std::string>(), app.at("year").get<int>()});
        }
    }
    rec.pdf_url = j.value("pdf_url", "");
    return rec;
}

nlohmann::json PaperRecord::to_json() const {
    nlohmann::json j = {{"title", title}, {"url", url}, {"year", year}};
    if (abstract) j["abstract"] = *abstract;
    return j;
}

PaperRecord PaperRecord::from_json(const nlohmann::json& j) {
    PaperRecord rec;
    rec.title = j.at("title").get<std::string>();
    rec.url = j.at("url").get<std::string>();
    if (rec.title.empty() || rec.url.empty()) {
        raise(ErrorCode::Backend, "paper record needs title and url");
    }
    rec.year = j.value("year", 0);
    if (j.contains("abstract") && !j["abstract"].is_null()) {
        rec.abstract = j["abstract"].get<std::string>();
    }
    return rec;
}

std::vector<PatentRecord> load_patent_fixtures(const std::string& path) {
    const nlohmann::json parsed = read_json_file(path);
    if (!parsed.is_array()) raise(ErrorCode::IoError, path + " must hold a JSON list");
    std::vector<PatentRecord> out;
    for (const auto& item : parsed) out.push_back(PatentRecord::from_json(item));
    return out;
}

std::vector<PaperRecord> load_paper_fixtures(const std::string& path) {
    const nlohmann::json parsed = read_json_file(path);
    if (!parsed.is_array()) raise(ErrorCode::IoError, path + " must hold a JSON list");
    std::vector<PaperRecord> out;
    for (const auto& item : parsed) out.push_back(PaperRecord::from_json(item));
    return out;
}

FixtureBackend::FixtureBackend(std::vector<PatentRecord> patents, std::vector<PaperRecord> papers)
    : patents_(std::move(patents)), papers_(std::move(papers)) {}

FixtureBackend FixtureBackend::from_files(const std::string& patents_path,
                                          const std::string& papers_path) {
    std::vector<PatentRecord> patents;
    std::vector<PaperRecord> papers;
    if (!patents_path.empty()) patents = load_patent_fixtures(patents_path);
    if (!papers_path.empty()) papers = load_paper_fixtures(papers_path);
    return FixtureBackend(std::move(patents), std::move(papers));
}

PatentRecord FixtureBackend::lookup_patent_metadata(const std::string& patent_id) {
    const std::string wanted = normalize_patent_id(patent_id);
    for (const PatentRecord& rec : patents_) {
        if (normalize_patent_id(rec.patent_id) == wanted) return rec;
    }
    raise(ErrorCode::FixtureMissing, "no fixture for patent " + wanted);
}

std::vector<PatentRecord> FixtureBackend::search_patents(const std::vector<std::string>& keywords,
                                                         std::size_t limit) {
    check_keywords(keywords);
    std::vector<std::pair<std::size_t, const PatentRecord*>> ranked;
    for (const PatentRecord& rec : patents_) {
        const std::size_t overlap = keyword_overlap(keywords, rec.title + " " + rec.abstract);
        if (overlap > 0) ranked.emplace_back(overlap, &rec);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->patent_id < b.second->patent_id;
    });
    std::vector<PatentRecord> out;
    for (const auto& [overlap, rec] : ranked) {
        if (out.size() >= limit) break;
        out.push_back(*rec);
    }
    return out;
}

std::vector<PaperRecord> FixtureBackend::search_papers(const std::vector<std::string>& keywords,
                                                       std::size_t limit) {
    check_keywords(keywords);
    if (keywords.size() > kMaxPaperKeywords) {
        raise(ErrorCode::TooManyKeywords,
              std::to_string(keywords.size()) + " keywords given, at most 3 allowed");
    }
    std::vector<std::pair<std::size_t, const PaperRecord*>> ranked;
    for (const PaperRecord& rec : papers_) {
        const std::string searchable = rec.title + " " + rec.abstract.value_or("");
        const std::size_t overlap = keyword_overlap(keywords, searchable);
        if (overlap > 0) ranked.emplace_back(overlap, &rec);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->title < b.second->title;
    });
    std::vector<PaperRecord> out;
    for (const auto& [overlap, rec] : ranked) {
        if (out.size() >= limit) break;
        out.push_back(*rec);
    }
    return out;
}

namespace {

// Live HTTP backend with an append-only fixture cache: anything fetched is
// added to the local store so later offline runs can answer from it.
class LiveBackend : public ToolBackend {
public:
    explicit LiveBackend(LiveToolsConfig config) : config_(std::move(config)) {}

    PatentRecord lookup_patent_metadata(const std::string& patent_id) override {
        const std::string id = normalize_patent_id(patent_id);
        const http::Response response =
            http_get(config_.patents_endpoint + "/patents/" + url_encode(id),
                     config_.patents_auth_env);
        if (response.status == 404) raise(ErrorCode::NotFound, "no patent " + id);
        const nlohmann::json body = parse_body(response);
        PatentRecord rec = PatentRecord::from_json(body);
        cache_patents({rec});
        return rec;
    }

    std::vector<PatentRecord> search_patents(const std::vector<std::string>& keywords,
                                             std::size_t limit) override {
        check_keywords(keywords);
        const http::Response response = http_get(
            config_.patents_endpoint + "/patents/search?q=" + url_encode(join(keywords)) +
                "&limit=" + std::to_string(limit),
            config_.patents_auth_env);
        const nlohmann::json body = parse_body(response);
        if (!body.is_array()) raise(ErrorCode::Backend, "patent search response is not a list");
        std::vector<PatentRecord> out;
        for (const auto& item : body) {
            out.push_back(PatentRecord::from_json(item));
            if (out.size() >= limit) break;
        }
        cache_patents(out);
        return out;
    }

    std::vector<PaperRecord> search_papers(const std::vector<std::string>& keywords,
                                           std::size_t limit) override {
        check_keywords(keywords);
        if (keywords.size() > kMaxPaperKeywords) {
            raise(ErrorCode::TooManyKeywords,
                  std::to_string(keywords.size()) + " keywords given, at most 3 allowed");
        }
        const http::Response response = http_get(
            config_.papers_endpoint + "/papers/search?q=" + url_encode(join(keywords)) +
                "&limit=" + std::to_string(limit),
            config_.papers_auth_env);
        const nlohmann::json body = parse_body(response);
        if (!body.is_array()) raise(ErrorCode::Backend, "paper search response is not a list");
        std::vector<PaperRecord> out;
        for (const auto& item : body) {
            out.push_back(PaperRecord::from_json(item));
            if (out.size() >= limit) break;
        }
        cache_papers(out);
        return out;
    }

private:
    static std::string join(const std::vector<std::string>& keywords) {
        std::string out;
        for (const std::string& kw : keywords) {
            if (!out.empty()) out.push_back(' ');
            out += kw;
        }
        return out;
    }

    http::Response http_get(const std::string& url, const std::string& auth_env) {
        http::Headers headers;
        const std::string key = getenv_or(auth_env);
        if (!key.empty()) headers.emplace_back("Authorization", "Bearer " + key);
        return http::get(url, headers, config_.timeout_seconds);
    }

    static nlohmann::json parse_body(const http::Response& response) {
        if (response.transport_failed()) {
            raise(ErrorCode::Backend, "backend unreachable: " + response.error);
        }
        if (response.status != 200) {
            raise(ErrorCode::Backend, "backend status " + std::to_string(response.status));
        }
        nlohmann::json body = nlohmann::json::parse(response.body, nullptr, false);
        if (body.is_discarded()) raise(ErrorCode::Backend, "backend returned invalid JSON");
        return body;
    }

    void cache_patents(const std::vector<PatentRecord>& records) {
        if (config_.patents_cache_path.empty() || records.empty()) return;
        append_records(config_.patents_cache_path, records,
                       [](const nlohmann::json& a, const PatentRecord& b) {
                           return a.value("patent_id", "") == b.patent_id;
                       });
    }

    void cache_papers(const std::vector<PaperRecord>& records) {
        if (config_.papers_cache_path.empty() || records.empty()) return;
        append_records(config_.papers_cache_path, records,
                       [](const nlohmann::json& a, const PaperRecord& b) {
                           return a.value("url", "") == b.url;
                       });
    }

    template <typename Record, typename SameFn>
    void append_records(const std::string& path, const std::vector<Record>& records, SameFn same) {
        nlohmann::json store = nlohmann::json::array();
        {
            std::ifstream in(path);
            if (in) {
                nlohmann::json parsed = nlohmann::json::parse(in, nullptr, false);
                if (!parsed.is_discarded() && parsed.is_array()) store = std::move(parsed);
            }
        }
        bool changed = false;
        for (const Record& rec : records) {
            const bool present = std::any_of(store.begin(), store.end(),
                                             [&](const nlohmann::json& j) { return same(j, rec); });
            if (!present) {
                store.push_back(rec.to_json());
                changed = true;
            }
        }
        if (changed) {
            std::ofstream out(path, std::ios::trunc);
            if (out) out << store.dump(2) << '\n';
        }
    }

    LiveToolsConfig config_;
};

} // namespace

std::unique_ptr<ToolBackend> make_live_backend(LiveToolsConfig config) {
    if (config.patents_endpoint.empty() || config.papers_endpoint.empty()) {
        raise(ErrorCode::ConfigError, "live tools require patents and papers endpoints");
    }
    return std::make_unique<LiveBackend>(std::move(config));
}

void ToolRegistry::register_tool(ToolSpec spec, Handler handler) {
    if (!handler) throw std::invalid_argument("tool handler must be callable");
    const std::string name = spec.name;
    if (entries_.count(name) > 0) throw std::invalid_argument("duplicate tool name " + name);
    entries_[name] = Entry{std::move(spec), std::move(handler)};
}

const ToolSpec* ToolRegistry::find_spec(const std::string& name) const {
    const auto it = entries_.find(name);
    return it == entries_.end() ? nullptr : &it->second.spec;
}

std::vector<ToolSpec> ToolRegistry::specs() const {
    std::vector<ToolSpec> out;
    for (const auto& [name, entry] : entries_) out.push_back(entry.spec);
    return out;
}

std::vector<ToolSpec> ToolRegistry::specs_for(const std::vector<std::string>& names) const {
    std::vector<ToolSpec> out;
    for (const std::string& name : names) {
        if (const ToolSpec* spec = find_spec(name)) out.push_back(*spec);
    }
    return out;
}

ChatMessage ToolRegistry::dispatch(const ToolCall& call) const {
    const auto it = entries_.find(call.tool_name);
    if (it == entries_.end()) {
        raise(ErrorCode::UnknownTool, "no tool registered as " + call.tool_name);
    }
    nlohmann::json result;
    try {
        result = it->second.handler(call);
    } catch (const Error& e) {
        throw Error(ErrorCode::HandlerError,
                    call.tool_name + " failed: " + std::string(e.what()));
    }
    return ChatMessage::tool_msg(result.dump(), call.call_id);
}

ToolRegistry make_tool_registry(std::shared_ptr<ToolBackend> backend, std::size_t default_limit) {
    ToolRegistry registry;

    ToolSpec lookup;
    lookup.name = "lookup_patent_metadata";
    lookup.description =
        "Look up a patent's metadata: source pdf, inventor, assignee, application date and "
        "worldwide applications. The patent ID must be given without commas.";
    lookup.params = {{"patent_id", ParamType::string, "Patent ID, e.g. US20170263445A1", true}};
    registry.register_tool(lookup, [backend](const ToolCall& call) {
        const std::string id = normalize_patent_id(call.arguments.at("patent_id"));
        return backend->lookup_patent_metadata(id).to_json();
    });

    ToolSpec patents;
    patents.name = "search_patents";
    patents.description = "Search for patents similar to the given English keywords.";
    patents.params = {
        {"keywords", ParamType::string_list, "English keywords describing the patent", true},
        {"limit", ParamType::integer, "Maximum number of results", false}};
    registry.register_tool(patents, [backend, default_limit](const ToolCall& call) {
        const std::vector<std::string> keywords =
            parse_string_list_arg(call.arguments.at("keywords"));
        std::size_t limit = default_limit;
        if (const auto it = call.arguments.find("limit"); it != call.arguments.end()) {
            const long requested = parse_integer_arg(it->second);
            limit = requested <= 0 ? 0 : static_cast<std::size_t>(requested);
        }
        nlohmann::json out = nlohmann::json::array();
        for (const PatentRecord& rec : backend->search_patents(keywords, limit)) {
            out.push_back(rec.to_json());
        }
        return out;
    });

    ToolSpec papers;
    papers.name = "search_papers";
    papers.description =
        "Search scholarly literature with at most 3 English keywords; returns titles and urls.";
    papers.params = {
        {"keywords", ParamType::string_list, "At most 3 English keywords", true},
        {"limit", ParamType::integer, "Maximum number of results", false}};
    registry.register_tool(papers, [backend, default_limit](const ToolCall& call) {
        const std::vector<std::string> keywords =
            parse_string_list_arg(call.arguments.at("keywords"));
        std::size_t limit = default_limit;
        if (const auto it = call.arguments.find("limit"); it != call.arguments.end()) {
            const long requested = parse_integer_arg(it->second);
            limit = requested <= 0 ? 0 : static_cast<std::size_t>(requested);
        }
        nlohmann::json out = nlohmann::json::array();
        for (const PaperRecord& rec : backend->search_papers(keywords, limit)) {
            out.push_back(rec.to_json());
        }
        return out;
    });

    return registry;
}

} // namespace evopat
