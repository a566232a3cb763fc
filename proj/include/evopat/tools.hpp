#pragma once

#include "evopat/llm.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace evopat {

struct WorldwideApplication {
    std::string jurisdiction;
    int year = 0;
};

struct PatentRecord {
    std::string patent_id;
    std::string title;
    std::string abstract;
    std::string inventor;
    std::string assignee;
    std::string application_date; // ISO-8601 (YYYY-MM-DD)
    std::vector<WorldwideApplication> worldwide_applications;
    std::string pdf_url;

    nlohmann::json to_json() const;
    static PatentRecord from_json(const nlohmann::json& j);
    bool operator==(const PatentRecord&) const = default;
};

struct PaperRecord {
    std::string title;
    std::string url;
    int year = 0;
    std::optional<std::string> abstract;

    nlohmann::json to_json() const;
    static PaperRecord from_json(const nlohmann::json& j);
    bool operator==(const PaperRecord&) const = default;
};

// Strips whitespace, commas and slashes, per the prompt's "does not require ','".
std::string normalize_patent_id(std::string_view raw);

bool is_iso_date(std::string_view date);

class ToolBackend {
public:
    virtual ~ToolBackend() = default;
    virtual PatentRecord lookup_patent_metadata(const std::string& patent_id) = 0;
    virtual std::vector<PatentRecord> search_patents(const std::vector<std::string>& keywords,
                                                     std::size_t limit) = 0;
    virtual std::vector<PaperRecord> search_papers(const std::vector<std::string>& keywords,
                                                   std::size_t limit) = 0;
};

// Answers from patents.json / papers.json; searches rank by keyword-overlap
// count with ties broken by id/title, zero-overlap records excluded.
class FixtureBackend : public ToolBackend {
public:
    FixtureBackend(std::vector<PatentRecord> patents, std::vector<PaperRecord> papers);
    static FixtureBackend from_files(const std::string& patents_path,
                                     const std::string& papers_path);

    PatentRecord lookup_patent_metadata(const std::string& patent_id) override;
    std::vector<PatentRecord> search_patents(const std::vector<std::string>& keywords,
                                             std::size_t limit) override;
    std::vector<PaperRecord> search_papers(const std::vector<std::string>& keywords,
                                           std::size_t limit) override;

private:
    std::vector<PatentRecord> patents_;
    std::vector<PaperRecord> papers_;
};

struct LiveToolsConfig {
    std::string patents_endpoint; // GET <endpoint>/patents/<id> and /patents/search
    std::string papers_endpoint;  // GET <endpoint>/papers/search
    std::string patents_auth_env;
    std::string papers_auth_env;
    int timeout_seconds = 30;
    // on successful live fetches, records are appended to these fixture files
    std::string patents_cache_path;
    std::string papers_cache_path;
};

std::unique_ptr<ToolBackend> make_live_backend(LiveToolsConfig config);

class ToolRegistry {
public:
    using Handler = std::function<nlohmann::json(const ToolCall&)>;

    void register_tool(ToolSpec spec, Handler handler);

    const ToolSpec* find_spec(const std::string& name) const;
    std::vector<ToolSpec> specs() const;
    std::vector<ToolSpec> specs_for(const std::vector<std::string>& names) const;

    // Runs the handler and wraps its output as a compact-JSON tool message.
    ChatMessage dispatch(const ToolCall& call) const;

private:
    struct Entry {
        ToolSpec spec;
        Handler handler;
    };
    std::map<std::string, Entry> entries_;
};

// The three patent-analysis tools wired to a backend. `default_limit` applies
// when a search call omits its limit argument.
ToolRegistry make_tool_registry(std::shared_ptr<ToolBackend> backend,
                                std::size_t default_limit = 5);

std::vector<PatentRecord> load_patent_fixtures(const std::string& path);
std::vector<PaperRecord> load_paper_fixtures(const std::string& path);

} // namespace evopat
