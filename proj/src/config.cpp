#include "evopat/config.hpp"

#include "evopat/errors.hpp"

#include <fstream>
#include <set>
#include <string>

namespace evopat {

namespace {

void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    if (!obj.is_object()) raise(ErrorCode::ConfigError, where + " must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        if (known.count(key) == 0) {
            raise(ErrorCode::ConfigError, "unknown key \"" + key + "\" in " + where);
        }
    }
}

template <typename T>
T get_or(const nlohmann::json& obj, const std::string& key, T fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        raise(ErrorCode::ConfigError, "bad value for " + where + "." + key);
    }
}

} // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    reject_unknown_keys(j, {"provider", "embedding", "context", "tools", "index", "report",
                            "extractor", "stopwords"},
                        "config");
    RunConfig config;

    if (j.contains("provider")) {
        const auto& p = j["provider"];
        reject_unknown_keys(p,
                            {"mode", "endpoint", "model", "auth_env", "script_path",
                             "timeout_seconds", "max_retries", "retry_base_ms", "temperature"},
                            "provider");
        config.provider.mode = get_or<std::string>(p, "mode", "scripted", "provider");
        config.provider.endpoint = get_or<std::string>(p, "endpoint", "", "provider");
        config.provider.model = get_or<std::string>(p, "model", "", "provider");
        config.provider.auth_env = get_or<std::string>(p, "auth_env", "", "provider");
        config.provider.script_path = get_or<std::string>(p, "script_path", "", "provider");
        config.provider.timeout_seconds = get_or<int>(p, "timeout_seconds", 60, "provider");
        config.provider.max_retries = get_or<int>(p, "max_retries", 2, "provider");
        config.provider.retry_base_ms = get_or<int>(p, "retry_base_ms", 250, "provider");
        config.provider.temperature = get_or<double>(p, "temperature", 0.0, "provider");
        if (config.provider.mode != "scripted" && config.provider.mode != "live") {
            raise(ErrorCode::ConfigError, "provider.mode must be scripted or live");
        }
        if (config.provider.mode == "live" &&
            (config.provider.endpoint.empty() || config.provider.auth_env.empty())) {
            raise(ErrorCode::ConfigError, "live provider needs endpoint and auth_env");
        }
        if (config.provider.mode == "scripted" && config.provider.script_path.empty()) {
            raise(ErrorCode::ConfigError, "scripted provider needs script_path");
        }
        if (config.provider.max_retries < 0) {
            raise(ErrorCode::ConfigError, "provider.max_retries must be >= 0");
        }
    }

    if (j.contains("embedding")) {
        const auto& e = j["embedding"];
        reject_unknown_keys(e, {"mode", "dim", "endpoint", "auth_env", "timeout_seconds"},
                            "embedding");
        config.embedding.mode = get_or<std::string>(e, "mode", "local", "embedding");
        config.embedding.dim = get_or<std::size_t>(e, "dim", 4096, "embedding");
        config.embedding.endpoint = get_or<std::string>(e, "endpoint", "", "embedding");
        config.embedding.auth_env = get_or<std::string>(e, "auth_env", "", "embedding");
        config.embedding.timeout_seconds = get_or<int>(e, "timeout_seconds", 30, "embedding");
        if (config.embedding.mode != "local" && config.embedding.mode != "http") {
            raise(ErrorCode::ConfigError, "embedding.mode must be local or http");
        }
        if (config.embedding.dim == 0) {
            raise(ErrorCode::ConfigError, "embedding.dim must be positive");
        }
        if (config.embedding.mode == "http" && config.embedding.endpoint.empty()) {
            raise(ErrorCode::ConfigError, "http embedding needs an endpoint");
        }
    }

    if (j.contains("context")) {
        const auto& c = j["context"];
        reject_unknown_keys(c,
                            {"strategy", "target_ratio", "max_tokens_per_message",
                             "max_total_tokens", "max_history_messages"},
                            "context");
        config.context.strategy = get_or<std::string>(c, "strategy", "compress", "context");
        config.context.target_ratio = get_or<double>(c, "target_ratio", 0.25, "context");
        config.context.budget.max_tokens_per_message =
            get_or<std::size_t>(c, "max_tokens_per_message", 6000, "context");
        config.context.budget.max_total_tokens =
            get_or<std::size_t>(c, "max_total_tokens", 24000, "context");
        config.context.budget.max_history_messages =
            get_or<std::size_t>(c, "max_history_messages", 20, "context");
        if (config.context.strategy != "compress" && config.context.strategy != "transform") {
            raise(ErrorCode::ConfigError, "context.strategy must be compress or transform");
        }
        if (config.context.target_ratio <= 0.0 || config.context.target_ratio > 1.0) {
            raise(ErrorCode::ConfigError, "context.target_ratio must be in (0, 1]");
        }
        if (config.context.budget.max_tokens_per_message >
            config.context.budget.max_total_tokens) {
            raise(ErrorCode::ConfigError,
                  "max_tokens_per_message must not exceed max_total_tokens");
        }
    }

    if (j.contains("tools")) {
        const auto& t = j["tools"];
        reject_unknown_keys(t,
                            {"mode", "patents_fixture", "papers_fixture", "patents_endpoint",
                             "papers_endpoint", "patents_auth_env", "papers_auth_env",
                             "default_limit"},
                            "tools");
        config.tools.mode = get_or<std::string>(t, "mode", "fixture", "tools");
        config.tools.patents_fixture = get_or<std::string>(t, "patents_fixture", "", "tools");
        config.tools.papers_fixture = get_or<std::string>(t, "papers_fixture", "", "tools");
        config.tools.patents_endpoint = get_or<std::string>(t, "patents_endpoint", "", "tools");
        config.tools.papers_endpoint = get_or<std::string>(t, "papers_endpoint", "", "tools");
        config.tools.patents_auth_env = get_or<std::string>(t, "patents_auth_env", "", "tools");
        config.tools.papers_auth_env = get_or<std::string>(t, "papers_auth_env", "", "tools");
        config.tools.default_limit = get_or<std::size_t>(t, "default_limit", 5, "tools");
        if (config.tools.mode != "fixture" && config.tools.mode != "live") {
            raise(ErrorCode::ConfigError, "tools.mode must be fixture or live");
        }
        if (config.tools.mode == "live" && (config.tools.patents_endpoint.empty() ||
                                            config.tools.papers_endpoint.empty())) {
            raise(ErrorCode::ConfigError, "live tools need patents and papers endpoints");
        }
    }

    if (j.contains("index")) {
        const auto& i = j["index"];
        reject_unknown_keys(i, {"path", "chunk_size", "overlap"}, "index");
        config.index.path = get_or<std::string>(i, "path", "evopat.idx", "index");
        config.index.chunk_size = get_or<std::size_t>(i, "chunk_size", 512, "index");
        config.index.overlap = get_or<std::size_t>(i, "overlap", 64, "index");
        if (config.index.chunk_size == 0 || config.index.overlap >= config.index.chunk_size) {
            raise(ErrorCode::ConfigError, "index needs 0 <= overlap < chunk_size");
        }
    }

    if (j.contains("report")) {
        const auto& r = j["report"];
        reject_unknown_keys(r, {"output_dir", "converter"}, "report");
        config.report.output_dir = get_or<std::string>(r, "output_dir", ".", "report");
        if (r.contains("converter")) {
            reject_unknown_keys(r["converter"], {"command_template"}, "report.converter");
            config.report.converter.command_template =
                get_or<std::string>(r["converter"], "command_template", "", "report.converter");
        }
    }

    if (j.contains("extractor")) {
        const auto& e = j["extractor"];
        reject_unknown_keys(e, {"mode", "command_template"}, "extractor");
        config.extractor.mode = get_or<std::string>(e, "mode", "builtin", "extractor");
        config.extractor.command_template =
            get_or<std::string>(e, "command_template", "", "extractor");
        if (config.extractor.mode != "builtin" && config.extractor.mode != "command") {
            raise(ErrorCode::ConfigError, "extractor.mode must be builtin or command");
        }
        if (config.extractor.mode == "command" && config.extractor.command_template.empty()) {
            raise(ErrorCode::ConfigError, "extractor command mode needs command_template");
        }
    }

    if (j.contains("stopwords")) {
        const auto& s = j["stopwords"];
        reject_unknown_keys(s, {"path"}, "stopwords");
        config.stopwords_path = get_or<std::string>(s, "path", "", "stopwords");
    }

    return config;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::ConfigError, "cannot open config file " + path);
    nlohmann::json parsed = nlohmann::json::parse(in, nullptr, false);
    if (parsed.is_discarded()) raise(ErrorCode::ConfigError, "config file is not valid JSON");
    return from_json(parsed);
}

StopwordList RunConfig::load_stopwords() const {
    if (stopwords_path.empty()) return StopwordList::default_list();
    return StopwordList::from_file(stopwords_path);
}

std::unique_ptr<EmbeddingProvider> RunConfig::make_embedder() const {
    if (embedding.mode == "local") {
        return std::make_unique<LocalHashEmbedder>(embedding.dim);
    }
    HttpEmbedderConfig http_config;
    http_config.endpoint = embedding.endpoint;
    http_config.auth_env = embedding.auth_env;
    http_config.dim = embedding.dim;
    http_config.timeout_seconds = embedding.timeout_seconds;
    return make_http_embedder(std::move(http_config));
}

std::shared_ptr<ToolBackend> RunConfig::make_tool_backend() const {
    if (tools.mode == "fixture") {
        return std::make_shared<FixtureBackend>(
            FixtureBackend::from_files(tools.patents_fixture, tools.papers_fixture));
    }
    LiveToolsConfig live;
    live.patents_endpoint = tools.patents_endpoint;
    live.papers_endpoint = tools.papers_endpoint;
    live.patents_auth_env = tools.patents_auth_env;
    live.papers_auth_env = tools.papers_auth_env;
    live.patents_cache_path = tools.patents_fixture;
    live.papers_cache_path = tools.papers_fixture;
    return make_live_backend(std::move(live));
}

} // namespace evopat
