#pragma once

#include "evopat/context.hpp"
#include "evopat/embed.hpp"
#include "evopat/ingest.hpp"
#include "evopat/llm.hpp"
#include "evopat/report.hpp"
#include "evopat/tools.hpp"

#include <cstddef>
#include <string>

namespace evopat {

struct EmbeddingConfig {
    std::string mode = "local"; // "local" | "http"
    std::size_t dim = 4096;
    std::string endpoint;
    std::string auth_env;
    int timeout_seconds = 30;
};

struct ToolsConfig {
    std::string mode = "fixture"; // "fixture" | "live"
    std::string patents_fixture;
    std::string papers_fixture;
    std::string patents_endpoint;
    std::string papers_endpoint;
    std::string patents_auth_env;
    std::string papers_auth_env;
    std::size_t default_limit = 5;
};

struct ContextConfig {
    std::string strategy = "compress"; // "compress" | "transform"
    double target_ratio = 0.25;
    TokenBudget budget;
};

struct IndexConfig {
    std::string path = "evopat.idx";
    std::size_t chunk_size = 512;
    std::size_t overlap = 64;
};

struct ReportConfig {
    std::string output_dir = ".";
    ConverterConfig converter;
};

// The single run-configuration file (JSON). Unknown keys are rejected;
// env-var references stay names until the point of use.
struct RunConfig {
    ProviderConfig provider;
    EmbeddingConfig embedding;
    ContextConfig context;
    ToolsConfig tools;
    IndexConfig index;
    ReportConfig report;
    ExtractorConfig extractor;
    std::string stopwords_path;

    static RunConfig load(const std::string& path);
    static RunConfig from_json(const nlohmann::json& j);

    StopwordList load_stopwords() const;
    std::unique_ptr<EmbeddingProvider> make_embedder() const;
    std::shared_ptr<ToolBackend> make_tool_backend() const;
};

} // namespace evopat
