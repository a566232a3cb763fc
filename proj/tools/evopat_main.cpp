// evopat command-line driver: analyze | index | search | eval | report

#include "evopat/agents.hpp"
#include "evopat/config.hpp"
#include "evopat/errors.hpp"
#include "evopat/eval.hpp"
#include "evopat/index.hpp"
#include "evopat/report.hpp"
#include "evopat/tokenize.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace evopat;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIngest = 3;
constexpr int kExitPipeline = 4;
constexpr int kExitReport = 5;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::IoError, "cannot write " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

RunConfig load_config_or_exit(const std::string& path) {
    try {
        if (path.empty()) return RunConfig::from_json(nlohmann::json::object());
        return RunConfig::load(path);
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        std::exit(kExitConfig);
    }
}

// live-mode credentials are checked up front so a missing key is a config
// error rather than a mid-pipeline failure
void check_live_auth_or_exit(const RunConfig& config) {
    if (config.provider.mode != "live") return;
    const char* key = std::getenv(config.provider.auth_env.c_str());
    if (key == nullptr || *key == '\0') {
        std::cerr << "config error: env var " << config.provider.auth_env
                  << " is not set for the live provider\n";
        std::exit(kExitConfig);
    }
}

ContextPolicy make_context_policy(const RunConfig& config, const StopwordList& stopwords,
                                  CorpusStats stats) {
    ContextPolicy policy;
    policy.strategy = config.context.strategy;
    policy.budget = config.context.budget;
    policy.compression = CompressionConfig::defaults();
    policy.compression.target_ratio = config.context.target_ratio;
    policy.stats = std::move(stats);
    policy.stopwords = stopwords;
    return policy;
}

CorpusStats load_corpus_stats(const std::string& index_path) {
    CorpusStats stats;
    std::ifstream in(index_path + ".stats.json");
    if (!in) return stats;
    nlohmann::json parsed = nlohmann::json::parse(in, nullptr, false);
    if (parsed.is_discarded()) return stats;
    stats.document_count = parsed.value("document_count", 0u);
    if (parsed.contains("document_frequency")) {
        for (const auto& [token, df] : parsed["document_frequency"].items()) {
            stats.document_frequency[token] = df.get<std::size_t>();
        }
    }
    return stats;
}

RawDocument raw_document_from_file(const std::string& path) {
    if (!fs::exists(path)) raise(ErrorCode::IoError, "input file " + path + " does not exist");
    RawDocument raw;
    raw.doc_id = fs::path(path).stem().string();
    raw.payload = read_file(path);
    raw.source_kind = fs::path(path).extension() == ".pdf" ? SourceKind::pdf_text_layer
                                                           : SourceKind::plain_text;
    return raw;
}

int cmd_analyze(const std::string& input_path, const std::string& config_path,
                const std::string& strategy_override, const std::string& output_dir_override) {
    RunConfig config = load_config_or_exit(config_path);
    if (!strategy_override.empty()) config.context.strategy = strategy_override;
    if (!output_dir_override.empty()) config.report.output_dir = output_dir_override;
    check_live_auth_or_exit(config);

    CleanDocument patent;
    StopwordList stopwords;
    try {
        stopwords = config.load_stopwords();
        const RawDocument raw = raw_document_from_file(input_path);
        const std::string text = extract_text(raw, config.extractor);
        patent = filter_text(text, FilterProfile::llm, stopwords, raw.doc_id);
    } catch (const Error& e) {
        std::cerr << "ingest error: " << e.what() << "\n";
        return kExitIngest;
    }

    TeamState state;
    try {
        const auto llm = make_llm_client(config.provider);
        const ToolRegistry registry =
            make_tool_registry(config.make_tool_backend(), config.tools.default_limit);
        AgentDeps deps{*llm, registry,
                       make_context_policy(config, stopwords, load_corpus_stats(config.index.path))};
        state = run_pipeline(patent, deps);
    } catch (const PipelineError& e) {
        std::cerr << "pipeline error in role " << agent_role_name(e.failing_role()) << ": "
                  << e.what() << "\n";
        return kExitPipeline;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitConfig;
        }
        std::cerr << "pipeline error: " << e.what() << "\n";
        return kExitPipeline;
    }

    try {
        fs::create_directories(config.report.output_dir);
        const AssembledReport assembled = assemble_markdown(state);
        const std::string html = render_html(assembled.markdown);
        const fs::path base = fs::path(config.report.output_dir) / state.patent_id;

        write_file(base.string() + ".md", assembled.markdown);
        write_file(base.string() + ".html", html);
        write_file(base.string() + ".state.json", state.to_json().dump(2) + "\n");
        std::cout << "wrote " << base.string() << ".md\n";
        std::cout << "wrote " << base.string() << ".html\n";
        std::cout << "wrote " << base.string() << ".state.json\n";

        if (!config.report.converter.command_template.empty()) {
            const std::string pdf =
                export_pdf(html, config.report.converter, base.string() + ".pdf");
            std::cout << "wrote " << pdf << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "report error: " << e.what() << "\n";
        return kExitReport;
    }
    return kExitOk;
}

int cmd_index(const std::string& corpus_dir, const std::string& config_path) {
    const RunConfig config = load_config_or_exit(config_path);
    try {
        if (!fs::is_directory(corpus_dir)) {
            raise(ErrorCode::IoError, corpus_dir + " is not a directory");
        }
        const StopwordList stopwords = config.load_stopwords();
        const auto embedder = config.make_embedder();

        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(corpus_dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".txt") {
                files.push_back(entry.path().string());
            }
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) raise(ErrorCode::IoError, "no .txt documents in " + corpus_dir);

        VectorIndex index(embedder->dim());
        CorpusStats stats;
        nlohmann::json chunk_texts = nlohmann::json::object();
        std::size_t total_chunks = 0;
        for (const std::string& file : files) {
            const std::string doc_id = fs::path(file).stem().string();
            const CleanDocument doc =
                filter_text(read_file(file), FilterProfile::index, stopwords, doc_id);
            ++stats.document_count;
            std::set<std::string> seen;
            for (const std::string& token : tokenize(doc.text)) {
                if (seen.insert(token).second) ++stats.document_frequency[token];
            }
            for (const Chunk& chunk :
                 chunk_document(doc, config.index.chunk_size, config.index.overlap)) {
                const std::string key = chunk.doc_id + "#" + std::to_string(chunk.seq_no);
                index.add(key, embedder->embed(chunk.text));
                chunk_texts[key] = chunk.text;
                ++total_chunks;
            }
        }
        index.save(config.index.path);

        nlohmann::json stats_json = {{"document_count", stats.document_count},
                                     {"document_frequency", nlohmann::json::object()}};
        for (const auto& [token, df] : stats.document_frequency) {
            stats_json["document_frequency"][token] = df;
        }
        write_file(config.index.path + ".stats.json", stats_json.dump() + "\n");
        write_file(config.index.path + ".chunks.json", chunk_texts.dump() + "\n");

        std::cout << "indexed " << files.size() << " documents, " << total_chunks
                  << " chunks -> " << config.index.path << "\n";
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "index error: " << e.what() << "\n";
        return e.code() == ErrorCode::ConfigError ? kExitConfig : kExitFailure;
    }
}

int cmd_search(const std::string& query, std::size_t k, const std::string& config_path) {
    const RunConfig config = load_config_or_exit(config_path);
    try {
        const VectorIndex index = VectorIndex::load(config.index.path);
        const auto embedder = config.make_embedder();
        const StopwordList stopwords = config.load_stopwords();
        const CleanDocument clean = filter_text(query, FilterProfile::index, stopwords, "query");

        nlohmann::json chunk_texts = nlohmann::json::object();
        {
            std::ifstream in(config.index.path + ".chunks.json");
            if (in) {
                nlohmann::json parsed = nlohmann::json::parse(in, nullptr, false);
                if (!parsed.is_discarded()) chunk_texts = std::move(parsed);
            }
        }

        for (const SearchHit& hit : index.search(embedder->embed(clean.text), k)) {
            std::string snippet = chunk_texts.value(hit.chunk_key, "");
            if (snippet.size() > 120) snippet = snippet.substr(0, 117) + "...";
            std::cout << hit.chunk_key << "\t" << hit.similarity << "\t" << snippet << "\n";
        }
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "search error: " << e.what() << "\n";
        return e.code() == ErrorCode::ConfigError ? kExitConfig : kExitFailure;
    }
}

nlohmann::json metric_report_json(const std::string& id, const MetricReport& m) {
    return {{"id", id},
            {"rouge1", m.rouge1},
            {"rouge2", m.rouge2},
            {"rougeL", m.rougeL},
            {"bert_precision", m.bert_precision},
            {"bert_recall", m.bert_recall},
            {"bert_f1", m.bert_f1}};
}

int cmd_eval(const std::string& manifest_path, const std::string& generated_path,
             const std::string& reference_path, const std::string& config_path,
             const std::string& output_dir) {
    const RunConfig config = load_config_or_exit(config_path);
    struct Pair {
        std::string id;
        std::string generated;
        std::string reference;
    };
    std::vector<Pair> pairs;
    try {
        if (!manifest_path.empty()) {
            std::ifstream in(manifest_path);
            if (!in) raise(ErrorCode::IoError, "cannot open manifest " + manifest_path);
            std::string line;
            std::size_t line_no = 0;
            while (std::getline(in, line)) {
                ++line_no;
                if (line.empty()) continue;
                nlohmann::json row = nlohmann::json::parse(line, nullptr, false);
                Pair pair;
                pair.id = "pair-" + std::to_string(line_no);
                if (row.is_discarded() || !row.contains("generated") ||
                    !row.contains("reference")) {
                    pair.generated.clear(); // marks the row malformed
                } else {
                    pair.id = row.value("id", pair.id);
                    pair.generated = row["generated"].get<std::string>();
                    pair.reference = row["reference"].get<std::string>();
                }
                pairs.push_back(std::move(pair));
            }
        } else {
            pairs.push_back({"pair-1", generated_path, reference_path});
        }
    } catch (const Error& e) {
        std::cerr << "eval error: " << e.what() << "\n";
        return kExitFailure;
    }

    const auto provider = config.make_embedder();
    const TokenEmbedder embedder = token_embedder_from(*provider);

    fs::create_directories(output_dir);
    std::ostringstream csv;
    csv << "id,rouge1,rouge2,rougeL,bert_precision,bert_recall,bert_f1\n";
    MetricReport sums;
    std::size_t ok_rows = 0;
    std::size_t failed_rows = 0;
    for (const Pair& pair : pairs) {
        try {
            if (pair.generated.empty()) {
                raise(ErrorCode::IoError, "malformed manifest row " + pair.id);
            }
            const TokenSeq generated = tokenize(read_file(pair.generated));
            const TokenSeq reference = tokenize(read_file(pair.reference));
            const MetricReport m = evaluate_pair(generated, reference, embedder);
            write_file((fs::path(output_dir) / (pair.id + ".metrics.json")).string(),
                       metric_report_json(pair.id, m).dump(2) + "\n");
            csv << pair.id << "," << m.rouge1 << "," << m.rouge2 << "," << m.rougeL << ","
                << m.bert_precision << "," << m.bert_recall << "," << m.bert_f1 << "\n";
            sums.rouge1 += m.rouge1;
            sums.rouge2 += m.rouge2;
            sums.rougeL += m.rougeL;
            sums.bert_precision += m.bert_precision;
            sums.bert_recall += m.bert_recall;
            sums.bert_f1 += m.bert_f1;
            ++ok_rows;
        } catch (const Error& e) {
            std::cerr << pair.id << " failed: " << e.what() << "\n";
            ++failed_rows;
        }
    }
    if (ok_rows > 0) {
        const double n = static_cast<double>(ok_rows);
        csv << "mean," << sums.rouge1 / n << "," << sums.rouge2 / n << "," << sums.rougeL / n
            << "," << sums.bert_precision / n << "," << sums.bert_recall / n << ","
            << sums.bert_f1 / n << "\n";
    }
    write_file((fs::path(output_dir) / "metrics.csv").string(), csv.str());
    std::cout << "evaluated " << ok_rows << " pairs, " << failed_rows << " failed -> "
              << (fs::path(output_dir) / "metrics.csv").string() << "\n";
    return failed_rows == 0 ? kExitOk : kExitFailure;
}

int cmd_report(const std::string& state_path, const std::string& config_path,
               const std::string& output_dir_override) {
    RunConfig config = load_config_or_exit(config_path);
    if (!output_dir_override.empty()) config.report.output_dir = output_dir_override;
    try {
        nlohmann::json parsed = nlohmann::json::parse(read_file(state_path), nullptr, false);
        if (parsed.is_discarded()) raise(ErrorCode::IoError, state_path + " is not valid JSON");
        const TeamState state = TeamState::from_json(parsed);

        fs::create_directories(config.report.output_dir);
        const AssembledReport assembled = assemble_markdown(state);
        const fs::path base = fs::path(config.report.output_dir) / state.patent_id;
        write_file(base.string() + ".md", assembled.markdown);
        write_file(base.string() + ".html", render_html(assembled.markdown));
        std::cout << "wrote " << base.string() << ".md\n";
        std::cout << "wrote " << base.string() << ".html\n";
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "report error: " << e.what() << "\n";
        return kExitReport;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"EvoPat-style patent summarization and analysis pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config,-c", config_path, "run configuration file (JSON)");

    auto* analyze = app.add_subcommand("analyze", "run the full analysis pipeline on one patent");
    std::string analyze_input;
    std::string strategy_override;
    std::string analyze_outdir;
    analyze->add_option("input", analyze_input, "patent file (.txt or .pdf)")->required();
    analyze->add_option("--context-strategy", strategy_override,
                        "override context.strategy (compress|transform)")
        ->check(CLI::IsMember({"compress", "transform"}));
    analyze->add_option("--output-dir", analyze_outdir, "override report.output_dir");

    auto* index = app.add_subcommand("index", "chunk, embed and index a corpus directory");
    std::string corpus_dir;
    index->add_option("corpus_dir", corpus_dir, "directory of .txt documents")->required();

    auto* search = app.add_subcommand("search", "query the vector index");
    std::string query;
    std::size_t top_k = 5;
    search->add_option("query", query, "query text")->required();
    search->add_option("-k", top_k, "number of results");

    auto* eval = app.add_subcommand("eval", "score generated text against references");
    std::string manifest_path;
    std::string generated_path;
    std::string reference_path;
    std::string eval_outdir = "eval_out";
    eval->add_option("--manifest", manifest_path, "JSONL manifest of {generated, reference} pairs");
    eval->add_option("--generated", generated_path, "generated text file");
    eval->add_option("--reference", reference_path, "reference text file");
    eval->add_option("--output-dir", eval_outdir, "metrics output directory");

    auto* report = app.add_subcommand("report", "re-render a report from a saved state JSON");
    std::string state_path;
    std::string report_outdir;
    report->add_option("state", state_path, "<patent>.state.json from a previous analyze run")
        ->required();
    report->add_option("--output-dir", report_outdir, "override report.output_dir");

    CLI11_PARSE(app, argc, argv);

    if (analyze->parsed()) {
        return cmd_analyze(analyze_input, config_path, strategy_override, analyze_outdir);
    }
    if (index->parsed()) return cmd_index(corpus_dir, config_path);
    if (search->parsed()) return cmd_search(query, top_k, config_path);
    if (eval->parsed()) {
        if (manifest_path.empty() && (generated_path.empty() || reference_path.empty())) {
            std::cerr << "eval needs --manifest or both --generated and --reference\n";
            return kExitConfig;
        }
        return cmd_eval(manifest_path, generated_path, reference_path, config_path, eval_outdir);
    }
    if (report->parsed()) return cmd_report(state_path, config_path, report_outdir);
    return kExitConfig;
}
