#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace evopat {

struct TokenBudget {
    std::size_t max_tokens_per_message = 6000;
    std::size_t max_total_tokens = 24000;
    std::size_t max_history_messages = 20;
};

struct CompressionConfig {
    double target_ratio = 0.05;
    std::string scorer_id = "baseline_idf";
    // regexes; tokens matching any of them get the force-keep bonus
    std::vector<std::string> force_keep_patterns;

    static CompressionConfig defaults();
};

// Document frequencies over an indexed corpus; empty stats are valid.
struct CorpusStats {
    std::size_t document_count = 0;
    std::map<std::string, std::size_t> document_frequency;

    std::size_t df(const std::string& token) const {
        const auto it = document_frequency.find(token);
        return it == document_frequency.end() ? 0 : it->second;
    }
};

struct HistoryMessage {
    std::string content;
    bool protected_system = false;
};

// Longest suffix of the non-protected messages fitting both the message-count
// and total-token budgets; protected messages are always retained and do not
// count against max_history_messages.
std::vector<HistoryMessage> limit_history(const std::vector<HistoryMessage>& messages,
                                          const TokenBudget& budget);

// Keeps the first max_tokens tokens (cut at the token boundary in the original
// text) and appends " …[truncated]". Idempotent at fixed max_tokens.
std::string truncate_tokens(std::string_view message, std::size_t max_tokens);

struct ScoredToken {
    std::string token;   // lowercased form
    std::string surface; // original text of the token core
    std::size_t position = 0;
    double score = 0.0;
};

class StopwordList;

std::vector<ScoredToken> score_tokens(std::string_view text, const CorpusStats& stats,
                                      const CompressionConfig& config,
                                      const StopwordList& stopwords);

// Keeps exactly min(n, ceil(target_ratio * n)) of the highest-scoring tokens
// (ties to the earlier position) and re-emits them in original order.
std::string compress_prompt(std::string_view text, const CompressionConfig& config,
                            const CorpusStats& stats, const StopwordList& stopwords);

} // namespace evopat
