#include "evopat/context.hpp"

#include "evopat/errors.hpp"
#include "evopat/ingest.hpp"
#include "evopat/tokenize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>

namespace evopat {

CompressionConfig CompressionConfig::defaults() {
    CompressionConfig config;
    // numbers (optionally signed, decimal, percent or unit suffix) and
    // chemical-formula-like tokens; the prompts ask for real quantitative
    // figures, so these survive compression
    config.force_keep_patterns = {
        R"([-+]?[0-9]+(\.[0-9]+)?(%|[a-zA-Z]{0,4})?)",
        R"(([A-Z][a-z]?[0-9]*){2,})",
    };
    return config;
}

std::vector<HistoryMessage> limit_history(const std::vector<HistoryMessage>& messages,
                                          const TokenBudget& budget) {
    std::size_t protected_tokens = 0;
    for (const HistoryMessage& m : messages) {
        if (m.protected_system) protected_tokens += count_tokens(m.content);
    }
    if (protected_tokens > budget.max_total_tokens) {
        raise(ErrorCode::BudgetImpossible,
              "protected messages alone hold " + std::to_string(protected_tokens) +
                  " tokens, budget is " + std::to_string(budget.max_total_tokens));
    }

    // walk the non-protected suffix backwards while both budgets hold
    std::vector<std::size_t> kept; // indices of kept non-protected messages
    std::size_t total = protected_tokens;
    for (std::size_t i = messages.size(); i-- > 0;) {
        if (messages[i].protected_system) continue;
        if (kept.size() >= budget.max_history_messages) break;
        const std::size_t tokens = count_tokens(messages[i].content);
        if (total + tokens > budget.max_total_tokens) break;
        total += tokens;
        kept.push_back(i);
    }

    std::vector<HistoryMessage> out;
    out.reserve(kept.size() + messages.size());
    const std::size_t suffix_begin = kept.empty() ? messages.size() : kept.back();
    for (std::size_t i = 0; i < messages.size(); ++i) {
        if (messages[i].protected_system || i >= suffix_begin) out.push_back(messages[i]);
    }
    return out;
}

std::string truncate_tokens(std::string_view message, std::size_t max_tokens) {
    if (max_tokens == 0) throw std::invalid_argument("max_tokens must be >= 1");
    const std::vector<TokenSpan> spans = tokenize_spans(message);
    if (spans.size() <= max_tokens) return std::string(message);
    const std::size_t cut = spans[max_tokens - 1].end;
    return std::string(message.substr(0, cut)) + " …[truncated]";
}

std::vector<ScoredToken> score_tokens(std::string_view text, const CorpusStats& stats,
                                      const CompressionConfig& config,
                                      const StopwordList& stopwords) {
    std::vector<std::regex> patterns;
    patterns.reserve(config.force_keep_patterns.size());
    for (const std::string& p : config.force_keep_patterns) {
        patterns.emplace_back(p);
    }

    const std::vector<TokenSpan> spans = tokenize_spans(text);
    std::vector<ScoredToken> scored;
    scored.reserve(spans.size());
    const double n_docs = static_cast<double>(stats.document_count);
    for (std::size_t i = 0; i < spans.size(); ++i) {
        ScoredToken st;
        st.surface = std::string(text.substr(spans[i].begin, spans[i].end - spans[i].begin));
        st.token = to_lower_ascii(st.surface);
        st.position = i;
        const double df = static_cast<double>(stats.df(st.token));
        double score = std::log((n_docs + 1.0) / (df + 1.0));
        for (const std::regex& re : patterns) {
            if (std::regex_match(st.surface, re)) {
                score += 2.0;
                break;
            }
        }
        if (stopwords.contains(st.token)) score -= 1.0;
        st.score = score;
        scored.push_back(std::move(st));
    }
    return scored;
}

std::string compress_prompt(std::string_view text, const CompressionConfig& config,
                            const CorpusStats& stats, const StopwordList& stopwords) {
    if (config.target_ratio <= 0.0 || config.target_ratio > 1.0) {
        throw std::invalid_argument("target_ratio must be in (0, 1]");
    }
    const std::vector<ScoredToken> scored = score_tokens(text, stats, config, stopwords);
    const std::size_t n = scored.size();
    if (n == 0) return {};

    // small downward nudge so binary-inexact ratios (0.05 * 40) still ceil to
    // the mathematically exact value
    const double raw = config.target_ratio * static_cast<double>(n);
    const auto keep_count =
        std::min(n, std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(raw - 1e-9))));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&scored](std::size_t a, std::size_t b) {
        if (scored[a].score != scored[b].score) return scored[a].score > scored[b].score;
        return scored[a].position < scored[b].position;
    });
    order.resize(keep_count);
    std::sort(order.begin(), order.end());

    std::string out;
    for (const std::size_t i : order) {
        if (!out.empty()) out.push_back(' ');
        out += scored[i].surface;
    }
    return out;
}

} // namespace evopat
