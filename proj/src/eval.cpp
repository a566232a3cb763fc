#include "evopat/eval.hpp"

#include "evopat/errors.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <unordered_map>
#include <vector>

namespace evopat {

namespace {

std::map<std::string, std::size_t> unigram_counts(const TokenSeq& tokens) {
    std::map<std::string, std::size_t> counts;
    for (const std::string& t : tokens) ++counts[t];
    return counts;
}

std::map<std::pair<std::string, std::string>, std::size_t> bigram_counts(const TokenSeq& tokens) {
    std::map<std::pair<std::string, std::string>, std::size_t> counts;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        ++counts[{tokens[i], tokens[i + 1]}];
    }
    return counts;
}

template <typename CountMap>
double clipped_overlap_recall(const CountMap& generated, const CountMap& reference) {
    std::size_t matched = 0;
    std::size_t total = 0;
    for (const auto& [gram, ref_count] : reference) {
        total += ref_count;
        const auto it = generated.find(gram);
        if (it != generated.end()) matched += std::min(it->second, ref_count);
    }
    return static_cast<double>(matched) / static_cast<double>(total);
}

} // namespace

double rouge1(const TokenSeq& generated, const TokenSeq& reference) {
    if (reference.empty()) raise(ErrorCode::EmptyReference, "reference has no tokens");
    return clipped_overlap_recall(unigram_counts(generated), unigram_counts(reference));
}

double rouge2(const TokenSeq& generated, const TokenSeq& reference) {
    if (reference.size() < 2) {
        raise(ErrorCode::NoReferenceBigrams, "reference has fewer than 2 tokens");
    }
    return clipped_overlap_recall(bigram_counts(generated), bigram_counts(reference));
}

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    if (n == 0 || m == 0) return 0;
    // two-row DP over tokens
    std::vector<std::size_t> prev(m + 1, 0);
    std::vector<std::size_t> curr(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            if (a[i - 1] == b[j - 1]) {
                curr[j] = prev[j - 1] + 1;
            } else {
                curr[j] = std::max(prev[j], curr[j - 1]);
            }
        }
        std::swap(prev, curr);
    }
    return prev[m];
}

double rougeL(const TokenSeq& generated, const TokenSeq& reference) {
    if (reference.empty()) raise(ErrorCode::EmptyReference, "reference has no tokens");
    return static_cast<double>(lcs_length(generated, reference)) /
           static_cast<double>(reference.size());
}

namespace {

// Embeds each distinct token once; greedy per-token max cosine against the
// other side.
double greedy_match_average(const TokenSeq& from, const TokenSeq& against,
                            const TokenEmbedder& embedder) {
    if (from.empty() || against.empty()) {
        raise(ErrorCode::EmptySequence, "both token sequences must be non-empty");
    }
    std::unordered_map<std::string, EmbeddingVector> cache;
    const auto embed = [&cache, &embedder](const std::string& token) -> const EmbeddingVector& {
        auto it = cache.find(token);
        if (it == cache.end()) it = cache.emplace(token, embedder(token)).first;
        return it->second;
    };

    double total = 0.0;
    for (const std::string& token : from) {
        const EmbeddingVector& v = embed(token);
        double best = -1.0;
        for (const std::string& other : against) {
            best = std::max(best, v.cosine(embed(other)));
        }
        total += best;
    }
    return total / static_cast<double>(from.size());
}

} // namespace

double bert_precision(const TokenSeq& generated, const TokenSeq& reference,
                      const TokenEmbedder& embedder) {
    return greedy_match_average(generated, reference, embedder);
}

double bert_recall(const TokenSeq& generated, const TokenSeq& reference,
                   const TokenEmbedder& embedder) {
    return greedy_match_average(reference, generated, embedder);
}

double bert_f1(double precision, double recall) {
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

MetricReport evaluate_pair(const TokenSeq& generated, const TokenSeq& reference,
                           const TokenEmbedder& embedder) {
    MetricReport report;
    report.rouge1 = rouge1(generated, reference);
    report.rouge2 = rouge2(generated, reference);
    report.rougeL = rougeL(generated, reference);
    report.bert_precision = bert_precision(generated, reference, embedder);
    report.bert_recall = bert_recall(generated, reference, embedder);
    report.bert_f1 = bert_f1(report.bert_precision, report.bert_recall);
    return report;
}

TokenEmbedder token_embedder_from(EmbeddingProvider& provider) {
    return [&provider](const std::string& token) { return provider.embed(token); };
}

ExpertScores aggregate_expert_scores(const std::vector<ExpertScores>& score_sets) {
    if (score_sets.empty()) raise(ErrorCode::EmptyInput, "no expert score sets");
    ExpertScores total;
    for (const ExpertScores& s : score_sets) {
        total.informative += s.informative;
        total.rich += s.rich;
        total.coherent += s.coherent;
        total.attributable += s.attributable;
        total.extensible += s.extensible;
    }
    const double n = static_cast<double>(score_sets.size());
    return {total.informative / n, total.rich / n, total.coherent / n, total.attributable / n,
            total.extensible / n};
}

} // namespace evopat
