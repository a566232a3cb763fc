#pragma once

#include "evopat/embed.hpp"

#include <functional>
#include <string>
#include <vector>

namespace evopat {

using TokenSeq = std::vector<std::string>;

struct MetricReport {
    double rouge1 = 0.0;
    double rouge2 = 0.0;
    double rougeL = 0.0;
    double bert_precision = 0.0;
    double bert_recall = 0.0;
    double bert_f1 = 0.0;
};

struct ExpertScores {
    double informative = 0.0;
    double rich = 0.0;
    double coherent = 0.0;
    double attributable = 0.0;
    double extensible = 0.0;
};

// Recall-style unigram overlap with clipped counts:
// sum_w min(count_gen(w), count_ref(w)) / sum_w count_ref(w).
double rouge1(const TokenSeq& generated, const TokenSeq& reference);

// Same with bigrams; reference must contain at least one bigram.
double rouge2(const TokenSeq& generated, const TokenSeq& reference);

// LCS(generated, reference) / |reference|, LCS by dynamic programming.
double rougeL(const TokenSeq& generated, const TokenSeq& reference);

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b);

// Maps one token to its unit-norm embedding.
using TokenEmbedder = std::function<EmbeddingVector(const std::string&)>;

// Greedy max-cosine match of each generated token against the reference,
// averaged over generated tokens.
double bert_precision(const TokenSeq& generated, const TokenSeq& reference,
                      const TokenEmbedder& embedder);

// Mirror with the roles swapped.
double bert_recall(const TokenSeq& generated, const TokenSeq& reference,
                   const TokenEmbedder& embedder);

// Harmonic mean; defined as 0 when precision + recall == 0.
double bert_f1(double precision, double recall);

MetricReport evaluate_pair(const TokenSeq& generated, const TokenSeq& reference,
                           const TokenEmbedder& embedder);

TokenEmbedder token_embedder_from(EmbeddingProvider& provider);

ExpertScores aggregate_expert_scores(const std::vector<ExpertScores>& score_sets);

} // namespace evopat
