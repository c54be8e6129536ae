// SPDX-License-Identifier: Apache-2.0
//
// Reference ROUGE-1/2/L/Lsum and BLEU for dataset-level evaluation. Scores
// live in [0,1]; the CLI multiplies by 100 for presentation. All functions
// here are pure.
#pragma once

#include <string>
#include <vector>

namespace btforge::text {

using TokenSeq = std::vector<std::string>;

/// Whitespace tokenization after padding XML structure characters
/// ('<', '>', '/') with spaces, so structural tokens count toward overlap.
TokenSeq tokenize(const std::string& text);

/// Splits into lines first, tokenizing each; empty lines are dropped.
std::vector<TokenSeq> tokenize_lines(const std::string& text);

struct PrfScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Clipped n-gram overlap. Empty candidate or reference scores zero.
PrfScore rouge_n(const TokenSeq& candidate, const TokenSeq& reference, int n);

/// Longest-common-subsequence based P/R/F1. recall == LCS(c,r)/|r| exactly.
PrfScore rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

/// Summary-level ROUGE-L: union-LCS of each reference line against all
/// candidate lines.
PrfScore rouge_lsum(const std::vector<TokenSeq>& candidate_lines,
                    const std::vector<TokenSeq>& reference_lines);

/// BLEU with clipped modified precisions up to max_n, brevity penalty
/// exp(1 - r/c) for c < r, and an epsilon floor (1e-9) on zero counts so
/// short trees still get a defined score. An empty candidate scores 0.
double bleu(const TokenSeq& candidate, const std::vector<TokenSeq>& references, int max_n = 4);

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b);

namespace detail {
/// Clipped n-gram match count against a single reference; exposed for the
/// monotonicity property tests.
std::size_t clipped_matches(const TokenSeq& candidate,
                            const std::vector<TokenSeq>& references, int n);
}  // namespace detail

}  // namespace btforge::text
