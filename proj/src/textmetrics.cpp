// SPDX-License-Identifier: Apache-2.0
#include "btforge/textmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace btforge::text {
namespace {

constexpr double kEpsilon = 1e-9;

double harmonic(double precision, double recall) {
    if (precision + recall <= 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

std::map<TokenSeq, std::size_t> ngram_counts(const TokenSeq& tokens, int n) {
    std::map<TokenSeq, std::size_t> counts;
    if (n < 1 || tokens.size() < static_cast<std::size_t>(n)) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        TokenSeq gram(tokens.begin() + i, tokens.begin() + i + n);
        ++counts[gram];
    }
    return counts;
}

/// Reference-token positions on one canonical LCS of (line, candidate).
std::vector<bool> lcs_ref_hits(const TokenSeq& ref_line, const TokenSeq& cand_line) {
    const std::size_t m = ref_line.size();
    const std::size_t n = cand_line.size();
    std::vector<std::vector<std::size_t>> dp(m + 1, std::vector<std::size_t>(n + 1, 0));
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            if (ref_line[i - 1] == cand_line[j - 1]) {
                dp[i][j] = dp[i - 1][j - 1] + 1;
            } else {
                dp[i][j] = std::max(dp[i - 1][j], dp[i][j - 1]);
            }
        }
    }
    std::vector<bool> hits(m, false);
    std::size_t i = m;
    std::size_t j = n;
    while (i > 0 && j > 0) {
        if (ref_line[i - 1] == cand_line[j - 1]) {
            hits[i - 1] = true;
            --i;
            --j;
        } else if (dp[i - 1][j] >= dp[i][j - 1]) {
            --i;
        } else {
            --j;
        }
    }
    return hits;
}

}  // namespace

TokenSeq tokenize(const std::string& text) {
    std::string padded;
    padded.reserve(text.size() * 2);
    for (char c : text) {
        if (c == '<' || c == '>' || c == '/') {
            padded.push_back(' ');
            padded.push_back(c);
            padded.push_back(' ');
        } else {
            padded.push_back(c);
        }
    }
    TokenSeq tokens;
    std::istringstream stream(padded);
    std::string token;
    while (stream >> token) tokens.push_back(token);
    return tokens;
}

std::vector<TokenSeq> tokenize_lines(const std::string& text) {
    std::vector<TokenSeq> lines;
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        TokenSeq tokens = tokenize(line);
        if (!tokens.empty()) lines.push_back(std::move(tokens));
    }
    return lines;
}

PrfScore rouge_n(const TokenSeq& candidate, const TokenSeq& reference, int n) {
    auto cand_counts = ngram_counts(candidate, n);
    auto ref_counts = ngram_counts(reference, n);
    std::size_t cand_total = 0;
    std::size_t ref_total = 0;
    for (const auto& [gram, count] : cand_counts) {
        (void)gram;
        cand_total += count;
    }
    for (const auto& [gram, count] : ref_counts) {
        (void)gram;
        ref_total += count;
    }
    if (cand_total == 0 || ref_total == 0) return {};

    std::size_t overlap = 0;
    for (const auto& [gram, count] : cand_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) overlap += std::min(count, it->second);
    }
    PrfScore score;
    score.precision = static_cast<double>(overlap) / cand_total;
    score.recall = static_cast<double>(overlap) / ref_total;
    score.f1 = harmonic(score.precision, score.recall);
    return score;
}

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
    if (a.empty() || b.empty()) return 0;
    // Two rolling rows keep the memory linear in |b|.
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> curr(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1]) {
                curr[j] = prev[j - 1] + 1;
            } else {
                curr[j] = std::max(prev[j], curr[j - 1]);
            }
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

PrfScore rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
    if (candidate.empty() || reference.empty()) return {};
    const double lcs = static_cast<double>(lcs_length(candidate, reference));
    PrfScore score;
    score.precision = lcs / candidate.size();
    score.recall = lcs / reference.size();
    score.f1 = harmonic(score.precision, score.recall);
    return score;
}

PrfScore rouge_lsum(const std::vector<TokenSeq>& candidate_lines,
                    const std::vector<TokenSeq>& reference_lines) {
    std::size_t cand_total = 0;
    std::size_t ref_total = 0;
    for (const TokenSeq& line : candidate_lines) cand_total += line.size();
    for (const TokenSeq& line : reference_lines) ref_total += line.size();
    if (cand_total == 0 || ref_total == 0) return {};

    std::size_t hits = 0;
    for (const TokenSeq& ref_line : reference_lines) {
        std::vector<bool> matched(ref_line.size(), false);
        for (const TokenSeq& cand_line : candidate_lines) {
            std::vector<bool> line_hits = lcs_ref_hits(ref_line, cand_line);
            for (std::size_t i = 0; i < matched.size(); ++i) {
                if (line_hits[i]) matched[i] = true;
            }
        }
        hits += std::count(matched.begin(), matched.end(), true);
    }
    PrfScore score;
    score.precision = static_cast<double>(hits) / cand_total;
    score.recall = static_cast<double>(hits) / ref_total;
    score.f1 = harmonic(score.precision, score.recall);
    return score;
}

namespace detail {

std::size_t clipped_matches(const TokenSeq& candidate,
                            const std::vector<TokenSeq>& references, int n) {
    auto cand_counts = ngram_counts(candidate, n);
    // Clip against the per-gram maximum across references.
    std::map<TokenSeq, std::size_t> max_ref;
    for (const TokenSeq& ref : references) {
        for (const auto& [gram, count] : ngram_counts(ref, n)) {
            max_ref[gram] = std::max(max_ref[gram], count);
        }
    }
    std::size_t matches = 0;
    for (const auto& [gram, count] : cand_counts) {
        auto it = max_ref.find(gram);
        if (it != max_ref.end()) matches += std::min(count, it->second);
    }
    return matches;
}

}  // namespace detail

double bleu(const TokenSeq& candidate, const std::vector<TokenSeq>& references, int max_n) {
    if (references.empty()) return 0.0;
    if (candidate.empty()) return 0.0;

    double log_sum = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        const std::size_t total =
            candidate.size() >= static_cast<std::size_t>(n) ? candidate.size() - n + 1 : 0;
        double precision;
        if (total == 0) {
            precision = kEpsilon;
        } else {
            std::size_t matches = detail::clipped_matches(candidate, references, n);
            precision = matches > 0 ? static_cast<double>(matches) / total
                                    : kEpsilon / total;
        }
        log_sum += std::log(precision);
    }
    double geo_mean = std::exp(log_sum / max_n);

    // Effective reference length: the closest to the candidate, preferring
    // the shorter one on ties.
    const std::size_t c = candidate.size();
    std::size_t r = references.front().size();
    for (const TokenSeq& ref : references) {
        auto diff = [&](std::size_t len) {
            return len > c ? len - c : c - len;
        };
        if (diff(ref.size()) < diff(r) || (diff(ref.size()) == diff(r) && ref.size() < r)) {
            r = ref.size();
        }
    }
    double brevity = 1.0;
    if (c < r) brevity = std::exp(1.0 - static_cast<double>(r) / c);
    return brevity * geo_mean;
}

}  // namespace btforge::text
