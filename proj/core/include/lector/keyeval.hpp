#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lector/scoring.hpp"

namespace lector {

using Phrase = std::vector<std::string>;

/// Splits on whitespace and lower-cases ASCII letters. Gold phrases and topic
/// words both pass through this before comparison.
Phrase normalize_phrase(std::string_view text);
Phrase normalize_phrase(const std::vector<std::string>& words);

/// Deduplicated, sorted gold keyphrases.
struct GoldKeyphrases {
    std::vector<Phrase> phrases;

    std::size_t size() const noexcept { return phrases.size(); }
    bool contains(const Phrase& p) const;
};

GoldKeyphrases make_gold(const std::vector<std::string>& lines);
GoldKeyphrases parse_gold(std::istream& in);
GoldKeyphrases read_gold(const std::filesystem::path& file);

/// mt_j = sum over slides of M_ij.
Vector keyphrase_scores(const SlideTopicMatrix& m);

struct Ranking {
    std::vector<std::size_t> topics;  ///< column indices, best first
    bool truncated = false;           ///< fewer topics than requested
};

/// Top-n topics by descending score; ties go to the lexicographically
/// smaller word sequence.
Ranking topn(const Vector& scores, const std::vector<TopicLabel>& topics, std::size_t n);

/// Precision, recall and F1 in percent.
struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Throws DomainError when gold is empty. `predicted` is deduplicated.
Prf prf(const std::vector<Phrase>& predicted, const GoldKeyphrases& gold);

/// Harmonic mean; 0 when both inputs are 0.
double f1_score(double precision, double recall);

struct EvalRow {
    std::size_t n = 0;
    Prf scores;
};

struct EvalReport {
    std::string model;
    std::vector<EvalRow> per_n;
    EvalRow best;           ///< F1 maximiser over n = 1..mean_upto (smallest n on ties)
    Prf mean;               ///< averaged over n = 1..mean_upto
    std::size_t mean_upto = 0;
    bool mean_truncated = false;  ///< fewer than mean_max topics
};

EvalReport evaluate_at_n(const SlideTopicMatrix& m, const GoldKeyphrases& gold,
                         const std::vector<std::size_t>& n_list = {5, 10, 15}, std::size_t mean_max = 100);

/// Top-k topic columns of each slide row, same tie rule as topn.
std::vector<std::vector<std::size_t>> topk_per_slide(const SlideTopicMatrix& m, std::size_t k = 5);

std::string report_json(const EvalReport& report);
std::string report_table(const EvalReport& report);

}  // namespace lector
