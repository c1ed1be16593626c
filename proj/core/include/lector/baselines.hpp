#pragma once

#include <string>
#include <vector>

#include "lector/corpus.hpp"
#include "lector/scoring.hpp"
#include "lector/tensors.hpp"

namespace lector {

/// M_ij = tf(j, i) * ln(N / df_j).
SlideTopicMatrix tfidf_matrix(const Corpus& corpus, const TopicSet& topics);

/// M_ij = 1 when topic j occurs on slide i, else 0.
SlideTopicMatrix binary_matrix(const Corpus& corpus, const TopicSet& topics);

struct TextRankParams {
    int window = 2;
    double damping = 0.85;
    double tol = 1e-6;
    int max_iter = 100;

    void validate() const;
};

/// Undirected, unweighted co-occurrence graph over noun surfaces.
struct WordGraph {
    std::vector<std::string> words;                  ///< sorted
    std::vector<std::vector<std::size_t>> adjacency; ///< sorted neighbour lists
};

/// Two distinct nouns are linked when their positions in a slide's flattened
/// token sequence differ by less than `window`.
WordGraph cooccurrence_graph(const Corpus& corpus, int window);

struct PageRankResult {
    Vector scores;
    bool converged = false;
    int iterations = 0;
};

/// Power iteration; dangling mass is spread uniformly so the scores stay a
/// probability vector. Converged when the L1 change drops below tol.
PageRankResult pagerank(const std::vector<std::vector<std::size_t>>& adjacency, double damping, double tol,
                        int max_iter);

/// Course-wide TextRank. Topic score = sum of its words' PageRank scores,
/// projected onto the slides where the topic occurs. params["converged"] is
/// 1 or 0.
SlideTopicMatrix textrank_matrix(const Corpus& corpus, const TopicSet& topics, const TextRankParams& params = {});

/// Simplified stand-in for AttentionRank, labelled ATTENTION_LITE:
/// 0.5 * norm(raw accumulated attention) + 0.5 * norm(cosine between the
/// topic's mean instance embedding and the unweighted mean slide embedding).
/// It is an approximation, not the published algorithm.
SlideTopicMatrix attention_lite_matrix(const Corpus& corpus, const BundleSet& bundles, const TopicSet& topics);

inline constexpr const char* kAttentionLiteCaveat =
    "attnlite is a simplified approximation of AttentionRank, not a reproduction";

}  // namespace lector
