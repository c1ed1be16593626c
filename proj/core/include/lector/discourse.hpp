#pragma once

#include <vector>

#include "lector/corpus.hpp"
#include "lector/error.hpp"
#include "lector/tensors.hpp"

namespace lector {

/// Row-wise softmax of `scores / phi`, stabilised by per-row max subtraction.
/// Throws DomainError for phi <= 0 or non-finite scores.
Matrix softmax_rows(const Matrix& scores, double phi);

/// Attention over attention for a pre-scaled score matrix S (|B| x |A|):
/// the per-row mean of the column softmax weights the rows of the row
/// softmax. Returns a distribution over the |A| columns.
Vector attention_over_attention(const Matrix& scores);

/// Same, with S = queries * keys^T / phi. `queries` is |B| x dim, `keys` is
/// |A| x dim.
Vector attention_over_attention(const Matrix& queries, const Matrix& keys, double phi);

/// Temperature used when the caller does not set one: sqrt(dim).
double default_phi(std::size_t dim);

/// Probability of each body word of a slide under the discourse set by the
/// deck's main title and the slide title.
struct WeightVector {
    int slide_index = 0;
    Vector weights;  ///< one entry per body word
};

struct SlideEmbedding {
    int slide_index = 0;
    Vector vector;
};

/// Weight = Pr(title words | main title) * Pr(body words | slide title).
///
/// The main title is the title of slide 0. Fallbacks: an empty slide title
/// yields uniform body weights; an empty main title makes the first factor
/// uniform over the slide title; an empty body yields an empty vector.
WeightVector slide_weights(const SlideDeck& deck, const TensorBundle& bundle, int slide, double phi);

/// Weighted average of the body embeddings. A slide without body words
/// falls back to the mean of its title embeddings; a slide with neither
/// throws Error("empty slide").
SlideEmbedding slide_embedding(const Slide& slide, const SlideTensors& tensors, const WeightVector& weights);

/// One contextual vector per occurrence of the topic. Bigrams use the mean of
/// the two word rows at that occurrence.
std::vector<Vector> topic_instance_embeddings(const TopicCandidate& topic, const Corpus& corpus,
                                              const BundleSet& bundles);

}  // namespace lector
