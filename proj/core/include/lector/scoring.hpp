#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lector/corpus.hpp"
#include "lector/error.hpp"
#include "lector/tensors.hpp"

namespace lector {

enum class Model { Lector, Tfidf, Binary, TextRank, AttentionLite };

/// CLI spelling: lector, tfidf, binary, textrank, attnlite.
std::string_view model_name(Model model);
Model parse_model(std::string_view name);
bool uses_tensors(Model model);

struct TopicLabel {
    int id = 0;
    std::vector<std::string> words;

    std::string label() const;
};

/// Slides x topics relationship matrix together with its provenance.
struct SlideTopicMatrix {
    Model model = Model::Lector;
    std::map<std::string, double> params;
    std::vector<std::string> deck_ids;
    std::vector<std::size_t> deck_slide_counts;
    std::size_t slide_count = 0;
    std::vector<TopicLabel> topics;
    Matrix values;  ///< slide_count x topics.size()

    /// First row and row count of a deck's slides.
    std::pair<std::size_t, std::size_t> deck_rows(std::string_view deck_id) const;
};

/// Empty (all-zero) matrix shaped for the corpus and topic set.
SlideTopicMatrix make_matrix(const Corpus& corpus, const TopicSet& topics, Model model);

struct LectorParams {
    double k = 1e-3;
    double alpha = 0.25;
    double d = 0.5;
    std::optional<double> phi;  ///< defaults to sqrt(dim)
};

/// Attention word `word` receives from every other word of the slide
/// (column sum without the diagonal entry).
double accumulated_attention(const Matrix& attention, Eigen::Index word);

/// k / (k + frequency).
double sif_factor(double k, double frequency);

/// Raw accumulated attention a_ij over every occurrence of topic j on slide i.
Matrix accumulated_attention_scores(const Corpus& corpus, const BundleSet& bundles, const TopicSet& topics);

/// Importance ss_ij = a_ij * k / (k + f_j) with f_j the topic's relative
/// corpus frequency. Throws DomainError for k <= 0.
Matrix importance_scores(const Corpus& corpus, const BundleSet& bundles, const TopicSet& topics, double k);

/// cos(a, b); 0 (with a warning) when either vector has zero norm.
double cosine(const Vector& a, const Vector& b);

/// Similarity cs_ij = mean_instances cos(P_i, instance) * count_j^alpha.
Matrix similarity_scores(const std::vector<Vector>& slide_embeddings,
                         const std::vector<std::vector<Vector>>& topic_instances, double alpha);

struct Normalized {
    Matrix values;
    bool constant = false;  ///< max == min; values are all zero
};

/// Global min-max normalisation onto [0, 1].
Normalized min_max_normalize(const Matrix& m);

/// M = d * norm(ss) + (1 - d) * norm(cs).
Matrix final_scores(const Matrix& ss, const Matrix& cs, double d);

/// Contextualised slide embeddings for every slide of the corpus in course
/// row order.
std::vector<Vector> course_slide_embeddings(const Corpus& corpus, const BundleSet& bundles, double phi);

struct ScoreComponents {
    Matrix ss;
    Matrix cs;
};

ScoreComponents lector_components(const Corpus& corpus, const BundleSet& bundles, const TopicSet& topics,
                                  const LectorParams& params);

/// Full pipeline: topic extraction, discourse weights, slide and topic
/// embeddings, importance and similarity, fusion.
SlideTopicMatrix build_matrix(const Corpus& corpus, const BundleSet& bundles, const LectorParams& params);
SlideTopicMatrix build_matrix(const Corpus& corpus, const BundleSet& bundles, const TopicSet& topics,
                              const LectorParams& params, ScoreComponents* components = nullptr);

/// Resolved temperature: params.phi or sqrt(dim) of the first bundle.
double resolve_phi(const BundleSet& bundles, const LectorParams& params);

}  // namespace lector
