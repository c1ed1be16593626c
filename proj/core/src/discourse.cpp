#include "lector/discourse.hpp"

#include <cmath>

namespace lector {

namespace {

// Softmax of each column; used by attention over attention.
Matrix softmax_cols(const Matrix& s) {
    Matrix out(s.rows(), s.cols());
    for (Eigen::Index c = 0; c < s.cols(); ++c) {
        const double max = s.col(c).maxCoeff();
        out.col(c) = (s.col(c).array() - max).exp().matrix();
        out.col(c) /= out.col(c).sum();
    }
    return out;
}

Vector uniform(Eigen::Index n) {
    return Vector::Constant(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
}

}  // namespace

Matrix softmax_rows(const Matrix& scores, double phi) {
    if (!(phi > 0.0) || !std::isfinite(phi)) {
        throw DomainError("softmax temperature phi must be a positive finite number");
    }
    if (!scores.allFinite()) {
        throw DomainError("softmax_rows: non-finite score");
    }
    Matrix out(scores.rows(), scores.cols());
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        const auto row = scores.row(r) / phi;
        const double max = row.maxCoeff();
        out.row(r) = (row.array() - max).exp().matrix();
        out.row(r) /= out.row(r).sum();
    }
    return out;
}

Vector attention_over_attention(const Matrix& scores) {
    if (scores.rows() < 1 || scores.cols() < 1) {
        throw DimensionError("attention_over_attention needs a non-empty score matrix");
    }
    if (!scores.allFinite()) {
        throw DomainError("attention_over_attention: non-finite score");
    }
    const Matrix by_col = softmax_cols(scores);
    const Matrix by_row = softmax_rows(scores, 1.0);
    // Row weights: mean over columns of the column-softmaxed matrix. They sum to 1.
    const Vector row_weight = by_col.rowwise().mean();
    Vector out = by_row.transpose() * row_weight;
    return out;
}

Vector attention_over_attention(const Matrix& queries, const Matrix& keys, double phi) {
    if (queries.cols() != keys.cols()) {
        throw DimensionError("attention_over_attention: query dim " + std::to_string(queries.cols()) +
                             " vs key dim " + std::to_string(keys.cols()));
    }
    if (!(phi > 0.0)) {
        throw DomainError("attention_over_attention: phi must be positive");
    }
    return attention_over_attention(Matrix(queries * keys.transpose() / phi));
}

double default_phi(std::size_t dim) {
    return std::sqrt(static_cast<double>(dim));
}

WeightVector slide_weights(const SlideDeck& deck, const TensorBundle& bundle, int slide, double phi) {
    if (slide < 0 || static_cast<std::size_t>(slide) >= deck.slides.size() ||
        static_cast<std::size_t>(slide) >= bundle.slides.size()) {
        throw DimensionError("slide " + std::to_string(slide) + " outside deck \"" + deck.deck_id + "\"");
    }
    const auto& s = deck.slides[static_cast<std::size_t>(slide)];
    const auto& emb = bundle.slides[static_cast<std::size_t>(slide)].embeddings;
    const auto n_title = static_cast<Eigen::Index>(s.title.size());
    const auto n_body = static_cast<Eigen::Index>(s.body.size());

    WeightVector out{slide, Vector()};
    if (n_body == 0) {
        return out;
    }
    if (n_title == 0) {
        out.weights = uniform(n_body);
        return out;
    }

    const Matrix title = emb.topRows(n_title);
    const Matrix body = emb.middleRows(n_title, n_body);

    const auto& main_slide = deck.slides.front();
    const auto n_main = static_cast<Eigen::Index>(main_slide.title.size());
    Vector title_prob;
    if (n_main == 0) {
        title_prob = uniform(n_title);
    } else {
        const Matrix main_title = bundle.slides.front().embeddings.topRows(n_main);
        title_prob = attention_over_attention(main_title, title, phi);
    }
    const Matrix body_given_title = softmax_rows(title * body.transpose(), phi);
    out.weights = body_given_title.transpose() * title_prob;
    return out;
}

SlideEmbedding slide_embedding(const Slide& slide, const SlideTensors& tensors, const WeightVector& weights) {
    const auto n_title = static_cast<Eigen::Index>(slide.title.size());
    const auto n_body = static_cast<Eigen::Index>(slide.body.size());
    if (n_title + n_body == 0) {
        throw Error("empty slide " + std::to_string(slide.index));
    }
    if (tensors.embeddings.rows() != n_title + n_body) {
        throw DimensionError("slide " + std::to_string(slide.index) + ": tensors do not match tokens");
    }
    SlideEmbedding out{slide.index, Vector()};
    if (n_body == 0) {
        out.vector = tensors.embeddings.topRows(n_title).colwise().mean().transpose();
        return out;
    }
    if (weights.weights.size() != n_body) {
        throw DimensionError("slide " + std::to_string(slide.index) + ": weight vector length " +
                             std::to_string(weights.weights.size()) + " vs " + std::to_string(n_body) +
                             " body words");
    }
    out.vector = tensors.embeddings.middleRows(n_title, n_body).transpose() * weights.weights;
    return out;
}

std::vector<Vector> topic_instance_embeddings(const TopicCandidate& topic, const Corpus& corpus,
                                              const BundleSet& bundles) {
    std::vector<Vector> out;
    out.reserve(topic.count());
    for (const auto& occ : topic.occurrences) {
        const auto it = bundles.find(occ.deck_id);
        if (it == bundles.end()) {
            throw Error("no tensor bundle for deck \"" + occ.deck_id + "\"");
        }
        const auto& deck = find_deck(corpus, occ.deck_id);
        const auto& bundle = it->second;
        if (occ.slide_index < 0 || static_cast<std::size_t>(occ.slide_index) >= bundle.slides.size() ||
            static_cast<std::size_t>(occ.slide_index) >= deck.slides.size()) {
            throw DimensionError("occurrence of \"" + topic.label() + "\" on slide " +
                                 std::to_string(occ.slide_index) + " lies outside bundle \"" + occ.deck_id + "\"");
        }
        const auto& emb = bundle.slides[static_cast<std::size_t>(occ.slide_index)].embeddings;
        const auto last = occ.start + static_cast<int>(topic.words.size()) - 1;
        if (occ.start < 0 || last >= emb.rows()) {
            throw DimensionError("occurrence of \"" + topic.label() + "\" at position " +
                                 std::to_string(occ.start) + " lies outside bundle \"" + occ.deck_id + "\" slide " +
                                 std::to_string(occ.slide_index));
        }
        out.push_back(emb.middleRows(occ.start, static_cast<Eigen::Index>(topic.words.size()))
                          .colwise()
                          .mean()
                          .transpose());
    }
    return out;
}

}  // namespace lector
