#include "lector/scoring.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "lector/discourse.hpp"

namespace lector {

std::string_view model_name(Model model) {
    switch (model) {
        case Model::Lector: return "lector";
        case Model::Tfidf: return "tfidf";
        case Model::Binary: return "binary";
        case Model::TextRank: return "textrank";
        case Model::AttentionLite: return "attnlite";
    }
    return "unknown";
}

Model parse_model(std::string_view name) {
    for (auto m : {Model::Lector, Model::Tfidf, Model::Binary, Model::TextRank, Model::AttentionLite}) {
        if (model_name(m) == name) {
            return m;
        }
    }
    throw DomainError("unknown model \"" + std::string(name) + "\"");
}

bool uses_tensors(Model model) {
    return model == Model::Lector || model == Model::AttentionLite;
}

std::string TopicLabel::label() const {
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) {
            out += ' ';
        }
        out += w;
    }
    return out;
}

std::pair<std::size_t, std::size_t> SlideTopicMatrix::deck_rows(std::string_view deck_id) const {
    std::size_t offset = 0;
    for (std::size_t d = 0; d < deck_ids.size(); ++d) {
        const auto n = d < deck_slide_counts.size() ? deck_slide_counts[d] : 0;
        if (deck_ids[d] == deck_id) {
            return {offset, n};
        }
        offset += n;
    }
    throw Error("matrix has no deck \"" + std::string(deck_id) + "\"");
}

SlideTopicMatrix make_matrix(const Corpus& corpus, const TopicSet& topics, Model model) {
    SlideTopicMatrix m;
    m.model = model;
    for (const auto& d : corpus) {
        m.deck_ids.push_back(d.deck_id);
        m.deck_slide_counts.push_back(d.slides.size());
        m.slide_count += d.slides.size();
    }
    m.topics.reserve(topics.size());
    for (const auto& t : topics.topics) {
        m.topics.push_back({t.topic_id, t.words});
    }
    m.values = Matrix::Zero(static_cast<Eigen::Index>(m.slide_count), static_cast<Eigen::Index>(topics.size()));
    return m;
}

double accumulated_attention(const Matrix& attention, Eigen::Index word) {
    return attention.col(word).sum() - attention(word, word);
}

double sif_factor(double k, double frequency) {
    if (!(k > 0.0)) {
        throw DomainError("SIF parameter k must be positive");
    }
    return k / (k + frequency);
}

Matrix accumulated_attention_scores(const Corpus& corpus, const BundleSet& bundles, const TopicSet& topics) {
    const CourseLayout layout(corpus);
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(layout.slide_count()), static_cast<Eigen::Index>(topics.size()));
    for (std::size_t j = 0; j < topics.size(); ++j) {
        const auto& topic = topics[j];
        for (const auto& occ : topic.occurrences) {
            const auto it = bundles.find(occ.deck_id);
            if (it == bundles.end()) {
                throw Error("no tensor bundle for deck \"" + occ.deck_id + "\"");
            }
            const auto& att = it->second.slides.at(static_cast<std::size_t>(occ.slide_index)).attention;
            const auto row = static_cast<Eigen::Index>(layout.row(occ.deck_id, occ.slide_index));
            for (std::size_t w = 0; w < topic.words.size(); ++w) {
                const auto pos = static_cast<Eigen::Index>(occ.start) + static_cast<Eigen::Index>(w);
                if (pos >= att.rows()) {
                    throw DimensionError("topic \"" + topic.label() + "\" position outside attention matrix");
                }
                a(row, static_cast<Eigen::Index>(j)) += accumulated_attention(att, pos);
            }
        }
    }
    return a;
}

Matrix importance_scores(const Corpus& corpus, const BundleSet& bundles, const TopicSet& topics, double k) {
    if (!(k > 0.0)) {
        throw DomainError("SIF parameter k must be positive");
    }
    Matrix ss = accumulated_attention_scores(corpus, bundles, topics);
    for (std::size_t j = 0; j < topics.size(); ++j) {
        ss.col(static_cast<Eigen::Index>(j)) *= sif_factor(k, topics.relative_frequency(j));
    }
    return ss;
}

double cosine(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw DimensionError("cosine of vectors with different dimensions");
    }
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) {
        spdlog::warn("cosine with a zero-norm embedding; using 0");
        return 0.0;
    }
    return a.dot(b) / (na * nb);
}

Matrix similarity_scores(const std::vector<Vector>& slide_embeddings,
                         const std::vector<std::vector<Vector>>& topic_instances, double alpha) {
    if (alpha < 0.0 || alpha > 0.25) {
        spdlog::warn("alpha={} lies outside the recommended range [0, 0.25]", alpha);
    }
    Matrix cs(static_cast<Eigen::Index>(slide_embeddings.size()), static_cast<Eigen::Index>(topic_instances.size()));
    for (std::size_t j = 0; j < topic_instances.size(); ++j) {
        const auto& inst = topic_instances[j];
        if (inst.empty()) {
            throw DomainError("topic " + std::to_string(j) + " has no instances");
        }
        const double count = static_cast<double>(inst.size());
        const double soften = std::pow(count, alpha);
        for (std::size_t i = 0; i < slide_embeddings.size(); ++i) {
            double sum = 0.0;
            for (const auto& v : inst) {
                sum += cosine(slide_embeddings[i], v);
            }
            cs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sum / count * soften;
        }
    }
    return cs;
}

Normalized min_max_normalize(const Matrix& m) {
    Normalized out;
    if (m.size() == 0) {
        out.values = m;
        return out;
    }
    const double lo = m.minCoeff();
    const double hi = m.maxCoeff();
    if (!(hi > lo)) {
        spdlog::info("min-max normalisation of a constant matrix; using zeros");
        out.values = Matrix::Zero(m.rows(), m.cols());
        out.constant = true;
        return out;
    }
    out.values = (m.array() - lo) / (hi - lo);
    return out;
}

Matrix final_scores(const Matrix& ss, const Matrix& cs, double d) {
    if (ss.rows() != cs.rows() || ss.cols() != cs.cols()) {
        throw DimensionError("importance and similarity matrices differ in shape");
    }
    if (d < 0.0 || d > 1.0) {
        throw DomainError("mixing weight d must lie in [0, 1]");
    }
    const Matrix ssn = min_max_normalize(ss).values;
    const Matrix csn = min_max_normalize(cs).values;
    return d * ssn + (1.0 - d) * csn;
}

std::vector<Vector> course_slide_embeddings(const Corpus& corpus, const BundleSet& bundles, double phi) {
    std::vector<Vector> out;
    for (const auto& deck : corpus) {
        const auto it = bundles.find(deck.deck_id);
        if (it == bundles.end()) {
            throw Error("no tensor bundle for deck \"" + deck.deck_id + "\"");
        }
        for (const auto& slide : deck.slides) {
            const auto w = slide_weights(deck, it->second, slide.index, phi);
            out.push_back(
                slide_embedding(slide, it->second.slides.at(static_cast<std::size_t>(slide.index)), w).vector);
        }
    }
    return out;
}

double resolve_phi(const BundleSet& bundles, const LectorParams& params) {
    if (params.phi) {
        if (!(*params.phi > 0.0)) {
            throw DomainError("phi must be positive");
        }
        return *params.phi;
    }
    if (bundles.empty()) {
        throw Error("no tensor bundles");
    }
    return default_phi(bundles.begin()->second.dim);
}

ScoreComponents lector_components(const Corpus& corpus, const BundleSet& bundles, const TopicSet& topics,
                                  const LectorParams& params) {
    const double phi = resolve_phi(bundles, params);
    ScoreComponents c;
    c.ss = importance_scores(corpus, bundles, topics, params.k);
    const auto slides = course_slide_embeddings(corpus, bundles, phi);
    std::vector<std::vector<Vector>> instances;
    instances.reserve(topics.size());
    for (const auto& t : topics.topics) {
        instances.push_back(topic_instance_embeddings(t, corpus, bundles));
    }
    c.cs = similarity_scores(slides, instances, params.alpha);
    return c;
}

SlideTopicMatrix build_matrix(const Corpus& corpus, const BundleSet& bundles, const TopicSet& topics,
                              const LectorParams& params, ScoreComponents* components) {
    auto m = make_matrix(corpus, topics, Model::Lector);
    const double phi = resolve_phi(bundles, params);
    m.params = {{"k", params.k}, {"alpha", params.alpha}, {"d", params.d}, {"phi", phi}};
    if (topics.empty()) {
        return m;
    }
    auto c = lector_components(corpus, bundles, topics, params);
    m.values = final_scores(c.ss, c.cs, params.d);
    if (components) {
        *components = std::move(c);
    }
    return m;
}

SlideTopicMatrix build_matrix(const Corpus& corpus, const BundleSet& bundles, const LectorParams& params) {
    return build_matrix(corpus, bundles, extract_topic_candidates(corpus), params);
}

}  // namespace lector
