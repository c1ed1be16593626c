#include "lector/baselines.hpp"
#include "lector/discourse.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

namespace lector {

namespace {

// Occurrence counts per (slide row, topic).
Matrix term_counts(const Corpus& corpus, const TopicSet& topics) {
    const CourseLayout layout(corpus);
    Matrix tf = Matrix::Zero(static_cast<Eigen::Index>(layout.slide_count()), static_cast<Eigen::Index>(topics.size()));
    for (std::size_t j = 0; j < topics.size(); ++j) {
        for (const auto& occ : topics[j].occurrences) {
            tf(static_cast<Eigen::Index>(layout.row(occ.deck_id, occ.slide_index)), static_cast<Eigen::Index>(j)) += 1.0;
        }
    }
    return tf;
}

}  // namespace

SlideTopicMatrix tfidf_matrix(const Corpus& corpus, const TopicSet& topics) {
    auto m = make_matrix(corpus, topics, Model::Tfidf);
    const Matrix tf = term_counts(corpus, topics);
    const double n = static_cast<double>(m.slide_count);
    for (Eigen::Index j = 0; j < tf.cols(); ++j) {
        const double df = static_cast<double>((tf.col(j).array() > 0.0).count());
        if (df == 0.0) {
            continue;
        }
        m.values.col(j) = tf.col(j) * std::log(n / df);
    }
    return m;
}

SlideTopicMatrix binary_matrix(const Corpus& corpus, const TopicSet& topics) {
    auto m = make_matrix(corpus, topics, Model::Binary);
    m.values = (term_counts(corpus, topics).array() > 0.0).cast<double>();
    return m;
}

void TextRankParams::validate() const {
    if (window < 2) {
        throw DomainError("TextRank window must be at least 2");
    }
    if (!(damping > 0.0 && damping < 1.0)) {
        throw DomainError("TextRank damping must lie in (0, 1)");
    }
    if (!(tol > 0.0)) {
        throw DomainError("TextRank tolerance must be positive");
    }
    if (max_iter < 1) {
        throw DomainError("TextRank max_iter must be at least 1");
    }
}

WordGraph cooccurrence_graph(const Corpus& corpus, int window) {
    std::set<std::string> nouns;
    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& deck : corpus) {
        for (const auto& slide : deck.slides) {
            const auto n = slide.size();
            for (std::size_t p = 0; p < n; ++p) {
                const auto& a = slide.at(p);
                if (a.pos != Pos::Noun) {
                    continue;
                }
                nouns.insert(a.surface);
                for (std::size_t q = p + 1; q < n && q - p < static_cast<std::size_t>(window); ++q) {
                    const auto& b = slide.at(q);
                    if (b.pos == Pos::Noun && b.surface != a.surface) {
                        edges.insert(std::minmax(a.surface, b.surface));
                    }
                }
            }
        }
    }
    WordGraph g;
    g.words.assign(nouns.begin(), nouns.end());
    g.adjacency.resize(g.words.size());
    auto index = [&](const std::string& w) {
        return static_cast<std::size_t>(std::lower_bound(g.words.begin(), g.words.end(), w) - g.words.begin());
    };
    for (const auto& [a, b] : edges) {
        const auto ia = index(a);
        const auto ib = index(b);
        g.adjacency[ia].push_back(ib);
        g.adjacency[ib].push_back(ia);
    }
    for (auto& nbrs : g.adjacency) {
        std::sort(nbrs.begin(), nbrs.end());
    }
    return g;
}

PageRankResult pagerank(const std::vector<std::vector<std::size_t>>& adjacency, double damping, double tol,
                        int max_iter) {
    const auto n = adjacency.size();
    PageRankResult res;
    if (n == 0) {
        res.converged = true;
        return res;
    }
    const double nd = static_cast<double>(n);
    Vector rank = Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / nd);
    Vector next(static_cast<Eigen::Index>(n));
    for (int it = 1; it <= max_iter; ++it) {
        double dangling = 0.0;
        next.setZero();
        for (std::size_t u = 0; u < n; ++u) {
            const auto deg = adjacency[u].size();
            const double r = rank(static_cast<Eigen::Index>(u));
            if (deg == 0) {
                dangling += r;
                continue;
            }
            const double share = r / static_cast<double>(deg);
            for (auto v : adjacency[u]) {
                next(static_cast<Eigen::Index>(v)) += share;
            }
        }
        next = ((1.0 - damping) / nd + damping * dangling / nd) * Vector::Ones(static_cast<Eigen::Index>(n)) +
               damping * next;
        const double delta = (next - rank).lpNorm<1>();
        rank.swap(next);
        res.iterations = it;
        if (delta < tol) {
            res.converged = true;
            break;
        }
    }
    res.scores = rank;
    return res;
}

SlideTopicMatrix textrank_matrix(const Corpus& corpus, const TopicSet& topics, const TextRankParams& params) {
    params.validate();
    auto m = make_matrix(corpus, topics, Model::TextRank);
    const auto graph = cooccurrence_graph(corpus, params.window);
    const auto pr = pagerank(graph.adjacency, params.damping, params.tol, params.max_iter);
    if (!pr.converged) {
        spdlog::warn("TextRank did not converge within {} iterations", params.max_iter);
    }
    m.params = {{"window", params.window},
                {"damping", params.damping},
                {"tol", params.tol},
                {"max_iter", params.max_iter},
                {"iterations", pr.iterations},
                {"converged", pr.converged ? 1.0 : 0.0}};

    auto word_score = [&](const std::string& w) {
        const auto it = std::lower_bound(graph.words.begin(), graph.words.end(), w);
        if (it == graph.words.end() || *it != w) {
            return 0.0;
        }
        return pr.scores(it - graph.words.begin());
    };
    const Matrix tf = term_counts(corpus, topics);
    for (std::size_t j = 0; j < topics.size(); ++j) {
        double score = 0.0;
        for (const auto& w : topics[j].words) {
            score += word_score(w);
        }
        const auto col = static_cast<Eigen::Index>(j);
        m.values.col(col) = (tf.col(col).array() > 0.0).cast<double>() * score;
    }
    return m;
}

SlideTopicMatrix attention_lite_matrix(const Corpus& corpus, const BundleSet& bundles, const TopicSet& topics) {
    auto m = make_matrix(corpus, topics, Model::AttentionLite);
    if (topics.empty()) {
        return m;
    }
    const Matrix a = accumulated_attention_scores(corpus, bundles, topics);

    std::vector<Vector> slide_means;
    for (const auto& deck : corpus) {
        const auto& bundle = bundles.at(deck.deck_id);
        for (const auto& slide : deck.slides) {
            const auto& emb = bundle.slides.at(static_cast<std::size_t>(slide.index)).embeddings;
            if (emb.rows() == 0) {
                throw Error("empty slide " + std::to_string(slide.index) + " in deck \"" + deck.deck_id + "\"");
            }
            slide_means.push_back(emb.colwise().mean().transpose());
        }
    }
    Matrix cos(a.rows(), a.cols());
    for (std::size_t j = 0; j < topics.size(); ++j) {
        const auto inst = topic_instance_embeddings(topics[j], corpus, bundles);
        Vector mean = Vector::Zero(inst.front().size());
        for (const auto& v : inst) {
            mean += v;
        }
        mean /= static_cast<double>(inst.size());
        for (std::size_t i = 0; i < slide_means.size(); ++i) {
            cos(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cosine(slide_means[i], mean);
        }
    }
    m.values = 0.5 * min_max_normalize(a).values + 0.5 * min_max_normalize(cos).values;
    return m;
}

}  // namespace lector
