#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "lector/discourse.hpp"

using namespace lector;
using fixtures::N;
using fixtures::O;

namespace {

// Plain-loop reference for attention over attention on a score matrix.
std::vector<double> aoa_oracle(const Matrix& s) {
    const auto rows = static_cast<std::size_t>(s.rows());
    const auto cols = static_cast<std::size_t>(s.cols());
    std::vector<std::vector<double>> col_soft(rows, std::vector<double>(cols));
    for (std::size_t c = 0; c < cols; ++c) {
        double z = 0.0;
        for (std::size_t r = 0; r < rows; ++r) z += std::exp(s(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
        for (std::size_t r = 0; r < rows; ++r)
            col_soft[r][c] = std::exp(s(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))) / z;
    }
    std::vector<double> beta(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        beta[r] = std::accumulate(col_soft[r].begin(), col_soft[r].end(), 0.0) / static_cast<double>(cols);
    std::vector<double> out(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        double z = 0.0;
        for (std::size_t c = 0; c < cols; ++c) z += std::exp(s(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
        for (std::size_t c = 0; c < cols; ++c)
            out[c] += beta[r] * std::exp(s(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))) / z;
    }
    return out;
}

Matrix rows_of(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (double v : row) m(r, c++) = v;
        ++r;
    }
    return m;
}

// One-slide deck: title word with embedding e1, body words e1, e2, e3.
struct Orthogonal {
    SlideDeck deck = fixtures::deck("o", {fixtures::slide(0, {N("t")}, {N("a"), N("b"), N("c")})});
    TensorBundle bundle{"o", 3, {{rows_of({{1, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), Matrix::Identity(4, 4)}}};
};

}  // namespace

TEST_CASE("softmax_rows hand cases") {
    const auto z = softmax_rows(Matrix::Zero(1, 4), 3.7);
    for (int c = 0; c < 4; ++c) CHECK(z(0, c) == doctest::Approx(0.25).epsilon(1e-12));

    const auto p = softmax_rows(rows_of({{std::log(2.0), 0.0}}), 1.0);
    CHECK(p(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(p(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    const auto q = softmax_rows(rows_of({{2.0 * std::log(2.0), 0.0}}), 2.0);
    CHECK((q - p).cwiseAbs().maxCoeff() < 1e-12);

    // stable for large scores
    const auto big = softmax_rows(rows_of({{1000.0, 999.0}}), 1.0);
    CHECK(big.allFinite());
    CHECK(big(0, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
}

TEST_CASE("softmax_rows rejects bad input") {
    CHECK_THROWS_AS(softmax_rows(Matrix::Zero(1, 2), 0.0), DomainError);
    CHECK_THROWS_AS(softmax_rows(Matrix::Zero(1, 2), -1.0), DomainError);
    Matrix m = Matrix::Zero(1, 2);
    m(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(softmax_rows(m, 1.0), DomainError);
}

TEST_CASE("attention over attention degenerate cases") {
    std::mt19937_64 rng(1);
    const Matrix one = fixtures::gaussian(rng, 1, 5);
    const Vector a = attention_over_attention(one);
    const Matrix s = softmax_rows(one, 1.0);
    CHECK((a.transpose() - s).cwiseAbs().maxCoeff() < 1e-12);

    const Vector u = attention_over_attention(Matrix::Zero(2, 3));
    for (int c = 0; c < 3; ++c) CHECK(u(c) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    CHECK_THROWS_AS(attention_over_attention(Matrix(2, 3), Matrix(2, 4), 1.0), DimensionError);
    CHECK_THROWS_AS(attention_over_attention(Matrix(0, 3)), DimensionError);
}

TEST_CASE("attention over attention matches the loop oracle and sums to one") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        const Matrix s = fixtures::gaussian(rng, 3, 4, 2.0);
        const Vector a = attention_over_attention(s);
        const auto ref = aoa_oracle(s);
        CHECK(a.sum() == doctest::Approx(1.0).epsilon(1e-6));
        for (int c = 0; c < 4; ++c) {
            CHECK(a(c) >= 0.0);
            CHECK(std::abs(a(c) - ref[static_cast<std::size_t>(c)]) < 1e-12);
        }
    }
}

TEST_CASE("attention over attention with embeddings uses E_b E_a^T / phi") {
    std::mt19937_64 rng(4);
    const Matrix b = fixtures::gaussian(rng, 2, 6);
    const Matrix a = fixtures::gaussian(rng, 3, 6);
    const Vector got = attention_over_attention(b, a, 2.5);
    const auto ref = aoa_oracle(b * a.transpose() / 2.5);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(got(c) - ref[static_cast<std::size_t>(c)]) < 1e-12);
}

TEST_CASE("attention over attention is permutation-equivariant in A and shift-invariant") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        std::mt19937_64 rng(seed);
        const Matrix eb = fixtures::gaussian(rng, 3, 5);
        const Matrix ea = fixtures::gaussian(rng, 4, 5);
        std::vector<int> perm = {0, 1, 2, 3};
        std::shuffle(perm.begin(), perm.end(), rng);
        Matrix permuted(4, 5);
        for (int i = 0; i < 4; ++i) permuted.row(i) = ea.row(perm[static_cast<std::size_t>(i)]);
        const Vector base = attention_over_attention(eb, ea, 1.3);
        const Vector moved = attention_over_attention(eb, permuted, 1.3);
        for (int i = 0; i < 4; ++i) CHECK(std::abs(moved(i) - base(perm[static_cast<std::size_t>(i)])) < 1e-12);

        const Matrix s = eb * ea.transpose();
        const Matrix shifted = (s.array() + 7.25).matrix();
        CHECK((attention_over_attention(s) - attention_over_attention(shifted)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((softmax_rows(s, 1.0) - softmax_rows(shifted, 1.0)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("default temperature is sqrt(dim)") {
    CHECK(default_phi(64) == 8.0);
    CHECK(default_phi(2) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("orthogonal slide weights") {
    const Orthogonal o;
    const auto w = slide_weights(o.deck, o.bundle, 0, 1.0);
    const double e = std::exp(1.0);
    REQUIRE(w.weights.size() == 3);
    CHECK(w.weights(0) == doctest::Approx(e / (e + 2)).epsilon(1e-12));
    CHECK(w.weights(1) == doctest::Approx(1 / (e + 2)).epsilon(1e-12));
    CHECK(w.weights(2) == doctest::Approx(1 / (e + 2)).epsilon(1e-12));
    CHECK(w.weights(0) == doctest::Approx(0.576).epsilon(1e-3));

    const auto p = slide_embedding(o.deck.slides[0], o.bundle.slides[0], w);
    CHECK(p.vector(0) == doctest::Approx(e / (e + 2)));
    CHECK(p.vector(1) == doctest::Approx(1 / (e + 2)));
    CHECK(p.vector(2) == doctest::Approx(1 / (e + 2)));
}

TEST_CASE("slide weights compose both discourse factors") {
    // main title 2 words, slide 1 title 2 words, body 3 words; compared to loop oracle
    const auto d = fixtures::deck("d", {fixtures::slide(0, {N("m1"), N("m2")}, {N("x")}),
                                        fixtures::slide(1, {N("t1"), O("t2")}, {N("a"), N("b"), N("c")})});
    const auto b = fixtures::random_bundle(d, 4, 11);
    const double phi = 2.0;
    const auto w = slide_weights(d, b, 1, phi);

    const Matrix main = b.slides[0].embeddings.topRows(2);
    const Matrix title = b.slides[1].embeddings.topRows(2);
    const Matrix body = b.slides[1].embeddings.bottomRows(3);
    const auto title_prob = aoa_oracle(main * title.transpose() / phi);
    for (int k = 0; k < 3; ++k) {
        double expected = 0.0;
        for (int t = 0; t < 2; ++t) {
            double z = 0.0;
            for (int j = 0; j < 3; ++j) z += std::exp(title.row(t).dot(body.row(j)) / phi);
            expected += title_prob[static_cast<std::size_t>(t)] * std::exp(title.row(t).dot(body.row(k)) / phi) / z;
        }
        CHECK(std::abs(w.weights(k) - expected) < 1e-12);
    }
}

TEST_CASE("slide weight fallbacks") {
    std::mt19937_64 rng(3);
    auto d = fixtures::deck("d", {fixtures::slide(0, {}, {N("a"), N("b")}),
                                  fixtures::slide(1, {N("t")}, {N("a"), N("b"), N("c"), N("d")}),
                                  fixtures::slide(2, {N("t")}, {})});
    const auto b = fixtures::random_bundle(d, 5, 2);

    const auto empty_title = slide_weights(d, b, 0, 1.0);
    CHECK(empty_title.weights.size() == 2);
    CHECK(empty_title.weights(0) == doctest::Approx(0.5));

    // empty main title: first factor uniform over the slide title (single word here)
    const auto w1 = slide_weights(d, b, 1, 1.0);
    const Matrix direct = softmax_rows(b.slides[1].embeddings.topRows(1) * b.slides[1].embeddings.bottomRows(4).transpose(), 1.0);
    CHECK((w1.weights.transpose() - direct).cwiseAbs().maxCoeff() < 1e-12);

    CHECK(slide_weights(d, b, 2, 1.0).weights.size() == 0);
    CHECK_THROWS_AS(slide_weights(d, b, 3, 1.0), DimensionError);

    // identical embeddings everywhere
    auto same = b;
    for (auto& s : same.slides) s.embeddings.rowwise() = b.slides[0].embeddings.row(0);
    const auto w = slide_weights(d, same, 1, 1.0);
    for (int k = 0; k < 4; ++k) CHECK(w.weights(k) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("slide embedding cases") {
    const auto d = fixtures::deck("d", {fixtures::slide(0, {N("t")}, {N("a")}),
                                        fixtures::slide(1, {N("t")}, {N("a"), N("b")}),
                                        fixtures::slide(2, {N("t"), N("u")}, {}),
                                        fixtures::slide(3, {}, {})});
    const auto b = fixtures::random_bundle(d, 3, 5);

    const auto p0 = slide_embedding(d.slides[0], b.slides[0], slide_weights(d, b, 0, 1.0));
    CHECK((p0.vector - b.slides[0].embeddings.row(1).transpose()).cwiseAbs().maxCoeff() < 1e-12);

    WeightVector half{1, Vector::Constant(2, 0.5)};
    const auto p1 = slide_embedding(d.slides[1], b.slides[1], half);
    const Vector mid = (b.slides[1].embeddings.row(1) + b.slides[1].embeddings.row(2)).transpose() / 2.0;
    CHECK((p1.vector - mid).cwiseAbs().maxCoeff() < 1e-12);

    const auto p2 = slide_embedding(d.slides[2], b.slides[2], slide_weights(d, b, 2, 1.0));
    const Vector title_mean = (b.slides[2].embeddings.row(0) + b.slides[2].embeddings.row(1)).transpose() / 2.0;
    CHECK((p2.vector - title_mean).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_WITH_AS(slide_embedding(d.slides[3], b.slides[3], WeightVector{}), doctest::Contains("empty slide"),
                         Error);
    CHECK_THROWS_AS(slide_embedding(d.slides[1], b.slides[1], WeightVector{1, Vector::Constant(3, 1.0 / 3)}),
                    DimensionError);
}

TEST_CASE("weights are distributions and embeddings stay in the hull norm bound") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        std::mt19937_64 rng(seed);
        const auto d = fixtures::random_deck(rng, "d", 6);
        const auto b = fixtures::random_bundle(d, 8, seed + 100);
        const double phi = 0.5 + static_cast<double>(seed % 4);
        for (int i = 0; i < 6; ++i) {
            const auto& s = d.slides[static_cast<std::size_t>(i)];
            const auto w = slide_weights(d, b, i, phi);
            if (s.body.empty()) continue;
            CHECK(w.weights.sum() == doctest::Approx(1.0).epsilon(1e-6));
            CHECK(w.weights.minCoeff() >= 0.0);
            const auto p = slide_embedding(s, b.slides[static_cast<std::size_t>(i)], w);
            CHECK(p.vector.allFinite());
            CHECK(p.vector.size() == 8);
            const auto body = b.slides[static_cast<std::size_t>(i)].embeddings.bottomRows(
                static_cast<Eigen::Index>(s.body.size()));
            CHECK(p.vector.norm() <= body.rowwise().norm().maxCoeff() + 1e-12);
        }
    }
}

TEST_CASE("topic instance embeddings") {
    const auto corpus = assemble_corpus({fixtures::deck(
        "d", {fixtures::slide(0, {N("list")}, {N("linked"), N("list")}), fixtures::slide(1, {}, {O("a"), N("list")}),
              fixtures::slide(2, {N("tree")}, {})})});
    const auto b = fixtures::random_bundle(corpus[0], 4, 9);
    BundleSet bundles{{"d", b}};
    const auto ts = extract_topic_candidates(corpus);

    const TopicCandidate* list = nullptr;
    const TopicCandidate* linked_list = nullptr;
    const TopicCandidate* tree = nullptr;
    for (const auto& t : ts.topics) {
        if (t.label() == "list") list = &t;
        if (t.label() == "linked list") linked_list = &t;
        if (t.label() == "tree") tree = &t;
    }
    REQUIRE(list);
    REQUIRE(linked_list);
    REQUIRE(tree);

    const auto one = topic_instance_embeddings(*tree, corpus, bundles);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == b.slides[2].embeddings.row(0).transpose());

    const auto bi = topic_instance_embeddings(*linked_list, corpus, bundles);
    REQUIRE(bi.size() == 1);
    CHECK((bi[0] - (b.slides[0].embeddings.row(1) + b.slides[0].embeddings.row(2)).transpose() / 2.0)
              .cwiseAbs()
              .maxCoeff() < 1e-12);

    const auto three = topic_instance_embeddings(*list, corpus, bundles);
    REQUIRE(three.size() == 3);
    CHECK(three[0] == b.slides[0].embeddings.row(0).transpose());
    CHECK(three[1] == b.slides[0].embeddings.row(2).transpose());
    CHECK(three[2] == b.slides[1].embeddings.row(1).transpose());
    CHECK(three[0] != three[1]);
    CHECK(three[1] != three[2]);

    TopicCandidate outside{0, {"ghost"}, {{"d", 7, 0}}};
    CHECK_THROWS_AS(topic_instance_embeddings(outside, corpus, bundles), DimensionError);
    TopicCandidate no_bundle{0, {"ghost"}, {{"zz", 0, 0}}};
    CHECK_THROWS_AS(topic_instance_embeddings(no_bundle, corpus, bundles), Error);
}
