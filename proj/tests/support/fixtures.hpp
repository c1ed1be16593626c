#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "lector/corpus.hpp"
#include "lector/discourse.hpp"
#include "lector/tensors.hpp"

namespace fixtures {

using lector::Matrix;
using lector::Vector;

inline lector::Token N(std::string s) { return {std::move(s), lector::Pos::Noun}; }
inline lector::Token O(std::string s) { return {std::move(s), lector::Pos::Other}; }

inline lector::Slide slide(int index, std::vector<lector::Token> title, std::vector<lector::Token> body) {
    return {index, std::move(title), std::move(body)};
}

inline lector::SlideDeck deck(std::string id, std::vector<lector::Slide> slides) {
    return {std::move(id), std::move(slides)};
}

inline Matrix gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double sd = 1.0) {
    std::normal_distribution<double> g(0.0, sd);
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = g(rng);
    return m;
}

inline Matrix row_stochastic(std::mt19937_64& rng, Eigen::Index n) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Matrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) m(r, c) = u(rng);
        m.row(r) /= m.row(r).sum();
    }
    return m;
}

/// Random embeddings and row-stochastic attention aligned to `d`.
inline lector::TensorBundle random_bundle(const lector::SlideDeck& d, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    lector::TensorBundle b{d.deck_id, dim, {}};
    for (const auto& s : d.slides) {
        const auto n = static_cast<Eigen::Index>(s.size());
        b.slides.push_back({gaussian(rng, n, static_cast<Eigen::Index>(dim)), row_stochastic(rng, n)});
    }
    return b;
}

/// Random deck with `slides` slides mixing nouns from a small vocabulary.
inline lector::SlideDeck random_deck(std::mt19937_64& rng, std::string id, int slides, bool allow_empty_title = true) {
    static const std::vector<std::string> vocab = {"list", "tree", "graph", "node", "edge", "queue", "stack", "heap"};
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    std::uniform_int_distribution<int> len(1, 6);
    std::bernoulli_distribution noun(0.7);
    lector::SlideDeck d{std::move(id), {}};
    for (int i = 0; i < slides; ++i) {
        lector::Slide s{i, {}, {}};
        const int title_len = allow_empty_title ? len(rng) - 1 : len(rng);
        for (int k = 0; k < title_len; ++k) s.title.push_back(noun(rng) ? N(vocab[pick(rng)]) : O("the"));
        const int body_len = len(rng);
        for (int k = 0; k < body_len; ++k) s.body.push_back(noun(rng) ? N(vocab[pick(rng)]) : O("of"));
        d.slides.push_back(std::move(s));
    }
    return d;
}

inline std::string deck_jsonl(const lector::SlideDeck& d) {
    std::ostringstream out;
    lector::write_deck(d, out);
    return out.str();
}

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("lector-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace fixtures
