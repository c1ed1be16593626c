#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace lector {

/// Part-of-speech class as far as topic extraction cares.
enum class Pos { Noun, Other };

/// Maps a tagger label onto Pos. "NOUN" and "PROPN" are nouns, every other
/// non-empty label is Other. Throws DomainError on an empty label.
Pos parse_pos(std::string_view tag);
std::string_view pos_name(Pos pos);

struct Token {
    std::string surface;
    Pos pos = Pos::Other;
};

/// One slide. The flattened word order (title tokens, then body tokens) is the
/// row order of the slide's embedding and attention matrices.
struct Slide {
    int index = 0;
    std::vector<Token> title;
    std::vector<Token> body;

    std::size_t size() const noexcept { return title.size() + body.size(); }
    const Token& at(std::size_t flat) const;
};

struct SlideDeck {
    std::string deck_id;
    std::vector<Slide> slides;
};

/// Decks ordered by deck_id. Slide rows of every course-level matrix follow
/// this order.
using Corpus = std::vector<SlideDeck>;

/// Parses one `<deck_id>.slides.jsonl` stream. `source` is used in messages.
SlideDeck parse_deck(std::istream& in, std::string deck_id, const std::string& source);
SlideDeck read_deck(const std::filesystem::path& file);
void write_deck(const SlideDeck& deck, std::ostream& out);

/// Sorts decks by id and rejects duplicates.
Corpus assemble_corpus(std::vector<SlideDeck> decks);

/// Loads every `*.slides.jsonl` file in `dir`.
Corpus load_corpus(const std::filesystem::path& dir);

const SlideDeck& find_deck(const Corpus& corpus, std::string_view deck_id);

/// Global slide row numbering across the decks of a corpus.
class CourseLayout {
public:
    explicit CourseLayout(const Corpus& corpus);

    std::size_t slide_count() const noexcept { return total_; }
    std::size_t row(std::string_view deck_id, int slide_index) const;
    std::size_t deck_offset(std::size_t deck) const { return offsets_.at(deck); }

private:
    std::vector<std::string> ids_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> sizes_;
    std::size_t total_ = 0;
};

struct Occurrence {
    std::string deck_id;
    int slide_index = 0;
    int start = 0;  ///< position in the slide's flattened token order

    auto operator<=>(const Occurrence&) const = default;
};

struct TopicCandidate {
    int topic_id = 0;
    std::vector<std::string> words;
    std::vector<Occurrence> occurrences;

    std::size_t count() const noexcept { return occurrences.size(); }
    std::string label() const;
};

struct TopicSet {
    std::vector<TopicCandidate> topics;  ///< indexed by topic_id

    std::size_t size() const noexcept { return topics.size(); }
    bool empty() const noexcept { return topics.empty(); }
    const TopicCandidate& operator[](std::size_t j) const { return topics[j]; }

    /// Sum of occurrence counts over all candidates.
    std::size_t total_occurrences() const noexcept;
    /// count_j / total_occurrences().
    double relative_frequency(std::size_t j) const;
};

/// Noun unigrams and, when n_max == 2, bigrams of positionally adjacent nouns
/// within the same region (title or body). Topic ids follow lexicographic
/// order of the word sequence.
TopicSet extract_topic_candidates(const Corpus& corpus, int n_max = 2);

}  // namespace lector
