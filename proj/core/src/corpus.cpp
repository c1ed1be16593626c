#include "lector/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "lector/error.hpp"

namespace lector {

namespace {

constexpr std::string_view kDeckSuffix = ".slides.jsonl";

std::vector<Token> parse_region(const nlohmann::json& slide, const char* key,
                                const std::string& source, std::size_t line) {
    std::vector<Token> tokens;
    if (!slide.contains(key)) {
        return tokens;
    }
    const auto& arr = slide.at(key);
    if (!arr.is_array()) {
        throw ParseError(source, line, std::string("\"") + key + "\" must be an array");
    }
    tokens.reserve(arr.size());
    for (const auto& tok : arr) {
        if (!tok.is_object() || !tok.contains("surface") || !tok.contains("pos") ||
            !tok["surface"].is_string() || !tok["pos"].is_string()) {
            throw ParseError(source, line, std::string("malformed token in \"") + key + "\"");
        }
        Token t;
        t.surface = tok["surface"].get<std::string>();
        if (t.surface.empty() ||
            std::any_of(t.surface.begin(), t.surface.end(),
                        [](unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; })) {
            throw ParseError(source, line, "token surface must be non-empty and whitespace-free");
        }
        try {
            t.pos = parse_pos(tok["pos"].get<std::string>());
        } catch (const DomainError& e) {
            throw ParseError(source, line, e.what());
        }
        tokens.push_back(std::move(t));
    }
    return tokens;
}

nlohmann::json region_json(const std::vector<Token>& tokens) {
    auto arr = nlohmann::json::array();
    for (const auto& t : tokens) {
        arr.push_back({{"surface", t.surface}, {"pos", pos_name(t.pos)}});
    }
    return arr;
}

}  // namespace

Pos parse_pos(std::string_view tag) {
    if (tag.empty()) {
        throw DomainError("empty part-of-speech tag");
    }
    if (tag == "NOUN" || tag == "PROPN") {
        return Pos::Noun;
    }
    return Pos::Other;
}

std::string_view pos_name(Pos pos) {
    return pos == Pos::Noun ? "NOUN" : "OTHER";
}

const Token& Slide::at(std::size_t flat) const {
    if (flat < title.size()) {
        return title[flat];
    }
    return body.at(flat - title.size());
}

SlideDeck parse_deck(std::istream& in, std::string deck_id, const std::string& source) {
    SlideDeck deck;
    deck.deck_id = std::move(deck_id);

    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (!text.empty() && text.back() == '\r') {
            text.pop_back();
        }
        if (text.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(source, line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object() || !obj.contains("index") || !obj["index"].is_number_integer()) {
            throw ParseError(source, line_no, "slide object needs an integer \"index\"");
        }
        Slide slide;
        slide.index = obj["index"].get<int>();
        const int expected = static_cast<int>(deck.slides.size());
        if (slide.index != expected) {
            throw ParseError(source, line_no,
                             "slide index gap: expected " + std::to_string(expected) + ", found " +
                                 std::to_string(slide.index));
        }
        slide.title = parse_region(obj, "title", source, line_no);
        slide.body = parse_region(obj, "body", source, line_no);
        deck.slides.push_back(std::move(slide));
    }
    if (deck.slides.empty()) {
        throw ParseError(source, 0, "deck has no slides");
    }
    return deck;
}

SlideDeck read_deck(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw Error("cannot open deck file " + file.string());
    }
    auto name = file.filename().string();
    std::string id = name;
    if (name.size() > kDeckSuffix.size() && name.ends_with(kDeckSuffix)) {
        id = name.substr(0, name.size() - kDeckSuffix.size());
    }
    return parse_deck(in, id, file.string());
}

void write_deck(const SlideDeck& deck, std::ostream& out) {
    for (const auto& s : deck.slides) {
        nlohmann::json obj = {{"index", s.index}, {"title", region_json(s.title)}, {"body", region_json(s.body)}};
        out << obj.dump() << '\n';
    }
}

Corpus assemble_corpus(std::vector<SlideDeck> decks) {
    std::sort(decks.begin(), decks.end(),
              [](const SlideDeck& a, const SlideDeck& b) { return a.deck_id < b.deck_id; });
    for (std::size_t i = 1; i < decks.size(); ++i) {
        if (decks[i].deck_id == decks[i - 1].deck_id) {
            throw Error("duplicate deck_id \"" + decks[i].deck_id + "\"");
        }
    }
    return decks;
}

Corpus load_corpus(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw Error("corpus path is not a directory: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.size() > kDeckSuffix.size() && name.ends_with(kDeckSuffix)) {
            files.push_back(entry.path());
        }
    }
    if (files.empty()) {
        throw Error("no decks found in " + dir.string());
    }
    std::vector<SlideDeck> decks;
    decks.reserve(files.size());
    for (const auto& f : files) {
        decks.push_back(read_deck(f));
    }
    return assemble_corpus(std::move(decks));
}

const SlideDeck& find_deck(const Corpus& corpus, std::string_view deck_id) {
    for (const auto& d : corpus) {
        if (d.deck_id == deck_id) {
            return d;
        }
    }
    throw Error("unknown deck \"" + std::string(deck_id) + "\"");
}

CourseLayout::CourseLayout(const Corpus& corpus) {
    for (const auto& d : corpus) {
        ids_.push_back(d.deck_id);
        offsets_.push_back(total_);
        sizes_.push_back(d.slides.size());
        total_ += d.slides.size();
    }
}

std::size_t CourseLayout::row(std::string_view deck_id, int slide_index) const {
    for (std::size_t d = 0; d < ids_.size(); ++d) {
        if (ids_[d] == deck_id) {
            if (slide_index < 0 || static_cast<std::size_t>(slide_index) >= sizes_[d]) {
                throw DimensionError("slide " + std::to_string(slide_index) + " outside deck \"" +
                                     std::string(deck_id) + "\"");
            }
            return offsets_[d] + static_cast<std::size_t>(slide_index);
        }
    }
    throw Error("unknown deck \"" + std::string(deck_id) + "\"");
}

std::string TopicCandidate::label() const {
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) {
            out += ' ';
        }
        out += w;
    }
    return out;
}

std::size_t TopicSet::total_occurrences() const noexcept {
    std::size_t n = 0;
    for (const auto& t : topics) {
        n += t.count();
    }
    return n;
}

double TopicSet::relative_frequency(std::size_t j) const {
    const auto total = total_occurrences();
    return total == 0 ? 0.0 : static_cast<double>(topics.at(j).count()) / static_cast<double>(total);
}

TopicSet extract_topic_candidates(const Corpus& corpus, int n_max) {
    if (n_max != 1 && n_max != 2) {
        throw DomainError("n_max must be 1 or 2, got " + std::to_string(n_max));
    }
    std::map<std::vector<std::string>, std::vector<Occurrence>> found;

    auto scan = [&](const SlideDeck& deck, const Slide& slide, const std::vector<Token>& region,
                    int offset) {
        for (std::size_t p = 0; p < region.size(); ++p) {
            if (region[p].pos != Pos::Noun) {
                continue;
            }
            const int start = offset + static_cast<int>(p);
            found[{region[p].surface}].push_back({deck.deck_id, slide.index, start});
            if (n_max == 2 && p + 1 < region.size() && region[p + 1].pos == Pos::Noun) {
                found[{region[p].surface, region[p + 1].surface}].push_back(
                    {deck.deck_id, slide.index, start});
            }
        }
    };

    for (const auto& deck : corpus) {
        for (const auto& slide : deck.slides) {
            scan(deck, slide, slide.title, 0);
            scan(deck, slide, slide.body, static_cast<int>(slide.title.size()));
        }
    }

    TopicSet set;
    set.topics.reserve(found.size());
    int id = 0;
    for (auto& [words, occ] : found) {
        std::sort(occ.begin(), occ.end());
        set.topics.push_back({id++, words, std::move(occ)});
    }
    spdlog::debug("extracted {} topic candidates", set.size());
    return set;
}

}  // namespace lector
