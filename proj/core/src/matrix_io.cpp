#include "lector/matrix_io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

namespace lector {

std::string dump_matrix(const SlideTopicMatrix& m) {
    if (!m.values.allFinite()) {
        throw DomainError("refusing to serialise a matrix with non-finite entries");
    }
    nlohmann::ordered_json j;
    j["model"] = model_name(m.model);
    j["params"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m.params) {
        j["params"][k] = v;
    }
    j["deck_ids"] = m.deck_ids;
    j["deck_slide_counts"] = m.deck_slide_counts;
    j["slide_count"] = m.slide_count;
    auto topics = nlohmann::ordered_json::array();
    for (const auto& t : m.topics) {
        topics.push_back({{"id", t.id}, {"words", t.words}});
    }
    j["topics"] = std::move(topics);
    auto rows = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
        auto row = nlohmann::ordered_json::array();
        for (Eigen::Index c = 0; c < m.values.cols(); ++c) {
            row.push_back(m.values(r, c));
        }
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j.dump(1) + "\n";
}

SlideTopicMatrix parse_matrix(std::string_view text, const std::string& source) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(source, 0, std::string("invalid JSON: ") + e.what());
    }
    SlideTopicMatrix m;
    try {
        m.model = parse_model(j.at("model").get<std::string>());
        for (const auto& [k, v] : j.at("params").items()) {
            m.params[k] = v.get<double>();
        }
        m.deck_ids = j.at("deck_ids").get<std::vector<std::string>>();
        m.slide_count = j.at("slide_count").get<std::size_t>();
        if (j.contains("deck_slide_counts")) {
            m.deck_slide_counts = j["deck_slide_counts"].get<std::vector<std::size_t>>();
        } else if (m.deck_ids.size() == 1) {
            m.deck_slide_counts = {m.slide_count};
        }
        for (const auto& t : j.at("topics")) {
            m.topics.push_back({t.at("id").get<int>(), t.at("words").get<std::vector<std::string>>()});
        }
        const auto& rows = j.at("rows");
        if (rows.size() != m.slide_count) {
            throw ParseError(source, 0, "row count differs from slide_count");
        }
        m.values.resize(static_cast<Eigen::Index>(m.slide_count), static_cast<Eigen::Index>(m.topics.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != m.topics.size()) {
                throw ParseError(source, 0, "row " + std::to_string(r) + " length differs from topic count");
            }
            for (std::size_t c = 0; c < m.topics.size(); ++c) {
                m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(source, 0, std::string("bad matrix schema: ") + e.what());
    } catch (const DomainError& e) {
        throw ParseError(source, 0, e.what());
    }
    std::size_t total = 0;
    for (auto n : m.deck_slide_counts) {
        total += n;
    }
    if (!m.deck_slide_counts.empty() &&
        (m.deck_slide_counts.size() != m.deck_ids.size() || total != m.slide_count)) {
        throw ParseError(source, 0, "deck_slide_counts inconsistent with deck_ids/slide_count");
    }
    return m;
}

void write_matrix(const SlideTopicMatrix& m, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + file.string());
    }
    out << dump_matrix(m);
}

SlideTopicMatrix read_matrix(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw Error("cannot open matrix file " + file.string());
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_matrix(text, file.string());
}

}  // namespace lector
