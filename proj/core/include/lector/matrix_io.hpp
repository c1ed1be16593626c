#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "lector/scoring.hpp"

namespace lector {

/// Serialises to the `.matrix.json` layout:
/// {model, params, deck_ids, deck_slide_counts, slide_count, topics:[{id, words}], rows}.
/// Doubles are written with round-trip precision.
std::string dump_matrix(const SlideTopicMatrix& m);
SlideTopicMatrix parse_matrix(std::string_view text, const std::string& source = "<matrix>");

void write_matrix(const SlideTopicMatrix& m, const std::filesystem::path& file);
SlideTopicMatrix read_matrix(const std::filesystem::path& file);

}  // namespace lector
