#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lector/corpus.hpp"
#include "lector/error.hpp"

namespace lector {

/// Word embeddings (one row per word, title then body) and the word-level
/// self-attention matrix (row = query word, column = key word) of one slide.
struct SlideTensors {
    Matrix embeddings;
    Matrix attention;

    std::size_t words() const noexcept { return static_cast<std::size_t>(embeddings.rows()); }
};

struct TensorBundle {
    std::string deck_id;
    std::size_t dim = 0;
    std::vector<SlideTensors> slides;
};

using BundleSet = std::map<std::string, TensorBundle, std::less<>>;

inline constexpr char kBundleMagic[4] = {'L', 'C', 'T', 'B'};
inline constexpr std::uint32_t kBundleVersion = 1;
inline constexpr double kAttentionRowTolerance = 1e-3;

/// Decodes the little-endian `.tensors.bin` layout. Values are stored as
/// float32 and widened to double, so encode(decode(b)) == b.
TensorBundle decode_tensor_bundle(std::string_view bytes);
std::string encode_tensor_bundle(const TensorBundle& bundle);

TensorBundle read_tensor_bundle(const std::filesystem::path& file);
void write_tensor_bundle(const TensorBundle& bundle, const std::filesystem::path& file);

/// Reads `<deck_id>.tensors.bin` for every deck. A missing file is an error
/// naming the deck.
BundleSet load_bundles(const std::filesystem::path& dir, const Corpus& corpus);

enum class ViolationKind {
    DeckId,
    SlideCount,
    WordCount,
    Shape,
    NonFinite,
    NegativeAttention,
    RowSum,
};

std::string_view violation_name(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    int slide = -1;
    int row = -1;
    double value = 0.0;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
};

/// Checks the bundle against the deck's alignment contract. Never throws on
/// data problems; every problem becomes a Violation.
ValidationReport validate_bundle(const TensorBundle& bundle, const SlideDeck& deck);

}  // namespace lector
