#include "lector/tensors.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace lector {

namespace {

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    std::size_t offset() const noexcept { return pos_; }

    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n) {
            throw FormatError("truncated tensor bundle at byte offset " + std::to_string(pos_) +
                              ": need " + std::to_string(n) + " bytes for " + what + ", " +
                              std::to_string(bytes_.size() - pos_) + " remain");
        }
    }

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) {
            v = (v << 8) | static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)]);
        }
        pos_ += 4;
        return v;
    }

    std::string_view take(std::size_t n, const char* what) {
        need(n, what);
        auto out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    void floats(Matrix& m, std::size_t rows, std::size_t cols, const char* what) {
        const std::size_t count = rows * cols;
        if (cols != 0 && count / cols != rows) {
            throw FormatError(std::string("overflowing ") + what + " size");
        }
        need(count * 4, what);
        m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                const auto bits = u32(what);
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    static_cast<double>(std::bit_cast<float>(bits));
            }
        }
    }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
    }
}

void put_floats(std::string& out, const Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(m(r, c))));
        }
    }
}

}  // namespace

TensorBundle decode_tensor_bundle(std::string_view bytes) {
    Reader rd(bytes);
    const auto magic = rd.take(4, "magic");
    if (std::memcmp(magic.data(), kBundleMagic, 4) != 0) {
        throw FormatError("bad magic: not a tensor bundle");
    }
    const auto version = rd.u32("version");
    if (version != kBundleVersion) {
        throw FormatError("unsupported tensor bundle version " + std::to_string(version));
    }
    TensorBundle bundle;
    const auto id_len = rd.u32("deck_id length");
    bundle.deck_id = std::string(rd.take(id_len, "deck_id"));
    const auto num_slides = rd.u32("num_slides");
    bundle.dim = rd.u32("dim");
    if (bundle.dim == 0) {
        throw FormatError("tensor bundle dim must be positive");
    }
    bundle.slides.reserve(num_slides);
    for (std::uint32_t s = 0; s < num_slides; ++s) {
        SlideTensors st;
        const auto n_w = rd.u32("n_w");
        rd.floats(st.embeddings, n_w, bundle.dim, "embeddings");
        rd.floats(st.attention, n_w, n_w, "attention");
        bundle.slides.push_back(std::move(st));
    }
    if (rd.offset() != bytes.size()) {
        throw FormatError("trailing bytes after tensor bundle at byte offset " + std::to_string(rd.offset()));
    }
    return bundle;
}

std::string encode_tensor_bundle(const TensorBundle& bundle) {
    std::string out(kBundleMagic, 4);
    put_u32(out, kBundleVersion);
    put_u32(out, static_cast<std::uint32_t>(bundle.deck_id.size()));
    out += bundle.deck_id;
    put_u32(out, static_cast<std::uint32_t>(bundle.slides.size()));
    put_u32(out, static_cast<std::uint32_t>(bundle.dim));
    for (const auto& st : bundle.slides) {
        if (static_cast<std::size_t>(st.embeddings.cols()) != bundle.dim && st.embeddings.rows() > 0) {
            throw DimensionError("embedding width differs from bundle dim");
        }
        if (st.attention.rows() != st.embeddings.rows() || st.attention.cols() != st.embeddings.rows()) {
            throw DimensionError("attention shape does not match word count");
        }
        put_u32(out, static_cast<std::uint32_t>(st.embeddings.rows()));
        put_floats(out, st.embeddings);
        put_floats(out, st.attention);
    }
    return out;
}

TensorBundle read_tensor_bundle(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw Error("cannot open tensor bundle " + file.string());
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_tensor_bundle(bytes);
    } catch (const FormatError& e) {
        throw FormatError(file.string() + ": " + e.what());
    }
}

void write_tensor_bundle(const TensorBundle& bundle, const std::filesystem::path& file) {
    const auto bytes = encode_tensor_bundle(bundle);
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write tensor bundle " + file.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

BundleSet load_bundles(const std::filesystem::path& dir, const Corpus& corpus) {
    BundleSet set;
    for (const auto& deck : corpus) {
        const auto file = dir / (deck.deck_id + ".tensors.bin");
        if (!std::filesystem::exists(file)) {
            throw Error("missing tensor bundle for deck \"" + deck.deck_id + "\" (" + file.string() + ")");
        }
        set.emplace(deck.deck_id, read_tensor_bundle(file));
    }
    return set;
}

std::string_view violation_name(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::DeckId: return "deck_id";
        case ViolationKind::SlideCount: return "slide_count";
        case ViolationKind::WordCount: return "word_count";
        case ViolationKind::Shape: return "shape";
        case ViolationKind::NonFinite: return "non_finite";
        case ViolationKind::NegativeAttention: return "negative_attention";
        case ViolationKind::RowSum: return "row_sum";
    }
    return "unknown";
}

ValidationReport validate_bundle(const TensorBundle& bundle, const SlideDeck& deck) {
    ValidationReport report;
    auto add = [&](ViolationKind kind, int slide, int row, double value, std::string msg) {
        report.violations.push_back({kind, slide, row, value, std::move(msg)});
    };

    if (bundle.deck_id != deck.deck_id) {
        add(ViolationKind::DeckId, -1, -1, 0.0,
            "bundle deck_id \"" + bundle.deck_id + "\" vs deck \"" + deck.deck_id + "\"");
    }
    if (bundle.slides.size() != deck.slides.size()) {
        add(ViolationKind::SlideCount, -1, -1, static_cast<double>(bundle.slides.size()),
            "bundle has " + std::to_string(bundle.slides.size()) + " slides, deck has " +
                std::to_string(deck.slides.size()));
    }

    const auto n = std::min(bundle.slides.size(), deck.slides.size());
    for (std::size_t s = 0; s < bundle.slides.size(); ++s) {
        const auto& st = bundle.slides[s];
        const int si = static_cast<int>(s);
        const auto n_w = st.embeddings.rows();
        if (s < n && static_cast<std::size_t>(n_w) != deck.slides[s].size()) {
            add(ViolationKind::WordCount, si, -1, static_cast<double>(n_w),
                "slide " + std::to_string(s) + ": " + std::to_string(n_w) + " embedding rows vs " +
                    std::to_string(deck.slides[s].size()) + " tokens");
        }
        if ((n_w > 0 && static_cast<std::size_t>(st.embeddings.cols()) != bundle.dim) ||
            st.attention.rows() != n_w || st.attention.cols() != n_w) {
            add(ViolationKind::Shape, si, -1, 0.0, "slide " + std::to_string(s) + ": inconsistent matrix shapes");
            continue;
        }
        if (!st.embeddings.allFinite()) {
            add(ViolationKind::NonFinite, si, -1, 0.0, "slide " + std::to_string(s) + ": non-finite embedding");
        }
        for (Eigen::Index r = 0; r < st.attention.rows(); ++r) {
            const auto row = st.attention.row(r);
            const int ri = static_cast<int>(r);
            if (!row.allFinite()) {
                add(ViolationKind::NonFinite, si, ri, 0.0,
                    "slide " + std::to_string(s) + " row " + std::to_string(r) + ": non-finite attention");
                continue;
            }
            const double min = row.minCoeff();
            if (min < 0.0) {
                add(ViolationKind::NegativeAttention, si, ri, min,
                    "slide " + std::to_string(s) + " row " + std::to_string(r) + ": negative attention " +
                        std::to_string(min));
            }
            const double sum = row.sum();
            if (std::abs(sum - 1.0) > kAttentionRowTolerance) {
                std::ostringstream msg;
                msg << "slide " << s << " row " << r << ": attention sums to " << sum;
                add(ViolationKind::RowSum, si, ri, sum, msg.str());
            }
        }
    }
    return report;
}

}  // namespace lector
