#include "manifest.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "lector/error.hpp"
#include "version.hpp"

namespace lector::cli {

std::string sha256_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + file.string());
    }
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 initialisation failed");
    }
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) {
            EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
        }
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

Manifest::Manifest(std::string command) : command_(std::move(command)) {}

void Manifest::add_input(const std::filesystem::path& path) {
    if (std::filesystem::is_directory(path)) {
        std::vector<std::filesystem::path> files;
        for (const auto& e : std::filesystem::recursive_directory_iterator(path)) {
            if (e.is_regular_file()) {
                files.push_back(e.path());
            }
        }
        std::sort(files.begin(), files.end());
        inputs_.insert(inputs_.end(), files.begin(), files.end());
    } else {
        inputs_.push_back(path);
    }
}

void Manifest::add_output(const std::filesystem::path& path) {
    outputs_.push_back(path);
}

void Manifest::write(const std::filesystem::path& file) const {
    auto files = [](const std::vector<std::filesystem::path>& paths) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& p : paths) {
            arr.push_back({{"path", p.generic_string()},
                           {"bytes", std::filesystem::file_size(p)},
                           {"sha256", sha256_file(p)}});
        }
        return arr;
    };
    nlohmann::ordered_json j;
    j["tool"] = "lector";
    j["version"] = kVersion;
    j["command"] = command_;
    j["config"] = config_;
    j["inputs"] = files(inputs_);
    j["outputs"] = files(outputs_);
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write manifest " + file.string());
    }
    out << j.dump(2) << '\n';
}

}  // namespace lector::cli
