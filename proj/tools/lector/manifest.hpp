#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace lector::cli {

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& file);

/// Run record written next to a command's outputs. It holds the
/// configuration, the tool version and the content hashes of every input
/// and output file, and nothing that varies between identical runs.
class Manifest {
public:
    explicit Manifest(std::string command);

    nlohmann::ordered_json& config() { return config_; }
    /// A directory contributes every regular file below it, sorted by path.
    void add_input(const std::filesystem::path& path);
    void add_output(const std::filesystem::path& path);
    void write(const std::filesystem::path& file) const;

private:
    std::string command_;
    nlohmann::ordered_json config_ = nlohmann::ordered_json::object();
    std::vector<std::filesystem::path> inputs_;
    std::vector<std::filesystem::path> outputs_;
};

}  // namespace lector::cli
