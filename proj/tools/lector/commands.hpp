#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace lector::cli {

struct RunConfig {
    std::filesystem::path corpus;
    std::filesystem::path bundles;
    std::filesystem::path matrix;
    std::filesystem::path gold;
    std::filesystem::path logs;
    std::filesystem::path grades;
    std::filesystem::path schedule;
    std::filesystem::path out = ".";

    std::string model = "lector";
    double k = 1e-3;
    double alpha = 0.25;
    double d = 0.5;
    std::optional<double> phi;
    int window = 2;
    double damping = 0.85;

    std::size_t top_k = 5;
    double cap_seconds = 600.0;
    std::size_t top_topics = 10;
    std::size_t report_topics = 10;
    std::size_t folds = 3;
    std::size_t fold_size = 20;
    std::uint64_t seed = 0;
    double lr = 0.1;
    int epochs = 200;
    double l2 = 1.0;

    std::size_t decks = 1;
    std::size_t slides = 20;
    std::size_t vocab = 50;
    std::size_t planted = 5;
    std::size_t dim = 32;
    std::size_t students = 60;
    double at_risk = 0.3;
    double signal = 1.0;
};

void cmd_score(const RunConfig& cfg);
void cmd_eval(const RunConfig& cfg);
void cmd_logs(const RunConfig& cfg);
void cmd_fdr(const RunConfig& cfg);
void cmd_predict(const RunConfig& cfg);
void cmd_synth(const RunConfig& cfg);

}  // namespace lector::cli
