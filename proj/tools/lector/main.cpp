#include <cstdlib>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "lector/error.hpp"
#include "version.hpp"

namespace {

using lector::cli::RunConfig;

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("lector");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    if (const char* env = std::getenv("LECTOR_LOG")) {
        const auto level = spdlog::level::from_str(env);
        // from_str maps unknown names to off
        if (level != spdlog::level::off || std::string(env) == "off") {
            spdlog::set_level(level);
        } else {
            spdlog::warn("LECTOR_LOG=\"{}\" is not a log level; using info", env);
        }
    }
}

void hyper_flags(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--k", cfg.k, "SIF smoothing constant")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", cfg.alpha, "frequency softening exponent")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--d", cfg.d, "weight of the importance score")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--phi", cfg.phi, "softmax temperature (default sqrt(dim))")->check(CLI::PositiveNumber);
}

void log_flags(CLI::App* cmd, RunConfig& cfg, bool need_grades) {
    cmd->add_option("--matrix", cfg.matrix, "slide-topic matrix (.matrix.json)")->check(CLI::ExistingFile);
    cmd->add_option("--logs", cfg.logs, "reading events CSV")->required()->check(CLI::ExistingFile);
    if (need_grades) {
        cmd->add_option("--grades", cfg.grades, "grades CSV (user_id,grade)")->required()->check(CLI::ExistingFile);
    }
    cmd->add_option("--schedule", cfg.schedule, "class schedule JSON for the in/out-class split")
        ->check(CLI::ExistingFile);
    cmd->add_option("--cap-seconds", cfg.cap_seconds, "maximum seconds attributed to one gap")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    RunConfig cfg;
    CLI::App app{"LECTOR slide-topic scoring, keyphrase evaluation and reading-log analytics"};
    app.set_version_flag("--version", lector::cli::kVersion);
    app.require_subcommand(1);

    auto* score = app.add_subcommand("score", "build a slide-topic matrix");
    score->add_option("--corpus", cfg.corpus, "directory of <deck>.slides.jsonl files")->required()->check(CLI::ExistingDirectory);
    score->add_option("--bundles", cfg.bundles, "directory of <deck>.tensors.bin files")->check(CLI::ExistingDirectory);
    score->add_option("--model", cfg.model, "lector|tfidf|binary|textrank|attnlite")
        ->capture_default_str()
        ->check(CLI::IsMember({"lector", "tfidf", "binary", "textrank", "attnlite"}));
    hyper_flags(score, cfg);
    score->add_option("--window", cfg.window, "TextRank co-occurrence window")->capture_default_str()->check(CLI::Range(2, 1000));
    score->add_option("--damping", cfg.damping, "TextRank damping")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    score->add_option("--out", cfg.out, "output directory")->capture_default_str();

    auto* eval = app.add_subcommand("eval", "evaluate keyphrases against gold phrases");
    eval->add_option("--matrix", cfg.matrix, "slide-topic matrix (.matrix.json)")->required()->check(CLI::ExistingFile);
    eval->add_option("--gold", cfg.gold, "gold keyphrases, one per line")->required()->check(CLI::ExistingFile);
    eval->add_option("--top-k", cfg.top_k, "topics exported per slide")->capture_default_str()->check(CLI::PositiveNumber);
    eval->add_option("--out", cfg.out, "output directory")->capture_default_str();

    auto* logs = app.add_subcommand("logs", "reading time, activity features and preferences");
    log_flags(logs, cfg, false);
    logs->add_option("--out", cfg.out, "output directory")->capture_default_str();

    auto* fdr = app.add_subcommand("fdr", "topic separability between grade groups");
    log_flags(fdr, cfg, true);
    fdr->get_option("--matrix")->required();
    fdr->add_option("--report-topics", cfg.report_topics, "topics listed in the report")->capture_default_str();
    fdr->add_option("--out", cfg.out, "output directory")->capture_default_str();

    auto* predict = app.add_subcommand("predict", "at-risk prediction from topic vs traditional features");
    log_flags(predict, cfg, true);
    predict->get_option("--matrix")->required();
    predict->add_option("--top-topics", cfg.top_topics, "topic features: the n best topics by mt (0 = all)")->capture_default_str();
    predict->add_option("--folds", cfg.folds, "cross-validation folds")->capture_default_str()->check(CLI::Range(2, 100));
    predict->add_option("--fold-size", cfg.fold_size, "samples per fold")->capture_default_str()->check(CLI::PositiveNumber);
    predict->add_option("--seed", cfg.seed, "fold assignment seed")->capture_default_str();
    predict->add_option("--lr", cfg.lr, "gradient descent step cap")->capture_default_str()->check(CLI::PositiveNumber);
    predict->add_option("--epochs", cfg.epochs, "gradient descent epochs")->capture_default_str()->check(CLI::NonNegativeNumber);
    predict->add_option("--l2", cfg.l2, "ridge penalty")->capture_default_str()->check(CLI::NonNegativeNumber);
    predict->add_option("--out", cfg.out, "output directory")->capture_default_str();

    auto* synth = app.add_subcommand("synth", "generate a synthetic course with planted signal");
    synth->add_option("--seed", cfg.seed, "generator seed")->capture_default_str();
    synth->add_option("--decks", cfg.decks, "decks")->capture_default_str()->check(CLI::PositiveNumber);
    synth->add_option("--slides", cfg.slides, "slides per deck")->capture_default_str()->check(CLI::PositiveNumber);
    synth->add_option("--vocab", cfg.vocab, "vocabulary size")->capture_default_str()->check(CLI::PositiveNumber);
    synth->add_option("--planted", cfg.planted, "planted topics")->capture_default_str();
    synth->add_option("--dim", cfg.dim, "embedding dimension")->capture_default_str()->check(CLI::Range(2, 4096));
    synth->add_option("--students", cfg.students, "students")->capture_default_str();
    synth->add_option("--at-risk", cfg.at_risk, "fraction of at-risk students")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    synth->add_option("--signal", cfg.signal, "signal strength")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    hyper_flags(synth, cfg);
    synth->add_option("--out", cfg.out, "output directory")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*score) lector::cli::cmd_score(cfg);
        else if (*eval) lector::cli::cmd_eval(cfg);
        else if (*logs) lector::cli::cmd_logs(cfg);
        else if (*fdr) lector::cli::cmd_fdr(cfg);
        else if (*predict) lector::cli::cmd_predict(cfg);
        else if (*synth) lector::cli::cmd_synth(cfg);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
