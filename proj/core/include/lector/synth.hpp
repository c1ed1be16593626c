#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lector/analytics.hpp"
#include "lector/corpus.hpp"
#include "lector/keyeval.hpp"
#include "lector/logs.hpp"
#include "lector/scoring.hpp"
#include "lector/tensors.hpp"

namespace lector {

/// Parameters of a synthetic course. Planted topics are unigram nouns drawn
/// from the vocabulary; `planted_salience` holds one salience multiplier per
/// planted topic.
struct SynthSpec {
    std::uint64_t seed = 0;
    std::size_t deck_count = 1;
    std::size_t slide_count = 20;  ///< per deck
    std::size_t vocab_size = 50;
    std::vector<double> planted_salience = {1.0, 1.0, 1.0, 1.0, 1.0};
    std::size_t dim = 32;
    std::size_t student_count = 60;
    double at_risk_fraction = 0.3;
    double signal_strength = 1.0;

    std::size_t planted_count() const noexcept { return planted_salience.size(); }
    /// Throws DomainError for an inconsistent spec.
    void validate() const;
};

struct SynthCorpus {
    Corpus corpus;
    BundleSet bundles;
    std::vector<std::string> planted;  ///< sorted
    GoldKeyphrases gold;
};

/// Decks whose titles carry the planted topics, and bundles in which planted
/// words draw extra attention and share a common embedding direction. Every
/// vocabulary word occurs at least once; nouns are separated by filler words
/// so that no bigram candidates arise. Tensor values are rounded to float32
/// so the in-memory bundles equal what a round trip through disk yields.
SynthCorpus generate_corpus(const SynthSpec& spec);

/// Writes `<dir>/corpus/*.slides.jsonl`, `<dir>/bundles/*.tensors.bin` and
/// `<dir>/gold.txt`.
void write_synth_corpus(const SynthCorpus& synth, const std::filesystem::path& dir);

struct SynthLogs {
    std::vector<ReadingEvent> events;  ///< sorted
    std::map<std::string, Grade> grades;
    std::vector<TimeWindow> schedule;
    std::size_t topic_a = 0;  ///< column the at-risk group favours
    std::size_t topic_b = 0;  ///< column the other group favours
};

/// Reading sessions for `student_count` students on every deck of M. Both
/// groups draw visit counts, dwell times and operations from the same
/// distributions; only the page preference differs. With signal strength s a
/// student's page preference is (1 - 0.7 s) * random + 0.7 s * group profile,
/// the profiles concentrating on slides heavy in topic_a or topic_b.
SynthLogs generate_logs(const SynthSpec& spec, const SlideTopicMatrix& m);

std::string grades_csv(const std::map<std::string, Grade>& grades);
std::string schedule_json(const std::vector<TimeWindow>& schedule);

/// Writes `<dir>/events.csv`, `<dir>/grades.csv` and `<dir>/schedule.json`.
void write_synth_logs(const SynthLogs& logs, const std::filesystem::path& dir);

}  // namespace lector
