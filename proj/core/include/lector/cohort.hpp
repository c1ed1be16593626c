#pragma once

#include <map>
#include <string>
#include <vector>

#include "lector/analytics.hpp"
#include "lector/logs.hpp"
#include "lector/scoring.hpp"

namespace lector {

/// Columns of the `n` topics with the highest mt score, best first. n == 0
/// selects every topic in column order.
std::vector<std::size_t> top_topic_columns(const SlideTopicMatrix& m, std::size_t n);

/// Topic preferences per user, averaged over the materials the user spent
/// time on. Materials absent from M and materials without reading time are
/// skipped with a warning.
std::map<std::string, Vector> student_topic_preferences(const std::vector<ReadingEvent>& events,
                                                        const SlideTopicMatrix& m,
                                                        double cap_seconds = kDefaultCapSeconds);

struct CohortOptions {
    std::size_t top_topics = 10;  ///< 0 keeps every topic
    double cap_seconds = kDefaultCapSeconds;
};

/// Students with a grade and reading time, in user order, carrying both
/// representations: topic preferences T and the traditional features F.
struct Cohort {
    std::vector<std::string> users;
    std::vector<int> labels;  ///< 1 = at risk
    Matrix topic_features;
    std::vector<std::string> topic_names;
    std::vector<std::size_t> topic_columns;
    Matrix traditional_features;
    std::vector<std::string> traditional_names;
    std::vector<std::string> excluded;

    std::size_t at_risk() const;
};

Cohort build_cohort(const std::vector<ReadingEvent>& events, const SlideTopicMatrix& m,
                    const std::map<std::string, Grade>& grades, const CohortOptions& options = {});

}  // namespace lector
