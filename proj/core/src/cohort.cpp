#include "lector/cohort.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <spdlog/spdlog.h>

#include "lector/keyeval.hpp"

namespace lector {

std::vector<std::size_t> top_topic_columns(const SlideTopicMatrix& m, std::size_t n) {
    if (n == 0) {
        std::vector<std::size_t> all(m.topics.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        return all;
    }
    if (m.topics.empty()) {
        return {};
    }
    return topn(keyphrase_scores(m), m.topics, std::min(n, m.topics.size())).topics;
}

std::map<std::string, Vector> student_topic_preferences(const std::vector<ReadingEvent>& events,
                                                        const SlideTopicMatrix& m, double cap_seconds) {
    std::map<std::string, std::pair<Vector, int>> sums;
    std::set<std::string> unknown;
    for (const auto& pt : sessionize_reading_time(events, cap_seconds)) {
        const auto it = std::find(m.deck_ids.begin(), m.deck_ids.end(), pt.material_id);
        if (it == m.deck_ids.end()) {
            if (unknown.insert(pt.material_id).second) {
                spdlog::warn("material \"{}\" is not in the matrix; its events are ignored", pt.material_id);
            }
            continue;
        }
        const auto [first, count] = m.deck_rows(pt.material_id);
        PreferenceVector slides;
        try {
            slides = slide_preferences(pt.seconds, count, pt.user_id);
        } catch (const Error& e) {
            spdlog::debug("{} on material \"{}\"; excluded from it", e.what(), pt.material_id);
            continue;
        }
        const auto rows = m.values.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count));
        const auto topics = topic_preferences(slides, Matrix(rows));
        auto& [sum, n] = sums.try_emplace(pt.user_id, Vector::Zero(m.values.cols()), 0).first->second;
        sum += topics.values;
        ++n;
    }
    std::map<std::string, Vector> out;
    for (auto& [user, acc] : sums) {
        out.emplace(user, acc.first / static_cast<double>(acc.second));
    }
    return out;
}

std::size_t Cohort::at_risk() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

Cohort build_cohort(const std::vector<ReadingEvent>& events, const SlideTopicMatrix& m,
                    const std::map<std::string, Grade>& grades, const CohortOptions& options) {
    Cohort c;
    c.topic_columns = top_topic_columns(m, options.top_topics);
    for (auto j : c.topic_columns) {
        c.topic_names.push_back(m.topics[j].label());
    }
    c.traditional_names = ActivityFeatures::feature_names();

    const auto prefs = student_topic_preferences(events, m, options.cap_seconds);
    const auto activity = activity_features(events, options.cap_seconds);

    std::set<std::string> users;
    for (const auto& [u, f] : activity) users.insert(u);
    for (const auto& [u, g] : grades) users.insert(u);

    std::vector<const Vector*> topic_rows;
    std::vector<Vector> trad_rows;
    std::size_t no_grade = 0, no_events = 0, no_time = 0;
    for (const auto& u : users) {
        const auto g = grades.find(u);
        const auto p = prefs.find(u);
        const auto a = activity.find(u);
        if (g == grades.end()) {
            spdlog::warn("student \"{}\" has no grade; excluded", u);
            ++no_grade;
        } else if (a == activity.end()) {
            spdlog::debug("student \"{}\" has no events; excluded", u);
            ++no_events;
        } else if (p == prefs.end()) {
            spdlog::debug("student \"{}\" has no reading time on any scored material; excluded", u);
            ++no_time;
        } else {
            c.users.push_back(u);
            c.labels.push_back(is_at_risk(g->second) ? 1 : 0);
            topic_rows.push_back(&p->second);
            trad_rows.push_back(a->second.as_vector());
            continue;
        }
        c.excluded.push_back(u);
    }
    if (no_events) spdlog::warn("{} graded students have no events; excluded", no_events);
    if (no_time) spdlog::warn("{} students have no reading time on any scored material; excluded", no_time);

    const auto n = static_cast<Eigen::Index>(c.users.size());
    c.topic_features.resize(n, static_cast<Eigen::Index>(c.topic_columns.size()));
    c.traditional_features.resize(n, static_cast<Eigen::Index>(c.traditional_names.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& full = *topic_rows[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < c.topic_columns.size(); ++k) {
            c.topic_features(i, static_cast<Eigen::Index>(k)) = full(static_cast<Eigen::Index>(c.topic_columns[k]));
        }
        c.traditional_features.row(i) = trad_rows[static_cast<std::size_t>(i)].transpose();
    }
    return c;
}

}  // namespace lector
