#include <doctest.h>

#include "fixtures.hpp"
#include "lector/cohort.hpp"

using namespace lector;

namespace {

// Two decks of two slides; topic "a" lives on each deck's first slide, "b" on the second.
SlideTopicMatrix two_deck_matrix() {
    SlideTopicMatrix m;
    m.deck_ids = {"d1", "d2"};
    m.deck_slide_counts = {2, 2};
    m.slide_count = 4;
    m.topics = {{0, {"a"}}, {1, {"b"}}, {2, {"c"}}};
    m.values.resize(4, 3);
    m.values << 1, 0, 0.1, 0, 1, 0.1, 1, 0, 0.1, 0, 1, 0.1;
    return m;
}

ReadingEvent ev(std::string user, std::string material, Operation op, int page, const std::string& time) {
    return {std::move(user), std::move(material), op, page, parse_timestamp(time)};
}

}  // namespace

TEST_CASE("top topic columns") {
    const auto m = two_deck_matrix();
    CHECK(top_topic_columns(m, 0) == std::vector<std::size_t>{0, 1, 2});
    CHECK(top_topic_columns(m, 2) == std::vector<std::size_t>{0, 1});
    CHECK(top_topic_columns(m, 9).size() == 3);
}

TEST_CASE("preferences average over materials") {
    const auto m = two_deck_matrix();
    std::vector<ReadingEvent> events = {
        ev("u1", "d1", Operation::Open, 1, "2024-01-01T10:00:00"),
        ev("u1", "d1", Operation::Next, 2, "2024-01-01T10:00:30"),
        ev("u1", "d1", Operation::Close, 2, "2024-01-01T10:01:40"),
        ev("u1", "d2", Operation::Open, 2, "2024-01-02T10:00:00"),
        ev("u1", "d2", Operation::Close, 2, "2024-01-02T10:00:10"),
        ev("u1", "zz", Operation::Open, 1, "2024-01-02T11:00:00"),
        ev("u1", "zz", Operation::Close, 1, "2024-01-02T11:00:10"),
    };
    sort_events(events);
    const auto prefs = student_topic_preferences(events, m);
    REQUIRE(prefs.count("u1") == 1);
    // d1: [0.3, 0.7] -> (0.3, 0.7, 0.1); d2: [0, 1] -> (0, 1, 0.1)
    const auto& p = prefs.at("u1");
    CHECK(p(0) == doctest::Approx(0.15));
    CHECK(p(1) == doctest::Approx(0.85));
    CHECK(p(2) == doctest::Approx(0.1));
}

TEST_CASE("cohort membership and features") {
    const auto m = two_deck_matrix();
    std::vector<ReadingEvent> events = {
        ev("u1", "d1", Operation::Open, 1, "2024-01-01T10:00:00"),
        ev("u1", "d1", Operation::Next, 2, "2024-01-01T10:00:30"),
        ev("u1", "d1", Operation::Close, 2, "2024-01-01T10:01:40"),
        ev("u2", "d1", Operation::Open, 2, "2024-01-01T10:00:00"),
        ev("u2", "d1", Operation::Close, 2, "2024-01-01T10:00:20"),
        ev("u3", "zz", Operation::Open, 1, "2024-01-01T10:00:00"),
        ev("u3", "zz", Operation::Close, 1, "2024-01-01T10:00:20"),
        ev("u5", "d1", Operation::Open, 1, "2024-01-01T10:00:00"),
        ev("u5", "d1", Operation::Close, 1, "2024-01-01T10:00:20"),
    };
    sort_events(events);
    const std::map<std::string, Grade> grades = {
        {"u1", Grade::A}, {"u2", Grade::F}, {"u3", Grade::B}, {"u4", Grade::D}};
    const auto c = build_cohort(events, m, grades, {2, kDefaultCapSeconds});
    CHECK(c.users == std::vector<std::string>{"u1", "u2"});
    CHECK(c.labels == std::vector<int>{0, 1});
    CHECK(c.at_risk() == 1);
    CHECK(c.excluded == std::vector<std::string>{"u3", "u4", "u5"});
    CHECK(c.topic_names == std::vector<std::string>{"a", "b"});
    REQUIRE(c.topic_features.rows() == 2);
    REQUIRE(c.topic_features.cols() == 2);
    CHECK(c.topic_features(0, 0) == doctest::Approx(0.3));
    CHECK(c.topic_features(1, 1) == doctest::Approx(1.0));
    REQUIRE(c.traditional_features.cols() == 15);
    CHECK(c.traditional_features(0, 14) == 100.0);
    CHECK(c.traditional_features(0, static_cast<Eigen::Index>(Operation::Next)) == 1.0);
    CHECK(c.traditional_names.back() == "READ_TIME");
}
