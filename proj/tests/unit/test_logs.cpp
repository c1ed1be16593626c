#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "lector/logs.hpp"

using namespace lector;

namespace {

// The nine rows of the BookRoll example table, dated on an arbitrary day.
const char* kBookRoll =
    "user_id,material_id,operation,page,event_time\n"
    "A20XX_U1,A20XX_C1,PREV,5,2024-01-10T15:12:09\n"
    "A20XX_U1,A20XX_C1,NEXT,4,2024-01-10T15:12:52\n"
    "A20XX_U2,A20XX_C1,JUMP,2,2024-01-10T15:13:06\n"
    "A20XX_U1,A20XX_C1,NEXT,5,2024-01-10T15:13:25\n"
    "A20XX_U1,A20XX_C1,MARKER,6,2024-01-10T15:13:37\n"
    "A20XX_U1,A20XX_C1,NEXT,6,2024-01-10T15:13:55\n"
    "A20XX_U2,A20XX_C1,PREV,9,2024-01-10T15:14:11\n"
    "A20XX_U2,A20XX_C1,PREV,8,2024-01-10T15:14:41\n"
    "A20XX_U2,A20XX_C1,PREV,7,2024-01-10T15:15:13\n";

std::vector<ReadingEvent> parse(const std::string& text) {
    std::istringstream in(text);
    return parse_events(in, "events.csv");
}

const PageTimes& times_of(const std::vector<PageTimes>& all, const std::string& user) {
    for (const auto& t : all)
        if (t.user_id == user) return t;
    FAIL("no user " << user);
    return all.front();
}

ReadingEvent ev(std::string user, Operation op, int page, const std::string& time, std::string material = "m") {
    return {std::move(user), std::move(material), op, page, parse_timestamp(time)};
}

}  // namespace

TEST_CASE("BookRoll rows load and sort by user") {
    const auto events = parse(kBookRoll);
    REQUIRE(events.size() == 9);
    for (int i = 0; i < 5; ++i) CHECK(events[static_cast<std::size_t>(i)].user_id == "A20XX_U1");
    for (int i = 5; i < 9; ++i) CHECK(events[static_cast<std::size_t>(i)].user_id == "A20XX_U2");
    CHECK(events[3].operation == Operation::AddMarker);
    CHECK(events[5].operation == Operation::PageJump);
    CHECK(events[0].page == 5);
    CHECK(format_timestamp(events[0].time) == "2024-01-10T15:12:09");
}

TEST_CASE("event file errors") {
    CHECK(parse("user_id,material_id,operation,page,event_time\n").empty());
    try {
        parse("user_id,material_id,operation,page,event_time\nu,m,OPEN,1,2024-01-01T00:00:00\nu,m,FOO,1,2024-01-01T00:00:01\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("FOO") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("user_id,material_id,operation,page,event_time\nu,m,OPEN,1,yesterday\n"), ParseError);
    CHECK_THROWS_AS(parse("user_id,material_id,operation,page,event_time\nu,m,OPEN,0,2024-01-01T00:00:00\n"), ParseError);
    CHECK_THROWS_AS(parse("user_id,material_id,operation,page,event_time\nu,m,OPEN,1\n"), ParseError);
    CHECK_THROWS_AS(parse("wrong,header\n"), ParseError);
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse_timestamp("2024-02-30T00:00:00"), DomainError);
    CHECK(parse_timestamp("2024-01-10 15:12:09") == parse_timestamp("2024-01-10T15:12:09"));
}

TEST_CASE("operation names") {
    for (std::size_t i = 0; i < kOperationCount; ++i) {
        const auto op = static_cast<Operation>(i);
        CHECK(parse_operation(operation_name(op)) == op);
    }
    CHECK(parse_operation("JUMP") == Operation::PageJump);
    CHECK(parse_operation("MARKER") == Operation::AddMarker);
    CHECK(ActivityFeatures::feature_names().size() == kOperationCount + 1);
    CHECK(ActivityFeatures::feature_names().back() == "READ_TIME");
}

TEST_CASE("events CSV round trip") {
    const auto events = parse(kBookRoll);
    const auto again = parse(events_csv(events));
    REQUIRE(again.size() == events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        CHECK(again[i].user_id == events[i].user_id);
        CHECK(again[i].operation == events[i].operation);
        CHECK(again[i].page == events[i].page);
        CHECK(again[i].time == events[i].time);
    }
}

TEST_CASE("reading time of the BookRoll example") {
    const auto times = sessionize_reading_time(parse(kBookRoll));
    const auto& u1 = times_of(times, "A20XX_U1");
    CHECK(u1.seconds.at(5) == 55.0);
    CHECK(u1.seconds.at(4) == 33.0);
    CHECK(u1.seconds.at(6) == 18.0);
    CHECK(u1.total() == 106.0);
    const auto& u2 = times_of(times, "A20XX_U2");
    CHECK(u2.seconds.at(2) == 65.0);
    CHECK(u2.seconds.at(9) == 30.0);
    CHECK(u2.seconds.at(8) == 32.0);
    CHECK(u2.total() == 127.0);
}

TEST_CASE("activity features of the BookRoll example") {
    const auto f = activity_features(parse(kBookRoll));
    const auto& u1 = f.at("A20XX_U1");
    CHECK(u1.count(Operation::Next) == 3);
    CHECK(u1.count(Operation::Prev) == 1);
    CHECK(u1.count(Operation::AddMarker) == 1);
    CHECK(u1.count(Operation::Open) == 0);
    CHECK(u1.read_time == 106.0);
    const auto v = u1.as_vector();
    CHECK(v.size() == 15);
    CHECK(v(static_cast<Eigen::Index>(Operation::Next)) == 3.0);
    CHECK(v(14) == 106.0);
    CHECK(f.count("nobody") == 0);
}

TEST_CASE("reading time edge cases") {
    CHECK(sessionize_reading_time({ev("u", Operation::Open, 1, "2024-01-01T10:00:00")})[0].total() == 0.0);

    const std::vector<ReadingEvent> gap = {ev("u", Operation::Open, 1, "2024-01-01T10:00:00"),
                                           ev("u", Operation::Next, 2, "2024-01-01T12:00:00")};
    CHECK(sessionize_reading_time(gap)[0].seconds.at(1) == 600.0);
    CHECK(sessionize_reading_time(gap, 30.0)[0].seconds.at(1) == 30.0);
    CHECK_THROWS_AS(sessionize_reading_time(gap, 0.0), DomainError);

    std::vector<ReadingEvent> pair = {ev("u", Operation::Open, 1, "2024-01-01T10:00:00"),
                                      ev("u", Operation::Close, 1, "2024-01-01T10:00:30"),
                                      ev("u", Operation::Open, 1, "2024-01-01T10:05:00")};
    const auto f = activity_features(pair);
    CHECK(f.at("u").count(Operation::Open) == 2);
    CHECK(f.at("u").count(Operation::Close) == 1);
    CHECK(f.at("u").read_time == 30.0);

    // materials are separate sessions
    std::vector<ReadingEvent> two = {ev("u", Operation::Open, 1, "2024-01-01T10:00:00", "a"),
                                     ev("u", Operation::Open, 1, "2024-01-01T10:00:20", "b"),
                                     ev("u", Operation::Next, 2, "2024-01-01T10:00:50", "a")};
    sort_events(two);
    const auto t = sessionize_reading_time(two);
    REQUIRE(t.size() == 2);
    CHECK(t[0].material_id == "a");
    CHECK(t[0].total() == 50.0);
    CHECK(t[1].total() == 0.0);
}

TEST_CASE("reading time is bounded by the clamp") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> gap(0, 2000);
        std::uniform_int_distribution<int> page(1, 10);
        std::vector<ReadingEvent> events;
        auto t = parse_timestamp("2024-01-01T09:00:00");
        const int n = 2 + static_cast<int>(seed);
        for (int i = 0; i < n; ++i) {
            t += std::chrono::seconds(gap(rng));
            events.push_back({"u", "m", i % 7 == 6 ? Operation::Close : Operation::Next, page(rng), t});
        }
        const auto f = activity_features(events, 300.0);
        CHECK(f.at("u").read_time <= (n - 1) * 300.0);
        CHECK(f.at("u").read_time >= 0.0);
    }
}

TEST_CASE("slide preferences") {
    const auto p = slide_preferences({{1, 30.0}, {2, 70.0}}, 2, "u");
    CHECK(p.basis == Basis::Slides);
    CHECK(p.values(0) == doctest::Approx(0.3));
    CHECK(p.values(1) == doctest::Approx(0.7));
    const auto scaled = slide_preferences({{1, 150.0}, {2, 350.0}}, 2);
    CHECK((scaled.values - p.values).cwiseAbs().maxCoeff() < 1e-15);
    const auto one = slide_preferences({{1, 12.0}}, 4);
    CHECK(one.values == Vector::Unit(4, 0));
    const auto dropped = slide_preferences({{1, 10.0}, {9, 40.0}}, 2);
    CHECK(dropped.values(0) == 1.0);
    CHECK_THROWS_WITH_AS(slide_preferences({{1, 0.0}}, 2), doctest::Contains("no reading time"), Error);
    CHECK_THROWS_WITH_AS(slide_preferences({{5, 10.0}}, 2), doctest::Contains("no reading time"), Error);
    CHECK_THROWS_AS(slide_preferences({{1, 1.0}}, 0), DomainError);
}

TEST_CASE("topic preferences are the product with M") {
    PreferenceVector half{"u", Basis::Slides, Vector::Constant(2, 0.5)};
    const auto out = topic_preferences(half, Matrix(Matrix::Identity(2, 2) * 2.0));
    CHECK(out.basis == Basis::Topics);
    CHECK(out.values(0) == 1.0);
    CHECK(out.values(1) == 1.0);
    CHECK(topic_preferences(half, Matrix::Identity(2, 2)).values == half.values);
    CHECK(topic_preferences(half, Matrix::Zero(2, 5)).values.isZero());
    CHECK_THROWS_AS(topic_preferences(half, Matrix::Zero(3, 5)), DimensionError);
    CHECK_THROWS_AS(topic_preferences(out, Matrix::Zero(2, 2)), DomainError);

    std::mt19937_64 rng(3);
    const Matrix m = fixtures::gaussian(rng, 4, 6).cwiseAbs();
    for (double c : {0.5, 2.0, 7.0, 1024.0}) {
        std::map<int, double> t = {{1, 3.0}, {2, 5.0}, {4, 11.0}};
        std::map<int, double> ct;
        for (auto [k, v] : t) ct[k] = c * v;
        const auto a = topic_preferences(slide_preferences(t, 4), m);
        const auto b = topic_preferences(slide_preferences(ct, 4), m);
        CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("schedule split is a half-open partition") {
    const auto schedule = parse_schedule(
        R"([{"start":"2024-01-01T09:00:00","end":"2024-01-01T10:30:00"},{"start":"2024-01-08T09:00:00","end":"2024-01-08T10:30:00"}])");
    REQUIRE(schedule.size() == 2);
    std::vector<ReadingEvent> events = {ev("u", Operation::Open, 1, "2024-01-01T08:59:59"),
                                        ev("u", Operation::Next, 2, "2024-01-01T09:00:00"),
                                        ev("u", Operation::Next, 3, "2024-01-01T10:29:59"),
                                        ev("u", Operation::Next, 4, "2024-01-01T10:30:00"),
                                        ev("v", Operation::Open, 1, "2024-01-08T09:15:00")};
    const auto [in, out] = split_in_out_class(events, schedule);
    CHECK(in.size() == 3);
    CHECK(out.size() == 2);
    CHECK(out[0].page == 1);
    CHECK(out[1].page == 4);

    CHECK(split_in_out_class(events, {}).second.size() == events.size());
    const auto all_in = split_in_out_class({events[1], events[2]}, schedule);
    CHECK(all_in.second.empty());

    const auto overlap = parse_schedule(
        R"([{"start":"2024-01-01T09:00:00","end":"2024-01-01T10:30:00"},{"start":"2024-01-01T10:00:00","end":"2024-01-01T11:00:00"}])");
    CHECK_THROWS_AS(split_in_out_class(events, overlap), DomainError);
    CHECK_THROWS_AS(parse_schedule("{}"), ParseError);
    CHECK_THROWS_AS(parse_schedule(R"([{"start":"2024-01-01T10:00:00","end":"2024-01-01T09:00:00"}])"), ParseError);
}

TEST_CASE("split preserves every event exactly once") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> minute(0, 60 * 24 * 3);
    const auto base = parse_timestamp("2024-01-01T00:00:00");
    std::vector<ReadingEvent> events;
    for (int i = 0; i < 300; ++i)
        events.push_back({"u" + std::to_string(i % 5), "m", Operation::Next, i + 1, base + std::chrono::minutes(minute(rng))});
    sort_events(events);
    const auto schedule = parse_schedule(
        R"([{"start":"2024-01-01T09:00:00","end":"2024-01-01T10:30:00"},{"start":"2024-01-02T09:00:00","end":"2024-01-02T10:30:00"}])");
    const auto [in, out] = split_in_out_class(events, schedule);
    CHECK(in.size() + out.size() == events.size());
    std::set<int> pages;
    for (const auto& e : in) pages.insert(e.page);
    for (const auto& e : out) CHECK(pages.insert(e.page).second);
    CHECK(pages.size() == events.size());
}
