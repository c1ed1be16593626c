#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lector/error.hpp"
#include "lector/scoring.hpp"

namespace lector {

/// E-reader operations. The first fourteen are the traditional activity
/// features; the order here is the feature order.
enum class Operation {
    Open,
    Close,
    Search,
    Next,
    Prev,
    PageJump,
    AddBookmark,
    BookmarkJump,
    DelBookmark,
    AddMarker,
    DelMarker,
    AddMemo,
    DelMemo,
    ChangeMemo,
};

inline constexpr std::size_t kOperationCount = 14;

std::string_view operation_name(Operation op);
/// Accepts the canonical names plus the short forms JUMP (PAGE_JUMP) and
/// MARKER (ADD_MARKER) that appear in raw exports.
Operation parse_operation(std::string_view name);

using Timestamp = std::chrono::sys_seconds;

/// `YYYY-MM-DDTHH:MM:SS` (a space may replace the T). Local time, no zone.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

struct ReadingEvent {
    std::string user_id;
    std::string material_id;
    Operation operation = Operation::Open;
    int page = 1;
    Timestamp time{};
};

/// Stable sort by (user, material, time).
void sort_events(std::vector<ReadingEvent>& events);

/// Parses `user_id,material_id,operation,page,event_time` CSV and sorts.
std::vector<ReadingEvent> parse_events(std::istream& in, const std::string& source = "<events>");
std::vector<ReadingEvent> load_events(const std::filesystem::path& file);
std::string events_csv(const std::vector<ReadingEvent>& events);

inline constexpr double kDefaultCapSeconds = 600.0;

/// Seconds spent per page by one user on one material.
struct PageTimes {
    std::string user_id;
    std::string material_id;
    std::map<int, double> seconds;

    double total() const;
};

/// The gap between consecutive events of the same (user, material) is
/// attributed to the earlier event's page and clamped to cap_seconds. A
/// CLOSE event attributes nothing, nor does the last event. Expects sorted
/// events.
std::vector<PageTimes> sessionize_reading_time(const std::vector<ReadingEvent>& events,
                                               double cap_seconds = kDefaultCapSeconds);

struct ActivityFeatures {
    std::array<std::int64_t, kOperationCount> counts{};
    double read_time = 0.0;

    std::int64_t count(Operation op) const { return counts[static_cast<std::size_t>(op)]; }
    /// The fourteen counts followed by READ_TIME.
    Vector as_vector() const;
    static std::vector<std::string> feature_names();
};

/// Per-user counts and total reading time across materials.
std::map<std::string, ActivityFeatures> activity_features(const std::vector<ReadingEvent>& events,
                                                          double cap_seconds = kDefaultCapSeconds);

enum class Basis { Slides, Topics };

struct PreferenceVector {
    std::string user_id;
    Basis basis = Basis::Slides;
    Vector values;
};

/// l1-normalised reading time per slide (page n is slide n-1). Pages past
/// slide_count are dropped with a warning. Throws Error("no reading time")
/// when nothing remains.
PreferenceVector slide_preferences(const std::map<int, double>& seconds_by_page, std::size_t slide_count,
                                   std::string user_id = {});

/// pref * M, where `rows` are the matrix rows of the material the slide
/// preferences belong to.
PreferenceVector topic_preferences(const PreferenceVector& slides, const Matrix& rows);
PreferenceVector topic_preferences(const PreferenceVector& slides, const SlideTopicMatrix& m);

/// Half-open [start, end).
struct TimeWindow {
    Timestamp start{};
    Timestamp end{};
};

std::vector<TimeWindow> parse_schedule(std::string_view json, const std::string& source = "<schedule>");
std::vector<TimeWindow> read_schedule(const std::filesystem::path& file);

/// (in-class, out-of-class). Throws DomainError for overlapping windows.
std::pair<std::vector<ReadingEvent>, std::vector<ReadingEvent>> split_in_out_class(
    const std::vector<ReadingEvent>& events, const std::vector<TimeWindow>& schedule);

}  // namespace lector
