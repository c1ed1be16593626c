#include "lector/logs.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace lector {

namespace {

constexpr std::array<std::string_view, kOperationCount> kOperationNames = {
    "OPEN",         "CLOSE",         "SEARCH",       "NEXT",       "PREV",
    "PAGE_JUMP",    "ADD_BOOKMARK",  "BOOKMARK_JUMP", "DEL_BOOKMARK", "ADD_MARKER",
    "DEL_MARKER",   "ADD_MEMO",      "DEL_MEMO",     "CHANGE_MEMO",
};

constexpr std::string_view kEventsHeader = "user_id,material_id,operation,page,event_time";

int parse_int(std::string_view s, const char* what) {
    int v = 0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw DomainError(std::string("invalid ") + what + " \"" + std::string(s) + "\"");
    }
    return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

}  // namespace

std::string_view operation_name(Operation op) {
    return kOperationNames[static_cast<std::size_t>(op)];
}

Operation parse_operation(std::string_view name) {
    for (std::size_t i = 0; i < kOperationCount; ++i) {
        if (kOperationNames[i] == name) {
            return static_cast<Operation>(i);
        }
    }
    if (name == "JUMP") {
        return Operation::PageJump;
    }
    if (name == "MARKER") {
        return Operation::AddMarker;
    }
    throw DomainError("unknown operation \"" + std::string(name) + "\"");
}

Timestamp parse_timestamp(std::string_view text) {
    // YYYY-MM-DDTHH:MM:SS
    if (text.size() != 19 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
        text[13] != ':' || text[16] != ':') {
        throw DomainError("unparseable timestamp \"" + std::string(text) + "\"");
    }
    const int y = parse_int(text.substr(0, 4), "year");
    const int mo = parse_int(text.substr(5, 2), "month");
    const int d = parse_int(text.substr(8, 2), "day");
    const int h = parse_int(text.substr(11, 2), "hour");
    const int mi = parse_int(text.substr(14, 2), "minute");
    const int s = parse_int(text.substr(17, 2), "second");
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
        throw DomainError("invalid timestamp \"" + std::string(text) + "\"");
    }
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    const auto day_start = floor<days>(t);
    const year_month_day ymd{day_start};
    const hh_mm_ss hms{t - day_start};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

void sort_events(std::vector<ReadingEvent>& events) {
    std::stable_sort(events.begin(), events.end(), [](const ReadingEvent& a, const ReadingEvent& b) {
        if (a.user_id != b.user_id) {
            return a.user_id < b.user_id;
        }
        if (a.material_id != b.material_id) {
            return a.material_id < b.material_id;
        }
        return a.time < b.time;
    });
}

std::vector<ReadingEvent> parse_events(std::istream& in, const std::string& source) {
    std::vector<ReadingEvent> events;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (!header) {
            if (line != kEventsHeader) {
                throw ParseError(source, line_no, "expected header \"" + std::string(kEventsHeader) + "\"");
            }
            header = true;
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() != 5) {
            throw ParseError(source, line_no, "expected 5 fields, found " + std::to_string(fields.size()));
        }
        ReadingEvent e;
        e.user_id = std::string(fields[0]);
        e.material_id = std::string(fields[1]);
        try {
            e.operation = parse_operation(fields[2]);
            e.page = parse_int(fields[3], "page");
            e.time = parse_timestamp(fields[4]);
        } catch (const DomainError& err) {
            throw ParseError(source, line_no, err.what());
        }
        if (e.page < 1) {
            throw ParseError(source, line_no, "page must be >= 1");
        }
        if (e.user_id.empty() || e.material_id.empty()) {
            throw ParseError(source, line_no, "empty user_id or material_id");
        }
        events.push_back(std::move(e));
    }
    if (!header) {
        throw ParseError(source, 0, "missing header");
    }
    sort_events(events);
    return events;
}

std::vector<ReadingEvent> load_events(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw Error("cannot open events file " + file.string());
    }
    return parse_events(in, file.string());
}

std::string events_csv(const std::vector<ReadingEvent>& events) {
    std::string out(kEventsHeader);
    out += '\n';
    for (const auto& e : events) {
        out += e.user_id;
        out += ',';
        out += e.material_id;
        out += ',';
        out += operation_name(e.operation);
        out += ',';
        out += std::to_string(e.page);
        out += ',';
        out += format_timestamp(e.time);
        out += '\n';
    }
    return out;
}

double PageTimes::total() const {
    double t = 0.0;
    for (const auto& [page, s] : seconds) {
        t += s;
    }
    return t;
}

std::vector<PageTimes> sessionize_reading_time(const std::vector<ReadingEvent>& events, double cap_seconds) {
    if (!(cap_seconds > 0.0)) {
        throw DomainError("cap_seconds must be positive");
    }
    std::vector<PageTimes> out;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (out.empty() || out.back().user_id != e.user_id || out.back().material_id != e.material_id) {
            out.push_back({e.user_id, e.material_id, {}});
        }
        auto& times = out.back().seconds;
        times.try_emplace(e.page, 0.0);
        if (i + 1 == events.size()) {
            break;
        }
        const auto& next = events[i + 1];
        if (next.user_id != e.user_id || next.material_id != e.material_id || e.operation == Operation::Close) {
            continue;
        }
        const double gap = static_cast<double>((next.time - e.time).count());
        times[e.page] += std::clamp(gap, 0.0, cap_seconds);
    }
    return out;
}

Vector ActivityFeatures::as_vector() const {
    Vector v(static_cast<Eigen::Index>(kOperationCount + 1));
    for (std::size_t i = 0; i < kOperationCount; ++i) {
        v(static_cast<Eigen::Index>(i)) = static_cast<double>(counts[i]);
    }
    v(static_cast<Eigen::Index>(kOperationCount)) = read_time;
    return v;
}

std::vector<std::string> ActivityFeatures::feature_names() {
    std::vector<std::string> names(kOperationNames.begin(), kOperationNames.end());
    names.emplace_back("READ_TIME");
    return names;
}

std::map<std::string, ActivityFeatures> activity_features(const std::vector<ReadingEvent>& events,
                                                          double cap_seconds) {
    std::map<std::string, ActivityFeatures> out;
    for (const auto& e : events) {
        ++out[e.user_id].counts[static_cast<std::size_t>(e.operation)];
    }
    for (const auto& pt : sessionize_reading_time(events, cap_seconds)) {
        out[pt.user_id].read_time += pt.total();
    }
    return out;
}

PreferenceVector slide_preferences(const std::map<int, double>& seconds_by_page, std::size_t slide_count,
                                   std::string user_id) {
    if (slide_count < 1) {
        throw DomainError("slide_count must be at least 1");
    }
    PreferenceVector pref{std::move(user_id), Basis::Slides, Vector::Zero(static_cast<Eigen::Index>(slide_count))};
    for (const auto& [page, secs] : seconds_by_page) {
        if (page < 1 || static_cast<std::size_t>(page) > slide_count) {
            if (secs > 0.0) {
                spdlog::warn("user {}: page {} beyond {} slides dropped", pref.user_id, page, slide_count);
            }
            continue;
        }
        pref.values(page - 1) += secs;
    }
    const double total = pref.values.sum();
    if (!(total > 0.0)) {
        throw Error("no reading time for user \"" + pref.user_id + "\"");
    }
    pref.values /= total;
    return pref;
}

PreferenceVector topic_preferences(const PreferenceVector& slides, const Matrix& rows) {
    if (slides.basis != Basis::Slides) {
        throw DomainError("topic_preferences expects a slide preference vector");
    }
    if (slides.values.size() != rows.rows()) {
        throw DimensionError("preference length " + std::to_string(slides.values.size()) + " vs " +
                             std::to_string(rows.rows()) + " matrix rows");
    }
    return {slides.user_id, Basis::Topics, rows.transpose() * slides.values};
}

PreferenceVector topic_preferences(const PreferenceVector& slides, const SlideTopicMatrix& m) {
    return topic_preferences(slides, m.values);
}

std::vector<TimeWindow> parse_schedule(std::string_view json, const std::string& source) {
    std::vector<TimeWindow> out;
    try {
        const auto j = nlohmann::json::parse(json);
        if (!j.is_array()) {
            throw ParseError(source, 0, "schedule must be a JSON list");
        }
        for (const auto& w : j) {
            TimeWindow win{parse_timestamp(w.at("start").get<std::string>()),
                           parse_timestamp(w.at("end").get<std::string>())};
            if (!(win.start < win.end)) {
                throw ParseError(source, 0, "schedule window ends before it starts");
            }
            out.push_back(win);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(source, 0, e.what());
    } catch (const DomainError& e) {
        throw ParseError(source, 0, e.what());
    }
    return out;
}

std::vector<TimeWindow> read_schedule(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw Error("cannot open schedule " + file.string());
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_schedule(text, file.string());
}

std::pair<std::vector<ReadingEvent>, std::vector<ReadingEvent>> split_in_out_class(
    const std::vector<ReadingEvent>& events, const std::vector<TimeWindow>& schedule) {
    auto sorted = schedule;
    std::sort(sorted.begin(), sorted.end(), [](const TimeWindow& a, const TimeWindow& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].start < sorted[i - 1].end) {
            throw DomainError("schedule windows overlap");
        }
    }
    std::pair<std::vector<ReadingEvent>, std::vector<ReadingEvent>> out;
    for (const auto& e : events) {
        const bool inside = std::any_of(sorted.begin(), sorted.end(),
                                        [&](const TimeWindow& w) { return w.start <= e.time && e.time < w.end; });
        (inside ? out.first : out.second).push_back(e);
    }
    return out;
}

}  // namespace lector
