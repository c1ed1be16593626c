#include "lector/keyeval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace lector {

namespace {

std::string lower_ascii(std::string s) {
    for (auto& c : s) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return s;
}

std::vector<std::size_t> rank_indices(const Vector& scores, const std::vector<TopicLabel>& topics) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(scores.size()));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const double sa = scores(static_cast<Eigen::Index>(a));
        const double sb = scores(static_cast<Eigen::Index>(b));
        if (sa != sb) {
            return sa > sb;
        }
        return topics[a].words < topics[b].words;
    });
    return idx;
}

nlohmann::ordered_json prf_json(const Prf& p) {
    return {{"P", p.precision}, {"R", p.recall}, {"F1", p.f1}};
}

}  // namespace

Phrase normalize_phrase(std::string_view text) {
    Phrase out;
    std::istringstream in{std::string(text)};
    std::string w;
    while (in >> w) {
        out.push_back(lower_ascii(w));
    }
    return out;
}

Phrase normalize_phrase(const std::vector<std::string>& words) {
    Phrase out;
    out.reserve(words.size());
    for (const auto& w : words) {
        out.push_back(lower_ascii(w));
    }
    return out;
}

bool GoldKeyphrases::contains(const Phrase& p) const {
    return std::binary_search(phrases.begin(), phrases.end(), p);
}

GoldKeyphrases make_gold(const std::vector<std::string>& lines) {
    std::set<Phrase> uniq;
    for (const auto& l : lines) {
        auto p = normalize_phrase(l);
        if (!p.empty()) {
            uniq.insert(std::move(p));
        }
    }
    return {{uniq.begin(), uniq.end()}};
}

GoldKeyphrases parse_gold(std::istream& in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        lines.push_back(line);
    }
    return make_gold(lines);
}

GoldKeyphrases read_gold(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw Error("cannot open gold file " + file.string());
    }
    return parse_gold(in);
}

Vector keyphrase_scores(const SlideTopicMatrix& m) {
    if (!m.values.allFinite()) {
        throw DomainError("matrix contains non-finite entries");
    }
    return m.values.colwise().sum().transpose();
}

Ranking topn(const Vector& scores, const std::vector<TopicLabel>& topics, std::size_t n) {
    if (n < 1) {
        throw DomainError("n must be at least 1");
    }
    if (static_cast<std::size_t>(scores.size()) != topics.size()) {
        throw DimensionError("score vector length differs from topic count");
    }
    Ranking r;
    r.topics = rank_indices(scores, topics);
    if (n > r.topics.size()) {
        r.truncated = true;
    } else {
        r.topics.resize(n);
    }
    return r;
}

double f1_score(double precision, double recall) {
    return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

Prf prf(const std::vector<Phrase>& predicted, const GoldKeyphrases& gold) {
    if (gold.phrases.empty()) {
        throw DomainError("gold keyphrase set is empty");
    }
    std::set<Phrase> pred(predicted.begin(), predicted.end());
    std::size_t tp = 0;
    for (const auto& p : pred) {
        tp += gold.contains(p) ? 1 : 0;
    }
    Prf out;
    const double tpd = static_cast<double>(tp);
    out.precision = pred.empty() ? 0.0 : 100.0 * tpd / static_cast<double>(pred.size());
    out.recall = 100.0 * tpd / static_cast<double>(gold.size());
    out.f1 = f1_score(out.precision, out.recall);
    return out;
}

EvalReport evaluate_at_n(const SlideTopicMatrix& m, const GoldKeyphrases& gold, const std::vector<std::size_t>& n_list,
                         std::size_t mean_max) {
    if (gold.phrases.empty()) {
        throw DomainError("gold keyphrase set is empty");
    }
    EvalReport report;
    report.model = std::string(model_name(m.model));
    const auto scores = keyphrase_scores(m);
    const auto order = rank_indices(scores, m.topics);

    // Prefix evaluation: the top-n set is the first n entries of the full ranking.
    auto at = [&](std::size_t n) {
        std::vector<Phrase> predicted;
        const auto upto = std::min(n, order.size());
        predicted.reserve(upto);
        for (std::size_t i = 0; i < upto; ++i) {
            predicted.push_back(normalize_phrase(m.topics[order[i]].words));
        }
        return prf(predicted, gold);
    };

    for (auto n : n_list) {
        if (n < 1) {
            throw DomainError("n must be at least 1");
        }
        report.per_n.push_back({n, at(n)});
    }

    report.mean_upto = std::min(mean_max, order.size());
    report.mean_truncated = report.mean_upto < mean_max;
    if (report.mean_truncated) {
        spdlog::warn("only {} topics; mean row covers n = 1..{}", order.size(), report.mean_upto);
    }
    for (std::size_t n = 1; n <= report.mean_upto; ++n) {
        const auto s = at(n);
        report.mean.precision += s.precision;
        report.mean.recall += s.recall;
        report.mean.f1 += s.f1;
        if (n == 1 || s.f1 > report.best.scores.f1) {
            report.best = {n, s};
        }
    }
    if (report.mean_upto > 0) {
        const double k = static_cast<double>(report.mean_upto);
        report.mean.precision /= k;
        report.mean.recall /= k;
        report.mean.f1 /= k;
    }
    return report;
}

std::vector<std::vector<std::size_t>> topk_per_slide(const SlideTopicMatrix& m, std::size_t k) {
    if (k < 1) {
        throw DomainError("k must be at least 1");
    }
    std::vector<std::vector<std::size_t>> out;
    out.reserve(static_cast<std::size_t>(m.values.rows()));
    for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
        auto idx = rank_indices(m.values.row(r).transpose(), m.topics);
        if (idx.size() > k) {
            idx.resize(k);
        }
        out.push_back(std::move(idx));
    }
    return out;
}

std::string report_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["model"] = report.model;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : report.per_n) {
        auto row = prf_json(r.scores);
        row["n"] = r.n;
        rows.push_back(row);
    }
    j["per_n"] = rows;
    auto best = prf_json(report.best.scores);
    best["n"] = report.best.n;
    j["best"] = best;
    j["mean"] = prf_json(report.mean);
    j["mean_upto"] = report.mean_upto;
    j["mean_truncated"] = report.mean_truncated;
    if (report.model == "attnlite") {
        j["note"] = "attnlite is a simplified approximation of AttentionRank, not a reproduction";
    }
    return j.dump(2) + "\n";
}

std::string report_table(const EvalReport& report) {
    std::ostringstream out;
    char buf[128];
    out << "model: " << report.model << "\n";
    out << "  n      P       R      F1\n";
    auto line = [&](const std::string& label, const Prf& p) {
        std::snprintf(buf, sizeof buf, "%5s %7.2f %7.2f %7.2f\n", label.c_str(), p.precision, p.recall, p.f1);
        out << buf;
    };
    for (const auto& r : report.per_n) {
        line(std::to_string(r.n), r.scores);
    }
    line("Best", report.best.scores);
    line("Mean", report.mean);
    out << "  (best at n=" << report.best.n << "; mean over n=1.." << report.mean_upto << ")\n";
    if (report.model == "attnlite") {
        out << "  note: attnlite is a simplified approximation of AttentionRank\n";
    }
    return out.str();
}

}  // namespace lector
