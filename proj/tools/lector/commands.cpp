#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>

#include <nlohmann/json.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "lector/analytics.hpp"
#include "lector/baselines.hpp"
#include "lector/cohort.hpp"
#include "lector/corpus.hpp"
#include "lector/keyeval.hpp"
#include "lector/logs.hpp"
#include "lector/matrix_io.hpp"
#include "lector/scoring.hpp"
#include "lector/synth.hpp"
#include "lector/tensors.hpp"
#include "manifest.hpp"

namespace lector::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + file.string());
    }
    out << text;
}

void require(const fs::path& p, const char* flag) {
    if (p.empty()) {
        throw Error(std::string("missing required option ") + flag);
    }
}

json optional_path(const fs::path& p) {
    return p.empty() ? json(nullptr) : json(p.generic_string());
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

LectorParams lector_params(const RunConfig& cfg) {
    return {cfg.k, cfg.alpha, cfg.d, cfg.phi};
}

BundleSet load_valid_bundles(const fs::path& dir, const Corpus& corpus) {
    auto bundles = load_bundles(dir, corpus);
    for (const auto& deck : corpus) {
        const auto report = validate_bundle(bundles.at(deck.deck_id), deck);
        if (report.ok()) {
            continue;
        }
        for (std::size_t i = 0; i < report.violations.size() && i < 20; ++i) {
            spdlog::error("{}: {}", deck.deck_id, report.violations[i].message);
        }
        throw Error("tensor bundle for deck \"" + deck.deck_id + "\" failed validation (" +
                    std::to_string(report.violations.size()) + " violations)");
    }
    return bundles;
}

struct Case {
    std::string name;
    std::vector<ReadingEvent> events;
};

std::vector<Case> cases_for(const RunConfig& cfg, std::vector<ReadingEvent> events, Manifest& man) {
    std::vector<Case> cases;
    if (!cfg.schedule.empty()) {
        man.add_input(cfg.schedule);
        auto [in, out] = split_in_out_class(events, read_schedule(cfg.schedule));
        cases.push_back({"all", std::move(events)});
        cases.push_back({"in_class", std::move(in)});
        cases.push_back({"out_class", std::move(out)});
    } else {
        cases.push_back({"all", std::move(events)});
    }
    return cases;
}

json fdr_or_null(std::span<const double> a, std::span<const double> b) {
    try {
        return fdr(a, b);
    } catch (const DomainError&) {
        return nullptr;
    }
}

std::vector<double> column_values(const Matrix& x, Eigen::Index col, const std::vector<int>& labels, int label) {
    std::vector<double> out;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        if (labels[static_cast<std::size_t>(i)] == label) {
            out.push_back(x(i, col));
        }
    }
    return out;
}

json cv_json(const CVResult& r) {
    auto folds = json::array();
    for (const auto& f : r.per_fold) {
        folds.push_back({{"f1", f.f1}, {"auc", f.auc}});
    }
    return {{"f1_mean", r.f1_mean}, {"f1_std", r.f1_std}, {"auc_mean", r.auc_mean}, {"auc_std", r.auc_std},
            {"per_fold", folds}};
}

json tally_json(const ComparisonTally& t) {
    return {{"T>F", t.t_gt_f}, {"F>T", t.f_gt_t}, {"T=F", t.t_eq_f}};
}

}  // namespace

void cmd_score(const RunConfig& cfg) {
    require(cfg.corpus, "--corpus");
    const auto model = parse_model(cfg.model);
    Manifest man("score");
    auto& c = man.config();
    c["corpus"] = cfg.corpus.generic_string();
    c["bundles"] = optional_path(cfg.bundles);
    c["model"] = model_name(model);

    const auto corpus = load_corpus(cfg.corpus);
    man.add_input(cfg.corpus);
    const auto topics = extract_topic_candidates(corpus);
    spdlog::info("{} decks, {} topic candidates", corpus.size(), topics.size());

    SlideTopicMatrix m;
    if (uses_tensors(model)) {
        if (cfg.bundles.empty()) {
            throw Error("model " + std::string(model_name(model)) + " needs tensor bundles (--bundles)");
        }
        const auto bundles = load_valid_bundles(cfg.bundles, corpus);
        man.add_input(cfg.bundles);
        if (model == Model::Lector) {
            c["k"] = cfg.k;
            c["alpha"] = cfg.alpha;
            c["d"] = cfg.d;
            c["phi"] = cfg.phi ? json(*cfg.phi) : json(nullptr);
            m = build_matrix(corpus, bundles, topics, lector_params(cfg));
        } else {
            spdlog::warn("{}", kAttentionLiteCaveat);
            m = attention_lite_matrix(corpus, bundles, topics);
        }
    } else if (model == Model::Tfidf) {
        m = tfidf_matrix(corpus, topics);
    } else if (model == Model::Binary) {
        m = binary_matrix(corpus, topics);
    } else {
        TextRankParams p;
        p.window = cfg.window;
        p.damping = cfg.damping;
        c["window"] = cfg.window;
        c["damping"] = cfg.damping;
        m = textrank_matrix(corpus, topics, p);
        if (m.params.at("converged") == 0.0) {
            spdlog::warn("PageRank did not converge within {} iterations", p.max_iter);
        }
    }

    fs::create_directories(cfg.out);
    const auto file = cfg.out / (std::string(model_name(model)) + ".matrix.json");
    write_matrix(m, file);
    man.add_output(file);
    man.write(cfg.out / (std::string(model_name(model)) + ".score.manifest.json"));
    spdlog::info("wrote {} ({} x {})", file.string(), m.slide_count, m.topics.size());
}

void cmd_eval(const RunConfig& cfg) {
    require(cfg.matrix, "--matrix");
    require(cfg.gold, "--gold");
    Manifest man("eval");
    man.config()["matrix"] = cfg.matrix.generic_string();
    man.config()["gold"] = cfg.gold.generic_string();
    man.config()["top_k"] = cfg.top_k;

    const auto m = read_matrix(cfg.matrix);
    man.add_input(cfg.matrix);
    const auto gold = read_gold(cfg.gold);
    man.add_input(cfg.gold);
    if (gold.size() == 0) {
        throw Error("gold keyphrase file " + cfg.gold.string() + " is empty");
    }
    const auto report = evaluate_at_n(m, gold);
    const std::string name(model_name(m.model));

    fs::create_directories(cfg.out);
    const auto report_file = cfg.out / (name + ".eval.json");
    write_text(report_file, report_json(report));
    man.add_output(report_file);

    auto slides = json::array();
    const auto topk = topk_per_slide(m, cfg.top_k);
    std::size_t row = 0;
    for (std::size_t d = 0; d < m.deck_ids.size(); ++d) {
        for (std::size_t s = 0; s < m.deck_slide_counts[d]; ++s, ++row) {
            auto labels = json::array();
            for (auto j : topk[row]) {
                labels.push_back({{"topic", m.topics[j].label()},
                                  {"score", m.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j))}});
            }
            slides.push_back({{"deck_id", m.deck_ids[d]}, {"slide", s}, {"top", labels}});
        }
    }
    const auto topk_file = cfg.out / (name + ".topk.json");
    write_text(topk_file, slides.dump(2) + "\n");
    man.add_output(topk_file);
    man.write(cfg.out / (name + ".eval.manifest.json"));
    std::cout << report_table(report);
}

void cmd_logs(const RunConfig& cfg) {
    require(cfg.logs, "--logs");
    Manifest man("logs");
    man.config()["logs"] = cfg.logs.generic_string();
    man.config()["cap_seconds"] = cfg.cap_seconds;
    man.config()["schedule"] = optional_path(cfg.schedule);
    man.config()["matrix"] = optional_path(cfg.matrix);

    auto events = load_events(cfg.logs);
    man.add_input(cfg.logs);
    fs::create_directories(cfg.out);

    auto write_features = [&](const std::vector<ReadingEvent>& ev, const std::string& file_name) {
        std::string text = "user_id";
        for (const auto& n : ActivityFeatures::feature_names()) {
            text += "," + n;
        }
        text += '\n';
        for (const auto& [user, f] : activity_features(ev, cfg.cap_seconds)) {
            text += csv_field(user);
            for (auto c : f.counts) {
                text += "," + std::to_string(c);
            }
            text += fmt::format(",{}\n", f.read_time);
        }
        const auto file = cfg.out / file_name;
        write_text(file, text);
        man.add_output(file);
    };

    write_features(events, "features.csv");
    std::string times = "user_id,material_id,page,seconds\n";
    for (const auto& pt : sessionize_reading_time(events, cfg.cap_seconds)) {
        for (const auto& [page, secs] : pt.seconds) {
            times += fmt::format("{},{},{},{}\n", csv_field(pt.user_id), csv_field(pt.material_id), page, secs);
        }
    }
    write_text(cfg.out / "reading_time.csv", times);
    man.add_output(cfg.out / "reading_time.csv");

    if (!cfg.schedule.empty()) {
        man.add_input(cfg.schedule);
        const auto [in, out] = split_in_out_class(events, read_schedule(cfg.schedule));
        write_features(in, "features_in_class.csv");
        write_features(out, "features_out_class.csv");
    }
    if (!cfg.matrix.empty()) {
        const auto m = read_matrix(cfg.matrix);
        man.add_input(cfg.matrix);
        std::string text = "user_id";
        for (const auto& t : m.topics) {
            text += "," + csv_field(t.label());
        }
        text += '\n';
        for (const auto& [user, v] : student_topic_preferences(events, m, cfg.cap_seconds)) {
            text += csv_field(user);
            for (Eigen::Index j = 0; j < v.size(); ++j) {
                text += fmt::format(",{}", v(j));
            }
            text += '\n';
        }
        write_text(cfg.out / "topic_preferences.csv", text);
        man.add_output(cfg.out / "topic_preferences.csv");
    }
    man.write(cfg.out / "logs.manifest.json");
}

void cmd_fdr(const RunConfig& cfg) {
    require(cfg.matrix, "--matrix");
    require(cfg.logs, "--logs");
    require(cfg.grades, "--grades");
    Manifest man("fdr");
    auto& c = man.config();
    c["matrix"] = cfg.matrix.generic_string();
    c["logs"] = cfg.logs.generic_string();
    c["grades"] = cfg.grades.generic_string();
    c["schedule"] = optional_path(cfg.schedule);
    c["cap_seconds"] = cfg.cap_seconds;
    c["report_topics"] = cfg.report_topics;

    const auto m = read_matrix(cfg.matrix);
    man.add_input(cfg.matrix);
    auto events = load_events(cfg.logs);
    man.add_input(cfg.logs);
    const auto grades = read_grades(cfg.grades);
    man.add_input(cfg.grades);

    json report;
    for (const auto& kase : cases_for(cfg, std::move(events), man)) {
        const auto cohort = build_cohort(kase.events, m, grades, {0, cfg.cap_seconds});
        json entry = {{"students", cohort.users.size()}, {"at_risk", cohort.at_risk()}};
        const auto n_risk = cohort.at_risk();
        if (n_risk < 2 || cohort.users.size() - n_risk < 2) {
            spdlog::warn("case {}: fewer than two students in a group; skipped", kase.name);
            entry["skipped"] = true;
            report[kase.name] = entry;
            continue;
        }
        std::vector<Vector> risk, other;
        for (std::size_t i = 0; i < cohort.users.size(); ++i) {
            Vector row = cohort.topic_features.row(static_cast<Eigen::Index>(i)).transpose();
            (cohort.labels[i] ? risk : other).push_back(std::move(row));
        }
        const auto best = best_topic(risk, other, cohort.topic_names);
        entry["best_topic"] = {{"topic", cohort.topic_names[best.topic]}, {"fdr", best.fdr}, {"flagged", best.flagged}};

        std::vector<std::pair<double, std::size_t>> ranked;
        for (std::size_t j = 0; j < cohort.topic_names.size(); ++j) {
            const auto col = static_cast<Eigen::Index>(j);
            const auto value = fdr_or_null(column_values(cohort.topic_features, col, cohort.labels, 1),
                                           column_values(cohort.topic_features, col, cohort.labels, 0));
            if (!value.is_null()) {
                ranked.emplace_back(value.get<double>(), j);
            }
        }
        std::stable_sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return cohort.topic_names[a.second] < cohort.topic_names[b.second];
        });
        auto topics = json::array();
        for (std::size_t r = 0; r < ranked.size() && r < cfg.report_topics; ++r) {
            topics.push_back({{"topic", cohort.topic_names[ranked[r].second]}, {"fdr", ranked[r].first}});
        }
        entry["topics"] = topics;

        json trad;
        for (std::size_t f = 0; f < cohort.traditional_names.size(); ++f) {
            const auto col = static_cast<Eigen::Index>(f);
            trad[cohort.traditional_names[f]] = fdr_or_null(column_values(cohort.traditional_features, col, cohort.labels, 1),
                                                            column_values(cohort.traditional_features, col, cohort.labels, 0));
        }
        entry["read_time_fdr"] = trad["READ_TIME"];
        entry["traditional"] = trad;
        report[kase.name] = entry;
        spdlog::info("case {}: best topic \"{}\" fdr {:.4g}", kase.name, cohort.topic_names[best.topic], best.fdr);
    }
    fs::create_directories(cfg.out);
    write_text(cfg.out / "fdr.json", report.dump(2) + "\n");
    man.add_output(cfg.out / "fdr.json");
    man.write(cfg.out / "fdr.manifest.json");
}

void cmd_predict(const RunConfig& cfg) {
    require(cfg.matrix, "--matrix");
    require(cfg.logs, "--logs");
    require(cfg.grades, "--grades");
    Manifest man("predict");
    auto& c = man.config();
    c["matrix"] = cfg.matrix.generic_string();
    c["logs"] = cfg.logs.generic_string();
    c["grades"] = cfg.grades.generic_string();
    c["schedule"] = optional_path(cfg.schedule);
    c["cap_seconds"] = cfg.cap_seconds;
    c["top_topics"] = cfg.top_topics;
    c["folds"] = cfg.folds;
    c["fold_size"] = cfg.fold_size;
    c["seed"] = cfg.seed;
    c["lr"] = cfg.lr;
    c["epochs"] = cfg.epochs;
    c["l2"] = cfg.l2;

    const auto m = read_matrix(cfg.matrix);
    man.add_input(cfg.matrix);
    auto events = load_events(cfg.logs);
    man.add_input(cfg.logs);
    const auto grades = read_grades(cfg.grades);
    man.add_input(cfg.grades);

    CVParams cv;
    cv.folds = cfg.folds;
    cv.fold_size = cfg.fold_size;
    cv.seed = cfg.seed;
    cv.train = {cfg.lr, cfg.epochs, cfg.l2};

    json report;
    json cases_json;
    json explanations = json::array();
    std::vector<CVResult> topic_results, trad_results;
    std::vector<std::string> compared;
    bool explained = false;
    for (const auto& kase : cases_for(cfg, std::move(events), man)) {
        const auto cohort = build_cohort(kase.events, m, grades, {cfg.top_topics, cfg.cap_seconds});
        json entry = {{"students", cohort.users.size()}, {"at_risk", cohort.at_risk()}, {"excluded", cohort.excluded}};
        CVResult t, f;
        try {
            t = cross_validate(cohort.topic_features, cohort.labels, cv);
            f = cross_validate(cohort.traditional_features, cohort.labels, cv);
        } catch (const DomainError& e) {
            spdlog::warn("case {}: {}; skipped", kase.name, e.what());
            entry["skipped"] = e.what();
            cases_json[kase.name] = entry;
            continue;
        }
        entry["fold_size"] = t.fold_size;
        entry["shrunk"] = t.shrunk;
        entry["topics"] = cohort.topic_names;
        entry["T"] = cv_json(t);
        entry["F"] = cv_json(f);
        cases_json[kase.name] = entry;
        topic_results.push_back(t);
        trad_results.push_back(f);
        compared.push_back(kase.name);
        spdlog::info("case {}: AUC T {:.3f} F {:.3f}", kase.name, t.auc_mean, f.auc_mean);

        if (explained) {
            continue;
        }
        explained = true;
        const auto model = train_logreg(cohort.topic_features, cohort.labels, cv.train, cohort.topic_names);
        const Vector mean = cohort.topic_features.colwise().mean().transpose();
        const Vector prob = predict_proba(model, cohort.topic_features);
        for (std::size_t i = 0; i < cohort.users.size(); ++i) {
            if (prob(static_cast<Eigen::Index>(i)) < 0.5) {
                continue;
            }
            const Vector x = cohort.topic_features.row(static_cast<Eigen::Index>(i)).transpose();
            const auto contrib = explain_prediction(model, x, mean);
            std::vector<std::size_t> order(static_cast<std::size_t>(contrib.values.size()));
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return std::abs(contrib.values(static_cast<Eigen::Index>(a))) >
                       std::abs(contrib.values(static_cast<Eigen::Index>(b)));
            });
            auto top = json::array();
            for (std::size_t r = 0; r < order.size() && r < 5; ++r) {
                const auto j = static_cast<Eigen::Index>(order[r]);
                top.push_back({{"topic", cohort.topic_names[order[r]]},
                               {"contribution", contrib.values(j)},
                               {"value", x(j)},
                               {"mean", mean(j)}});
            }
            explanations.push_back({{"user_id", cohort.users[i]},
                                    {"probability", prob(static_cast<Eigen::Index>(i))},
                                    {"at_risk", cohort.labels[i] == 1},
                                    {"logit", contrib.logit_x},
                                    {"logit_mean", contrib.logit_mean},
                                    {"contributions", top}});
        }
    }
    report["cases"] = cases_json;
    if (!compared.empty() && cfg.folds >= 2) {
        const auto summary = compare_representations(topic_results, trad_results);
        report["comparison"] = {{"cases", compared},
                                {"auc", tally_json(summary.auc)},
                                {"f1", tally_json(summary.f1)},
                                {"auc_p", summary.auc_p},
                                {"f1_p", summary.f1_p}};
    }
    fs::create_directories(cfg.out);
    write_text(cfg.out / "predict.json", report.dump(2) + "\n");
    write_text(cfg.out / "explanations.json", explanations.dump(2) + "\n");
    man.add_output(cfg.out / "predict.json");
    man.add_output(cfg.out / "explanations.json");
    man.write(cfg.out / "predict.manifest.json");
}

void cmd_synth(const RunConfig& cfg) {
    SynthSpec spec;
    spec.seed = cfg.seed;
    spec.deck_count = cfg.decks;
    spec.slide_count = cfg.slides;
    spec.vocab_size = cfg.vocab;
    spec.planted_salience.assign(cfg.planted, 1.0);
    spec.dim = cfg.dim;
    spec.student_count = cfg.students;
    spec.at_risk_fraction = cfg.at_risk;
    spec.signal_strength = cfg.signal;

    Manifest man("synth");
    auto& c = man.config();
    c["seed"] = spec.seed;
    c["decks"] = spec.deck_count;
    c["slides"] = spec.slide_count;
    c["vocab"] = spec.vocab_size;
    c["planted"] = spec.planted_count();
    c["dim"] = spec.dim;
    c["students"] = spec.student_count;
    c["at_risk"] = spec.at_risk_fraction;
    c["signal"] = spec.signal_strength;
    c["k"] = cfg.k;
    c["alpha"] = cfg.alpha;
    c["d"] = cfg.d;
    c["phi"] = cfg.phi ? json(*cfg.phi) : json(nullptr);

    const auto synth = generate_corpus(spec);
    write_synth_corpus(synth, cfg.out);
    const auto m = build_matrix(synth.corpus, synth.bundles, lector_params(cfg));
    const auto logs = generate_logs(spec, m);
    write_synth_logs(logs, cfg.out);

    for (const auto& deck : synth.corpus) {
        man.add_output(cfg.out / "corpus" / (deck.deck_id + ".slides.jsonl"));
    }
    for (const auto& deck : synth.corpus) {
        man.add_output(cfg.out / "bundles" / (deck.deck_id + ".tensors.bin"));
    }
    for (const char* f : {"gold.txt", "events.csv", "grades.csv", "schedule.json"}) {
        man.add_output(cfg.out / f);
    }
    man.write(cfg.out / "synth.manifest.json");
    spdlog::info("synthetic course in {}: {} slides, {} events, planted {}", cfg.out.string(),
                 spec.deck_count * spec.slide_count, logs.events.size(), fmt::join(synth.planted, " "));
}

}  // namespace lector::cli
