#include "lector/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <random>

#include <boost/math/distributions/students_t.hpp>
#include <spdlog/spdlog.h>

namespace lector {

namespace {

constexpr double kMinStddev = 1e-12;

double softplus(double z) {
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void check_labels(const std::vector<int>& y) {
    bool pos = false;
    bool neg = false;
    for (int v : y) {
        if (v != 0 && v != 1) {
            throw DomainError("labels must be 0 or 1");
        }
        (v ? pos : neg) = true;
    }
    if (!pos || !neg) {
        throw DomainError("labels contain a single class");
    }
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
    const double m = sample_mean(v);
    const double s = v.size() > 1 ? std::sqrt(sample_variance(v)) : 0.0;
    return {m, s};
}

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

std::vector<int> take(const std::vector<int>& y, const std::vector<std::size_t>& rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (auto r : rows) {
        out.push_back(y[r]);
    }
    return out;
}

bool has_both(const std::vector<int>& y) {
    const auto pos = std::count(y.begin(), y.end(), 1);
    return pos > 0 && pos < static_cast<std::ptrdiff_t>(y.size());
}

}  // namespace

Grade parse_grade(std::string_view text) {
    if (text == "A") return Grade::A;
    if (text == "B") return Grade::B;
    if (text == "C") return Grade::C;
    if (text == "D") return Grade::D;
    if (text == "F") return Grade::F;
    throw DomainError("unknown grade \"" + std::string(text) + "\"");
}

std::string_view grade_name(Grade g) {
    static constexpr std::string_view names[] = {"A", "B", "C", "D", "F"};
    return names[static_cast<int>(g)];
}

std::map<std::string, Grade> parse_grades(std::istream& in, const std::string& source) {
    std::map<std::string, Grade> out;
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
            if (line != "user_id,grade") {
                throw ParseError(source, line_no, "expected header \"user_id,grade\"");
            }
            header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw ParseError(source, line_no, "expected 2 fields");
        }
        const auto user = line.substr(0, comma);
        if (user.empty()) {
            throw ParseError(source, line_no, "empty user_id");
        }
        Grade g;
        try {
            g = parse_grade(std::string_view(line).substr(comma + 1));
        } catch (const DomainError& e) {
            throw ParseError(source, line_no, e.what());
        }
        if (!out.emplace(user, g).second) {
            throw ParseError(source, line_no, "duplicate user \"" + user + "\"");
        }
    }
    if (!header) {
        throw ParseError(source, 0, "missing header");
    }
    return out;
}

std::map<std::string, Grade> read_grades(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw Error("cannot open grades file " + file.string());
    }
    return parse_grades(in, file.string());
}

double sample_mean(std::span<const double> x) {
    if (x.empty()) {
        throw DomainError("mean of an empty sample");
    }
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
    if (x.size() < 2) {
        throw DomainError("variance needs at least two samples");
    }
    const double m = sample_mean(x);
    double ss = 0.0;
    for (double v : x) {
        ss += (v - m) * (v - m);
    }
    return ss / static_cast<double>(x.size() - 1);
}

double fdr(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw DomainError("fdr needs at least two samples per group");
    }
    const double diff = sample_mean(a) - sample_mean(b);
    const double var = sample_variance(a) + sample_variance(b);
    if (diff == 0.0) {
        return 0.0;
    }
    if (var == 0.0) {
        throw DomainError("degenerate populations: zero variance with different means");
    }
    return diff * diff / var;
}

BestTopic best_topic(const std::vector<Vector>& group_a, const std::vector<Vector>& group_b,
                     const std::vector<std::string>& labels) {
    if (group_a.size() < 2 || group_b.size() < 2) {
        throw DomainError("best_topic needs at least two students per group");
    }
    const auto dims = labels.size();
    for (const auto* g : {&group_a, &group_b}) {
        for (const auto& v : *g) {
            if (static_cast<std::size_t>(v.size()) != dims) {
                throw DimensionError("preference vector length differs from label count");
            }
        }
    }
    BestTopic best;
    bool have = false;
    std::vector<double> a(group_a.size());
    std::vector<double> b(group_b.size());
    for (std::size_t t = 0; t < dims; ++t) {
        for (std::size_t i = 0; i < group_a.size(); ++i) a[i] = group_a[i](static_cast<Eigen::Index>(t));
        for (std::size_t i = 0; i < group_b.size(); ++i) b[i] = group_b[i](static_cast<Eigen::Index>(t));
        double value = 0.0;
        try {
            value = fdr(a, b);
        } catch (const DomainError&) {
            spdlog::warn("topic \"{}\" skipped: degenerate populations", labels[t]);
            best.skipped.push_back(t);
            continue;
        }
        if (!have || value > best.fdr || (value == best.fdr && labels[t] < labels[best.topic])) {
            best.topic = t;
            best.fdr = value;
            have = true;
        }
    }
    if (!have) {
        throw DomainError("every topic coordinate is degenerate");
    }
    best.flagged = best.fdr == 0.0;
    if (best.flagged) {
        spdlog::warn("no topic separates the groups (best FDR is 0)");
    }
    return best;
}

Vector LogisticModel::standardize(const Vector& x) const {
    if (x.size() != mean.size()) {
        throw DimensionError("feature vector length " + std::to_string(x.size()) + " vs model " +
                             std::to_string(mean.size()));
    }
    return ((x - mean).array() / stddev.array()).matrix();
}

double LogisticModel::logit(const Vector& x) const {
    return weights.dot(standardize(x)) + bias;
}

double logistic_loss(const Matrix& z, const std::vector<int>& y, const Vector& w, double b, double l2) {
    const Vector s = (z * w).array() + b;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        loss += softplus(s(i)) - y[static_cast<std::size_t>(i)] * s(i);
    }
    return loss + 0.5 * l2 * w.squaredNorm();
}

LogisticGradient logistic_gradient(const Matrix& z, const std::vector<int>& y, const Vector& w, double b, double l2) {
    const Vector s = (z * w).array() + b;
    Vector resid(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        resid(i) = sigmoid(s(i)) - y[static_cast<std::size_t>(i)];
    }
    return {z.transpose() * resid + l2 * w, resid.sum()};
}

LogisticModel train_logreg(const Matrix& x, const std::vector<int>& y, const LogRegParams& params,
                           std::vector<std::string> feature_names) {
    if (static_cast<std::size_t>(x.rows()) != y.size()) {
        throw DimensionError("sample count differs between X and y");
    }
    check_labels(y);
    if (!(params.lr > 0.0) || params.epochs < 0 || params.l2 < 0.0) {
        throw DomainError("invalid logistic regression parameters");
    }
    if (feature_names.empty()) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            feature_names.push_back("x" + std::to_string(c));
        }
    }
    if (static_cast<Eigen::Index>(feature_names.size()) != x.cols()) {
        throw DimensionError("feature name count differs from column count");
    }

    LogisticModel model;
    model.feature_names = std::move(feature_names);
    const double n = static_cast<double>(x.rows());
    model.mean = x.colwise().mean().transpose();
    model.stddev = Vector::Ones(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double var = (x.col(c).array() - model.mean(c)).square().sum() / n;
        if (std::sqrt(var) > kMinStddev) {
            model.stddev(c) = std::sqrt(var);
        } else {
            model.dropped.push_back(static_cast<std::size_t>(c));
        }
    }
    Matrix z = (x.rowwise() - model.mean.transpose()).array().rowwise() / model.stddev.transpose().array();
    for (auto c : model.dropped) {
        z.col(static_cast<Eigen::Index>(c)).setZero();
    }

    // Curvature bound of the mean loss: (trace(Z'Z)/n + 1)/4 + l2/n.
    const double curvature = (z.squaredNorm() / n + 1.0) / 4.0 + params.l2 / n;
    const double step = std::min(params.lr, 1.9 / curvature);

    model.weights = Vector::Zero(x.cols());
    model.bias = 0.0;
    model.loss_history.reserve(static_cast<std::size_t>(params.epochs) + 1);
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        model.loss_history.push_back(logistic_loss(z, y, model.weights, model.bias, params.l2));
        const auto g = logistic_gradient(z, y, model.weights, model.bias, params.l2);
        model.weights -= step / n * g.w;
        model.bias -= step / n * g.b;
        for (auto c : model.dropped) {
            model.weights(static_cast<Eigen::Index>(c)) = 0.0;
        }
    }
    model.loss_history.push_back(logistic_loss(z, y, model.weights, model.bias, params.l2));
    return model;
}

Vector predict_proba(const LogisticModel& model, const Matrix& x) {
    if (x.cols() != model.weights.size()) {
        throw DimensionError("X has " + std::to_string(x.cols()) + " columns, model expects " +
                             std::to_string(model.weights.size()));
    }
    Vector p(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        p(i) = sigmoid(model.logit(x.row(i).transpose()));
    }
    return p;
}

double auc(std::span<const double> scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw DimensionError("score and label counts differ");
    }
    check_labels(labels);
    // Average ranks, then the Mann-Whitney U statistic of the positives.
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(scores.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && scores[idx[j + 1]] == scores[idx[i]]) {
            ++j;
        }
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            rank[idx[k]] = avg;
        }
        i = j + 1;
    }
    double pos = 0.0;
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) {
            pos += 1.0;
            rank_sum += rank[i];
        }
    }
    const double neg = static_cast<double>(labels.size()) - pos;
    return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

double f1_at_half(std::span<const double> probabilities, const std::vector<int>& labels) {
    if (probabilities.size() != labels.size()) {
        throw DimensionError("probability and label counts differ");
    }
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool pred = probabilities[i] >= 0.5;
        if (pred && labels[i] == 1) tp += 1.0;
        else if (pred) fp += 1.0;
        else if (labels[i] == 1) fn += 1.0;
    }
    const double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
    return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

std::vector<double> CVResult::f1_samples() const {
    std::vector<double> v;
    for (const auto& f : per_fold) v.push_back(f.f1);
    return v;
}

std::vector<double> CVResult::auc_samples() const {
    std::vector<double> v;
    for (const auto& f : per_fold) v.push_back(f.auc);
    return v;
}

CVResult cross_validate(const Matrix& x, const std::vector<int>& y, const CVParams& params) {
    if (static_cast<std::size_t>(x.rows()) != y.size()) {
        throw DimensionError("sample count differs between X and y");
    }
    check_labels(y);
    if (params.folds < 2 || params.fold_size < 1) {
        throw DomainError("cross-validation needs at least 2 folds of size >= 1");
    }
    CVResult result;
    const std::size_t n = y.size();
    result.fold_size = params.fold_size;
    if (n < params.folds * params.fold_size) {
        result.fold_size = n / params.folds;
        result.shrunk = true;
        spdlog::warn("{} samples cannot fill {} folds of {}; using folds of {}", n, params.folds, params.fold_size,
                     result.fold_size);
    }
    const std::size_t needed = params.folds * result.fold_size;

    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < n; ++i) {
        (y[i] ? pos : neg).push_back(i);
    }
    std::size_t take_pos = static_cast<std::size_t>(
        std::llround(static_cast<double>(needed) * static_cast<double>(pos.size()) / static_cast<double>(n)));
    take_pos = std::clamp<std::size_t>(take_pos, std::min(pos.size(), params.folds), pos.size());
    if (needed - take_pos > neg.size()) {
        take_pos = needed - neg.size();
    }
    const std::size_t take_neg = needed - take_pos;

    for (int attempt = 0; attempt < 10; ++attempt) {
        std::mt19937_64 rng(params.seed + static_cast<std::uint64_t>(attempt));
        auto p = pos;
        auto q = neg;
        std::shuffle(p.begin(), p.end(), rng);
        std::shuffle(q.begin(), q.end(), rng);
        std::vector<std::size_t> chosen(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(take_pos));
        chosen.insert(chosen.end(), q.begin(), q.begin() + static_cast<std::ptrdiff_t>(take_neg));

        std::vector<std::vector<std::size_t>> folds(params.folds);
        for (std::size_t k = 0; k < chosen.size(); ++k) {
            folds[k % params.folds].push_back(chosen[k]);
        }

        bool ok = true;
        std::vector<FoldMetrics> metrics;
        for (std::size_t f = 0; f < params.folds && ok; ++f) {
            std::vector<std::size_t> train;
            for (std::size_t g = 0; g < params.folds; ++g) {
                if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
            }
            const auto y_test = take(y, folds[f]);
            const auto y_train = take(y, train);
            if (!has_both(y_test) || !has_both(y_train)) {
                ok = false;
                break;
            }
            const auto model = train_logreg(take_rows(x, train), y_train, params.train);
            const Vector prob = predict_proba(model, take_rows(x, folds[f]));
            const std::span<const double> ps(prob.data(), static_cast<std::size_t>(prob.size()));
            metrics.push_back({f1_at_half(ps, y_test), auc(ps, y_test)});
        }
        if (!ok) {
            spdlog::info("fold lacks a class; redrawing with seed offset {}", attempt + 1);
            continue;
        }
        result.per_fold = std::move(metrics);
        result.attempts = attempt + 1;
        std::tie(result.f1_mean, result.f1_std) = mean_std(result.f1_samples());
        std::tie(result.auc_mean, result.auc_std) = mean_std(result.auc_samples());
        return result;
    }
    throw DomainError("could not draw folds containing both classes after 10 attempts");
}

double ttest(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw DomainError("ttest needs at least two samples per group");
    }
    const double ma = sample_mean(a);
    const double mb = sample_mean(b);
    const double va = sample_variance(a) / static_cast<double>(a.size());
    const double vb = sample_variance(b) / static_cast<double>(b.size());
    const double se2 = va + vb;
    if (se2 == 0.0) {
        return ma == mb ? 1.0 : 0.0;
    }
    const double t = (ma - mb) / std::sqrt(se2);
    const double df = se2 * se2 /
                      (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
    const boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

Contributions explain_prediction(const LogisticModel& model, const Vector& x, const Vector& population_mean) {
    const Vector zx = model.standardize(x);
    const Vector zm = model.standardize(population_mean);
    Contributions c;
    c.values = (model.weights.array() * (zx - zm).array()).matrix();
    c.logit_x = model.weights.dot(zx) + model.bias;
    c.logit_mean = model.weights.dot(zm) + model.bias;
    return c;
}

ComparisonSummary compare_representations(const std::vector<CVResult>& topic_results,
                                          const std::vector<CVResult>& trad_results, double alpha) {
    if (topic_results.size() != trad_results.size()) {
        throw DimensionError("topic and traditional result lists differ in length");
    }
    ComparisonSummary out;
    auto tally = [alpha](ComparisonTally& t, std::vector<double>& ps, const std::vector<double>& a,
                         const std::vector<double>& b) {
        const double p = ttest(a, b);
        ps.push_back(p);
        if (p < alpha) {
            (sample_mean(a) > sample_mean(b) ? t.t_gt_f : t.f_gt_t) += 1;
        } else {
            t.t_eq_f += 1;
        }
    };
    for (std::size_t i = 0; i < topic_results.size(); ++i) {
        tally(out.auc, out.auc_p, topic_results[i].auc_samples(), trad_results[i].auc_samples());
        tally(out.f1, out.f1_p, topic_results[i].f1_samples(), trad_results[i].f1_samples());
    }
    return out;
}

}  // namespace lector
