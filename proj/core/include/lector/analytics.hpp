#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lector/error.hpp"

namespace lector {

enum class Grade { A, B, C, D, F };

Grade parse_grade(std::string_view text);
std::string_view grade_name(Grade g);
/// D and F are at risk.
constexpr bool is_at_risk(Grade g) { return g == Grade::D || g == Grade::F; }

/// `user_id,grade` CSV. Duplicate users are an error.
std::map<std::string, Grade> parse_grades(std::istream& in, const std::string& source = "<grades>");
std::map<std::string, Grade> read_grades(const std::filesystem::path& file);

/// Unbiased (n - 1) sample variance.
double sample_mean(std::span<const double> x);
double sample_variance(std::span<const double> x);

/// Fisher's discriminant ratio (mu1 - mu2)^2 / (var1 + var2) with sample
/// variances. 0 when the means agree; throws DomainError("degenerate
/// populations") when both variances vanish but the means differ.
double fdr(std::span<const double> a, std::span<const double> b);

struct BestTopic {
    std::size_t topic = 0;
    double fdr = 0.0;
    bool flagged = false;            ///< no coordinate separates the groups
    std::vector<std::size_t> skipped;  ///< degenerate coordinates
};

/// Coordinate with the largest FDR between two groups of preference vectors.
/// Ties go to the lexicographically smaller label.
BestTopic best_topic(const std::vector<Vector>& group_a, const std::vector<Vector>& group_b,
                     const std::vector<std::string>& labels);

struct LogRegParams {
    double lr = 0.1;
    int epochs = 200;
    double l2 = 1.0;
};

/// Logistic regression on internally standardised features. Zero-variance
/// features are kept in place with weight 0 and listed in `dropped`.
struct LogisticModel {
    Vector weights;
    double bias = 0.0;
    std::vector<std::string> feature_names;
    Vector mean;
    Vector stddev;
    std::vector<std::size_t> dropped;
    std::vector<double> loss_history;  ///< loss before each epoch, then final

    Vector standardize(const Vector& x) const;
    double logit(const Vector& x) const;
};

/// Sum over samples of the negative log-likelihood plus l2/2 * |w|^2, on
/// already standardised features `z`.
double logistic_loss(const Matrix& z, const std::vector<int>& y, const Vector& w, double b, double l2);

struct LogisticGradient {
    Vector w;
    double b = 0.0;
};

LogisticGradient logistic_gradient(const Matrix& z, const std::vector<int>& y, const Vector& w, double b, double l2);

/// Full-batch gradient descent from zero weights. The step is min(lr, 1.9/L)
/// with L an upper bound on the curvature of the mean loss, which keeps the
/// loss non-increasing. Throws DomainError when y holds a single class.
LogisticModel train_logreg(const Matrix& x, const std::vector<int>& y, const LogRegParams& params = {},
                           std::vector<std::string> feature_names = {});

Vector predict_proba(const LogisticModel& model, const Matrix& x);

/// Mann-Whitney AUC; tied pairs count 1/2. Throws DomainError on one class.
double auc(std::span<const double> scores, const std::vector<int>& labels);

/// F1 in [0, 1] for predictions thresholded at 0.5.
double f1_at_half(std::span<const double> probabilities, const std::vector<int>& labels);

struct CVParams {
    std::size_t folds = 3;
    std::size_t fold_size = 20;
    std::uint64_t seed = 0;
    LogRegParams train;
};

struct FoldMetrics {
    double f1 = 0.0;
    double auc = 0.0;
};

struct CVResult {
    std::vector<FoldMetrics> per_fold;
    double f1_mean = 0.0;
    double f1_std = 0.0;
    double auc_mean = 0.0;
    double auc_std = 0.0;
    std::size_t fold_size = 0;
    bool shrunk = false;      ///< too few samples for folds * fold_size
    int attempts = 1;

    std::vector<double> f1_samples() const;
    std::vector<double> auc_samples() const;
};

/// Stratified subsample of folds * fold_size rows, dealt round-robin into
/// folds. When a fold lacks a class the assignment is redrawn with seed+1,
/// up to 10 attempts.
CVResult cross_validate(const Matrix& x, const std::vector<int>& y, const CVParams& params = {});

/// Two-sided Welch t-test p-value.
double ttest(std::span<const double> a, std::span<const double> b);

struct Contributions {
    Vector values;  ///< w_i * (z(x)_i - z(mean)_i)
    double logit_x = 0.0;
    double logit_mean = 0.0;
};

/// Per-feature contribution of x relative to the population mean, in
/// standardised space. values.sum() == logit_x - logit_mean.
Contributions explain_prediction(const LogisticModel& model, const Vector& x, const Vector& population_mean);

struct ComparisonTally {
    std::size_t t_gt_f = 0;
    std::size_t f_gt_t = 0;
    std::size_t t_eq_f = 0;
};

struct ComparisonSummary {
    ComparisonTally auc;
    ComparisonTally f1;
    std::vector<double> auc_p;
    std::vector<double> f1_p;
};

/// Per case, Welch t-test on per-fold metrics; significant at p < alpha.
/// No multiple-comparison correction.
ComparisonSummary compare_representations(const std::vector<CVResult>& topic_results,
                                          const std::vector<CVResult>& trad_results, double alpha = 0.05);

}  // namespace lector
