#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tarlab/metrics.hpp"

namespace tarlab {

/// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1]. Continued
/// fraction evaluation, accurate to about 1e-10 or better.
double regularized_incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_tailed(double t, double df);

enum class TTestStatus {
    Ok,
    /// Every difference is zero; p is 1.
    IdenticalRuns,
    /// Differences are constant and nonzero; t is infinite and p is 0.
    ZeroVariance,
};

struct PairedComparison {
    std::string measure;
    std::size_t n = 0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double t_statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
    double corrected_p = 1.0;
    int n_comparisons = 1;
    TTestStatus status = TTestStatus::Ok;

    bool significant(double alpha) const noexcept { return corrected_p < alpha; }
};

/// Two-tailed paired t-test on a - b with Bonferroni correction
/// corrected_p = min(1, p * n_comparisons). Requires |a| == |b| >= 2.
PairedComparison paired_ttest(std::span<const double> a, std::span<const double> b, int n_comparisons = 1);

/// Topic-aligned values of one measure over the topics evaluated in both reports.
struct AlignedValues {
    std::vector<std::string> topic_ids;
    std::vector<double> a;
    std::vector<double> b;
    /// Topics evaluated in only one of the reports.
    std::vector<std::string> dropped;
};

AlignedValues align(const MetricReport& a, const MetricReport& b, Measure measure);

struct RunComparison {
    std::string focal_tag;
    std::string other_tag;
    PairedComparison test;
    std::vector<std::string> dropped_topics;
};

/// Compares the focal run against each other run on one measure. The
/// Bonferroni family is the number of other runs.
std::vector<RunComparison> compare_runs(const MetricReport& focal, std::span<const MetricReport> others,
                                        Measure measure);

struct GainLossEntry {
    std::string topic_id;
    double value_a = 0.0;
    double value_b = 0.0;
    double delta = 0.0;
};

struct GainLoss {
    std::string measure;
    /// Sorted by delta descending, then topic id.
    std::vector<GainLossEntry> entries;
    std::size_t wins = 0;
    std::size_t losses = 0;
    std::size_t ties = 0;
    std::vector<std::string> dropped_topics;
};

/// Per-topic delta (a - b). Throws EvaluationError when the reports share no topic.
GainLoss gain_loss(const MetricReport& a, const MetricReport& b, Measure measure);

struct ConvergencePoint {
    long step = 0;
    std::vector<double> values;
    double mean = 0.0;
};

struct ConvergenceResult {
    std::string measure;
    double alpha = 0.05;
    /// Topics evaluated in every checkpoint, ascending.
    std::vector<std::string> topic_ids;
    std::vector<ConvergencePoint> points;
    /// First checkpoint whose value no later checkpoint beats or trails significantly.
    std::optional<long> saturation_step;
    long best_step = 0;
};

struct Checkpoint {
    long step = 0;
    RankedRun run;
};

/// Steps must be strictly increasing and there must be at least two.
ConvergenceResult convergence(std::span<const long> steps, std::span<const MetricReport> reports, Measure measure,
                              double alpha = 0.05);

ConvergenceResult convergence(std::span<const Checkpoint> series, std::span<const Topic> topics, const Qrels& qrels,
                              Measure measure, double alpha = 0.05, const EvaluationOptions& options = {});

/// CSV tables for external plotting. Columns are fixed and named in the header row.
void write_gain_loss_csv(std::ostream& out, const GainLoss& result);
void write_convergence_csv(std::ostream& out, const ConvergenceResult& result);
void write_comparisons_csv(std::ostream& out, std::span<const RunComparison> rows, double alpha);

std::string_view to_string(TTestStatus status) noexcept;

}  // namespace tarlab
