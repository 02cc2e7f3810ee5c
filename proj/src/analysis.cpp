#include "tarlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>

#include "tarlab/error.hpp"

namespace tarlab {

namespace {

std::string fixed6(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string general(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

std::string_view to_string(TTestStatus status) noexcept
{
    switch (status) {
    case TTestStatus::Ok: return "ok";
    case TTestStatus::IdenticalRuns: return "degenerate: identical runs";
    case TTestStatus::ZeroVariance: return "degenerate: zero variance";
    }
    return "?";
}

PairedComparison paired_ttest(std::span<const double> a, std::span<const double> b, int n_comparisons)
{
    if (a.size() != b.size()) {
        throw std::invalid_argument("paired t-test needs topic-aligned samples of equal size");
    }
    if (a.size() < 2) {
        throw std::invalid_argument("paired t-test needs at least two paired values");
    }
    if (n_comparisons < 1) {
        throw std::invalid_argument("number of comparisons must be at least 1");
    }

    PairedComparison out;
    out.n = a.size();
    out.df = static_cast<int>(a.size()) - 1;
    out.n_comparisons = n_comparisons;

    const auto n = static_cast<double>(a.size());
    std::vector<double> diff(a.size());
    double sum_a = 0.0;
    double sum_b = 0.0;
    double sum_d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff[i] = a[i] - b[i];
        sum_a += a[i];
        sum_b += b[i];
        sum_d += diff[i];
    }
    out.mean_a = sum_a / n;
    out.mean_b = sum_b / n;
    const double mean_d = sum_d / n;

    const bool constant = std::all_of(diff.begin(), diff.end(), [&](double d) { return d == diff.front(); });
    if (constant) {
        if (diff.front() == 0.0) {
            out.status = TTestStatus::IdenticalRuns;
            out.t_statistic = 0.0;
            out.p_value = 1.0;
        } else {
            out.status = TTestStatus::ZeroVariance;
            out.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), diff.front());
            out.p_value = 0.0;
        }
    } else {
        double ss = 0.0;
        for (double d : diff) {
            ss += (d - mean_d) * (d - mean_d);
        }
        const double sd = std::sqrt(ss / (n - 1.0));
        out.t_statistic = mean_d / (sd / std::sqrt(n));
        out.p_value = std::clamp(student_t_two_tailed(out.t_statistic, out.df), 0.0, 1.0);
    }
    out.corrected_p = std::min(1.0, out.p_value * n_comparisons);
    return out;
}

AlignedValues align(const MetricReport& a, const MetricReport& b, Measure measure)
{
    AlignedValues out;
    for (const auto& ta : a.topics) {
        if (const auto* tb = b.find(ta.topic_id)) {
            out.topic_ids.push_back(ta.topic_id);
            out.a.push_back(ta.value(measure));
            out.b.push_back(tb->value(measure));
        } else {
            out.dropped.push_back(ta.topic_id);
        }
    }
    for (const auto& tb : b.topics) {
        if (!a.find(tb.topic_id)) {
            out.dropped.push_back(tb.topic_id);
        }
    }
    std::sort(out.dropped.begin(), out.dropped.end());
    return out;
}

std::vector<RunComparison> compare_runs(const MetricReport& focal, std::span<const MetricReport> others,
                                        Measure measure)
{
    const int family = static_cast<int>(others.size());
    std::vector<RunComparison> rows;
    for (const auto& other : others) {
        auto aligned = align(focal, other, measure);
        if (aligned.topic_ids.size() < 2) {
            throw EvaluationError("runs " + focal.run_tag + " and " + other.run_tag
                                  + " share fewer than two evaluated topics");
        }
        RunComparison row;
        row.focal_tag = focal.run_tag;
        row.other_tag = other.run_tag;
        row.test = paired_ttest(aligned.a, aligned.b, family);
        row.test.measure = std::string(measure_name(measure));
        row.dropped_topics = std::move(aligned.dropped);
        rows.push_back(std::move(row));
    }
    return rows;
}

GainLoss gain_loss(const MetricReport& a, const MetricReport& b, Measure measure)
{
    auto aligned = align(a, b, measure);
    if (aligned.topic_ids.empty()) {
        throw EvaluationError("reports share no evaluated topic");
    }
    GainLoss out;
    out.measure = std::string(measure_name(measure));
    out.dropped_topics = std::move(aligned.dropped);
    for (std::size_t i = 0; i < aligned.topic_ids.size(); ++i) {
        const double delta = aligned.a[i] - aligned.b[i];
        out.entries.push_back({aligned.topic_ids[i], aligned.a[i], aligned.b[i], delta});
        if (delta > 0.0) {
            ++out.wins;
        } else if (delta < 0.0) {
            ++out.losses;
        } else {
            ++out.ties;
        }
    }
    std::stable_sort(out.entries.begin(), out.entries.end(),
                     [](const GainLossEntry& x, const GainLossEntry& y) { return x.delta > y.delta; });
    return out;
}

ConvergenceResult convergence(std::span<const long> steps, std::span<const MetricReport> reports, Measure measure,
                              double alpha)
{
    if (steps.size() != reports.size()) {
        throw std::invalid_argument("one report per checkpoint step is required");
    }
    if (steps.size() < 2) {
        throw EvaluationError("a convergence series needs at least two checkpoints");
    }
    for (std::size_t i = 1; i < steps.size(); ++i) {
        if (steps[i] <= steps[i - 1]) {
            throw EvaluationError("checkpoint steps must be strictly increasing");
        }
    }

    ConvergenceResult out;
    out.measure = std::string(measure_name(measure));
    out.alpha = alpha;
    for (const auto& t : reports.front().topics) {
        const bool everywhere = std::all_of(reports.begin() + 1, reports.end(),
                                            [&](const MetricReport& r) { return r.find(t.topic_id) != nullptr; });
        if (everywhere) {
            out.topic_ids.push_back(t.topic_id);
        }
    }
    if (out.topic_ids.size() < 2) {
        throw EvaluationError("checkpoints share fewer than two evaluated topics");
    }

    for (std::size_t i = 0; i < steps.size(); ++i) {
        ConvergencePoint point;
        point.step = steps[i];
        double sum = 0.0;
        for (const auto& id : out.topic_ids) {
            const double v = reports[i].find(id)->value(measure);
            point.values.push_back(v);
            sum += v;
        }
        point.mean = sum / static_cast<double>(out.topic_ids.size());
        out.points.push_back(std::move(point));
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < out.points.size(); ++i) {
        if (out.points[i].mean > out.points[best].mean) {
            best = i;
        }
    }
    out.best_step = out.points[best].step;

    const auto k = out.points.size();
    for (std::size_t i = 0; i + 1 < k; ++i) {
        const int family = static_cast<int>(k - 1 - i);
        bool settled = true;
        for (std::size_t j = i + 1; j < k && settled; ++j) {
            settled = !paired_ttest(out.points[i].values, out.points[j].values, family).significant(alpha);
        }
        if (settled) {
            out.saturation_step = out.points[i].step;
            break;
        }
    }
    return out;
}

ConvergenceResult convergence(std::span<const Checkpoint> series, std::span<const Topic> topics, const Qrels& qrels,
                              Measure measure, double alpha, const EvaluationOptions& options)
{
    std::vector<long> steps;
    std::vector<MetricReport> reports;
    for (const auto& cp : series) {
        steps.push_back(cp.step);
        reports.push_back(evaluate(cp.run, topics, qrels, options));
    }
    return convergence(steps, reports, measure, alpha);
}

void write_gain_loss_csv(std::ostream& out, const GainLoss& result)
{
    out << "topic_id,value_a,value_b,delta\n";
    for (const auto& e : result.entries) {
        out << e.topic_id << ',' << fixed6(e.value_a) << ',' << fixed6(e.value_b) << ',' << fixed6(e.delta) << '\n';
    }
}

void write_convergence_csv(std::ostream& out, const ConvergenceResult& result)
{
    out << "step,mean,best,saturation";
    for (const auto& id : result.topic_ids) {
        out << ',' << id;
    }
    out << '\n';
    for (const auto& p : result.points) {
        out << p.step << ',' << fixed6(p.mean) << ',' << (p.step == result.best_step ? 1 : 0) << ','
            << (result.saturation_step && *result.saturation_step == p.step ? 1 : 0);
        for (double v : p.values) {
            out << ',' << fixed6(v);
        }
        out << '\n';
    }
}

void write_comparisons_csv(std::ostream& out, std::span<const RunComparison> rows, double alpha)
{
    out << "measure,focal,other,n,mean_focal,mean_other,t,df,p,corrected_p,n_comparisons,significant,status\n";
    for (const auto& row : rows) {
        const auto& t = row.test;
        out << t.measure << ',' << row.focal_tag << ',' << row.other_tag << ',' << t.n << ',' << fixed6(t.mean_a)
            << ',' << fixed6(t.mean_b) << ',' << general(t.t_statistic) << ',' << t.df << ',' << general(t.p_value)
            << ',' << general(t.corrected_p) << ',' << t.n_comparisons << ',' << (t.significant(alpha) ? 1 : 0) << ','
            << to_string(t.status) << '\n';
    }
}

}  // namespace tarlab
