#ifndef DYS_METRICS_HPP
#define DYS_METRICS_HPP

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dys/data/dataset.hpp"
#include "dys/error.hpp"

namespace dys::metrics {

/// Product-limit step function. Steps occur at distinct times with at least one
/// flagged observation.
struct KMCurve {
    std::vector<double> times;
    std::vector<double> survival;
    std::vector<std::size_t> at_risk;
    std::vector<std::size_t> events;

    /// S(t), right-continuous.
    double at(double t) const
    {
        const auto it = std::upper_bound(times.begin(), times.end(), t);
        return it == times.begin() ? 1.0 : survival[static_cast<std::size_t>(it - times.begin()) - 1];
    }

    /// S(t-), the limit from the left.
    double before(double t) const
    {
        const auto it = std::lower_bound(times.begin(), times.end(), t);
        return it == times.begin() ? 1.0 : survival[static_cast<std::size_t>(it - times.begin()) - 1];
    }
};

/// Kaplan-Meier estimate; `indicator` marks the occurrences being counted
/// (events for S, censorings for the censoring distribution G).
inline KMCurve kaplan_meier(std::span<const double> times, std::span<const int> indicator)
{
    if (times.empty()) throw DataError("kaplan_meier: empty input");
    if (times.size() != indicator.size()) throw ShapeError("kaplan_meier: times and indicator differ in length");
    std::vector<std::size_t> order(times.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
    for (double t : times)
        if (!(t >= 0.0)) throw DataError("kaplan_meier: times must be >= 0");

    KMCurve km;
    double s = 1.0;
    std::size_t remaining = times.size();
    for (std::size_t a = 0; a < order.size();) {
        std::size_t b = a;
        std::size_t d = 0;
        const double t = times[order[a]];
        while (b < order.size() && times[order[b]] == t) d += indicator[order[b++]] == 1 ? 1 : 0;
        if (d > 0) {
            s *= static_cast<double>(remaining - d) / static_cast<double>(remaining);
            km.times.push_back(t);
            km.survival.push_back(s);
            km.at_risk.push_back(remaining);
            km.events.push_back(d);
        }
        remaining -= b - a;
        a = b;
    }
    return km;
}

inline KMCurve censoring_curve(const data::SurvivalDataset& ds)
{
    std::vector<int> censored(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) censored[i] = 1 - ds.event[i];
    return kaplan_meier(ds.time, censored);
}

struct AucReport {
    std::vector<double> times;
    std::vector<double> auc;
    std::vector<bool> valid;
    double mean_auc = 0.0;
    std::size_t excluded_cases = 0;
    std::vector<std::string> warnings;

    std::size_t valid_count() const { return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), true)); }
};

/// Arithmetic mean of the valid per-time AUCs.
inline double mean_auc(const AucReport& r)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < r.auc.size(); ++k)
        if (r.valid[k]) {
            sum += r.auc[k];
            ++n;
        }
    if (n == 0) throw DataError("mean_auc: no valid evaluation times");
    return sum / static_cast<double>(n);
}

/// Cumulative/dynamic AUC with inverse-probability-of-censoring weights.
///
/// At each time t: cases are {i : T_i <= t, delta_i = 1} with weight
/// 1 / G(T_i-), controls are {j : T_j > t}, and
///
///   AUC(t) = sum_cases sum_controls w_i [1(r_i > r_j) + 1/2 1(r_i = r_j)]
///            / (sum_cases w_i * |controls|)
///
/// G is the Kaplan-Meier censoring curve of `train`. Column k of `risk`
/// holds every test sample's risk at `times[k]`.
inline AucReport cumulative_dynamic_auc(const data::SurvivalDataset& train, const data::SurvivalDataset& test,
                                        const Eigen::MatrixXd& risk, std::span<const double> times)
{
    const auto n = test.size();
    if (static_cast<std::size_t>(risk.rows()) != n || static_cast<std::size_t>(risk.cols()) != times.size())
        throw ShapeError("cumulative_dynamic_auc: risk matrix must be [n_test x times]");
    const auto g = censoring_curve(train);

    std::vector<double> weight(n, 0.0);
    AucReport report;
    for (std::size_t i = 0; i < n; ++i) {
        if (test.event[i] != 1) continue;
        const double gi = g.before(test.time[i]);
        if (gi > 0.0) {
            weight[i] = 1.0 / gi;
        } else {
            ++report.excluded_cases;
        }
    }
    if (report.excluded_cases > 0)
        report.warnings.push_back(std::to_string(report.excluded_cases) +
                                  " case(s) excluded: censoring survival is zero before their event time");

    std::vector<double> controls;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        const auto col = static_cast<Eigen::Index>(k);
        controls.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (test.time[j] > t) controls.push_back(risk(static_cast<Eigen::Index>(j), col));
        std::sort(controls.begin(), controls.end());

        double num = 0.0, case_weight = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(test.time[i] <= t && test.event[i] == 1 && weight[i] > 0.0)) continue;
            const double r = risk(static_cast<Eigen::Index>(i), col);
            const auto lo = std::lower_bound(controls.begin(), controls.end(), r);
            const auto hi = std::upper_bound(lo, controls.end(), r);
            const double below = static_cast<double>(lo - controls.begin());
            const double ties = static_cast<double>(hi - lo);
            num += weight[i] * (below + 0.5 * ties);
            case_weight += weight[i];
        }
        report.times.push_back(t);
        if (case_weight > 0.0 && !controls.empty()) {
            report.auc.push_back(num / (case_weight * static_cast<double>(controls.size())));
            report.valid.push_back(true);
        } else {
            report.auc.push_back(0.0);
            report.valid.push_back(false);
        }
    }
    report.mean_auc = report.valid_count() > 0 ? mean_auc(report) : 0.0;
    return report;
}

/// Grid indices strictly inside (min test time, max test time).
inline std::vector<std::size_t> evaluation_indices(const data::TimeGrid& grid, const data::SurvivalDataset& test)
{
    if (test.size() == 0) throw DataError("evaluation grid: empty test set");
    const auto [lo, hi] = std::minmax_element(test.time.begin(), test.time.end());
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (grid.times[k] > *lo && grid.times[k] < *hi) idx.push_back(k);
    return idx;
}

} // namespace dys::metrics

#endif // DYS_METRICS_HPP
