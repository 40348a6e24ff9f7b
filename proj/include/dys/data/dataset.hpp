#ifndef DYS_DATA_DATASET_HPP
#define DYS_DATA_DATASET_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dys/error.hpp"
#include "dys/random.hpp"

namespace dys::data {

/// Standardized features with the observed time and event indicator per row.
struct SurvivalDataset {
    Eigen::MatrixXd x; // [n x p]
    std::vector<double> time;
    std::vector<int> event;
    std::vector<std::string> feature_names;

    std::size_t size() const { return time.size(); }
    std::size_t features() const { return static_cast<std::size_t>(x.cols()); }

    std::size_t event_count() const
    {
        return static_cast<std::size_t>(std::count(event.begin(), event.end(), 1));
    }

    void validate() const
    {
        const auto n = time.size();
        if (event.size() != n || static_cast<std::size_t>(x.rows()) != n)
            throw ShapeError("dataset: rows of x, time and event are not aligned");
        if (!feature_names.empty() && feature_names.size() != features())
            throw ShapeError("dataset: feature name count does not match columns");
        for (std::size_t i = 0; i < n; ++i) {
            if (!(time[i] >= 0.0) || !std::isfinite(time[i]))
                throw DataError("dataset: row " + std::to_string(i) + " has invalid time");
            if (event[i] != 0 && event[i] != 1)
                throw DataError("dataset: row " + std::to_string(i) + " has event flag outside {0,1}");
        }
        if (!x.allFinite()) throw DataError("dataset: feature matrix contains non-finite values");
    }

    SurvivalDataset subset(std::span<const std::size_t> rows) const
    {
        SurvivalDataset out;
        out.feature_names = feature_names;
        out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
        out.time.reserve(rows.size());
        out.event.reserve(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r] >= size()) throw ShapeError("dataset: subset index out of range");
            out.x.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
            out.time.push_back(time[rows[r]]);
            out.event.push_back(event[rows[r]]);
        }
        return out;
    }
};

/// K strictly increasing evaluation times, all positive.
struct TimeGrid {
    std::vector<double> times;

    std::size_t size() const { return times.size(); }

    void validate() const
    {
        if (times.size() < 2) throw ParameterError("time grid needs at least 2 times");
        if (!(times.front() > 0.0)) throw ParameterError("time grid must be positive");
        for (std::size_t k = 1; k < times.size(); ++k)
            if (!(times[k] > times[k - 1])) throw ParameterError("time grid must be strictly increasing");
    }

    bool operator==(const TimeGrid&) const = default;
};

struct SplitSpec {
    std::uint64_t seed = 0;
    double test_fraction = 0.20;       // of the whole dataset
    double validation_fraction = 0.20; // of what remains after the test split
};

struct SplitIndices {
    std::vector<std::size_t> train, validation, test;
};

/// Seeded shuffle, then 64/16/20 train/validation/test (default fractions).
inline SplitIndices split_indices(std::size_t n, const SplitSpec& spec)
{
    if (n < 10) throw ParameterError("split: need at least 10 samples, got " + std::to_string(n));
    if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) ||
        !(spec.validation_fraction > 0.0 && spec.validation_fraction < 1.0))
        throw ParameterError("split: fractions must lie in (0, 1)");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(spec.seed);
    rng.shuffle(std::span(order));

    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.test_fraction));
    const auto n_val =
        static_cast<std::size_t>(std::llround(static_cast<double>(n - n_test) * spec.validation_fraction));
    if (n_test == 0 || n_val == 0 || n_test + n_val >= n)
        throw ParameterError("split: " + std::to_string(n) + " samples cannot populate all three splits");

    SplitIndices out;
    out.train.assign(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_test + n_val));
    out.validation.assign(order.end() - static_cast<std::ptrdiff_t>(n_test + n_val),
                          order.end() - static_cast<std::ptrdiff_t>(n_test));
    out.test.assign(order.end() - static_cast<std::ptrdiff_t>(n_test), order.end());
    return out;
}

struct DatasetSplit {
    SurvivalDataset train, validation, test;
};

inline DatasetSplit split(const SurvivalDataset& ds, const SplitSpec& spec)
{
    const auto idx = split_indices(ds.size(), spec);
    return {ds.subset(idx.train), ds.subset(idx.validation), ds.subset(idx.test)};
}

/// Nearest-rank quantile of sorted values: the ceil(q n)-th smallest.
inline double nearest_rank_quantile(std::span<const double> sorted, double q)
{
    if (sorted.empty()) throw ParameterError("quantile of empty sample");
    const double n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-12));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

/// Grid at the i/(K+1) quantiles (i = 1..K) of uncensored training times.
/// Falls back to K equally spaced times over (0, max event time] when
/// deduplication leaves fewer than K distinct positive times.
inline TimeGrid build_time_grid(const SurvivalDataset& train, std::size_t k)
{
    if (k < 2) throw ParameterError("time grid: K must be at least 2");
    std::vector<double> events;
    for (std::size_t i = 0; i < train.size(); ++i)
        if (train.event[i] == 1) events.push_back(train.time[i]);
    if (events.empty()) throw DataError("time grid: no uncensored samples in the training data");
    std::sort(events.begin(), events.end());

    TimeGrid grid;
    for (std::size_t i = 1; i <= k; ++i) {
        const double t = nearest_rank_quantile(events, static_cast<double>(i) / static_cast<double>(k + 1));
        if (t > 0.0 && (grid.times.empty() || t > grid.times.back())) grid.times.push_back(t);
    }
    if (grid.times.size() < k) {
        const double top = events.back();
        if (!(top > 0.0)) throw DataError("time grid: all uncensored times are zero");
        grid.times.clear();
        for (std::size_t i = 1; i <= k; ++i)
            grid.times.push_back(top * static_cast<double>(i) / static_cast<double>(k));
    }
    return grid;
}

} // namespace dys::data

#endif // DYS_DATA_DATASET_HPP
