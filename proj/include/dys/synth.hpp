#ifndef DYS_SYNTH_HPP
#define DYS_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dys/data/dataset.hpp"
#include "dys/error.hpp"
#include "dys/random.hpp"

namespace dys::synth {

/// Two-group data whose hazards are not proportional: group 1 has moderate
/// event times, group 2 has early or late ones.
struct SynthConfig {
    std::size_t n = 5000;
    std::size_t p = 10;
    double t_max = 8.0;
    std::uint64_t seed = 0;
    double censor_fraction = 0.0;
    // Features j >= informative get a zero coefficient. 0 means all p.
    std::size_t informative = 0;

    void validate() const
    {
        if (n < 2) throw ParameterError("synth: n must be at least 2");
        if (p < 1) throw ParameterError("synth: p must be at least 1");
        if (!(t_max > 0.0)) throw ParameterError("synth: t_max must be > 0");
        if (!(censor_fraction >= 0.0 && censor_fraction < 1.0))
            throw ParameterError("synth: censor_fraction must lie in [0, 1)");
        if (informative > p) throw ParameterError("synth: informative exceeds p");
    }
};

struct SynthOutput {
    data::SurvivalDataset dataset;
    std::vector<double> beta;
    std::vector<int> group; // 1 = moderate times, 2 = extreme times
};

inline double normal_cdf(double x, double mean, double sd)
{
    return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

inline SynthOutput generate(const SynthConfig& cfg)
{
    cfg.validate();
    Rng rng(cfg.seed);
    const auto n = cfg.n;
    const auto p = cfg.p;
    const std::size_t informative = cfg.informative == 0 ? p : cfg.informative;

    SynthOutput out;
    auto& ds = out.dataset;
    ds.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) ds.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rng.normal();
    out.beta.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        const double b = rng.normal();
        out.beta[j] = j < informative ? b : 0.0;
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < p; ++j) s += ds.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * out.beta[j];
        y[i] = s + rng.normal();
    }

    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = normal_cdf(y[i], mean, sd);

    // Median split on rank so the groups differ in size by at most one; the
    // median itself (odd n) goes to group 1.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
    const std::size_t n_first = (n + 1) / 2;
    out.group.assign(n, 2);
    for (std::size_t r = 0; r < n_first; ++r) out.group[order[r]] = 1;

    const auto min_max = [&](int g) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = 0; i < n; ++i)
            if (out.group[i] == g) {
                lo = std::min(lo, u[i]);
                hi = std::max(hi, u[i]);
            }
        return std::pair{lo, hi};
    };
    const auto scale = [](double v, std::pair<double, double> range, double a, double b) {
        const double width = range.second - range.first;
        const double unit = width > 0.0 ? (v - range.first) / width : 0.5;
        return a + unit * (b - a);
    };
    const double T = cfg.t_max;
    const auto r1 = min_max(1);
    const auto r2 = min_max(2);
    ds.time.resize(n);
    ds.event.assign(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (out.group[i] == 1) {
            ds.time[i] = scale(u[i], r1, 2.0 * T / 8.0, 6.0 * T / 8.0);
        } else {
            const double shift = rng.bernoulli(0.5) ? 6.0 * T / 8.0 : 0.0;
            ds.time[i] = scale(u[i], r2, 0.0, 2.0 * T / 8.0) + shift;
        }
    }

    if (cfg.censor_fraction > 0.0) {
        const auto m = static_cast<std::size_t>(std::llround(cfg.censor_fraction * static_cast<double>(n)));
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        rng.shuffle(std::span(idx));
        for (std::size_t r = 0; r < m; ++r) {
            ds.event[idx[r]] = 0;
            ds.time[idx[r]] = rng.uniform(0.0, ds.time[idx[r]]);
        }
    }

    ds.feature_names.reserve(p);
    for (std::size_t j = 0; j < p; ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));
    return out;
}

/// Proportional-hazards data with an additive log-risk
///   eta = sum_{j < informative} beta_j h_j(x_j)
/// and exponential times T = E / exp(eta), E ~ Exp(1). Shapes h_j cycle
/// through linear, tanh and a centred square. |beta_j| ~ U(beta_min, beta_max)
/// with a random sign; the remaining features have beta = 0.
struct AdditiveConfig {
    std::size_t n = 2000;
    std::size_t p = 50;
    std::size_t informative = 5;
    std::uint64_t seed = 0;
    double beta_min = 0.75;
    double beta_max = 1.25;
    double censor_fraction = 0.0;

    void validate() const
    {
        if (n < 2) throw ParameterError("synth: n must be at least 2");
        if (p < 1) throw ParameterError("synth: p must be at least 1");
        if (informative > p) throw ParameterError("synth: informative exceeds p");
        if (!(beta_min >= 0.0 && beta_max >= beta_min)) throw ParameterError("synth: need 0 <= beta_min <= beta_max");
        if (!(censor_fraction >= 0.0 && censor_fraction < 1.0))
            throw ParameterError("synth: censor_fraction must lie in [0, 1)");
    }
};

inline double additive_shape(std::size_t j, double x)
{
    switch (j % 3) {
    case 0: return x;
    case 1: return std::tanh(2.0 * x);
    default: return (x * x - 1.0) / std::sqrt(2.0);
    }
}

inline SynthOutput generate_additive(const AdditiveConfig& cfg)
{
    cfg.validate();
    Rng rng(cfg.seed);
    const auto n = cfg.n;
    const auto p = cfg.p;
    SynthOutput out;
    auto& ds = out.dataset;
    ds.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) ds.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rng.normal();
    out.beta.assign(p, 0.0);
    for (std::size_t j = 0; j < cfg.informative; ++j) {
        const double b = rng.uniform(cfg.beta_min, cfg.beta_max);
        out.beta[j] = rng.bernoulli(0.5) ? b : -b;
    }
    ds.time.resize(n);
    ds.event.assign(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        double eta = 0.0;
        for (std::size_t j = 0; j < cfg.informative; ++j)
            eta += out.beta[j] * additive_shape(j, ds.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        const double e = -std::log1p(-rng.uniform());
        ds.time[i] = e / std::exp(eta);
    }
    if (cfg.censor_fraction > 0.0) {
        const auto m = static_cast<std::size_t>(std::llround(cfg.censor_fraction * static_cast<double>(n)));
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        rng.shuffle(std::span(idx));
        for (std::size_t r = 0; r < m; ++r) {
            ds.event[idx[r]] = 0;
            ds.time[idx[r]] = rng.uniform(0.0, ds.time[idx[r]]);
        }
    }
    ds.feature_names.reserve(p);
    for (std::size_t j = 0; j < p; ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));
    return out;
}

/// Shortest-exact decimal for a double (17 significant digits).
inline std::string format_exact(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV with columns x1..xp, time, event.
inline void write_csv(std::ostream& os, const data::SurvivalDataset& ds)
{
    for (const auto& name : ds.feature_names) os << name << ',';
    os << "time,event\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (Eigen::Index j = 0; j < ds.x.cols(); ++j) os << format_exact(ds.x(static_cast<Eigen::Index>(i), j)) << ',';
        os << format_exact(ds.time[i]) << ',' << ds.event[i] << '\n';
    }
}

inline nlohmann::json sidecar_json(const SynthConfig& cfg, const SynthOutput& out)
{
    return {{"config",
             {{"n", cfg.n},
              {"p", cfg.p},
              {"t_max", cfg.t_max},
              {"seed", cfg.seed},
              {"censor_fraction", cfg.censor_fraction},
              {"informative", cfg.informative == 0 ? cfg.p : cfg.informative}}},
            {"beta", out.beta},
            {"group", out.group},
            {"group_labels", {{"1", "moderate times"}, {"2", "early or late times"}}}};
}

} // namespace dys::synth

#endif // DYS_SYNTH_HPP
