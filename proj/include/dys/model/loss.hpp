#ifndef DYS_MODEL_LOSS_HPP
#define DYS_MODEL_LOSS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "dys/data/dataset.hpp"
#include "dys/error.hpp"
#include "dys/model/model.hpp"

namespace dys::model {

/// Ranked probability score of one survival curve:
///   sum_{t_k < T} (1 - S_k)^2 + delta * sum_{t_k >= T} S_k^2
inline double rps_loss(std::span<const double> survival, double time, int event, const data::TimeGrid& grid)
{
    if (survival.size() != grid.size()) throw ShapeError("rps_loss: survival curve and grid differ in length");
    double loss = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (grid.times[k] < time) {
            const double d = 1.0 - survival[k];
            loss += d * d;
        } else if (event == 1) {
            loss += survival[k] * survival[k];
        }
    }
    return loss;
}

/// d rps_loss / d S_k.
inline void rps_loss_grad(std::span<const double> survival, double time, int event, const data::TimeGrid& grid,
                          std::span<double> out)
{
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (grid.times[k] < time)
            out[k] = -2.0 * (1.0 - survival[k]);
        else
            out[k] = event == 1 ? 2.0 * survival[k] : 0.0;
    }
}

/// Gradient of the RPS loss with respect to the logits z, for one sample.
/// Writes the loss to `loss`.
inline void rps_logit_grad(const Vector& logits, double time, int event, const data::TimeGrid& grid, double& loss,
                           Eigen::Ref<Vector> dz)
{
    const Vector pmf = softmax(logits);
    // With an overflow bin pmf has K + 1 entries; only the K grid survivals
    // enter the loss.
    const Vector surv = survival_from_pmf(pmf);
    const auto K = grid.size();
    if (static_cast<std::size_t>(pmf.size()) != K && static_cast<std::size_t>(pmf.size()) != K + 1)
        throw ShapeError("rps_logit_grad: logits and grid differ in length");
    loss = rps_loss(std::span(surv.data(), K), time, event, grid);
    Vector ds = Vector::Zero(pmf.size());
    rps_loss_grad(std::span(surv.data(), K), time, event, grid, std::span(ds.data(), K));
    // S_k = sum_{m > k} p_m  =>  dL/dp_m = sum_{k < m} dL/dS_k
    Vector dp(pmf.size());
    double acc = 0.0;
    for (Eigen::Index m = 0; m < pmf.size(); ++m) {
        dp(m) = acc;
        acc += ds(m);
    }
    const double inner = pmf.dot(dp);
    dz = pmf.cwiseProduct((dp.array() - inner).matrix());
}

namespace detail {

/// Sample order by descending time; ties grouped.
inline std::vector<std::size_t> by_descending_time(std::span<const double> time)
{
    std::vector<std::size_t> order(time.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return time[a] > time[b]; });
    return order;
}

inline void check_cox_inputs(std::span<const double> risk, std::span<const double> time, std::span<const int> event)
{
    if (risk.size() != time.size() || risk.size() != event.size())
        throw ShapeError("cox_loss: risk, time and event lengths differ");
    if (std::none_of(event.begin(), event.end(), [](int e) { return e == 1; }))
        throw DataError("cox_loss: no events in the batch");
}

} // namespace detail

/// Negative log partial likelihood averaged over events, Breslow ties:
///   -(1/E) sum_{i: delta_i=1} [ r_i - log sum_{j: T_j >= T_i} exp(r_j) ]
/// If `grad` is non-empty it receives d loss / d r.
inline double cox_loss(std::span<const double> risk, std::span<const double> time, std::span<const int> event,
                       std::span<double> grad = {})
{
    detail::check_cox_inputs(risk, time, event);
    const auto n = risk.size();
    const double shift = *std::max_element(risk.begin(), risk.end());
    const auto order = detail::by_descending_time(time);

    // log of the risk-set denominators, one per tie group, accumulated from the latest time down.
    std::vector<double> log_denominator(n);
    double running = 0.0;
    for (std::size_t a = 0; a < n;) {
        std::size_t b = a;
        while (b < n && time[order[b]] == time[order[a]]) running += std::exp(risk[order[b++]] - shift);
        const double ld = std::log(running) + shift;
        for (std::size_t c = a; c < b; ++c) log_denominator[order[c]] = ld;
        a = b;
    }

    double events = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (event[i] == 1) {
            total -= risk[i] - log_denominator[i];
            events += 1.0;
        }
    const double loss = total / events;

    if (!grad.empty()) {
        if (grad.size() != n) throw ShapeError("cox_loss: gradient buffer has the wrong length");
        // d/dr_k = -(1/E) [ delta_k - exp(r_k) sum_{i: delta_i=1, T_i <= T_k} 1/D_i ]
        // Walk ascending time accumulating sum over events of 1/D_i (scaled by exp(shift)).
        std::vector<double> inv_acc(n);
        double acc = 0.0;
        for (std::size_t b = n; b > 0;) {
            std::size_t a = b;
            const double t = time[order[b - 1]];
            while (a > 0 && time[order[a - 1]] == t) {
                const auto i = order[--a];
                if (event[i] == 1) acc += std::exp(shift - log_denominator[i]);
            }
            for (std::size_t c = a; c < b; ++c) inv_acc[order[c]] = acc;
            b = a;
        }
        for (std::size_t k = 0; k < n; ++k)
            grad[k] = -((event[k] == 1 ? 1.0 : 0.0) - std::exp(risk[k] - shift) * inv_acc[k]) / events;
    }
    return loss;
}

/// Binary entropy with 0 log 0 = 0.
inline double binary_entropy(double s)
{
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return -(s * std::log(s) + (1.0 - s) * std::log1p(-s));
}

/// d binary_entropy(s(mu)) / d mu; zero wherever the gate is saturated.
inline double binary_entropy_mu_grad(const Gate& g)
{
    const double slope = g.slope();
    if (slope == 0.0) return 0.0;
    const double s = g.value();
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return (std::log1p(-s) - std::log(s)) * slope;
}

/// lambda * (sum_j s(mu_j) + alpha * sum_{j,l} s(mu_jl))
inline double sparsity_loss(const DySModel& m, double lambda, double alpha)
{
    double mains = 0.0, pairs = 0.0;
    for (const auto& e : m.mains) mains += e.gate.value();
    for (const auto& e : m.interactions) pairs += e.gate.value();
    return lambda * (mains + alpha * pairs);
}

/// tau * sum over all gates of binary_entropy(s(mu))
inline double entropy_loss(const DySModel& m, double tau)
{
    double total = 0.0;
    for (const auto& e : m.mains) total += binary_entropy(e.gate.value());
    for (const auto& e : m.interactions) total += binary_entropy(e.gate.value());
    return tau * total;
}

} // namespace dys::model

#endif // DYS_MODEL_LOSS_HPP
