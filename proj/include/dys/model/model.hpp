#ifndef DYS_MODEL_MODEL_HPP
#define DYS_MODEL_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dys/data/dataset.hpp"
#include "dys/error.hpp"
#include "dys/numeric/mlp.hpp"
#include "dys/numeric/smooth_step.hpp"
#include "dys/random.hpp"

namespace dys::model {

using numeric::Matrix;
using numeric::MLPParams;
using numeric::Vector;

enum class HeadMode { RPS, Cox };

inline const char* to_string(HeadMode m) { return m == HeadMode::RPS ? "rps" : "cox"; }

inline HeadMode head_mode_from_string(const std::string& s)
{
    if (s == "rps") return HeadMode::RPS;
    if (s == "cox") return HeadMode::Cox;
    throw ParameterError("unknown head mode '" + s + "' (expected rps or cox)");
}

/// Learnable gate: value s(mu) = smooth_step(mu, gamma).
struct Gate {
    double mu = 0.0;
    double gamma = 1.0;

    double value() const { return numeric::smooth_step(mu, gamma); }
    double slope() const { return numeric::smooth_step_grad(mu, gamma); }

    static Gate open(double gamma) { return {gamma, gamma}; }
    static Gate closed(double gamma) { return {-gamma, gamma}; }

    bool operator==(const Gate&) const = default;
};

struct FeatureEffect {
    std::size_t feature = 0;
    MLPParams net; // 1 -> hidden -> head
    Gate gate;

    bool operator==(const FeatureEffect&) const = default;
};

struct InteractionEffect {
    std::size_t first = 0; // first < second
    std::size_t second = 0;
    MLPParams net; // 2 -> hidden -> head
    Gate gate;

    bool operator==(const InteractionEffect&) const = default;
};

/// Gated GA2M whose summed logits feed a K-bin softmax (RPS head) or act as a
/// scalar risk (Cox head).
struct DySModel {
    std::vector<FeatureEffect> mains;
    std::vector<InteractionEffect> interactions;
    // Ungated per-output baseline logit, zero at construction. Closing every
    // gate leaves predictions at softmax(intercept).
    Vector intercept;
    data::TimeGrid grid;
    HeadMode head = HeadMode::RPS;
    std::vector<std::size_t> hidden{32};
    double gamma = 1.0;
    bool frozen_main = false;
    // RPS only: an extra softmax bin for events after the last grid time, so
    // the survival curve need not reach 0 at t_K.
    bool overflow_bin = false;
    std::size_t input_dim = 0;
    std::vector<std::string> feature_names;

    /// Logits per sample.
    std::size_t output_dim() const { return head == HeadMode::RPS ? grid.size() + (overflow_bin ? 1 : 0) : 1; }
    /// Reported times per sample: the grid for RPS, a single risk for Cox.
    std::size_t time_count() const { return head == HeadMode::RPS ? grid.size() : 1; }

    std::vector<std::size_t> net_sizes(std::size_t in) const
    {
        std::vector<std::size_t> sizes{in};
        sizes.insert(sizes.end(), hidden.begin(), hidden.end());
        sizes.push_back(output_dim());
        return sizes;
    }

    void validate() const
    {
        const auto out = output_dim();
        if (static_cast<std::size_t>(intercept.size()) != out) throw ShapeError("intercept length does not match the head");
        for (const auto& m : mains) {
            m.net.validate();
            if (m.net.input_dim() != 1) throw ShapeError("main effect net must take one input");
            if (m.net.output_dim() != out) throw ShapeError("main effect output dim does not match the head");
            if (m.feature >= input_dim) throw ShapeError("main effect feature index out of range");
        }
        for (const auto& e : interactions) {
            e.net.validate();
            if (e.net.input_dim() != 2) throw ShapeError("interaction net must take two inputs");
            if (e.net.output_dim() != out) throw ShapeError("interaction output dim does not match the head");
            if (!(e.first < e.second)) throw ShapeError("interaction pair must satisfy first < second");
            const auto has_main = [&](std::size_t j) {
                return std::any_of(mains.begin(), mains.end(), [&](const auto& m) { return m.feature == j; });
            };
            if (!has_main(e.first) || !has_main(e.second))
                throw ShapeError("interaction refers to a feature without a main effect");
        }
        for (std::size_t a = 0; a < interactions.size(); ++a)
            for (std::size_t b = a + 1; b < interactions.size(); ++b)
                if (interactions[a].first == interactions[b].first && interactions[a].second == interactions[b].second)
                    throw ShapeError("duplicate interaction pair");
        if (head == HeadMode::RPS) grid.validate();
        if (overflow_bin && head != HeadMode::RPS) throw ShapeError("overflow bin needs an RPS head");
    }

    bool operator==(const DySModel&) const = default;
};

/// One main effect per feature, nets of widths {1, hidden..., head}, gates at `gate_mu`.
inline DySModel make_model(std::size_t p, data::TimeGrid grid, HeadMode head, std::vector<std::size_t> hidden,
                           double gamma, double gate_mu, Rng& rng, bool overflow_bin = false)
{
    if (p == 0) throw ParameterError("make_model: no features");
    numeric::detail::check_width(gamma);
    DySModel m;
    m.grid = std::move(grid);
    m.head = head;
    m.hidden = std::move(hidden);
    m.gamma = gamma;
    m.input_dim = p;
    if (head == HeadMode::RPS) m.grid.validate();
    if (overflow_bin && head != HeadMode::RPS) throw ParameterError("make_model: overflow bin needs an RPS head");
    m.overflow_bin = overflow_bin;
    m.intercept = Vector::Zero(static_cast<Eigen::Index>(m.output_dim()));
    const auto sizes = m.net_sizes(1);
    for (std::size_t j = 0; j < p; ++j) m.mains.push_back({j, numeric::make_mlp(sizes, rng), {gate_mu, gamma}});
    return m;
}

inline void add_interaction(DySModel& m, std::size_t a, std::size_t b, double gate_mu, Rng& rng)
{
    if (a == b) throw ParameterError("interaction needs two distinct features");
    if (a > b) std::swap(a, b);
    m.interactions.push_back({a, b, numeric::make_mlp(m.net_sizes(2), rng), {gate_mu, m.gamma}});
}

/// Column of x for feature j as a [n x 1] matrix.
inline Matrix main_input(const Matrix& x, std::size_t j) { return x.col(static_cast<Eigen::Index>(j)); }

inline Matrix pair_input(const Matrix& x, std::size_t a, std::size_t b)
{
    Matrix in(x.rows(), 2);
    in.col(0) = x.col(static_cast<Eigen::Index>(a));
    in.col(1) = x.col(static_cast<Eigen::Index>(b));
    return in;
}

/// f(X) = b + sum_j s(mu_j) f_j(x_j) + sum_{j,l} s(mu_jl) f_jl(x_j, x_l), rows are samples.
/// Effects with a closed gate are skipped, so they cannot influence the result.
inline Matrix logits_batch(const DySModel& m, const Matrix& x)
{
    if (static_cast<std::size_t>(x.cols()) != m.input_dim)
        throw ShapeError("model: input has " + std::to_string(x.cols()) + " features, model expects " +
                         std::to_string(m.input_dim));
    Matrix z = m.intercept.transpose().replicate(x.rows(), 1);
    for (const auto& e : m.mains) {
        const double s = e.gate.value();
        if (s == 0.0) continue;
        z += s * numeric::mlp_forward_batch(e.net, main_input(x, e.feature));
    }
    for (const auto& e : m.interactions) {
        const double s = e.gate.value();
        if (s == 0.0) continue;
        z += s * numeric::mlp_forward_batch(e.net, pair_input(x, e.first, e.second));
    }
    return z;
}

inline Matrix to_row(std::span<const double> x)
{
    Matrix row(1, static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = x[i];
    return row;
}

inline Vector model_logits(const DySModel& m, std::span<const double> x)
{
    return logits_batch(m, to_row(x)).row(0).transpose();
}

/// Max-shifted softmax.
inline Vector softmax(const Vector& z)
{
    const double top = z.maxCoeff();
    Vector p = (z.array() - top).exp().matrix();
    return p / p.sum();
}

/// S(t_k) = 1 - sum_{m <= k} P(t_m), computed as the tail sum sum_{m > k} P(t_m)
/// so the last entry is exactly 0.
inline Vector survival_from_pmf(const Vector& pmf)
{
    const auto k = pmf.size();
    Vector s(k);
    double tail = 0.0;
    for (Eigen::Index i = k; i-- > 0;) {
        s(i) = tail;
        tail += pmf(i);
    }
    return s;
}

inline void require_rps(const DySModel& m, const char* what)
{
    if (m.head != HeadMode::RPS) throw ParameterError(std::string(what) + " requires an RPS-head model");
}

inline Vector predict_pmf(const DySModel& m, std::span<const double> x)
{
    require_rps(m, "predict_pmf");
    return softmax(model_logits(m, x));
}

/// S(t_1..t_K). With an overflow bin the last value is its probability.
inline Vector predict_survival(const DySModel& m, std::span<const double> x)
{
    require_rps(m, "predict_survival");
    return survival_from_pmf(predict_pmf(m, x)).head(static_cast<Eigen::Index>(m.grid.size()));
}

/// [n x K] survival curves.
inline Matrix survival_batch(const DySModel& m, const Matrix& x)
{
    require_rps(m, "survival_batch");
    Matrix z = logits_batch(m, x);
    const auto K = static_cast<Eigen::Index>(m.grid.size());
    Matrix s(z.rows(), K);
    for (Eigen::Index i = 0; i < z.rows(); ++i)
        s.row(i) = survival_from_pmf(softmax(z.row(i).transpose())).head(K).transpose();
    return s;
}

/// Per-time risk scores for AUC: 1 - S(t_k | x) in RPS mode, the scalar risk
/// replicated across `times` columns in Cox mode.
inline Matrix risk_matrix(const DySModel& m, const Matrix& x, std::size_t times)
{
    if (m.head == HeadMode::RPS) return (1.0 - survival_batch(m, x).array()).matrix();
    Matrix z = logits_batch(m, x);
    Matrix r(z.rows(), static_cast<Eigen::Index>(times));
    for (Eigen::Index k = 0; k < r.cols(); ++k) r.col(k) = z.col(0);
    return r;
}

inline std::vector<std::size_t> active_features(const DySModel& m)
{
    std::vector<std::size_t> out;
    for (const auto& e : m.mains)
        if (e.gate.value() > 0.0) out.push_back(e.feature);
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<std::pair<std::size_t, std::size_t>> active_interactions(const DySModel& m)
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& e : m.interactions)
        if (e.gate.value() > 0.0) out.emplace_back(e.first, e.second);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace dys::model

#endif // DYS_MODEL_MODEL_HPP
