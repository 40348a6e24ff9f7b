#ifndef DYS_NUMERIC_ADAM_HPP
#define DYS_NUMERIC_ADAM_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dys/error.hpp"
#include "dys/numeric/mlp.hpp"

namespace dys::numeric {

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Moment accumulators for a flat parameter vector.
struct AdamState {
    AdamConfig config;
    std::size_t step = 0;
    std::vector<double> m;
    std::vector<double> v;

    AdamState() = default;
    AdamState(std::size_t n, AdamConfig cfg) : config(cfg), m(n, 0.0), v(n, 0.0) {}
};

/// Bias-corrected Adam update over a collection of parameter blocks laid out
/// back to back in `grads`. Throws NumericError (and leaves everything
/// untouched) if any gradient is non-finite.
inline void adam_step(AdamState& state, std::span<const std::span<double>> blocks, std::span<const double> grads)
{
    std::size_t total = 0;
    for (const auto& b : blocks) total += b.size();
    if (total != grads.size() || total != state.m.size() || total != state.v.size())
        throw ShapeError("adam_step: " + std::to_string(grads.size()) + " gradients for " + std::to_string(total) +
                         " parameters and " + std::to_string(state.m.size()) + " moments");
    for (std::size_t i = 0; i < grads.size(); ++i)
        if (!std::isfinite(grads[i]))
            throw NumericError("adam_step: non-finite gradient at flat index " + std::to_string(i) + " (step " +
                               std::to_string(state.step + 1) + ")");

    const auto& c = state.config;
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(c.beta1, t);
    const double correction2 = 1.0 - std::pow(c.beta2, t);

    std::size_t k = 0;
    for (const auto& block : blocks) {
        for (double& theta : block) {
            const double g = grads[k];
            state.m[k] = c.beta1 * state.m[k] + (1.0 - c.beta1) * g;
            state.v[k] = c.beta2 * state.v[k] + (1.0 - c.beta2) * g * g;
            const double m_hat = state.m[k] / correction1;
            const double v_hat = state.v[k] / correction2;
            theta -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
            ++k;
        }
    }
}

inline void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads)
{
    const std::span<double> blocks[] = {params};
    adam_step(state, std::span<const std::span<double>>(blocks), grads);
}

/// Adam on a network; `grads` must mirror `params` layer by layer.
inline void adam_step(AdamState& state, MLPParams& params, const MLPGradients& grads)
{
    if (grads.layers.size() != params.layers.size()) throw ShapeError("adam_step: gradient layer count mismatch");
    std::vector<std::span<double>> blocks;
    std::vector<double> flat;
    flat.reserve(params.parameter_count());
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& p = params.layers[l];
        const auto& g = grads.layers[l];
        if (p.weight.rows() != g.weight.rows() || p.weight.cols() != g.weight.cols() || p.bias.size() != g.bias.size())
            throw ShapeError("adam_step: gradient shape mismatch at layer " + std::to_string(l));
        blocks.emplace_back(p.weight.data(), static_cast<std::size_t>(p.weight.size()));
        flat.insert(flat.end(), g.weight.data(), g.weight.data() + g.weight.size());
        blocks.emplace_back(p.bias.data(), static_cast<std::size_t>(p.bias.size()));
        flat.insert(flat.end(), g.bias.data(), g.bias.data() + g.bias.size());
    }
    adam_step(state, std::span<const std::span<double>>(blocks), flat);
}

} // namespace dys::numeric

#endif // DYS_NUMERIC_ADAM_HPP
