#ifndef DYS_NUMERIC_MLP_HPP
#define DYS_NUMERIC_MLP_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dys/error.hpp"
#include "dys/random.hpp"

namespace dys::numeric {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One fully connected layer: y = W x + b, W is [out x in].
struct DenseLayer {
    Matrix weight;
    Vector bias;

    std::size_t in_dim() const { return static_cast<std::size_t>(weight.cols()); }
    std::size_t out_dim() const { return static_cast<std::size_t>(weight.rows()); }

    bool operator==(const DenseLayer&) const = default;
};

/// Fully connected network with ReLU after every layer except the last.
struct MLPParams {
    std::vector<DenseLayer> layers;

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
    std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }

    std::size_t parameter_count() const
    {
        std::size_t n = 0;
        for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
        return n;
    }

    /// Throws ShapeError unless layer dimensions chain.
    void validate() const
    {
        if (layers.empty()) throw ShapeError("MLP has no layers");
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const auto& l = layers[i];
            if (static_cast<std::size_t>(l.bias.size()) != l.out_dim())
                throw ShapeError("layer " + std::to_string(i) + ": bias length " +
                                 std::to_string(l.bias.size()) + " != output dim " +
                                 std::to_string(l.out_dim()));
            if (i > 0 && layers[i - 1].out_dim() != l.in_dim())
                throw ShapeError("layer " + std::to_string(i) + ": input dim " +
                                 std::to_string(l.in_dim()) + " != previous output dim " +
                                 std::to_string(layers[i - 1].out_dim()));
        }
    }

    /// Same shapes, all zeros. Used as a gradient accumulator.
    MLPParams zeros_like() const
    {
        MLPParams z;
        z.layers.reserve(layers.size());
        for (const auto& l : layers)
            z.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()),
                                Vector::Zero(l.bias.size())});
        return z;
    }

    void set_zero()
    {
        for (auto& l : layers) {
            l.weight.setZero();
            l.bias.setZero();
        }
    }

    bool operator==(const MLPParams&) const = default;
};

/// Gradients share the parameter layout.
using MLPGradients = MLPParams;

/// Visits each contiguous parameter block (weight, then bias, per layer).
template <typename Params, typename F>
void for_each_block(Params& params, F&& f)
{
    for (auto& l : params.layers) {
        f(std::span(l.weight.data(), static_cast<std::size_t>(l.weight.size())));
        f(std::span(l.bias.data(), static_cast<std::size_t>(l.bias.size())));
    }
}

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
/// `sizes` lists the layer widths from input to output, e.g. {1, 32, K}.
inline MLPParams make_mlp(std::span<const std::size_t> sizes, Rng& rng)
{
    if (sizes.size() < 2) throw ShapeError("make_mlp: need at least input and output sizes");
    MLPParams p;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        const auto in = static_cast<Eigen::Index>(sizes[i]);
        const auto out = static_cast<Eigen::Index>(sizes[i + 1]);
        if (in == 0 || out == 0) throw ShapeError("make_mlp: zero-width layer");
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        DenseLayer layer{Matrix(out, in), Vector(out)};
        for (Eigen::Index c = 0; c < in; ++c)
            for (Eigen::Index r = 0; r < out; ++r) layer.weight(r, c) = rng.uniform(-bound, bound);
        for (Eigen::Index r = 0; r < out; ++r) layer.bias(r) = rng.uniform(-bound, bound);
        p.layers.push_back(std::move(layer));
    }
    return p;
}

/// Activations kept from a batched forward pass for the backward pass.
struct ForwardCache {
    std::vector<Matrix> inputs; // inputs[l] is the [B x in_l] input to layer l
};

/// Batched forward pass. Rows of `x` are samples. Returns [B x out] logits.
inline Matrix mlp_forward_batch(const MLPParams& params, const Matrix& x, ForwardCache* cache = nullptr)
{
    if (params.layers.empty()) throw ShapeError("MLP has no layers");
    if (static_cast<std::size_t>(x.cols()) != params.input_dim())
        throw ShapeError("mlp_forward: input has " + std::to_string(x.cols()) + " columns, network expects " +
                         std::to_string(params.input_dim()));
    if (cache) {
        cache->inputs.clear();
        cache->inputs.reserve(params.layers.size());
    }
    Matrix h = x;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        Matrix out = h * layer.weight.transpose();
        out.rowwise() += layer.bias.transpose();
        if (l + 1 < params.layers.size()) out = out.cwiseMax(0.0);
        if (cache) cache->inputs.push_back(std::move(h));
        h = std::move(out);
    }
    return h;
}

/// Accumulates parameter gradients of sum_rows(upstream . forward) into `grads`
/// and optionally writes the [B x in] input gradient.
///
/// ReLU's subgradient at 0 is 0. Hidden inputs of layer l+1 are the post-ReLU
/// activations, so "activation > 0" is the same mask as "pre-activation > 0".
inline void mlp_backward_batch(const MLPParams& params, const ForwardCache& cache, const Matrix& upstream,
                               MLPGradients& grads, Matrix* input_grad = nullptr)
{
    if (static_cast<std::size_t>(upstream.cols()) != params.output_dim())
        throw ShapeError("mlp_backward: upstream gradient has " + std::to_string(upstream.cols()) +
                         " columns, network outputs " + std::to_string(params.output_dim()));
    if (cache.inputs.size() != params.layers.size() || cache.inputs.front().rows() != upstream.rows())
        throw ShapeError("mlp_backward: cache does not match upstream batch");

    Matrix delta = upstream;
    for (std::size_t l = params.layers.size(); l-- > 0;) {
        const auto& layer = params.layers[l];
        const Matrix& in = cache.inputs[l];
        grads.layers[l].weight.noalias() += delta.transpose() * in;
        grads.layers[l].bias.noalias() += delta.colwise().sum().transpose();
        if (l == 0 && !input_grad) break;
        Matrix next = delta * layer.weight;
        if (l > 0) next = next.cwiseProduct((in.array() > 0.0).cast<double>().matrix());
        delta = std::move(next);
    }
    if (input_grad) *input_grad = std::move(delta);
}

/// Single-sample forward pass; returns the final-layer pre-activation.
inline Vector mlp_forward(const MLPParams& params, std::span<const double> x)
{
    params.validate();
    Matrix row(1, static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = x[i];
    return mlp_forward_batch(params, row).row(0).transpose();
}

struct MLPBackward {
    MLPGradients param_grads;
    Vector input_grad;
};

/// Reverse-mode gradients of upstream . mlp_forward(params, x).
inline MLPBackward mlp_backward(const MLPParams& params, std::span<const double> x,
                                std::span<const double> upstream)
{
    params.validate();
    if (upstream.size() != params.output_dim())
        throw ShapeError("mlp_backward: upstream gradient length " + std::to_string(upstream.size()) +
                         " != output dim " + std::to_string(params.output_dim()));
    Matrix row(1, static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = x[i];
    ForwardCache cache;
    mlp_forward_batch(params, row, &cache);
    Matrix up(1, static_cast<Eigen::Index>(upstream.size()));
    for (std::size_t i = 0; i < upstream.size(); ++i) up(0, static_cast<Eigen::Index>(i)) = upstream[i];
    MLPBackward out{params.zeros_like(), {}};
    Matrix dx;
    mlp_backward_batch(params, cache, up, out.param_grads, &dx);
    out.input_grad = dx.row(0).transpose();
    return out;
}

} // namespace dys::numeric

#endif // DYS_NUMERIC_MLP_HPP
