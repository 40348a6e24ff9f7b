#ifndef DYS_TESTS_GRADIENT_SUPPORT_HPP
#define DYS_TESTS_GRADIENT_SUPPORT_HPP

#include <algorithm>
#include <limits>
#include <span>
#include <vector>

#include "dys/model/train.hpp"
#include "dys/numeric/gradcheck.hpp"

namespace dys::testing {

using model::DySModel;
using model::Matrix;
using model::MLPParams;

// Smallest |pre-activation| of any hidden unit over the batch. A central
// difference straddling a ReLU kink is meaningless, so callers skip near-kink draws.
inline double min_hidden_preactivation(const DySModel& m, const Matrix& x)
{
    double best = std::numeric_limits<double>::infinity();
    const auto scan = [&](const MLPParams& net, const Matrix& in) {
        Matrix h = in;
        for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) {
            Matrix pre = (h * net.layers[l].weight.transpose()).rowwise() + net.layers[l].bias.transpose();
            best = std::min(best, pre.cwiseAbs().minCoeff());
            h = pre.cwiseMax(0.0);
        }
    };
    for (const auto& e : m.mains) scan(e.net, model::main_input(x, e.feature));
    for (const auto& e : m.interactions) scan(e.net, model::pair_input(x, e.first, e.second));
    return best;
}

struct GradCase {
    double max_rel = 0.0;
    std::size_t checked = 0;
};

inline GradCase check_objective_gradient(DySModel m, const Matrix& x, const std::vector<double>& t, const std::vector<int>& ev,
                                         const model::Regularization& reg)
{
    const model::TrainScope all;
    model::ModelGradient g(m);
    model::evaluate_objective(m, {x, t, ev}, reg, &g);
    const auto flat = model::flatten(g, all);
    std::vector<double> analytic = flat.nets;
    analytic.insert(analytic.end(), flat.gates.begin(), flat.gates.end());

    auto blocks = model::parameter_blocks(m, all);
    std::vector<std::span<double>> spans = blocks.nets;
    spans.insert(spans.end(), blocks.gates.begin(), blocks.gates.end());
    std::vector<double> theta;
    for (auto s : spans) theta.insert(theta.end(), s.begin(), s.end());
    const auto load = [&](std::span<const double> v) {
        std::size_t i = 0;
        for (auto s : spans)
            for (auto& d : s) d = v[i++];
    };
    const auto loss = [&](std::span<const double> v) {
        load(v);
        return model::evaluate_objective(m, {x, t, ev}, reg).total();
    };
    const auto numeric = numeric::finite_diff_grad(loss, theta, 1e-6);
    load(theta);
    const auto report = numeric::compare_gradients(analytic, numeric, {}, 1e-4);
    return {report.max_relative_error, report.checked};
}

} // namespace dys::testing

#endif // DYS_TESTS_GRADIENT_SUPPORT_HPP
