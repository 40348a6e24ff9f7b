#ifndef DYS_NUMERIC_GRADCHECK_HPP
#define DYS_NUMERIC_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "dys/error.hpp"

namespace dys::numeric {

/// Central-difference gradient of `loss` at `params`. Each coordinate is
/// perturbed in place and restored before returning.
inline std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& loss,
                                            std::span<double> params, double h)
{
    if (!(h > 0.0)) throw ParameterError("finite_diff_grad: step h must be > 0");
    std::vector<double> grad(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + h;
        const double up = loss(params);
        params[i] = saved - h;
        const double down = loss(params);
        params[i] = saved;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::size_t worst_parameter_index = 0;
    std::size_t checked = 0;
};

/// |a - b| / max(|a|, |b|, floor). The floor keeps near-zero coordinates from
/// dominating the report with cancellation noise.
inline double relative_error(double a, double b, double floor = 1e-6)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Compares analytic and numeric gradients over the coordinates where
/// `include` is true (all when empty).
inline GradCheckReport compare_gradients(std::span<const double> analytic, std::span<const double> numeric,
                                         std::span<const bool> include = {}, double floor = 1e-6)
{
    if (analytic.size() != numeric.size()) throw ShapeError("compare_gradients: length mismatch");
    GradCheckReport report;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        if (!include.empty() && !include[i]) continue;
        ++report.checked;
        const double err = relative_error(analytic[i], numeric[i], floor);
        if (err > report.max_relative_error) {
            report.max_relative_error = err;
            report.worst_parameter_index = i;
        }
    }
    return report;
}

} // namespace dys::numeric

#endif // DYS_NUMERIC_GRADCHECK_HPP
