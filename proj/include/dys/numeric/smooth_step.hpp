#ifndef DYS_NUMERIC_SMOOTH_STEP_HPP
#define DYS_NUMERIC_SMOOTH_STEP_HPP

#include "dys/error.hpp"

namespace dys::numeric {

namespace detail {
inline void check_width(double gamma)
{
    if (!(gamma > 0.0)) throw ParameterError("smooth_step: width gamma must be > 0");
}
} // namespace detail

/// Piecewise cubic gate with band width gamma:
///
///   0                                   x <= -gamma/2
///   -2/gamma^3 x^3 + 3/(2 gamma) x + 1/2   inside the band
///   1                                   x >= gamma/2
///
/// The function is C^1 and returns exact 0.0 / 1.0 outside the band.
inline double smooth_step(double x, double gamma)
{
    detail::check_width(gamma);
    const double half = 0.5 * gamma;
    if (x <= -half) return 0.0;
    if (x >= half) return 1.0;
    const double g3 = gamma * gamma * gamma;
    return (-2.0 / g3) * x * x * x + (1.5 / gamma) * x + 0.5;
}

inline double smooth_step_grad(double x, double gamma)
{
    detail::check_width(gamma);
    const double half = 0.5 * gamma;
    if (x <= -half || x >= half) return 0.0;
    const double g3 = gamma * gamma * gamma;
    return (-6.0 / g3) * x * x + 1.5 / gamma;
}

} // namespace dys::numeric

#endif // DYS_NUMERIC_SMOOTH_STEP_HPP
