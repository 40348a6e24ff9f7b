#ifndef DYS_SELECTION_HPP
#define DYS_SELECTION_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dys/error.hpp"

namespace dys::selection {

struct BisectionStep {
    double lambda = 0.0;
    std::size_t active = 0;
};

/// Lambda bracket: lambda_low selected too many features, lambda_high too few.
struct BisectionState {
    std::optional<double> lambda_low;
    std::optional<double> lambda_high;
    double lambda = 0.1;
    std::size_t iterations = 0;
    std::size_t max_iterations = 30;
};

/// Raised when the iteration cap is hit; carries what was learned.
class BisectionError : public Error {
public:
    BisectionError(const std::string& what, BisectionState state, std::vector<BisectionStep> trajectory)
        : Error(what), state_(std::move(state)), trajectory_(std::move(trajectory))
    {
    }

    const BisectionState& state() const { return state_; }
    const std::vector<BisectionStep>& trajectory() const { return trajectory_; }

private:
    BisectionState state_;
    std::vector<BisectionStep> trajectory_;
};

template <typename Fit>
struct BisectionResult {
    Fit fit;
    double lambda = 0.0;
    std::vector<BisectionStep> trajectory;
};

/// Searches lambda until `fit_at(lambda)` yields exactly k active features.
///
/// While the selection is too sparse and no lower bound is known lambda is
/// halved; while too dense with no upper bound it is doubled; otherwise the
/// bracket midpoint is tried. One fit per iteration.
///
/// `fit_at` returns any fit object; `count` maps it to its number of active
/// features.
template <typename FitAt, typename Count>
auto bisect_to_k(FitAt&& fit_at, Count&& count, std::size_t k, double lambda0, std::size_t max_iterations = 30)
    -> BisectionResult<decltype(fit_at(0.0))>
{
    if (k < 1) throw ParameterError("bisection: k must be >= 1");
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0)) throw ParameterError("bisection: lambda0 must be > 0");
    if (max_iterations < 1) throw ParameterError("bisection: max_iterations must be >= 1");

    BisectionState state;
    state.lambda = lambda0;
    state.max_iterations = max_iterations;
    std::vector<BisectionStep> trajectory;

    while (state.iterations < state.max_iterations) {
        ++state.iterations;
        auto fit = fit_at(state.lambda);
        const std::size_t active = count(fit);
        trajectory.push_back({state.lambda, active});
        if (active == k) return {std::move(fit), state.lambda, std::move(trajectory)};

        if (active < k) {
            state.lambda_high = state.lambda;
            state.lambda = state.lambda_low ? 0.5 * (*state.lambda_low + *state.lambda_high) : 0.5 * state.lambda;
        } else {
            state.lambda_low = state.lambda;
            state.lambda = state.lambda_high ? 0.5 * (*state.lambda_low + *state.lambda_high) : 2.0 * state.lambda;
        }
    }

    // Closest counts seen on either side of k.
    std::string msg = "bisection: no lambda selected exactly " + std::to_string(k) + " features in " +
                      std::to_string(state.max_iterations) + " iterations";
    std::optional<std::size_t> above, below;
    for (const auto& s : trajectory) {
        if (s.active > k && (!above || s.active < *above)) above = s.active;
        if (s.active < k && (!below || s.active > *below)) below = s.active;
    }
    if (above) msg += "; closest denser selection " + std::to_string(*above);
    if (below) msg += "; closest sparser selection " + std::to_string(*below);
    if (state.lambda_low) msg += "; lambda_low " + std::to_string(*state.lambda_low);
    if (state.lambda_high) msg += "; lambda_high " + std::to_string(*state.lambda_high);
    throw BisectionError(msg, state, std::move(trajectory));
}

} // namespace dys::selection

#endif // DYS_SELECTION_HPP
