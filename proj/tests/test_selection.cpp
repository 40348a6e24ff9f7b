#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dys/selection.hpp"

using namespace dys;
using namespace dys::selection;

namespace {

std::size_t mock_count(double lambda)
{
    return static_cast<std::size_t>(std::clamp(std::round(10.0 / lambda), 0.0, 20.0));
}

// Plain transcription of the search for comparison.
std::vector<double> reference_lambdas(std::size_t (*count)(double), std::size_t k, double lambda, std::size_t cap)
{
    std::vector<double> out;
    double lo = -1, hi = -1;
    for (std::size_t it = 0; it < cap; ++it) {
        out.push_back(lambda);
        const auto c = count(lambda);
        if (c == k) break;
        if (c < k) {
            hi = lambda;
            lambda = lo < 0 ? lambda / 2 : (lo + hi) / 2;
        } else {
            lo = lambda;
            lambda = hi < 0 ? lambda * 2 : (lo + hi) / 2;
        }
    }
    return out;
}

} // namespace

TEST(Bisection, MockTerminatesAtLambdaTwo)
{
    std::size_t fits = 0;
    const auto r = bisect_to_k([&](double l) { ++fits; return mock_count(l); }, [](std::size_t c) { return c; }, 5, 1.0);
    EXPECT_EQ(r.fit, 5u);
    EXPECT_EQ(r.lambda, 2.0);
    EXPECT_EQ(fits, r.trajectory.size());
    ASSERT_EQ(r.trajectory.size(), 2u);
    EXPECT_EQ(r.trajectory[0].active, 10u);
}

TEST(Bisection, ReturnsAfterOneFitWhenAlreadyAtK)
{
    std::size_t fits = 0;
    const auto r = bisect_to_k([&](double l) { ++fits; return mock_count(l); }, [](std::size_t c) { return c; }, 10, 1.0);
    EXPECT_EQ(fits, 1u);
    EXPECT_EQ(r.lambda, 1.0);
}

TEST(Bisection, MatchesReferenceTrajectory)
{
    for (double l0 : {0.01, 0.3, 1.0, 7.0, 100.0})
        for (std::size_t k : {1u, 3u, 5u, 13u}) {
            const auto expect = reference_lambdas(&mock_count, k, l0, 30);
            try {
                const auto r = bisect_to_k(mock_count, [](std::size_t c) { return c; }, k, l0);
                ASSERT_EQ(r.trajectory.size(), expect.size());
                for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_EQ(r.trajectory[i].lambda, expect[i]);
            } catch (const BisectionError& e) {
                ASSERT_EQ(e.trajectory().size(), expect.size());
            }
        }
}

TEST(Bisection, SkippedCountReportsBracket)
{
    const auto skip = [](double l) -> std::size_t { return l < 1.0 ? 6 : 4; };
    try {
        bisect_to_k(skip, [](std::size_t c) { return c; }, 5, 3.0);
        FAIL() << "expected BisectionError";
    } catch (const BisectionError& e) {
        EXPECT_EQ(e.trajectory().size(), 30u);
        EXPECT_EQ(e.state().iterations, 30u);
        ASSERT_TRUE(e.state().lambda_low && e.state().lambda_high);
        EXPECT_LT(*e.state().lambda_low, 1.0);
        EXPECT_GE(*e.state().lambda_high, 1.0);
        const std::string what = e.what();
        EXPECT_NE(what.find("closest denser selection 6"), std::string::npos) << what;
        EXPECT_NE(what.find("closest sparser selection 4"), std::string::npos) << what;
    }
}

TEST(Bisection, BracketHalvesEveryIteration)
{
    const auto skip = [](double l) -> std::size_t { return l < 1.0 ? 6 : 4; };
    try {
        bisect_to_k(skip, [](std::size_t c) { return c; }, 5, 0.1, 20);
        FAIL() << "expected BisectionError";
    } catch (const BisectionError& e) {
        const auto& t = e.trajectory();
        // Once bracketed, each new lambda is the midpoint of the current bracket.
        double lo = -1, hi = -1;
        for (std::size_t i = 0; i < t.size(); ++i) {
            EXPECT_TRUE(lo < 0 || hi < 0 || t[i].lambda == 0.5 * (lo + hi)) << i;
            (t[i].active > 5 ? lo : hi) = t[i].lambda;
        }
        EXPECT_LT(hi - lo, 1e-4);
    }
}

TEST(Bisection, MonotoneMocksAlwaysHitK)
{
    for (double l0 : {1e-3, 0.05, 1.0, 40.0, 1e4}) {
        for (std::size_t k = 1; k <= 20; ++k) {
            const auto r = bisect_to_k(mock_count, [](std::size_t c) { return c; }, k, l0);
            EXPECT_EQ(r.fit, k);
            EXPECT_LE(r.trajectory.size(), 30u);
        }
    }
}

TEST(Bisection, RejectsBadArguments)
{
    const auto id = [](std::size_t c) { return c; };
    EXPECT_THROW(bisect_to_k(mock_count, id, 0, 1.0), ParameterError);
    EXPECT_THROW(bisect_to_k(mock_count, id, 3, 0.0), ParameterError);
    EXPECT_THROW(bisect_to_k(mock_count, id, 3, -1.0), ParameterError);
    EXPECT_THROW(bisect_to_k(mock_count, id, 3, 1.0, 0), ParameterError);
}
