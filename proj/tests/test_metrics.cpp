#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dys/metrics.hpp"
#include "dys/random.hpp"

using namespace dys;
using namespace dys::metrics;

namespace {

data::SurvivalDataset labels(std::vector<double> t, std::vector<int> e)
{
    data::SurvivalDataset ds;
    ds.x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.size()), 1);
    ds.time = std::move(t);
    ds.event = std::move(e);
    return ds;
}

// O(n^2) pair counting with unit weights.
double brute_auc(const data::SurvivalDataset& d, const Eigen::VectorXd& r, double t)
{
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(d.time[i] <= t && d.event[i] == 1)) continue;
        for (std::size_t j = 0; j < d.size(); ++j) {
            if (!(d.time[j] > t)) continue;
            const double ri = r(static_cast<Eigen::Index>(i)), rj = r(static_cast<Eigen::Index>(j));
            num += ri > rj ? 1.0 : (ri == rj ? 0.5 : 0.0);
            den += 1.0;
        }
    }
    return num / den;
}

Eigen::MatrixXd replicate(const Eigen::VectorXd& r, std::size_t k) { return r.replicate(1, static_cast<Eigen::Index>(k)); }

} // namespace

TEST(KaplanMeier, HandComputed)
{
    const auto km = kaplan_meier(std::vector<double>{1, 2, 3}, std::vector<int>{1, 0, 1});
    EXPECT_EQ(km.at(0.5), 1.0);
    EXPECT_EQ(km.at(1.0), 2.0 / 3.0);
    EXPECT_EQ(km.at(2.0), 2.0 / 3.0);
    EXPECT_EQ(km.at(3.0), 0.0);
    EXPECT_EQ(km.before(1.0), 1.0);
    EXPECT_EQ(km.before(3.0), 2.0 / 3.0);
    EXPECT_EQ(km.at_risk, (std::vector<std::size_t>{3, 1}));
}

TEST(KaplanMeier, NoEventsAndSingleEvent)
{
    const auto none = kaplan_meier(std::vector<double>{1, 2, 3}, std::vector<int>{0, 0, 0});
    EXPECT_EQ(none.at(100.0), 1.0);
    EXPECT_TRUE(none.times.empty());
    EXPECT_EQ(kaplan_meier(std::vector<double>{5}, std::vector<int>{1}).at(5.0), 0.0);
}

TEST(KaplanMeier, TiesAndMonotone)
{
    const auto km = kaplan_meier(std::vector<double>{2, 2, 2, 4, 5, 5}, std::vector<int>{1, 1, 0, 1, 0, 1});
    EXPECT_DOUBLE_EQ(km.at(2.0), 4.0 / 6.0);
    EXPECT_DOUBLE_EQ(km.at(4.0), 4.0 / 6.0 * 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(km.at(5.0), 4.0 / 6.0 * 2.0 / 3.0 * 0.5);
    for (std::size_t i = 1; i < km.survival.size(); ++i) EXPECT_LE(km.survival[i], km.survival[i - 1]);
}

TEST(KaplanMeier, Errors)
{
    EXPECT_THROW(kaplan_meier(std::vector<double>{}, std::vector<int>{}), DataError);
    EXPECT_THROW(kaplan_meier(std::vector<double>{-1}, std::vector<int>{1}), DataError);
    EXPECT_THROW(kaplan_meier(std::vector<double>{1, 2}, std::vector<int>{1}), ShapeError);
}

TEST(Auc, PerfectOrderingIsOne)
{
    std::vector<double> t;
    Eigen::VectorXd r(20);
    for (int i = 0; i < 20; ++i) {
        t.push_back(i + 1);
        r(i) = -i;
    }
    const auto d = labels(t, std::vector<int>(20, 1));
    const std::vector<double> times{3.5, 10.0, 17.2};
    const auto rep = cumulative_dynamic_auc(d, d, replicate(r, 3), times);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(rep.auc[k], 1.0);
    EXPECT_EQ(rep.mean_auc, 1.0);
}

TEST(Auc, ConstantRiskIsHalf)
{
    const auto d = labels({1, 2, 3, 4, 5, 6}, {1, 0, 1, 1, 0, 1});
    const std::vector<double> times{1.5, 3.5, 5.5};
    const auto rep = cumulative_dynamic_auc(d, d, Eigen::MatrixXd::Constant(6, 3, 0.3), times);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(rep.auc[k], 0.5);
}

TEST(Auc, MatchesBruteForceOracle)
{
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> t(30);
        for (auto& v : t) v = rng.uniform(0.0, 10.0);
        const auto d = labels(t, std::vector<int>(30, 1));
        Eigen::MatrixXd risk(30, 4);
        for (Eigen::Index i = 0; i < 30; ++i)
            for (Eigen::Index k = 0; k < 4; ++k) risk(i, k) = rng.normal();
        risk(3, 1) = risk(4, 1); // a tie
        const std::vector<double> times{2.0, 4.0, 6.0, 8.0};
        const auto rep = cumulative_dynamic_auc(d, d, risk, times);
        for (std::size_t k = 0; k < 4; ++k) {
            ASSERT_TRUE(rep.valid[k]);
            EXPECT_NEAR(rep.auc[k], brute_auc(d, risk.col(static_cast<Eigen::Index>(k)), times[k]), 1e-12);
        }
    }
}

TEST(Auc, CensoringWeightsUseLeftLimit)
{
    // Training censoring curve G: censorings at 2 and 4 among 5 samples.
    const auto train = labels({1, 2, 3, 4, 5}, {1, 0, 1, 0, 1});
    const auto G = censoring_curve(train);
    EXPECT_DOUBLE_EQ(G.before(3.0), 0.75);
    EXPECT_DOUBLE_EQ(G.before(5.0), 0.75 * 0.5);

    // Cases at 1 (w=1) and 3 (w=4/3) before t=3.5; controls at 4, 5.
    const auto test = labels({1, 3, 4, 5}, {1, 1, 0, 1});
    Eigen::VectorXd r(4);
    r << 0.9, 0.1, 0.5, 0.2;
    const std::vector<double> times{3.5};
    const auto rep = cumulative_dynamic_auc(train, test, replicate(r, 1), times);
    // Case 1 beats both controls, case 3 beats neither.
    const double w1 = 1.0, w3 = 1.0 / 0.75;
    EXPECT_NEAR(rep.auc[0], (w1 * 2.0 + w3 * 0.0) / ((w1 + w3) * 2.0), 1e-15);
}

TEST(Auc, InvalidTimesAreFlagged)
{
    const auto d = labels({1, 2, 3}, {1, 1, 1});
    Eigen::VectorXd r(3);
    r << 3, 2, 1;
    const std::vector<double> times{0.5, 1.5, 3.0};
    const auto rep = cumulative_dynamic_auc(d, d, replicate(r, 3), times);
    EXPECT_FALSE(rep.valid[0]); // no cases
    EXPECT_TRUE(rep.valid[1]);
    EXPECT_FALSE(rep.valid[2]); // no controls
    EXPECT_EQ(rep.mean_auc, 1.0);
}

TEST(Auc, ExcludesCasesWithZeroCensoringSurvival)
{
    const auto train = labels({1, 2}, {0, 0});
    const auto test = labels({2.5, 3, 4}, {1, 1, 0});
    Eigen::VectorXd r(3);
    r << 1, 2, 0;
    const std::vector<double> times{3.5};
    const auto rep = cumulative_dynamic_auc(train, test, replicate(r, 1), times);
    EXPECT_EQ(rep.excluded_cases, 2u);
    EXPECT_FALSE(rep.valid[0]);
    EXPECT_EQ(rep.warnings.size(), 1u);
}

TEST(Auc, RankInvarianceAndReversal)
{
    Rng rng(2);
    std::vector<double> t(50);
    std::vector<int> e(50);
    for (std::size_t i = 0; i < 50; ++i) {
        t[i] = rng.uniform(0.0, 5.0);
        e[i] = rng.bernoulli(0.7) ? 1 : 0;
    }
    const auto d = labels(t, e);
    Eigen::MatrixXd risk(50, 3);
    for (Eigen::Index i = 0; i < 50; ++i)
        for (Eigen::Index k = 0; k < 3; ++k) risk(i, k) = rng.normal();
    const std::vector<double> times{1.0, 2.5, 4.0};
    const auto base = cumulative_dynamic_auc(d, d, risk, times);
    const auto squashed = cumulative_dynamic_auc(d, d, risk.array().exp().matrix() * 3.0 + Eigen::MatrixXd::Ones(50, 3), times);
    const auto flipped = cumulative_dynamic_auc(d, d, -risk, times);
    for (std::size_t k = 0; k < 3; ++k) {
        ASSERT_TRUE(base.valid[k]);
        EXPECT_EQ(squashed.auc[k], base.auc[k]);
        EXPECT_NEAR(flipped.auc[k], 1.0 - base.auc[k], 1e-12);
    }
}

TEST(Auc, ShapeChecked)
{
    const auto d = labels({1, 2}, {1, 1});
    const std::vector<double> times{1.5};
    EXPECT_THROW(cumulative_dynamic_auc(d, d, Eigen::MatrixXd::Zero(2, 2), times), ShapeError);
}

TEST(MeanAuc, Examples)
{
    AucReport r;
    r.auc = {0.8, 0.8, 0.8};
    r.valid = {true, true, true};
    EXPECT_NEAR(mean_auc(r), 0.8, 1e-15);
    r.auc = {1.0, 0.5};
    r.valid = {true, true};
    EXPECT_EQ(mean_auc(r), 0.75);
    r.auc = {0.9, 0.0, 0.7};
    r.valid = {true, false, true};
    EXPECT_NEAR(mean_auc(r), 0.8, 1e-15);
    r.valid = {false, false, false};
    EXPECT_THROW(mean_auc(r), DataError);
}

TEST(EvaluationIndices, StrictlyInsideTestRange)
{
    const data::TimeGrid g{{1, 2, 3, 4, 5}};
    EXPECT_EQ(evaluation_indices(g, labels({2, 3.5, 5}, {1, 1, 1})), (std::vector<std::size_t>{2, 3}));
}
