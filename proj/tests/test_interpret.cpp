#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dys/interpret.hpp"
#include "dys/random.hpp"

using namespace dys;
using namespace dys::interpret;
using model::DySModel;
using model::Matrix;
using model::Vector;
using model::Gate;
using model::HeadMode;

namespace {

namespace fs = std::filesystem;

// Single-layer net emitting the constant vector c.
numeric::MLPParams constant_net(std::size_t in, const std::vector<double>& c)
{
    numeric::DenseLayer l;
    l.weight = Matrix::Zero(static_cast<Eigen::Index>(c.size()), static_cast<Eigen::Index>(in));
    l.bias = Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size()));
    return {{l}};
}

// Single-layer net computing w * x in every output.
numeric::MLPParams linear_net(std::size_t K, double w)
{
    numeric::DenseLayer l;
    l.weight = Matrix::Constant(static_cast<Eigen::Index>(K), 1, w);
    l.bias = Vector::Zero(static_cast<Eigen::Index>(K));
    return {{l}};
}

DySModel small_model(std::uint64_t seed, HeadMode head = HeadMode::RPS)
{
    Rng rng(seed);
    data::TimeGrid g{{0.5, 1.0, 1.5, 2.0}};
    auto m = model::make_model(3, head == HeadMode::RPS ? g : data::TimeGrid{}, head, {6}, 1.0, 0.1, rng);
    if (head == HeadMode::Cox) m.grid = {};
    model::add_interaction(m, 0, 2, 0.2, rng);
    model::add_interaction(m, 1, 2, -0.1, rng);
    for (Eigen::Index k = 0; k < m.intercept.size(); ++k) m.intercept(k) = 0.1 * static_cast<double>(k) - 0.2;
    m.feature_names = {"age", "sex=F", "x 3"};
    return m;
}

data::SurvivalDataset sample_data(std::uint64_t seed, std::size_t n, std::size_t p)
{
    Rng rng(seed);
    data::SurvivalDataset ds;
    ds.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < ds.x.rows(); ++i)
        for (Eigen::Index j = 0; j < ds.x.cols(); ++j) ds.x(i, j) = rng.normal();
    ds.time.assign(n, 1.0);
    ds.event.assign(n, 1);
    return ds;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name)
{
    const auto d = fs::temp_directory_path() / ("dys_interpret_" + name);
    fs::remove_all(d);
    return d;
}

} // namespace

TEST(Importance, PrunedEffectIsZero)
{
    auto m = small_model(1);
    m.mains[1].gate = Gate::closed(1.0);
    m.interactions[1].gate = Gate::closed(1.0);
    const auto t = feature_importance(m, sample_data(2, 40, 3));
    for (Eigen::Index k = 0; k < 4; ++k) {
        EXPECT_EQ(t.per_time(1, k), 0.0);
        EXPECT_EQ(t.per_time(4, k), 0.0);
        EXPECT_GT(t.per_time(0, k), 0.0);
    }
    EXPECT_EQ(t.global[1], 0.0);
}

TEST(Importance, ConstantNetGivesAbsoluteValue)
{
    auto m = small_model(3);
    m.mains[0].net = constant_net(1, {-0.7, 0.2, 1.5, -3.0});
    m.mains[0].gate = Gate::open(1.0);
    const auto t = feature_importance(m, sample_data(4, 25, 3));
    EXPECT_EQ(t.per_time(0, 0), 0.7);
    EXPECT_EQ(t.per_time(0, 1), 0.2);
    EXPECT_EQ(t.per_time(0, 2), 1.5);
    EXPECT_EQ(t.per_time(0, 3), 3.0);
    EXPECT_DOUBLE_EQ(t.global[0], (0.7 + 0.2 + 1.5 + 3.0) / 4.0);
}

TEST(Importance, AbsoluteValuesDoNotCancel)
{
    auto m = small_model(5);
    m.mains[0].net = linear_net(4, 1.0);
    m.mains[0].gate = Gate::open(1.0);
    auto ds = sample_data(6, 2, 3);
    ds.x(0, 0) = 1.0;
    ds.x(1, 0) = -1.0;
    const auto t = feature_importance(m, ds);
    EXPECT_EQ(t.per_time(0, 2), 1.0);
}

TEST(Importance, IncludesGateFactor)
{
    auto m = small_model(7);
    m.mains[0].net = constant_net(1, {2.0, 2.0, 2.0, 2.0});
    m.mains[0].gate.mu = 0.0;
    const auto t = feature_importance(m, sample_data(8, 5, 3));
    EXPECT_EQ(t.per_time(0, 0), 1.0);
}

TEST(Importance, OrderInvariant)
{
    const auto m = small_model(9);
    const auto ds = sample_data(10, 64, 3);
    std::vector<std::size_t> rev(64);
    for (std::size_t i = 0; i < 64; ++i) rev[i] = 63 - i;
    const auto a = feature_importance(m, ds);
    const auto b = feature_importance(m, ds.subset(rev));
    EXPECT_TRUE(a.per_time.isApprox(b.per_time, 1e-14));
}

TEST(Curves, PrunedCurveIsZero)
{
    auto m = small_model(11);
    m.mains[2].gate = Gate::closed(1.0);
    const auto c = impact_curve(m, {2, std::nullopt}, 1, feature_ranges(sample_data(12, 30, 3)));
    ASSERT_EQ(c.logit.size(), default_main_resolution);
    for (double v : c.logit) EXPECT_EQ(v, 0.0);
}

TEST(Curves, PairLatticeSize)
{
    const auto m = small_model(13);
    const auto c = impact_curve(m, {0, 2}, 0, feature_ranges(sample_data(14, 30, 3)));
    EXPECT_EQ(c.x.size(), default_pair_resolution);
    EXPECT_EQ(c.x2.size(), default_pair_resolution);
    EXPECT_EQ(c.logit.size(), default_pair_resolution * default_pair_resolution);
}

TEST(Curves, ReconstructModelLogits)
{
    const auto m = small_model(15);
    const auto ds = sample_data(16, 50, 3);
    const auto ranges = feature_ranges(ds);
    Rng rng(17);
    for (std::size_t k = 0; k < 4; ++k) {
        std::vector<ImpactCurve> curves;
        for (const auto& id : effects(m)) curves.push_back(impact_curve(m, id, k, ranges, 33));
        for (int trial = 0; trial < 20; ++trial) {
            // On the abscissae: exact up to summation order.
            std::vector<double> x(3);
            for (std::size_t j = 0; j < 3; ++j) x[j] = curves[j].x[rng.below(33)];
            double sum = m.intercept(static_cast<Eigen::Index>(k));
            for (const auto& c : curves) sum += interpolate(c, x[c.effect.first], c.effect.is_pair() ? x[*c.effect.second] : 0.0);
            EXPECT_NEAR(sum, model::model_logits(m, x)(static_cast<Eigen::Index>(k)), 1e-12);
        }
    }
}

TEST(Curves, InterpolationOffGridIsClose)
{
    const auto m = small_model(18);
    const auto ds = sample_data(19, 50, 3);
    const auto ranges = feature_ranges(ds);
    std::vector<ImpactCurve> curves;
    for (const auto& id : effects(m)) curves.push_back(impact_curve(m, id, 2, ranges, id.is_pair() ? 400 : 4000));
    for (Eigen::Index i = 0; i < 10; ++i) {
        const std::vector<double> x{ds.x(i, 0), ds.x(i, 1), ds.x(i, 2)};
        double sum = m.intercept(2);
        for (const auto& c : curves) sum += interpolate(c, x[c.effect.first], c.effect.is_pair() ? x[*c.effect.second] : 0.0);
        EXPECT_NEAR(sum, model::model_logits(m, x)(2), 1e-2);
    }
}

TEST(Curves, CoxHasOneTimeIndependentCurve)
{
    const auto m = small_model(20, HeadMode::Cox);
    EXPECT_EQ(default_time_indices(m), (std::vector<std::size_t>{0}));
    const auto ranges = feature_ranges(sample_data(21, 20, 3));
    const auto c = impact_curve(m, {0, std::nullopt}, 0, ranges);
    EXPECT_TRUE(std::isnan(c.time));
    EXPECT_THROW(impact_curve(m, {0, std::nullopt}, 1, ranges), ParameterError);
    const auto t = feature_importance(m, sample_data(22, 20, 3));
    EXPECT_EQ(t.times.size(), 1u);
}

TEST(Curves, UnknownEffectRejected)
{
    const auto m = small_model(23);
    const auto ranges = feature_ranges(sample_data(24, 20, 3));
    EXPECT_THROW(impact_curve(m, {0, 1}, 0, ranges), ParameterError);
    EXPECT_THROW(impact_curve(m, {7, std::nullopt}, 0, ranges), ParameterError);
}

TEST(Curves, QuartileTimes)
{
    Rng rng(25);
    std::vector<double> t;
    for (int k = 1; k <= 100; ++k) t.push_back(k);
    const auto m = model::make_model(1, {t}, HeadMode::RPS, {2}, 1.0, 1.0, rng);
    EXPECT_EQ(default_time_indices(m), (std::vector<std::size_t>{25, 50, 75}));
}

TEST(Export, ImportanceRowCount)
{
    const auto m = small_model(26);
    const auto t = feature_importance(m, sample_data(27, 20, 3));
    const auto csv = importance_csv(t, false);
    const auto lines = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
    EXPECT_EQ(lines - 1, effects(m).size() * (m.grid.size() + 1));
    EXPECT_NE(csv.find("age:x 3,global,"), std::string::npos);
}

TEST(Export, ManifestListsFilesAndReexportIsIdentical)
{
    const auto m = small_model(28);
    const auto ds = sample_data(29, 40, 3);
    const auto table = feature_importance(m, ds);
    std::vector<ImpactCurve> curves;
    for (const auto& id : effects(m))
        for (auto k : default_time_indices(m)) curves.push_back(impact_curve(m, id, k, feature_ranges(ds), 16));

    const auto a = fresh_dir("a"), b = fresh_dir("b");
    const auto manifest = export_report(m, table, curves, a, {true});
    export_report(m, table, curves, b, {true});

    std::set<std::string> listed;
    for (const auto& f : manifest["files"]) listed.insert(f.get<std::string>());
    std::set<std::string> on_disk;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) on_disk.insert(fs::relative(e.path(), a).generic_string());
    on_disk.erase("manifest.json");
    EXPECT_EQ(listed, on_disk);
    EXPECT_EQ(listed.size(), 2 + 2 * curves.size());
    EXPECT_EQ(manifest["model_hash"], model::model_hash(m));

    for (const auto& f : listed) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Export, CurveCsvColumns)
{
    const auto m = small_model(30);
    const auto ranges = feature_ranges(sample_data(31, 20, 3));
    const auto main = curve_csv(impact_curve(m, {1, std::nullopt}, 0, ranges, 5));
    EXPECT_EQ(main.substr(0, main.find('\n')), "x,logit");
    EXPECT_EQ(std::count(main.begin(), main.end(), '\n'), 6);
    const auto pair = curve_csv(impact_curve(m, {1, 2}, 0, ranges, 5));
    EXPECT_EQ(pair.substr(0, pair.find('\n')), "x,x2,logit");
    EXPECT_EQ(std::count(pair.begin(), pair.end(), '\n'), 26);
}
