#ifndef DYS_INTERPRET_HPP
#define DYS_INTERPRET_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dys/data/dataset.hpp"
#include "dys/error.hpp"
#include "dys/model/model.hpp"
#include "dys/model/serialize.hpp"

namespace dys::interpret {

using model::DySModel;
using model::Matrix;

/// A main effect (second empty) or an interaction.
struct EffectId {
    std::size_t first = 0;
    std::optional<std::size_t> second;

    bool is_pair() const { return second.has_value(); }
    bool operator==(const EffectId&) const = default;
};

inline std::vector<EffectId> effects(const DySModel& m)
{
    std::vector<EffectId> out;
    for (const auto& e : m.mains) out.push_back({e.feature, std::nullopt});
    for (const auto& e : m.interactions) out.push_back({e.first, e.second});
    return out;
}

inline std::string feature_label(const DySModel& m, std::size_t j)
{
    return j < m.feature_names.size() ? m.feature_names[j] : "x" + std::to_string(j + 1);
}

inline std::string effect_name(const DySModel& m, const EffectId& id)
{
    return id.is_pair() ? feature_label(m, id.first) + ":" + feature_label(m, *id.second) : feature_label(m, id.first);
}

/// Gated contributions s(mu) * net(input) of one effect, rows are samples.
/// A closed gate gives exact zeros.
inline Matrix effect_output(const DySModel& m, const EffectId& id, const Matrix& input)
{
    if (!id.is_pair()) {
        for (const auto& e : m.mains)
            if (e.feature == id.first) {
                const double s = e.gate.value();
                if (s == 0.0) return Matrix::Zero(input.rows(), static_cast<Eigen::Index>(m.output_dim()));
                return s * numeric::mlp_forward_batch(e.net, input);
            }
    } else {
        for (const auto& e : m.interactions)
            if (e.first == id.first && e.second == *id.second) {
                const double s = e.gate.value();
                if (s == 0.0) return Matrix::Zero(input.rows(), static_cast<Eigen::Index>(m.output_dim()));
                return s * numeric::mlp_forward_batch(e.net, input);
            }
    }
    throw ParameterError("unknown effect '" + effect_name(m, id) + "'");
}

struct ImportanceTable {
    std::vector<EffectId> effects;
    std::vector<std::string> names;
    std::vector<double> times;  // one column per time; Cox models have a single column
    Matrix per_time;            // [effects x times]
    std::vector<double> global; // mean over times
};

/// importance(e, t_k) = mean_i |s(mu_e) f_e(x_i)[k]| over the rows of `ds`.
inline ImportanceTable feature_importance(const DySModel& m, const data::SurvivalDataset& ds)
{
    if (ds.features() != m.input_dim) throw ShapeError("feature_importance: dataset feature count does not match the model");
    if (ds.size() == 0) throw DataError("feature_importance: empty dataset");
    ImportanceTable t;
    t.effects = effects(m);
    if (m.head == model::HeadMode::RPS)
        t.times = m.grid.times;
    else
        t.times = {std::numeric_limits<double>::quiet_NaN()};
    t.per_time.resize(static_cast<Eigen::Index>(t.effects.size()), static_cast<Eigen::Index>(t.times.size()));
    for (std::size_t e = 0; e < t.effects.size(); ++e) {
        const auto& id = t.effects[e];
        t.names.push_back(effect_name(m, id));
        const Matrix in = id.is_pair() ? model::pair_input(ds.x, id.first, *id.second) : model::main_input(ds.x, id.first);
        const Matrix out = effect_output(m, id, in);
        t.per_time.row(static_cast<Eigen::Index>(e)) =
            out.leftCols(static_cast<Eigen::Index>(t.times.size())).cwiseAbs().colwise().mean();
        t.global.push_back(t.per_time.row(static_cast<Eigen::Index>(e)).mean());
    }
    return t;
}

struct FeatureRange {
    double min = 0.0;
    double max = 0.0;
};

/// Observed [min, max] of every column of `ds`.
inline std::vector<FeatureRange> feature_ranges(const data::SurvivalDataset& ds)
{
    if (ds.size() == 0) throw DataError("feature_ranges: empty dataset");
    std::vector<FeatureRange> r;
    for (Eigen::Index j = 0; j < ds.x.cols(); ++j) r.push_back({ds.x.col(j).minCoeff(), ds.x.col(j).maxCoeff()});
    return r;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n)
{
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (std::size_t i = 0; i < n; ++i)
        v[i] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

/// Gated shape function at one output column. For pairs `logit` is row-major
/// over (x, x2): logit[i * x2.size() + j].
struct ImpactCurve {
    EffectId effect;
    std::string name;
    std::size_t time_index = 0;
    double time = 0.0; // NaN for Cox models
    std::vector<double> x;
    std::vector<double> x2;
    std::vector<double> logit;
};

inline constexpr std::size_t default_main_resolution = 256;
inline constexpr std::size_t default_pair_resolution = 64;

inline ImpactCurve impact_curve(const DySModel& m, const EffectId& id, std::size_t time_index,
                                const std::vector<FeatureRange>& ranges, std::size_t resolution = 0)
{
    if (ranges.size() != m.input_dim) throw ShapeError("impact_curve: need one range per feature");
    if (time_index >= m.time_count()) throw ParameterError("impact_curve: time index out of range");
    if (resolution == 0) resolution = id.is_pair() ? default_pair_resolution : default_main_resolution;
    if (resolution < 2) throw ParameterError("impact_curve: resolution must be >= 2");

    ImpactCurve c;
    c.effect = id;
    c.name = effect_name(m, id);
    c.time_index = time_index;
    c.time = m.head == model::HeadMode::RPS ? m.grid.times[time_index] : std::numeric_limits<double>::quiet_NaN();
    if (id.first >= ranges.size() || (id.is_pair() && *id.second >= ranges.size()))
        throw ParameterError("unknown effect '" + c.name + "'");
    c.x = linspace(ranges[id.first].min, ranges[id.first].max, resolution);
    Matrix in;
    if (!id.is_pair()) {
        in.resize(static_cast<Eigen::Index>(resolution), 1);
        for (std::size_t i = 0; i < resolution; ++i) in(static_cast<Eigen::Index>(i), 0) = c.x[i];
    } else {
        c.x2 = linspace(ranges[*id.second].min, ranges[*id.second].max, resolution);
        in.resize(static_cast<Eigen::Index>(resolution * resolution), 2);
        for (std::size_t i = 0; i < resolution; ++i)
            for (std::size_t j = 0; j < resolution; ++j) {
                const auto r = static_cast<Eigen::Index>(i * resolution + j);
                in(r, 0) = c.x[i];
                in(r, 1) = c.x2[j];
            }
    }
    const Matrix out = effect_output(m, id, in);
    c.logit.resize(static_cast<std::size_t>(out.rows()));
    for (Eigen::Index r = 0; r < out.rows(); ++r)
        c.logit[static_cast<std::size_t>(r)] = out(r, static_cast<Eigen::Index>(time_index));
    return c;
}

namespace detail {

/// Index i and weight w with v = (1 - w) grid[i] + w grid[i + 1], clamped.
inline std::pair<std::size_t, double> locate(const std::vector<double>& grid, double v)
{
    if (grid.size() < 2 || v <= grid.front()) return {0, 0.0};
    if (v >= grid.back()) return {grid.size() - 2, 1.0};
    const auto it = std::upper_bound(grid.begin(), grid.end(), v);
    const auto i = static_cast<std::size_t>(it - grid.begin()) - 1;
    const double w = (v - grid[i]) / (grid[i + 1] - grid[i]);
    return {i, w};
}

} // namespace detail

/// Linear (mains) or bilinear (pairs) interpolation of a curve; exact on the
/// abscissae.
inline double interpolate(const ImpactCurve& c, double x, double x2 = 0.0)
{
    const auto [i, w] = detail::locate(c.x, x);
    if (!c.effect.is_pair()) {
        if (w == 0.0) return c.logit[i];
        if (w == 1.0) return c.logit[i + 1];
        return (1.0 - w) * c.logit[i] + w * c.logit[i + 1];
    }
    const auto [j, u] = detail::locate(c.x2, x2);
    const std::size_t n2 = c.x2.size();
    const auto at = [&](std::size_t a, std::size_t b) { return c.logit[a * n2 + b]; };
    if ((w == 0.0 || w == 1.0) && (u == 0.0 || u == 1.0))
        return at(i + (w == 1.0 ? 1 : 0), j + (u == 1.0 ? 1 : 0));
    return (1.0 - w) * ((1.0 - u) * at(i, j) + u * at(i, j + 1)) + w * ((1.0 - u) * at(i + 1, j) + u * at(i + 1, j + 1));
}

/// Curve indices to export: every grid quartile for RPS models, the single
/// output for Cox models.
inline std::vector<std::size_t> default_time_indices(const DySModel& m)
{
    if (m.head == model::HeadMode::Cox) return {0};
    const auto K = m.grid.size();
    std::vector<std::size_t> idx;
    for (std::size_t q = 1; q <= 3; ++q) {
        const std::size_t k = std::min(K - 1, q * K / 4);
        if (idx.empty() || idx.back() != k) idx.push_back(k);
    }
    return idx;
}

inline std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string slug(const std::string& s)
{
    std::string out;
    for (char ch : s) out += std::isalnum(static_cast<unsigned char>(ch)) ? ch : '_';
    return out;
}

inline std::string importance_csv(const ImportanceTable& t, bool cox)
{
    std::ostringstream os;
    os << "effect,time,importance\n";
    for (std::size_t e = 0; e < t.effects.size(); ++e) {
        for (std::size_t k = 0; k < t.times.size(); ++k)
            os << t.names[e] << ',' << (cox ? std::string("all") : format_number(t.times[k])) << ','
               << format_number(t.per_time(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(k))) << '\n';
        os << t.names[e] << ",global," << format_number(t.global[e]) << '\n';
    }
    return os.str();
}

inline std::string curve_csv(const ImpactCurve& c)
{
    std::ostringstream os;
    if (!c.effect.is_pair()) {
        os << "x,logit\n";
        for (std::size_t i = 0; i < c.x.size(); ++i) os << format_number(c.x[i]) << ',' << format_number(c.logit[i]) << '\n';
    } else {
        os << "x,x2,logit\n";
        for (std::size_t i = 0; i < c.x.size(); ++i)
            for (std::size_t j = 0; j < c.x2.size(); ++j)
                os << format_number(c.x[i]) << ',' << format_number(c.x2[j]) << ','
                   << format_number(c.logit[i * c.x2.size() + j]) << '\n';
    }
    return os.str();
}

/// Line chart for mains, shaded lattice for pairs.
inline std::string curve_svg(const ImpactCurve& c)
{
    const double w = 480, h = 320, pad = 40;
    const auto [lo_it, hi_it] = std::minmax_element(c.logit.begin(), c.logit.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi - lo < 1e-12) {
        lo -= 1.0;
        hi += 1.0;
    }
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    os << "<text x=\"" << pad << "\" y=\"20\" font-size=\"12\">" << c.name;
    if (!std::isnan(c.time)) os << " at t=" << format_number(c.time);
    os << "</text>\n";
    const auto sx = [&](const std::vector<double>& g, double v) {
        const double span = g.back() - g.front();
        return pad + (span > 0 ? (v - g.front()) / span : 0.5) * (w - 2 * pad);
    };
    if (!c.effect.is_pair()) {
        os << "<polyline fill=\"none\" stroke=\"black\" points=\"";
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            const double y = h - pad - (c.logit[i] - lo) / (hi - lo) * (h - 2 * pad);
            os << format_number(sx(c.x, c.x[i])) << ',' << format_number(y) << (i + 1 < c.x.size() ? " " : "");
        }
        os << "\"/>\n";
    } else {
        const double cw = (w - 2 * pad) / static_cast<double>(c.x.size());
        const double ch = (h - 2 * pad) / static_cast<double>(c.x2.size());
        for (std::size_t i = 0; i < c.x.size(); ++i)
            for (std::size_t j = 0; j < c.x2.size(); ++j) {
                const double v = (c.logit[i * c.x2.size() + j] - lo) / (hi - lo);
                const int g = static_cast<int>(std::lround(255.0 * (1.0 - v)));
                os << "<rect x=\"" << format_number(pad + static_cast<double>(i) * cw) << "\" y=\""
                   << format_number(h - pad - static_cast<double>(j + 1) * ch) << "\" width=\"" << format_number(cw)
                   << "\" height=\"" << format_number(ch) << "\" fill=\"rgb(" << g << ',' << g << ',' << g << ")\"/>\n";
            }
    }
    os << "</svg>\n";
    return os.str();
}

struct ExportOptions {
    bool svg = false;
};

/// Writes importances.csv, intercept.csv, one CSV (and optionally SVG) per
/// curve, and manifest.json into `dir`. Returns the manifest.
inline nlohmann::json export_report(const DySModel& m, const ImportanceTable& table, const std::vector<ImpactCurve>& curves,
                                    const std::filesystem::path& dir, const ExportOptions& opt = {})
{
    std::error_code ec;
    std::filesystem::create_directories(dir / "curves", ec);
    if (ec) throw Error("cannot create '" + (dir / "curves").string() + "': " + ec.message());
    std::vector<std::string> files;
    const auto write = [&](const std::string& rel, const std::string& body) {
        std::ofstream os(dir / rel, std::ios::binary);
        if (!os) throw Error("cannot write '" + (dir / rel).string() + "'");
        os << body;
        if (!os) throw Error("failed writing '" + (dir / rel).string() + "'");
        files.push_back(rel);
    };
    const bool cox = m.head == model::HeadMode::Cox;
    write("importances.csv", importance_csv(table, cox));

    std::ostringstream ic;
    ic << "time,logit\n";
    for (Eigen::Index k = 0; k < m.intercept.size(); ++k)
        ic << (cox ? std::string("all") : format_number(m.grid.times[static_cast<std::size_t>(k)])) << ','
           << format_number(m.intercept(k)) << '\n';
    write("intercept.csv", ic.str());

    const auto all = effects(m);
    for (const auto& c : curves) {
        const auto pos = static_cast<std::size_t>(std::find(all.begin(), all.end(), c.effect) - all.begin());
        char idx[16];
        std::snprintf(idx, sizeof idx, "%03zu", pos);
        std::string stem = "curves/" + std::string(c.effect.is_pair() ? "pair_" : "main_") + idx + "_" + slug(c.name);
        if (!cox) stem += "_t" + std::to_string(c.time_index);
        write(stem + ".csv", curve_csv(c));
        if (opt.svg) write(stem + ".svg", curve_svg(c));
    }

    nlohmann::json manifest;
    manifest["model_hash"] = model::model_hash(m);
    manifest["head"] = model::to_string(m.head);
    manifest["grid_times"] = m.grid.times;
    manifest["importance_averaging"] = "uniform over grid times";
    manifest["files"] = files;
    std::ofstream os(dir / "manifest.json", std::ios::binary);
    if (!os) throw Error("cannot write '" + (dir / "manifest.json").string() + "'");
    os << manifest.dump(1) << '\n';
    return manifest;
}

} // namespace dys::interpret

#endif // DYS_INTERPRET_HPP
