#ifndef DYS_DATA_PREPROCESS_HPP
#define DYS_DATA_PREPROCESS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dys/data/csv.hpp"
#include "dys/data/dataset.hpp"
#include "dys/error.hpp"

namespace dys::data {

inline constexpr const char* unknown_category = "Unknown";

struct ContinuousFeature {
    std::string name;
    double mean = 0.0;
    double stddev = 1.0; // population convention (divide by n)
    bool dropped = false;
    std::string drop_reason;

    bool operator==(const ContinuousFeature&) const = default;
};

struct CategoricalFeature {
    std::string name;
    std::vector<std::string> categories; // sorted, "Unknown" last

    bool operator==(const CategoricalFeature&) const = default;
};

/// Fitted standardization / one-hot state. Immutable after fit.
struct Preprocessor {
    static constexpr int schema_version = 1;

    TableSchema schema;
    std::vector<ContinuousFeature> continuous;
    std::vector<CategoricalFeature> categorical;
    // Column order of the source table: (is_categorical, index into the vectors above).
    std::vector<std::pair<bool, std::size_t>> order;
    std::vector<std::string> warnings;

    std::vector<std::string> output_names() const
    {
        std::vector<std::string> names;
        for (const auto& [is_cat, i] : order) {
            if (is_cat) {
                for (const auto& c : categorical[i].categories) names.push_back(categorical[i].name + "=" + c);
            } else if (!continuous[i].dropped) {
                names.push_back(continuous[i].name);
            }
        }
        return names;
    }

    bool operator==(const Preprocessor& o) const
    {
        return continuous == o.continuous && categorical == o.categorical && order == o.order &&
               schema.time_column == o.schema.time_column && schema.event_column == o.schema.event_column;
    }
};

inline Preprocessor fit_preprocessor(const RawTable& table, const TableSchema& schema = {})
{
    if (table.rows() == 0) throw DataError("preprocessor: empty table");
    Preprocessor pre;
    pre.schema = schema;
    for (const auto& col : table.columns) {
        if (col.kind == ColumnKind::Continuous) {
            ContinuousFeature f;
            f.name = col.name;
            double sum = 0.0;
            std::size_t count = 0;
            for (const auto& v : col.numbers)
                if (v) {
                    sum += *v;
                    ++count;
                }
            if (count == 0) {
                f.dropped = true;
                f.drop_reason = "all values missing";
            } else {
                f.mean = sum / static_cast<double>(count);
                double ss = 0.0;
                for (const auto& v : col.numbers)
                    if (v) ss += (*v - f.mean) * (*v - f.mean);
                f.stddev = std::sqrt(ss / static_cast<double>(count));
                if (!(f.stddev > 0.0)) {
                    f.dropped = true;
                    f.drop_reason = "zero variance";
                    f.stddev = 1.0;
                }
            }
            if (f.dropped) pre.warnings.push_back("dropped feature '" + f.name + "': " + f.drop_reason);
            pre.order.emplace_back(false, pre.continuous.size());
            pre.continuous.push_back(std::move(f));
        } else {
            std::set<std::string> seen;
            for (const auto& v : col.labels)
                if (v && *v != unknown_category) seen.insert(*v);
            CategoricalFeature f{col.name, {seen.begin(), seen.end()}};
            f.categories.emplace_back(unknown_category);
            pre.order.emplace_back(true, pre.categorical.size());
            pre.categorical.push_back(std::move(f));
        }
    }
    return pre;
}

/// Continuous: (x - mean) / stddev, missing -> 0. Categorical: one-hot with
/// missing or unseen labels mapped to "Unknown".
inline SurvivalDataset transform(const Preprocessor& pre, const RawTable& table)
{
    SurvivalDataset ds;
    ds.feature_names = pre.output_names();
    const auto n = static_cast<Eigen::Index>(table.rows());
    ds.x = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(ds.feature_names.size()));
    ds.time = table.time;
    ds.event = table.event;

    Eigen::Index out = 0;
    for (const auto& [is_cat, idx] : pre.order) {
        const std::string& name = is_cat ? pre.categorical[idx].name : pre.continuous[idx].name;
        const RawColumn* col = table.find(name);
        if (!col) throw SchemaError("transform: column '" + name + "' missing from table");
        const auto expected = is_cat ? ColumnKind::Categorical : ColumnKind::Continuous;
        if (col->kind != expected) throw SchemaError("transform: column '" + name + "' has a different kind than at fit time");
        if (col->size() != table.rows()) throw ShapeError("transform: column '" + name + "' is ragged");

        if (!is_cat) {
            const auto& f = pre.continuous[idx];
            if (f.dropped) continue;
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto& v = col->numbers[static_cast<std::size_t>(i)];
                ds.x(i, out) = v ? (*v - f.mean) / f.stddev : 0.0;
            }
            ++out;
        } else {
            const auto& f = pre.categorical[idx];
            const auto width = static_cast<Eigen::Index>(f.categories.size());
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto& v = col->labels[static_cast<std::size_t>(i)];
                auto it = v ? std::lower_bound(f.categories.begin(), f.categories.end() - 1, *v) : f.categories.end() - 1;
                if (it == f.categories.end() - 1 || *it != *v) it = f.categories.end() - 1;
                ds.x(i, out + (it - f.categories.begin())) = 1.0;
            }
            out += width;
        }
    }
    return ds;
}

inline nlohmann::json to_json(const Preprocessor& pre)
{
    nlohmann::json j;
    j["version"] = Preprocessor::schema_version;
    j["variance"] = "population";
    j["schema"] = {{"time_column", pre.schema.time_column},
                   {"event_column", pre.schema.event_column},
                   {"categorical", pre.schema.categorical},
                   {"ignore", pre.schema.ignore}};
    auto cols = nlohmann::json::array();
    for (const auto& [is_cat, idx] : pre.order) {
        if (is_cat) {
            const auto& f = pre.categorical[idx];
            cols.push_back({{"name", f.name}, {"kind", "categorical"}, {"categories", f.categories}});
        } else {
            const auto& f = pre.continuous[idx];
            nlohmann::json c = {{"name", f.name}, {"kind", "continuous"}, {"mean", f.mean}, {"stddev", f.stddev}};
            if (f.dropped) c["dropped"] = f.drop_reason;
            cols.push_back(std::move(c));
        }
    }
    j["columns"] = std::move(cols);
    return j;
}

inline Preprocessor preprocessor_from_json(const nlohmann::json& j)
{
    if (j.value("version", 0) != Preprocessor::schema_version)
        throw SchemaError("preprocessor: unsupported version " + j.value("version", nlohmann::json()).dump());
    Preprocessor pre;
    const auto& s = j.at("schema");
    pre.schema.time_column = s.at("time_column").get<std::string>();
    pre.schema.event_column = s.at("event_column").get<std::string>();
    pre.schema.categorical = s.value("categorical", std::vector<std::string>{});
    pre.schema.ignore = s.value("ignore", std::vector<std::string>{});
    for (const auto& c : j.at("columns")) {
        const auto kind = c.at("kind").get<std::string>();
        if (kind == "categorical") {
            pre.order.emplace_back(true, pre.categorical.size());
            pre.categorical.push_back({c.at("name").get<std::string>(), c.at("categories").get<std::vector<std::string>>()});
        } else if (kind == "continuous") {
            ContinuousFeature f;
            f.name = c.at("name").get<std::string>();
            f.mean = c.at("mean").get<double>();
            f.stddev = c.at("stddev").get<double>();
            if (c.contains("dropped")) {
                f.dropped = true;
                f.drop_reason = c.at("dropped").get<std::string>();
            }
            pre.order.emplace_back(false, pre.continuous.size());
            pre.continuous.push_back(std::move(f));
        } else {
            throw SchemaError("preprocessor: unknown column kind '" + kind + "'");
        }
    }
    return pre;
}

} // namespace dys::data

#endif // DYS_DATA_PREPROCESS_HPP
