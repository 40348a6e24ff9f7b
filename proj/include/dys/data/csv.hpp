#ifndef DYS_DATA_CSV_HPP
#define DYS_DATA_CSV_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dys/error.hpp"

namespace dys::data {

enum class ColumnKind { Continuous, Categorical };

/// Which columns hold the survival label and which features are categorical.
/// Every other column is a continuous feature unless listed in `ignore`.
struct TableSchema {
    std::string time_column = "time";
    std::string event_column = "event";
    std::vector<std::string> categorical;
    std::vector<std::string> ignore;
};

struct RawColumn {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;
    std::vector<std::optional<double>> numbers;     // continuous cells
    std::vector<std::optional<std::string>> labels; // categorical cells

    std::size_t size() const { return kind == ColumnKind::Continuous ? numbers.size() : labels.size(); }
};

/// Typed feature columns plus the (time, event) label of every row.
struct RawTable {
    std::vector<RawColumn> columns;
    std::vector<double> time;
    std::vector<int> event;

    std::size_t rows() const { return time.size(); }

    const RawColumn* find(std::string_view name) const
    {
        for (const auto& c : columns)
            if (c.name == name) return &c;
        return nullptr;
    }

    RawTable subset(const std::vector<std::size_t>& rows) const
    {
        RawTable out;
        for (const auto& c : columns) {
            RawColumn col{c.name, c.kind, {}, {}};
            for (auto r : rows) {
                if (r >= this->rows()) throw ShapeError("table subset: row index out of range");
                if (c.kind == ColumnKind::Continuous)
                    col.numbers.push_back(c.numbers[r]);
                else
                    col.labels.push_back(c.labels[r]);
            }
            out.columns.push_back(std::move(col));
        }
        for (auto r : rows) {
            out.time.push_back(time[r]);
            out.event.push_back(event[r]);
        }
        return out;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

/// Splits RFC 4180 style text into records. Quoted fields may contain commas,
/// doubled quotes and newlines.
inline std::vector<std::vector<std::string>> split_records(std::string_view text)
{
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            quoted = true;
            field_started = true;
            break;
        case ',':
            record.push_back(std::move(field));
            field.clear();
            field_started = true;
            break;
        case '\r':
            break;
        case '\n':
            if (field_started || !field.empty() || !record.empty()) {
                record.push_back(std::move(field));
                records.push_back(std::move(record));
            }
            field.clear();
            record.clear();
            field_started = false;
            break;
        default:
            field.push_back(c);
            field_started = true;
        }
    }
    if (quoted) throw DataError("csv: unterminated quoted field");
    if (field_started || !field.empty() || !record.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    return records;
}

inline std::optional<double> parse_number(std::string_view s)
{
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

inline bool contains(const std::vector<std::string>& names, std::string_view n)
{
    return std::find(names.begin(), names.end(), n) != names.end();
}

} // namespace detail

/// Parses CSV text with a header row into a typed table.
inline RawTable parse_csv(std::string_view text, const TableSchema& schema)
{
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    auto records = detail::split_records(text);
    if (records.empty()) throw SchemaError("csv: missing header row");
    std::vector<std::string> header;
    for (auto& h : records.front()) header.emplace_back(detail::trim(h));

    const auto index_of = [&](const std::string& name) -> std::size_t {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw SchemaError("csv: required column '" + name + "' not found in header");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t time_idx = index_of(schema.time_column);
    const std::size_t event_idx = index_of(schema.event_column);
    for (const auto& c : schema.categorical) index_of(c);

    RawTable table;
    std::vector<std::size_t> feature_idx;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j == time_idx || j == event_idx || detail::contains(schema.ignore, header[j])) continue;
        RawColumn col;
        col.name = header[j];
        col.kind = detail::contains(schema.categorical, header[j]) ? ColumnKind::Categorical : ColumnKind::Continuous;
        table.columns.push_back(std::move(col));
        feature_idx.push_back(j);
    }

    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        const std::string where = "row " + std::to_string(r);
        if (rec.size() != header.size())
            throw SchemaError("csv: " + where + " has " + std::to_string(rec.size()) + " fields, header has " +
                              std::to_string(header.size()));

        const auto t = detail::parse_number(rec[time_idx]);
        if (!t) throw DataError("csv: " + where + ", column '" + schema.time_column + "': time is missing or not a number");
        if (*t < 0.0) throw DataError("csv: " + where + ", column '" + schema.time_column + "': negative time");
        const auto e = detail::parse_number(rec[event_idx]);
        if (!e || (*e != 0.0 && *e != 1.0))
            throw DataError("csv: " + where + ", column '" + schema.event_column + "': event value '" +
                            std::string(detail::trim(rec[event_idx])) + "' is not 0 or 1");
        table.time.push_back(*t);
        table.event.push_back(*e == 1.0 ? 1 : 0);

        for (std::size_t c = 0; c < feature_idx.size(); ++c) {
            auto& col = table.columns[c];
            const auto cell = detail::trim(rec[feature_idx[c]]);
            if (col.kind == ColumnKind::Continuous) {
                col.numbers.push_back(detail::parse_number(cell));
            } else {
                col.labels.push_back(cell.empty() ? std::nullopt : std::optional<std::string>(std::string(cell)));
            }
        }
    }
    return table;
}

inline RawTable load_csv(const std::string& path, const TableSchema& schema)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("csv: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), schema);
}

} // namespace dys::data

#endif // DYS_DATA_CSV_HPP
