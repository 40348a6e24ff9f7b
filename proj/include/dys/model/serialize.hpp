#ifndef DYS_MODEL_SERIALIZE_HPP
#define DYS_MODEL_SERIALIZE_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "dys/error.hpp"
#include "dys/model/model.hpp"
#include "dys/model/train.hpp"

namespace dys::model {

inline constexpr int model_format_version = 1;

namespace detail {

inline nlohmann::json net_to_json(const MLPParams& p)
{
    auto layers = nlohmann::json::array();
    for (const auto& l : p.layers) {
        auto w = nlohmann::json::array();
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
            std::vector<double> row(static_cast<std::size_t>(l.weight.cols()));
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) row[static_cast<std::size_t>(c)] = l.weight(r, c);
            w.push_back(row);
        }
        layers.push_back({{"weight", w}, {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
    }
    return layers;
}

inline Vector vector_from_json(const nlohmann::json& j)
{
    const auto v = j.get<std::vector<double>>();
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

inline MLPParams net_from_json(const nlohmann::json& j)
{
    MLPParams p;
    for (const auto& lj : j) {
        numeric::DenseLayer l;
        const auto& w = lj.at("weight");
        const auto rows = static_cast<Eigen::Index>(w.size());
        const auto cols = rows > 0 ? static_cast<Eigen::Index>(w[0].size()) : 0;
        l.weight.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const auto row = w[static_cast<std::size_t>(r)].get<std::vector<double>>();
            if (static_cast<Eigen::Index>(row.size()) != cols) throw SchemaError("model file: ragged weight matrix");
            for (Eigen::Index c = 0; c < cols; ++c) l.weight(r, c) = row[static_cast<std::size_t>(c)];
        }
        l.bias = vector_from_json(lj.at("bias"));
        p.layers.push_back(std::move(l));
    }
    return p;
}

} // namespace detail

/// Versioned JSON form of a model. Doubles are written in shortest
/// round-trip form, so loading reproduces every parameter bit for bit.
inline nlohmann::json to_json(const DySModel& m)
{
    nlohmann::json j;
    j["format"] = "dys-model";
    j["version"] = model_format_version;
    j["head"] = to_string(m.head);
    j["gamma"] = m.gamma;
    j["hidden"] = m.hidden;
    j["input_dim"] = m.input_dim;
    j["frozen_main"] = m.frozen_main;
    j["overflow_bin"] = m.overflow_bin;
    j["feature_names"] = m.feature_names;
    j["grid"] = m.grid.times;
    j["intercept"] = std::vector<double>(m.intercept.data(), m.intercept.data() + m.intercept.size());
    auto mains = nlohmann::json::array();
    for (const auto& e : m.mains)
        mains.push_back({{"feature", e.feature}, {"gate_mu", e.gate.mu}, {"layers", detail::net_to_json(e.net)}});
    j["mains"] = mains;
    auto pairs = nlohmann::json::array();
    for (const auto& e : m.interactions)
        pairs.push_back({{"first", e.first},
                         {"second", e.second},
                         {"gate_mu", e.gate.mu},
                         {"layers", detail::net_to_json(e.net)}});
    j["interactions"] = pairs;
    return j;
}

inline DySModel model_from_json(const nlohmann::json& j)
{
    try {
        if (j.value("format", std::string{}) != "dys-model") throw SchemaError("model file: not a dys model");
        const int version = j.at("version").get<int>();
        if (version != model_format_version)
            throw SchemaError("model file: unsupported version " + std::to_string(version));
        DySModel m;
        m.head = head_mode_from_string(j.at("head").get<std::string>());
        m.gamma = j.at("gamma").get<double>();
        m.hidden = j.at("hidden").get<std::vector<std::size_t>>();
        m.input_dim = j.at("input_dim").get<std::size_t>();
        m.frozen_main = j.at("frozen_main").get<bool>();
        m.overflow_bin = j.at("overflow_bin").get<bool>();
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        m.grid.times = j.at("grid").get<std::vector<double>>();
        m.intercept = detail::vector_from_json(j.at("intercept"));
        for (const auto& e : j.at("mains"))
            m.mains.push_back({e.at("feature").get<std::size_t>(), detail::net_from_json(e.at("layers")),
                               {e.at("gate_mu").get<double>(), m.gamma}});
        for (const auto& e : j.at("interactions"))
            m.interactions.push_back({e.at("first").get<std::size_t>(), e.at("second").get<std::size_t>(),
                                      detail::net_from_json(e.at("layers")), {e.at("gate_mu").get<double>(), m.gamma}});
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("model file: ") + e.what());
    }
}

inline nlohmann::json to_json(const TrainConfig& c)
{
    nlohmann::json j{{"learning_rate", c.learning_rate},
                     {"gate_learning_rate", c.gate_learning_rate},
                     {"max_epochs", c.max_epochs},
                     {"patience", c.patience},
                     {"batch_size", c.batch_size},
                     {"lambda", c.lambda},
                     {"alpha", c.alpha},
                     {"tau", c.tau},
                     {"sparsity_enabled", c.sparsity_enabled},
                     {"seed", c.seed},
                     {"hidden", c.hidden},
                     {"gamma", c.gamma},
                     {"cox_full_batch_limit", c.cox_full_batch_limit},
                     {"max_interactions", c.max_interactions},
                     {"overflow_bin", c.overflow_bin},
                     {"monitor_regularized", c.monitor_regularized}};
    j["gate_init"] = std::isnan(c.gate_init) ? nlohmann::json(nullptr) : nlohmann::json(c.gate_init);
    return j;
}

/// Overlays the keys present in `j` onto `base`. Unknown keys are rejected.
inline TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {})
{
    if (!j.is_object()) throw SchemaError("train config must be a JSON object");
    const auto known = to_json(base);
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw SchemaError("train config: unknown key '" + key + "'");
    try {
        const auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
        };
        get("learning_rate", base.learning_rate);
        get("gate_learning_rate", base.gate_learning_rate);
        get("max_epochs", base.max_epochs);
        get("patience", base.patience);
        get("batch_size", base.batch_size);
        get("lambda", base.lambda);
        get("alpha", base.alpha);
        get("tau", base.tau);
        get("sparsity_enabled", base.sparsity_enabled);
        get("seed", base.seed);
        get("hidden", base.hidden);
        get("gamma", base.gamma);
        get("cox_full_batch_limit", base.cox_full_batch_limit);
        get("max_interactions", base.max_interactions);
        get("overflow_bin", base.overflow_bin);
        get("monitor_regularized", base.monitor_regularized);
        if (j.contains("gate_init"))
            base.gate_init = j["gate_init"].is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                      : j["gate_init"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("train config: ") + e.what());
    }
    base.validate();
    return base;
}

inline std::string dump_model(const DySModel& m) { return to_json(m).dump(1) + "\n"; }

inline void save_model(const DySModel& m, const std::string& path, const nlohmann::json& extra = {})
{
    auto j = to_json(m);
    if (!extra.is_null())
        for (const auto& [k, v] : extra.items()) j["metadata"][k] = v;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write model file '" + path + "'");
    os << j.dump(1) << '\n';
    if (!os) throw Error("failed writing model file '" + path + "'");
}

inline nlohmann::json read_json_file(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    try {
        return nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("'" + path + "' is not valid JSON: " + e.what());
    }
}

inline DySModel load_model(const std::string& path) { return model_from_json(read_json_file(path)); }

/// FNV-1a 64-bit hash, printed as 16 hex digits.
inline std::string fnv1a_hex(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string model_hash(const DySModel& m) { return fnv1a_hex(to_json(m).dump()); }

} // namespace dys::model

#endif // DYS_MODEL_SERIALIZE_HPP
