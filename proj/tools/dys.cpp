// dys: command-line front end for synthesis, training, prediction,
// evaluation, feature selection and interpretation exports.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "dys/dys.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int exit_config = 2;
constexpr int exit_runtime = 3;

struct ConfigError : dys::Error {
    using dys::Error::Error;
};

json default_config()
{
    return {
        {"seed", 0},
        {"out", "dys_out"},
        {"data",
         {{"path", nullptr}, {"time_column", "time"}, {"event_column", "event"}, {"categorical", json::array()},
          {"ignore", json::array()}}},
        {"model", nullptr},
        {"synth",
         {{"generator", "two-group"},
          {"n", 5000},
          {"p", 10},
          {"t_max", 8.0},
          {"censor_fraction", 0.0},
          {"informative", 0},
          {"beta_min", 0.75},
          {"beta_max", 1.25}}},
        {"split", {{"test_fraction", 0.2}, {"validation_fraction", 0.2}}},
        {"K", 100},
        {"mode", "rps"},
        {"stages", "one"},
        {"interactions", true},
        {"train", dys::model::to_json(dys::model::TrainConfig{})},
        {"k", 10},
        {"lambda0", 0.1},
        {"max_iterations", 30},
        {"trials", 1},
        {"explain", {{"times", nullptr}, {"resolution", 256}, {"pair_resolution", 64}, {"svg", false}}},
    };
}

/// Rejects keys absent from `reference`, recursing into objects whose
/// reference value is also an object. "train" is checked by its own parser.
void check_keys(const json& j, const json& reference, const std::string& where)
{
    for (const auto& [key, value] : j.items()) {
        if (!reference.contains(key)) throw ConfigError("config: unknown key '" + where + key + "'");
        if (key != "train" && reference[key].is_object() && value.is_object())
            check_keys(value, reference[key], where + key + ".");
    }
}

struct Flags {
    std::string config;
    std::optional<long long> seed;
    std::optional<std::string> out;
    std::optional<long long> k;
    std::optional<std::string> mode;
    std::optional<std::string> stages;
    std::optional<long long> trials;
    std::optional<std::string> data;
    std::optional<std::string> model;
};

json resolve_config(const std::string& command, const Flags& f)
{
    json cfg = default_config();
    if (!f.config.empty()) {
        json file;
        try {
            file = dys::model::read_json_file(f.config);
        } catch (const dys::Error& e) {
            throw ConfigError(e.what());
        }
        if (!file.is_object()) throw ConfigError("config: top level must be a JSON object");
        check_keys(file, cfg, "");
        cfg.merge_patch(file);
    }
    if (f.seed) cfg["seed"] = *f.seed;
    if (f.out) cfg["out"] = *f.out;
    if (f.k) cfg["k"] = *f.k;
    if (f.mode) cfg["mode"] = *f.mode;
    if (f.stages) cfg["stages"] = *f.stages;
    if (f.trials) cfg["trials"] = *f.trials;
    if (f.data) cfg["data"]["path"] = *f.data;
    if (f.model) cfg["model"] = *f.model;
    cfg["command"] = command;

    try {
        if (cfg["seed"].get<long long>() < 0) throw ConfigError("config: seed must be >= 0");
        if (cfg["trials"].get<long long>() < 1) throw ConfigError("config: trials must be >= 1");
        if (cfg["K"].get<long long>() < 2) throw ConfigError("config: K must be >= 2");
        if (cfg["k"].get<long long>() < 1) throw ConfigError("config: k must be >= 1");
        const auto mode = cfg["mode"].get<std::string>();
        if (mode != "rps" && mode != "cox") throw ConfigError("config: mode must be rps or cox");
        const auto stages = cfg["stages"].get<std::string>();
        if (stages != "one" && stages != "two") throw ConfigError("config: stages must be one or two");
        const auto gen = cfg["synth"]["generator"].get<std::string>();
        if (gen != "two-group" && gen != "additive") throw ConfigError("config: synth.generator must be two-group or additive");
        (void)cfg["out"].get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

std::shared_ptr<spdlog::logger> make_logger()
{
    auto log = spdlog::stderr_color_mt("dys");
    log->set_pattern("[%l] %v");
    const char* env = std::getenv("DYS_LOG");
    const std::string level = env ? env : "info";
    if (level == "debug")
        log->set_level(spdlog::level::debug);
    else if (level == "warn")
        log->set_level(spdlog::level::warn);
    else if (level == "quiet" || level == "off" || level == "error")
        log->set_level(spdlog::level::err);
    else
        log->set_level(spdlog::level::info);
    return log;
}

std::shared_ptr<spdlog::logger> logger;

void write_text(const fs::path& path, const std::string& body)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw dys::Error("cannot write '" + path.string() + "'");
    os << body;
    if (!os) throw dys::Error("failed writing '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(1) + "\n"); }

fs::path prepare_out(const json& cfg)
{
    fs::path out = cfg["out"].get<std::string>();
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw dys::Error("cannot create output directory '" + out.string() + "': " + ec.message());
    write_json(out / "resolved_config.json", cfg);
    return out;
}

dys::model::TrainConfig train_config(const json& cfg, std::uint64_t seed)
{
    try {
        auto tc = dys::model::train_config_from_json(cfg["train"]);
        tc.seed = seed;
        return tc;
    } catch (const dys::Error& e) {
        throw ConfigError(e.what());
    }
}

dys::data::TableSchema table_schema(const json& cfg)
{
    const auto& d = cfg["data"];
    dys::data::TableSchema s;
    s.time_column = d["time_column"].get<std::string>();
    s.event_column = d["event_column"].get<std::string>();
    s.categorical = d["categorical"].get<std::vector<std::string>>();
    s.ignore = d["ignore"].get<std::vector<std::string>>();
    return s;
}

std::string data_path(const json& cfg)
{
    if (cfg["data"]["path"].is_null()) throw ConfigError("config: data.path is required (or pass --data)");
    return cfg["data"]["path"].get<std::string>();
}

std::string model_path(const json& cfg)
{
    if (cfg["model"].is_null()) throw ConfigError("config: model is required (or pass --model)");
    return cfg["model"].get<std::string>();
}

dys::data::SplitSpec split_spec(const json& cfg, std::uint64_t seed)
{
    return {seed, cfg["split"]["test_fraction"].get<double>(), cfg["split"]["validation_fraction"].get<double>()};
}

/// Raw table, fitted preprocessor and the three transformed splits.
struct Prepared {
    dys::data::Preprocessor pre;
    dys::data::SplitIndices idx;
    dys::data::DatasetSplit ds;
};

Prepared prepare_data(const json& cfg, const dys::data::SplitSpec& spec)
{
    const auto schema = table_schema(cfg);
    const auto table = dys::data::load_csv(data_path(cfg), schema);
    Prepared p;
    p.idx = dys::data::split_indices(table.rows(), spec);
    p.pre = dys::data::fit_preprocessor(table.subset(p.idx.train), schema);
    for (const auto& w : p.pre.warnings) logger->warn("{}", w);
    p.ds.train = dys::data::transform(p.pre, table.subset(p.idx.train));
    p.ds.validation = dys::data::transform(p.pre, table.subset(p.idx.validation));
    p.ds.test = dys::data::transform(p.pre, table.subset(p.idx.test));
    return p;
}

/// Split and preprocessor recorded in a model file's metadata, applied to `path`.
Prepared prepare_from_model(const json& model_json, const json& cfg)
{
    const auto& meta = model_json.at("metadata");
    const auto pre = dys::data::preprocessor_from_json(meta.at("preprocessor"));
    const auto table = dys::data::load_csv(data_path(cfg), pre.schema);
    const auto& s = meta.at("split");
    Prepared p;
    p.pre = pre;
    p.idx = dys::data::split_indices(table.rows(), {s.at("seed").get<std::uint64_t>(), s.at("test_fraction").get<double>(),
                                                    s.at("validation_fraction").get<double>()});
    p.ds.train = dys::data::transform(pre, table.subset(p.idx.train));
    p.ds.validation = dys::data::transform(pre, table.subset(p.idx.validation));
    p.ds.test = dys::data::transform(pre, table.subset(p.idx.test));
    return p;
}

json log_to_json(const dys::model::TrainLog& log)
{
    json epochs = json::array();
    for (const auto& e : log.epochs)
        epochs.push_back({{"epoch", e.epoch},
                          {"train_objective", e.train_objective},
                          {"validation_loss", e.validation_loss},
                          {"monitored", e.monitored},
                          {"active_mains", e.active_mains},
                          {"active_pairs", e.active_pairs}});
    return {{"stage", log.stage},
            {"best_epoch", log.best_epoch},
            {"best_monitored", log.best_validation_loss},
            {"early_stopped", log.early_stopped},
            {"notes", log.notes},
            {"epochs", epochs}};
}

json auc_to_json(const dys::metrics::AucReport& r)
{
    json valid = json::array();
    for (bool v : r.valid) valid.push_back(v);
    return {{"times", r.times},
            {"auc", r.auc},
            {"valid", valid},
            {"mean_auc", r.mean_auc},
            {"valid_times", r.valid_count()},
            {"mean_definition", "unweighted arithmetic mean over valid grid times"},
            {"censoring_estimate", "Kaplan-Meier of the training split"},
            {"excluded_cases", r.excluded_cases},
            {"warnings", r.warnings}};
}

std::string auc_csv(const dys::metrics::AucReport& r)
{
    std::ostringstream os;
    os << "time,auc\n";
    for (std::size_t k = 0; k < r.times.size(); ++k)
        if (r.valid[k]) os << dys::interpret::format_number(r.times[k]) << ',' << dys::interpret::format_number(r.auc[k]) << '\n';
    return os.str();
}

json model_metadata(const Prepared& p, const json& cfg, const dys::data::SplitSpec& spec,
                    const dys::model::TrainConfig& tc)
{
    return {{"preprocessor", dys::data::to_json(p.pre)},
            {"train_config", dys::model::to_json(tc)},
            {"split", {{"seed", spec.seed}, {"test_fraction", spec.test_fraction}, {"validation_fraction", spec.validation_fraction}}},
            {"stages", cfg["stages"]},
            {"K", cfg["K"]}};
}

void write_split(const fs::path& out, const Prepared& p, const dys::data::SplitSpec& spec)
{
    write_json(out / "split.json",
               {{"seed", spec.seed}, {"train", p.idx.train}, {"validation", p.idx.validation}, {"test", p.idx.test}});
}

void log_auc(const std::string& what, const dys::metrics::AucReport& r)
{
    for (const auto& w : r.warnings) logger->warn("{}", w);
    if (r.valid_count() == 0)
        logger->warn("{}: no valid evaluation times", what);
    else
        logger->info("{}: mean AUC {:.4f} over {} times", what, r.mean_auc, r.valid_count());
}

// ---------------------------------------------------------------- commands

int cmd_synth(const json& cfg)
{
    const auto out = prepare_out(cfg);
    const auto& s = cfg["synth"];
    const auto seed = cfg["seed"].get<std::uint64_t>();
    dys::synth::SynthOutput result;
    json sidecar;
    try {
        if (s["generator"] == "two-group") {
            dys::synth::SynthConfig sc;
            sc.n = s["n"].get<std::size_t>();
            sc.p = s["p"].get<std::size_t>();
            sc.t_max = s["t_max"].get<double>();
            sc.censor_fraction = s["censor_fraction"].get<double>();
            sc.informative = s["informative"].get<std::size_t>();
            sc.seed = seed;
            result = dys::synth::generate(sc);
            sidecar = dys::synth::sidecar_json(sc, result);
        } else {
            dys::synth::AdditiveConfig ac;
            ac.n = s["n"].get<std::size_t>();
            ac.p = s["p"].get<std::size_t>();
            ac.informative = s["informative"].get<std::size_t>();
            ac.beta_min = s["beta_min"].get<double>();
            ac.beta_max = s["beta_max"].get<double>();
            ac.censor_fraction = s["censor_fraction"].get<double>();
            ac.seed = seed;
            result = dys::synth::generate_additive(ac);
            sidecar = {{"generator", "additive"}, {"config", s}, {"seed", seed}, {"beta", result.beta}};
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: synth: ") + e.what());
    } catch (const dys::ParameterError& e) {
        throw ConfigError(e.what());
    }
    std::ostringstream csv;
    dys::synth::write_csv(csv, result.dataset);
    write_text(out / "data.csv", csv.str());
    write_json(out / "synth.json", sidecar);
    logger->info("wrote {} rows to {}", result.dataset.size(), (out / "data.csv").string());
    return 0;
}

/// One training run into `out`. Returns the test-set mean AUC (NaN if undefined).
double train_once(const json& cfg, std::uint64_t seed, const fs::path& out)
{
    const auto tc = train_config(cfg, seed);
    const auto spec = split_spec(cfg, seed);
    const auto p = prepare_data(cfg, spec);
    const auto head = dys::model::head_mode_from_string(cfg["mode"].get<std::string>());
    const auto grid = dys::data::build_time_grid(p.ds.train, cfg["K"].get<std::size_t>());
    logger->info("seed {}: {} train / {} validation / {} test rows, {} features, K={}", seed, p.ds.train.size(),
                 p.ds.validation.size(), p.ds.test.size(), p.ds.train.features(), grid.size());

    dys::model::FitResult fit;
    if (cfg["stages"] == "two")
        fit = dys::model::two_stage_fit(p.ds.train, p.ds.validation, grid, head, tc);
    else
        fit = dys::model::one_stage_fit(p.ds.train, p.ds.validation, grid, head, tc, cfg["interactions"].get<bool>());
    json logs = json::array();
    for (const auto& l : fit.logs) {
        logger->info("{}: {} epochs, best epoch {}{}", l.stage, l.epochs.size(), l.best_epoch,
                     l.early_stopped ? " (early stop)" : "");
        for (const auto& e : l.epochs)
            logger->debug("{} epoch {}: objective {:.6f} validation {:.6f} active {}+{}", l.stage, e.epoch,
                          e.train_objective, e.validation_loss, e.active_mains, e.active_pairs);
        logs.push_back(log_to_json(l));
    }

    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw dys::Error("cannot create '" + out.string() + "': " + ec.message());
    dys::model::save_model(fit.model, (out / "model.json").string(), model_metadata(p, cfg, spec, tc));
    write_json(out / "train_log.json", logs);
    write_split(out, p, spec);

    const auto report = dys::model::evaluate_auc(fit.model, p.ds.train, p.ds.test);
    log_auc("test", report);
    write_json(out / "auc.json", auc_to_json(report));
    write_text(out / "auc.csv", auc_csv(report));
    return report.valid_count() > 0 ? report.mean_auc : std::nan("");
}

void write_trials(const fs::path& out, const std::vector<std::uint64_t>& seeds, const std::vector<double>& aucs)
{
    double mean = 0.0, sd = 0.0;
    std::size_t n = 0;
    for (double a : aucs)
        if (std::isfinite(a)) {
            mean += a;
            ++n;
        }
    mean = n ? mean / static_cast<double>(n) : std::nan("");
    for (double a : aucs)
        if (std::isfinite(a)) sd += (a - mean) * (a - mean);
    sd = n > 1 ? std::sqrt(sd / static_cast<double>(n - 1)) : 0.0;
    std::ostringstream csv;
    csv << "seed,mean_auc\n";
    for (std::size_t i = 0; i < seeds.size(); ++i) csv << seeds[i] << ',' << dys::interpret::format_number(aucs[i]) << '\n';
    csv << "mean," << dys::interpret::format_number(mean) << "\nstddev," << dys::interpret::format_number(sd) << '\n';
    write_text(out / "trials.csv", csv.str());
    write_json(out / "trials.json", {{"seeds", seeds}, {"mean_auc", aucs}, {"mean", mean}, {"stddev", sd}, {"stddev_convention", "sample (n-1)"}});
    logger->info("mean AUC over {} trials: {:.4f} +/- {:.4f}", n, mean, sd);
}

int cmd_train(const json& cfg)
{
    const auto out = prepare_out(cfg);
    const auto seed = cfg["seed"].get<std::uint64_t>();
    const auto trials = cfg["trials"].get<std::size_t>();
    if (trials == 1) {
        train_once(cfg, seed, out);
        return 0;
    }
    std::vector<std::uint64_t> seeds;
    std::vector<double> aucs;
    for (std::size_t t = 0; t < trials; ++t) {
        seeds.push_back(seed + t);
        char dir[32];
        std::snprintf(dir, sizeof dir, "trial_%03zu", t);
        aucs.push_back(train_once(cfg, seed + t, out / dir));
    }
    write_trials(out, seeds, aucs);
    return 0;
}

int cmd_predict(const json& cfg)
{
    const auto out = prepare_out(cfg);
    const auto model_json = dys::model::read_json_file(model_path(cfg));
    const auto m = dys::model::model_from_json(model_json);
    const auto pre = dys::data::preprocessor_from_json(model_json.at("metadata").at("preprocessor"));
    const auto table = dys::data::load_csv(data_path(cfg), pre.schema);
    const auto ds = dys::data::transform(pre, table);

    std::ostringstream os;
    os << "id";
    if (m.head == dys::model::HeadMode::RPS) {
        for (std::size_t k = 0; k < m.grid.size(); ++k) os << ",t_" << k + 1;
        os << '\n';
        const auto s = dys::model::survival_batch(m, ds.x);
        for (Eigen::Index i = 0; i < s.rows(); ++i) {
            os << i;
            for (Eigen::Index k = 0; k < s.cols(); ++k) os << ',' << dys::synth::format_exact(s(i, k));
            os << '\n';
        }
    } else {
        os << ",risk\n";
        const auto z = dys::model::logits_batch(m, ds.x);
        for (Eigen::Index i = 0; i < z.rows(); ++i) os << i << ',' << dys::synth::format_exact(z(i, 0)) << '\n';
    }
    write_text(out / "predictions.csv", os.str());
    write_json(out / "grid.json", {{"times", m.grid.times}});
    logger->info("wrote predictions for {} rows", ds.size());
    return 0;
}

int cmd_eval(const json& cfg)
{
    const auto out = prepare_out(cfg);
    const auto model_json = dys::model::read_json_file(model_path(cfg));
    const auto m = dys::model::model_from_json(model_json);
    const auto p = prepare_from_model(model_json, cfg);
    const auto report = dys::model::evaluate_auc(m, p.ds.train, p.ds.test);
    log_auc("test", report);
    write_json(out / "auc.json", auc_to_json(report));
    write_text(out / "auc.csv", auc_csv(report));
    return 0;
}

int cmd_select(const json& cfg)
{
    const auto out = prepare_out(cfg);
    const auto seed = cfg["seed"].get<std::uint64_t>();
    auto tc = train_config(cfg, seed);
    tc.sparsity_enabled = true;
    const auto spec = split_spec(cfg, seed);
    const auto p = prepare_data(cfg, spec);
    const auto k = cfg["k"].get<std::size_t>();
    if (k > p.ds.train.features())
        throw ConfigError("select: k=" + std::to_string(k) + " exceeds the " + std::to_string(p.ds.train.features()) +
                          " available features");
    const auto head = dys::model::head_mode_from_string(cfg["mode"].get<std::string>());
    const auto grid = dys::data::build_time_grid(p.ds.train, cfg["K"].get<std::size_t>());

    const auto fit_at = [&](double lambda) {
        auto c = tc;
        c.lambda = lambda;
        auto r = dys::model::fit_main_effects(p.ds.train, p.ds.validation, grid, head, c);
        logger->info("lambda {:.6g}: {} active features", lambda, dys::model::active_features(r.model).size());
        return r;
    };
    const auto count = [](const dys::model::FitResult& r) { return dys::model::active_features(r.model).size(); };
    const auto steps_json = [](const std::vector<dys::selection::BisectionStep>& steps) {
        json a = json::array();
        for (const auto& s : steps) a.push_back({{"lambda", s.lambda}, {"active", s.active}});
        return a;
    };

    try {
        auto res = dys::selection::bisect_to_k(fit_at, count, k, cfg["lambda0"].get<double>(),
                                               cfg["max_iterations"].get<std::size_t>());
        auto fit = std::move(res.fit);
        tc.lambda = res.lambda;
        if (cfg["stages"] == "two") fit.logs.push_back(dys::model::fit_interactions(fit.model, p.ds.train, p.ds.validation, tc));
        json logs = json::array();
        for (const auto& l : fit.logs) logs.push_back(log_to_json(l));
        const auto active = dys::model::active_features(fit.model);
        std::vector<std::string> names;
        for (auto j : active) names.push_back(dys::interpret::feature_label(fit.model, j));
        write_json(out / "bisection.json", {{"status", "ok"},
                                            {"k", k},
                                            {"lambda", res.lambda},
                                            {"iterations", res.trajectory.size()},
                                            {"trajectory", steps_json(res.trajectory)},
                                            {"active_features", active},
                                            {"active_names", names}});
        dys::model::save_model(fit.model, (out / "model.json").string(), model_metadata(p, cfg, spec, tc));
        write_json(out / "train_log.json", logs);
        write_split(out, p, spec);
        const auto report = dys::model::evaluate_auc(fit.model, p.ds.train, p.ds.test);
        log_auc("test", report);
        write_json(out / "auc.json", auc_to_json(report));
        write_text(out / "auc.csv", auc_csv(report));
        logger->info("selected {} features at lambda {:.6g} after {} fits", active.size(), res.lambda, res.trajectory.size());
    } catch (const dys::selection::BisectionError& e) {
        const auto& st = e.state();
        json state{{"iterations", st.iterations}, {"lambda", st.lambda}};
        state["lambda_low"] = st.lambda_low ? json(*st.lambda_low) : json(nullptr);
        state["lambda_high"] = st.lambda_high ? json(*st.lambda_high) : json(nullptr);
        write_json(out / "bisection.json",
                   {{"status", "failed"}, {"k", k}, {"message", e.what()}, {"state", state}, {"trajectory", steps_json(e.trajectory())}});
        throw;
    }
    return 0;
}

int cmd_explain(const json& cfg)
{
    const auto out = prepare_out(cfg);
    const auto model_json = dys::model::read_json_file(model_path(cfg));
    const auto m = dys::model::model_from_json(model_json);
    const auto p = prepare_from_model(model_json, cfg);
    const auto table = dys::interpret::feature_importance(m, p.ds.train);
    const auto ranges = dys::interpret::feature_ranges(p.ds.train);
    const auto& ex = cfg["explain"];
    std::vector<std::size_t> times;
    if (ex["times"].is_null())
        times = dys::interpret::default_time_indices(m);
    else
        times = ex["times"].get<std::vector<std::size_t>>();
    for (auto t : times)
        if (t >= m.time_count()) throw ConfigError("explain: time index " + std::to_string(t) + " out of range");
    if (m.head == dys::model::HeadMode::Cox) times = {0};

    std::vector<dys::interpret::ImpactCurve> curves;
    for (const auto& id : dys::interpret::effects(m))
        for (auto t : times)
            curves.push_back(dys::interpret::impact_curve(
                m, id, t, ranges, id.is_pair() ? ex["pair_resolution"].get<std::size_t>() : ex["resolution"].get<std::size_t>()));
    const auto manifest = dys::interpret::export_report(m, table, curves, out / "report", {ex["svg"].get<bool>()});
    logger->info("wrote {} files to {}", manifest["files"].size(), (out / "report").string());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    logger = make_logger();
    CLI::App app{"DyS: sparse GA2M survival models with a discrete-time softmax head"};
    app.require_subcommand(1);
    Flags flags;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config, "JSON config file");
        sub->add_option("--seed", flags.seed, "random seed");
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--k", flags.k, "target number of features (select)");
        sub->add_option("--mode", flags.mode, "loss head: rps or cox");
        sub->add_option("--stages", flags.stages, "one or two stage fitting");
        sub->add_option("--trials", flags.trials, "number of seeds to run (train)");
        sub->add_option("--data", flags.data, "input CSV (overrides data.path)");
        sub->add_option("--model", flags.model, "model file (overrides model)");
    };
    const std::vector<std::pair<std::string, std::string>> commands{
        {"synth", "generate a synthetic dataset"},
        {"train", "fit a model and score it on the test split"},
        {"predict", "write survival curves for every row of a CSV"},
        {"eval", "time-dependent AUC on the test split"},
        {"select", "bisect the sparsity weight to keep exactly k features"},
        {"explain", "export importances and impact curves"}};
    for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        const auto cfg = resolve_config(command, flags);
        if (command == "synth") return cmd_synth(cfg);
        if (command == "train") return cmd_train(cfg);
        if (command == "predict") return cmd_predict(cfg);
        if (command == "eval") return cmd_eval(cfg);
        if (command == "select") return cmd_select(cfg);
        return cmd_explain(cfg);
    } catch (const ConfigError& e) {
        logger->error("{}", e.what());
        return exit_config;
    } catch (const dys::ParameterError& e) {
        logger->error("{}", e.what());
        return exit_config;
    } catch (const std::exception& e) {
        logger->error("{}", e.what());
        return exit_runtime;
    }
}
