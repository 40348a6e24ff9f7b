#ifndef DYS_MODEL_TRAIN_HPP
#define DYS_MODEL_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dys/data/dataset.hpp"
#include "dys/error.hpp"
#include "dys/model/loss.hpp"
#include "dys/model/model.hpp"
#include "dys/numeric/adam.hpp"
#include "dys/random.hpp"

namespace dys::model {

struct TrainConfig {
    double learning_rate = 1e-4;
    // Step size for the gate parameters mu; 0 means "same as learning_rate".
    double gate_learning_rate = 0.0;
    std::size_t max_epochs = 200;
    std::size_t patience = 5;
    std::size_t batch_size = 128;
    double lambda = 0.0; // sparsity weight
    double alpha = 1.0;  // interaction multiplier inside the sparsity term
    double tau = 1e-3;   // entropy weight
    bool sparsity_enabled = false;
    std::uint64_t seed = 0;

    std::vector<std::size_t> hidden{32};
    double gamma = 1.0;
    // Initial gate parameter; NaN means gamma / 4.
    double gate_init = std::numeric_limits<double>::quiet_NaN();
    // Cox mode trains full-batch when the training set is at most this large.
    std::size_t cox_full_batch_limit = 4096;
    std::size_t max_interactions = 1000;
    bool overflow_bin = false;
    // With sparsity on, early stopping tracks validation data loss plus the
    // regularizers instead of the data loss alone.
    bool monitor_regularized = true;

    double gate_mu0() const { return std::isnan(gate_init) ? gamma / 4.0 : gate_init; }
    double gate_step() const { return gate_learning_rate > 0.0 ? gate_learning_rate : learning_rate; }

    void validate() const
    {
        if (!(learning_rate > 0.0)) throw ParameterError("train: learning_rate must be > 0");
        if (gate_learning_rate < 0.0) throw ParameterError("train: gate_learning_rate must be >= 0");
        if (lambda < 0.0 || alpha < 0.0 || tau < 0.0) throw ParameterError("train: regularizer weights must be >= 0");
        if (patience < 1) throw ParameterError("train: patience must be >= 1");
        if (batch_size < 1) throw ParameterError("train: batch_size must be >= 1");
        if (max_epochs < 1) throw ParameterError("train: max_epochs must be >= 1");
        if (!(gamma > 0.0)) throw ParameterError("train: gamma must be > 0");
        if (hidden.empty()) throw ParameterError("train: need at least one hidden layer");
    }
};

/// Which parameter groups receive gradient updates.
struct TrainScope {
    bool intercept = true;
    bool main_nets = true;
    bool main_gates = true;
    bool pair_nets = true;
    bool pair_gates = true;
};

/// Gradient buffers shaped like a DySModel.
struct ModelGradient {
    std::vector<numeric::MLPGradients> mains, pairs;
    std::vector<double> main_gates, pair_gates;
    Vector intercept;

    explicit ModelGradient(const DySModel& m) : intercept(Vector::Zero(m.intercept.size()))
    {
        for (const auto& e : m.mains) mains.push_back(e.net.zeros_like());
        for (const auto& e : m.interactions) pairs.push_back(e.net.zeros_like());
        main_gates.assign(m.mains.size(), 0.0);
        pair_gates.assign(m.interactions.size(), 0.0);
    }
};

struct Regularization {
    bool enabled = false;
    double lambda = 0.0;
    double alpha = 1.0;
    double tau = 0.0;

    static Regularization from(const TrainConfig& c) { return {c.sparsity_enabled, c.lambda, c.alpha, c.tau}; }
};

struct ObjectiveTerms {
    double data = 0.0;
    double sparsity = 0.0;
    double entropy = 0.0;

    double total() const { return data + sparsity + entropy; }
};

/// Labels of a batch; rows of `x` align with `time` and `event`.
struct BatchView {
    const Matrix& x;
    std::span<const double> time;
    std::span<const int> event;
};

/// Mean data loss (RPS or Cox), plus the regularizers when enabled. When
/// `grad` is given it receives the exact gradient of the returned total.
inline ObjectiveTerms evaluate_objective(const DySModel& m, const BatchView& batch, const Regularization& reg,
                                         ModelGradient* grad = nullptr)
{
    const auto n = static_cast<std::size_t>(batch.x.rows());
    if (batch.time.size() != n || batch.event.size() != n) throw ShapeError("objective: batch labels misaligned");
    if (n == 0) throw ShapeError("objective: empty batch");
    const auto K = static_cast<Eigen::Index>(m.output_dim());

    struct Active {
        bool pair;
        std::size_t index;
        double gate;
        Matrix out;
        numeric::ForwardCache cache;
    };
    std::vector<Active> active;
    Matrix z = m.intercept.transpose().replicate(static_cast<Eigen::Index>(n), 1);
    for (std::size_t i = 0; i < m.mains.size(); ++i) {
        const auto& e = m.mains[i];
        const double s = e.gate.value();
        if (s == 0.0) continue;
        Active a{false, i, s, {}, {}};
        a.out = numeric::mlp_forward_batch(e.net, main_input(batch.x, e.feature), grad ? &a.cache : nullptr);
        z += s * a.out;
        active.push_back(std::move(a));
    }
    for (std::size_t i = 0; i < m.interactions.size(); ++i) {
        const auto& e = m.interactions[i];
        const double s = e.gate.value();
        if (s == 0.0) continue;
        Active a{true, i, s, {}, {}};
        a.out = numeric::mlp_forward_batch(e.net, pair_input(batch.x, e.first, e.second), grad ? &a.cache : nullptr);
        z += s * a.out;
        active.push_back(std::move(a));
    }

    ObjectiveTerms terms;
    Matrix dz(static_cast<Eigen::Index>(n), K);
    if (m.head == HeadMode::RPS) {
        Vector row_grad(K);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double loss = 0.0;
            rps_logit_grad(z.row(static_cast<Eigen::Index>(i)).transpose(), batch.time[i], batch.event[i], m.grid, loss,
                           row_grad);
            total += loss;
            dz.row(static_cast<Eigen::Index>(i)) = row_grad.transpose();
        }
        terms.data = total / static_cast<double>(n);
        dz /= static_cast<double>(n);
    } else {
        std::vector<double> risk(n), g(n);
        for (std::size_t i = 0; i < n; ++i) risk[i] = z(static_cast<Eigen::Index>(i), 0);
        terms.data = cox_loss(risk, batch.time, batch.event, grad ? std::span<double>(g) : std::span<double>{});
        for (std::size_t i = 0; i < n; ++i) dz(static_cast<Eigen::Index>(i), 0) = g[i];
    }

    if (reg.enabled) {
        terms.sparsity = sparsity_loss(m, reg.lambda, reg.alpha);
        terms.entropy = entropy_loss(m, reg.tau);
    }
    if (!grad) return terms;

    grad->intercept += dz.colwise().sum().transpose();
    for (auto& a : active) {
        const auto& gate = a.pair ? m.interactions[a.index].gate : m.mains[a.index].gate;
        const auto& net = a.pair ? m.interactions[a.index].net : m.mains[a.index].net;
        auto& net_grad = a.pair ? grad->pairs[a.index] : grad->mains[a.index];
        auto& gate_grad = a.pair ? grad->pair_gates[a.index] : grad->main_gates[a.index];
        gate_grad += a.out.cwiseProduct(dz).sum() * gate.slope();
        numeric::mlp_backward_batch(net, a.cache, a.gate * dz, net_grad);
    }
    if (reg.enabled) {
        for (std::size_t i = 0; i < m.mains.size(); ++i) {
            const auto& g = m.mains[i].gate;
            grad->main_gates[i] += reg.lambda * g.slope() + reg.tau * binary_entropy_mu_grad(g);
        }
        for (std::size_t i = 0; i < m.interactions.size(); ++i) {
            const auto& g = m.interactions[i].gate;
            grad->pair_gates[i] += reg.lambda * reg.alpha * g.slope() + reg.tau * binary_entropy_mu_grad(g);
        }
    }
    return terms;
}

/// Parameter blocks selected by `scope`, split into net weights and gate
/// parameters. `flatten` emits gradients in the same order.
struct ParameterBlocks {
    std::vector<std::span<double>> nets;
    std::vector<std::span<double>> gates;
};

inline ParameterBlocks parameter_blocks(DySModel& m, const TrainScope& scope)
{
    ParameterBlocks b;
    if (scope.intercept) b.nets.emplace_back(m.intercept.data(), static_cast<std::size_t>(m.intercept.size()));
    for (auto& e : m.mains) {
        if (scope.main_nets) numeric::for_each_block(e.net, [&](std::span<double> s) { b.nets.push_back(s); });
        if (scope.main_gates) b.gates.emplace_back(&e.gate.mu, 1);
    }
    for (auto& e : m.interactions) {
        if (scope.pair_nets) numeric::for_each_block(e.net, [&](std::span<double> s) { b.nets.push_back(s); });
        if (scope.pair_gates) b.gates.emplace_back(&e.gate.mu, 1);
    }
    return b;
}

struct FlatGradient {
    std::vector<double> nets;
    std::vector<double> gates;
};

inline FlatGradient flatten(ModelGradient& g, const TrainScope& scope)
{
    FlatGradient f;
    if (scope.intercept) f.nets.insert(f.nets.end(), g.intercept.data(), g.intercept.data() + g.intercept.size());
    const auto push_net = [&](numeric::MLPGradients& net) {
        numeric::for_each_block(net, [&](std::span<double> s) { f.nets.insert(f.nets.end(), s.begin(), s.end()); });
    };
    for (std::size_t i = 0; i < g.mains.size(); ++i) {
        if (scope.main_nets) push_net(g.mains[i]);
        if (scope.main_gates) f.gates.push_back(g.main_gates[i]);
    }
    for (std::size_t i = 0; i < g.pairs.size(); ++i) {
        if (scope.pair_nets) push_net(g.pairs[i]);
        if (scope.pair_gates) f.gates.push_back(g.pair_gates[i]);
    }
    return f;
}

struct EpochRecord {
    std::size_t epoch = 0;
    double train_objective = 0.0; // mean over batches of data + regularizers
    double validation_loss = 0.0; // data loss only
    double monitored = 0.0;       // value compared for early stopping
    std::size_t active_mains = 0;
    std::size_t active_pairs = 0;
};

struct TrainLog {
    std::string stage;
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;
    double best_validation_loss = std::numeric_limits<double>::infinity();
    bool early_stopped = false;
    std::vector<std::string> notes;
};

inline BatchView full_view(const data::SurvivalDataset& ds) { return {ds.x, ds.time, ds.event}; }

/// Mean validation data loss (no regularizers).
inline double validation_loss(const DySModel& m, const data::SurvivalDataset& ds)
{
    return evaluate_objective(m, full_view(ds), Regularization{}).data;
}

/// Minibatch Adam on the parameters in `scope`, early stopping on the
/// validation loss, best-validation parameters restored.
inline TrainLog fit(DySModel& m, const data::SurvivalDataset& train, const data::SurvivalDataset& val,
                    const TrainConfig& cfg, const TrainScope& scope, const std::string& stage = "fit")
{
    cfg.validate();
    m.validate();
    train.validate();
    val.validate();
    if (train.features() != m.input_dim || val.features() != m.input_dim)
        throw ShapeError("fit: dataset feature count does not match the model");
    if (m.head == HeadMode::Cox && (train.event_count() == 0 || val.event_count() == 0))
        throw DataError("fit: Cox mode needs events in both training and validation data");

    const Regularization reg = Regularization::from(cfg);
    const Regularization watch = cfg.sparsity_enabled && cfg.monitor_regularized ? reg : Regularization{};
    const auto monitor = [&] { return evaluate_objective(m, full_view(val), watch).total(); };
    auto blocks = parameter_blocks(m, scope);
    std::size_t n_net = 0, n_gate = 0;
    for (const auto& b : blocks.nets) n_net += b.size();
    for (const auto& b : blocks.gates) n_gate += b.size();
    numeric::AdamState net_opt(n_net, {cfg.learning_rate});
    numeric::AdamState gate_opt(n_gate, {cfg.gate_step()});

    const std::size_t n = train.size();
    std::size_t batch = cfg.batch_size;
    if (m.head == HeadMode::Cox && n <= cfg.cox_full_batch_limit) batch = n;
    batch = std::min(batch, n);

    TrainLog log;
    log.stage = stage;
    log.best_validation_loss = monitor();
    DySModel best = m;
    std::size_t stale = 0;

    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Matrix xb;
    std::vector<double> tb;
    std::vector<int> eb;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(std::span(order));
        double objective_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(n, start + batch);
            const auto rows = static_cast<Eigen::Index>(stop - start);
            xb.resize(rows, train.x.cols());
            tb.resize(stop - start);
            eb.resize(stop - start);
            for (std::size_t r = start; r < stop; ++r) {
                xb.row(static_cast<Eigen::Index>(r - start)) = train.x.row(static_cast<Eigen::Index>(order[r]));
                tb[r - start] = train.time[order[r]];
                eb[r - start] = train.event[order[r]];
            }
            if (m.head == HeadMode::Cox && std::find(eb.begin(), eb.end(), 1) == eb.end()) continue;

            ModelGradient grad(m);
            const auto terms = evaluate_objective(m, {xb, tb, eb}, reg, &grad);
            if (!std::isfinite(terms.total()))
                throw NumericError(stage + ": non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(batches + 1) + " (data " + std::to_string(terms.data) +
                                   ", sparsity " + std::to_string(terms.sparsity) + ", entropy " +
                                   std::to_string(terms.entropy) + ")");
            const auto flat = flatten(grad, scope);
            numeric::adam_step(net_opt, blocks.nets, flat.nets);
            numeric::adam_step(gate_opt, blocks.gates, flat.gates);
            objective_sum += terms.total();
            ++batches;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_objective = batches ? objective_sum / static_cast<double>(batches) : 0.0;
        rec.validation_loss = validation_loss(m, val);
        rec.monitored = watch.enabled ? monitor() : rec.validation_loss;
        rec.active_mains = active_features(m).size();
        rec.active_pairs = active_interactions(m).size();
        if (!std::isfinite(rec.validation_loss))
            throw NumericError(stage + ": non-finite validation loss at epoch " + std::to_string(epoch));
        log.epochs.push_back(rec);

        // An epoch that opens or closes a gate counts as progress.
        const bool gates_moved = log.epochs.size() > 1 &&
                                 (rec.active_mains != log.epochs[log.epochs.size() - 2].active_mains ||
                                  rec.active_pairs != log.epochs[log.epochs.size() - 2].active_pairs);
        if (rec.monitored < log.best_validation_loss) {
            log.best_validation_loss = rec.monitored;
            log.best_epoch = epoch;
            best = m;
            stale = 0;
        } else if (watch.enabled && gates_moved) {
            stale = 0;
        } else if (++stale >= cfg.patience) {
            log.early_stopped = true;
            break;
        }
    }
    m = std::move(best);
    return log;
}

/// Trains every unfrozen parameter group of `m` in place. Gates move only when
/// sparsity is enabled; a model with frozen mains trains its interactions only.
inline TrainLog train(DySModel& m, const data::SurvivalDataset& train_ds, const data::SurvivalDataset& val_ds,
                      const TrainConfig& cfg)
{
    const bool g = cfg.sparsity_enabled;
    const bool f = m.frozen_main;
    return fit(m, train_ds, val_ds, cfg, TrainScope{!f, !f, g && !f, true, g}, f ? "stage2" : "train");
}

/// Fresh model with one main effect per feature. Gates start inside the
/// smooth band when sparsity is on, fully open otherwise.
inline DySModel initialize_model(const data::SurvivalDataset& train, const data::TimeGrid& grid, HeadMode head,
                                 const TrainConfig& cfg)
{
    cfg.validate();
    Rng rng(cfg.seed);
    const double mu0 = cfg.sparsity_enabled ? cfg.gate_mu0() : Gate::open(cfg.gamma).mu;
    auto m = make_model(train.features(), grid, head, cfg.hidden, cfg.gamma, mu0, rng,
                        cfg.overflow_bin && head == HeadMode::RPS);
    m.feature_names = train.feature_names;
    return m;
}

/// Global importance of each main effect: mean over samples and outputs of
/// |s(mu_j) f_j(x_j)|.
inline std::vector<double> main_importance(const DySModel& m, const data::SurvivalDataset& ds)
{
    std::vector<double> imp;
    for (const auto& e : m.mains) {
        const double s = e.gate.value();
        if (s == 0.0) {
            imp.push_back(0.0);
            continue;
        }
        const Matrix out = numeric::mlp_forward_batch(e.net, main_input(ds.x, e.feature));
        imp.push_back((s * out).cwiseAbs().mean());
    }
    return imp;
}

/// Candidate pairs among active mains, ordered by descending product of
/// global importances, truncated to `cap`.
inline std::vector<std::pair<std::size_t, std::size_t>> candidate_pairs(const DySModel& m, const data::SurvivalDataset& ds,
                                                                        std::size_t cap, bool* truncated = nullptr)
{
    const auto imp = main_importance(m, ds);
    struct Scored {
        double score;
        std::size_t a, b;
    };
    std::vector<Scored> pairs;
    for (std::size_t i = 0; i < m.mains.size(); ++i) {
        if (!(m.mains[i].gate.value() > 0.0)) continue;
        for (std::size_t j = i + 1; j < m.mains.size(); ++j) {
            if (!(m.mains[j].gate.value() > 0.0)) continue;
            const auto a = std::min(m.mains[i].feature, m.mains[j].feature);
            const auto b = std::max(m.mains[i].feature, m.mains[j].feature);
            pairs.push_back({imp[i] * imp[j], a, b});
        }
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Scored& x, const Scored& y) {
        if (x.score != y.score) return x.score > y.score;
        return std::pair(x.a, x.b) < std::pair(y.a, y.b);
    });
    if (truncated) *truncated = pairs.size() > cap;
    if (pairs.size() > cap) pairs.resize(cap);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& p : pairs) out.emplace_back(p.a, p.b);
    std::sort(out.begin(), out.end());
    return out;
}

struct FitResult {
    DySModel model;
    std::vector<TrainLog> logs;
};

/// Stage 1 of two-stage fitting: main effects only.
inline FitResult fit_main_effects(const data::SurvivalDataset& train, const data::SurvivalDataset& val,
                                  const data::TimeGrid& grid, HeadMode head, const TrainConfig& cfg)
{
    FitResult r{initialize_model(train, grid, head, cfg), {}};
    TrainScope scope{true, true, cfg.sparsity_enabled, false, false};
    r.logs.push_back(fit(r.model, train, val, cfg, scope, "stage1"));
    return r;
}

/// Stage 2: freeze everything fitted so far, add interactions among active
/// mains and train only those.
inline TrainLog fit_interactions(DySModel& m, const data::SurvivalDataset& train, const data::SurvivalDataset& val,
                                 const TrainConfig& cfg)
{
    if (active_features(m).empty())
        throw TrainingError("two-stage fit: no active main effects after stage 1; use a smaller lambda");
    bool truncated = false;
    const auto pairs = candidate_pairs(m, train, cfg.max_interactions, &truncated);
    Rng rng(cfg.seed ^ 0x5bd1e995ULL);
    const double mu0 = cfg.sparsity_enabled ? cfg.gate_mu0() : Gate::open(cfg.gamma).mu;
    for (const auto& [a, b] : pairs) add_interaction(m, a, b, mu0, rng);
    m.frozen_main = true;

    TrainLog log;
    if (pairs.empty()) {
        log.stage = "stage2";
        log.notes.push_back("fewer than two active main effects; no interactions to fit");
        return log;
    }
    log = fit(m, train, val, cfg, TrainScope{false, false, false, true, cfg.sparsity_enabled}, "stage2");
    log.notes.push_back(std::to_string(pairs.size()) + " candidate interactions" +
                        (truncated ? " (truncated to the cap by descending importance product)" : ""));
    return log;
}

inline FitResult two_stage_fit(const data::SurvivalDataset& train, const data::SurvivalDataset& val,
                               const data::TimeGrid& grid, HeadMode head, const TrainConfig& cfg)
{
    auto r = fit_main_effects(train, val, grid, head, cfg);
    r.logs.push_back(fit_interactions(r.model, train, val, cfg));
    return r;
}

/// Joint fit of all main effects and all pairwise interactions (capped,
/// ordered pairs by index).
inline FitResult one_stage_fit(const data::SurvivalDataset& train, const data::SurvivalDataset& val,
                               const data::TimeGrid& grid, HeadMode head, const TrainConfig& cfg,
                               bool with_interactions = true)
{
    FitResult r{initialize_model(train, grid, head, cfg), {}};
    if (with_interactions) {
        Rng rng(cfg.seed ^ 0x5bd1e995ULL);
        const double mu0 = cfg.sparsity_enabled ? cfg.gate_mu0() : Gate::open(cfg.gamma).mu;
        const auto p = train.features();
        for (std::size_t a = 0; a < p && r.model.interactions.size() < cfg.max_interactions; ++a)
            for (std::size_t b = a + 1; b < p && r.model.interactions.size() < cfg.max_interactions; ++b)
                add_interaction(r.model, a, b, mu0, rng);
    }
    const bool g = cfg.sparsity_enabled;
    r.logs.push_back(fit(r.model, train, val, cfg, TrainScope{true, true, g, true, g}, "one-stage"));
    return r;
}

} // namespace dys::model

#endif // DYS_MODEL_TRAIN_HPP
