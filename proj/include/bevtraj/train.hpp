#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "bevtraj/adam.hpp"
#include "bevtraj/autodiff.hpp"
#include "bevtraj/checkpoint.hpp"
#include "bevtraj/errors.hpp"
#include "bevtraj/graph.hpp"
#include "bevtraj/model.hpp"
#include "bevtraj/rng.hpp"
#include "bevtraj/scenegen.hpp"

namespace bevtraj {

// Seeded shuffle, then contiguous 80/10/10 split: floor(0.8n) / floor(0.1n) /
// remainder. Partitions are disjoint and exhaustive.
struct DatasetSplit {
    std::vector<SceneSequence> train;
    std::vector<SceneSequence> val;
    std::vector<SceneSequence> test;
};

inline DatasetSplit split_dataset(const std::vector<SceneSequence>& seqs, std::uint64_t seed,
                                  double train_fraction = 0.8, double val_fraction = 0.1) {
    if (seqs.size() < 10) throw config_error("split_dataset: need at least 10 sequences, got " + std::to_string(seqs.size()));
    std::vector<std::size_t> order(seqs.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(Rng::derive_stream(seed, 0x5917ULL));
    rng.shuffle(order);
    const auto n = seqs.size();
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(n)));
    DatasetSplit split;
    for (std::size_t i = 0; i < n; ++i) {
        const SceneSequence& s = seqs[order[i]];
        if (i < n_train)
            split.train.push_back(s);
        else if (i < n_train + n_val)
            split.val.push_back(s);
        else
            split.test.push_back(s);
    }
    return split;
}

// One training/evaluation sample: T observed frame graphs and H future ego
// displacements in meters, relative to the ego position at the window end.
struct Sample {
    std::vector<std::shared_ptr<const SceneGraph>> graphs;   // size T
    std::vector<Vec2> target_disp;                           // size H
    std::vector<Vec2> window_ego_m;                          // size T
    Vec2 ego_end;                                            // == window_ego_m.back()
    ScenarioKind kind = ScenarioKind::Straight;
    int sequence_id = 0;
    int end_frame = 0;

    std::vector<const SceneGraph*> graph_ptrs() const {
        std::vector<const SceneGraph*> out;
        out.reserve(graphs.size());
        for (const auto& g : graphs) out.push_back(g.get());
        return out;
    }
};

struct SampleContext {
    std::size_t knn_k;
    const PositionalEncodingTable* pe;
    const ProjectionParams* projection;
};

inline PositionalEncodingTable make_pe_table(const ModelConfig& cfg, const CameraConfig& cam) {
    const std::size_t span = static_cast<std::size_t>(std::max(cam.image_width, cam.image_height)) + 1;
    return positional_encoding(cfg.node_dim, span);
}

// Sliding windows of stride 1 over one sequence. Sequences shorter than
// T + H yield no samples; callers count them as skipped.
inline std::vector<Sample> make_samples(const SceneSequence& seq, std::size_t T, std::size_t H, const SampleContext& ctx) {
    std::vector<Sample> out;
    if (seq.frames.size() < T + H) return out;

    std::vector<std::shared_ptr<const SceneGraph>> graphs;
    graphs.reserve(seq.frames.size());
    for (const auto& frame : seq.frames)
        graphs.push_back(std::make_shared<SceneGraph>(build_scene_graph(frame, ctx.knn_k, *ctx.pe, *ctx.projection)));

    for (std::size_t end = T - 1; end + H < seq.frames.size(); ++end) {
        Sample s;
        s.kind = seq.meta.kind;
        s.sequence_id = seq.sequence_id;
        s.end_frame = static_cast<int>(end);
        for (std::size_t t = end + 1 - T; t <= end; ++t) {
            s.graphs.push_back(graphs[t]);
            s.window_ego_m.push_back(seq.ego_truth_m[t]);
        }
        s.ego_end = s.window_ego_m.back();
        for (std::size_t j = 1; j <= H; ++j) s.target_disp.push_back(seq.ego_truth_m[end + j] - s.ego_end);
        out.push_back(std::move(s));
    }
    return out;
}

inline std::vector<Sample> make_all_samples(const std::vector<SceneSequence>& seqs, std::size_t T, std::size_t H,
                                            const SampleContext& ctx, std::size_t* skipped = nullptr) {
    std::vector<Sample> out;
    std::size_t skip_count = 0;
    for (const auto& seq : seqs) {
        auto samples = make_samples(seq, T, H, ctx);
        if (samples.empty()) {
            ++skip_count;
            continue;
        }
        for (auto& s : samples) out.push_back(std::move(s));
    }
    if (skipped) *skipped = skip_count;
    return out;
}

// Per-step and overall MSE in meters^2; mse_overall is the mean of the
// per-step values.
struct Metrics {
    double mse_overall = 0.0;
    std::vector<double> mse_per_step;
    std::size_t n_samples = 0;
};

// Shared aggregation for any predictor: predictions are absolute points.
inline Metrics metrics_from_predictions(const std::vector<Sample>& samples,
                                        const std::function<TrajectoryPrediction(const Sample&)>& predictor) {
    if (samples.empty()) throw config_error("evaluate: empty sample set");
    const std::size_t H = samples[0].target_disp.size();
    Metrics m;
    m.n_samples = samples.size();
    m.mse_per_step.assign(H, 0.0);
    for (const auto& s : samples) {
        const TrajectoryPrediction pred = predictor(s);
        if (pred.points.size() != H) throw shape_error("evaluate: prediction has wrong horizon");
        for (std::size_t j = 0; j < H; ++j) {
            const Vec2 truth = s.ego_end + s.target_disp[j];
            const Vec2 d = pred.points[j] - truth;
            m.mse_per_step[j] += (d.x * d.x + d.y * d.y) / 2.0;
        }
    }
    double total = 0.0;
    for (auto& v : m.mse_per_step) {
        v /= static_cast<double>(m.n_samples);
        total += v;
    }
    m.mse_overall = total / static_cast<double>(H);
    return m;
}

inline Metrics evaluate_model(const ModelParams& params, const ModelConfig& cfg, const std::vector<Sample>& samples) {
    return metrics_from_predictions(
        samples, [&](const Sample& s) { return predict(params, cfg, s.graph_ptrs(), s.ego_end); });
}

// Extrapolates the last observed ego velocity; single-frame windows fall
// back to zero displacement.
inline TrajectoryPrediction baseline_persistence(const Sample& s, std::size_t horizon) {
    Vec2 v{0.0, 0.0};
    if (s.window_ego_m.size() >= 2) v = s.window_ego_m.back() - s.window_ego_m[s.window_ego_m.size() - 2];
    TrajectoryPrediction out;
    for (std::size_t j = 1; j <= horizon; ++j) out.points.push_back(s.ego_end + v * static_cast<double>(j));
    return out;
}

inline Metrics evaluate_baseline(const std::vector<Sample>& samples, std::size_t horizon) {
    return metrics_from_predictions(samples, [&](const Sample& s) { return baseline_persistence(s, horizon); });
}

inline std::vector<Sample> filter_samples(const std::vector<Sample>& samples, const std::vector<ScenarioKind>& kinds) {
    std::vector<Sample> out;
    for (const auto& s : samples)
        if (std::find(kinds.begin(), kinds.end(), s.kind) != kinds.end()) out.push_back(s);
    return out;
}

namespace train_detail {

// Target tensor (H x 2) and the constant lower-triangular accumulator that
// turns per-step displacement deltas into displacements from the anchor.
inline Tensor target_tensor(const Sample& s) {
    const std::size_t H = s.target_disp.size();
    Tensor t = Tensor::zeros({H, 2});
    for (std::size_t j = 0; j < H; ++j) {
        t(j, 0) = s.target_disp[j].x;
        t(j, 1) = s.target_disp[j].y;
    }
    return t;
}

inline Tensor lower_triangular_ones(std::size_t n) {
    Tensor t = Tensor::zeros({n, n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) t(i, j) = 1.0;
    return t;
}

inline ad::Var sample_loss(ad::Tape& tape, const Sample& s, const BoundParams& bound, const ModelConfig& cfg) {
    ad::Var deltas = model_forward(tape, s.graph_ptrs(), bound, cfg);       // 1 x 2H
    ad::Var steps = tape.reshape(deltas, {cfg.horizon, 2});                  // H x 2
    ad::Var cumulative = tape.matmul(tape.leaf(lower_triangular_ones(cfg.horizon)), steps);
    return tape.mse(target_tensor(s), cumulative);
}

} // namespace train_detail

struct TrainResult {
    Checkpoint checkpoint;       // best-validation parameters
    double best_val_mse = 0.0;
    std::size_t best_epoch = 0;
    std::size_t skipped_train = 0;
    std::size_t skipped_val = 0;
};

// Epoch loop: seeded shuffle, minibatch Adam on the trajectory MSE, then
// validation; keeps the best-validation parameters and stops when
// (epoch - best_epoch) >= tolerance or epoch == max_epochs.
inline TrainResult train_model(const ModelConfig& mcfg, const TrainConfig& tcfg, const DatasetHeader& header,
                               const std::vector<SceneSequence>& train_seqs,
                               const std::vector<SceneSequence>& val_seqs,
                               const std::function<void(const EpochRecord&)>& on_epoch = nullptr) {
    mcfg.validate();
    tcfg.validate();

    Rng init_rng(mcfg.seed);
    ModelParams params = init_params(mcfg, init_rng);

    const PositionalEncodingTable pe = make_pe_table(mcfg, header.camera);
    const SampleContext ctx{mcfg.knn_k, &pe, &params.proj};

    TrainResult result;
    const std::vector<Sample> train_samples = make_all_samples(train_seqs, mcfg.window, mcfg.horizon, ctx, &result.skipped_train);
    const std::vector<Sample> val_samples = make_all_samples(val_seqs, mcfg.window, mcfg.horizon, ctx, &result.skipped_val);
    if (train_samples.empty()) throw config_error("train: no usable training samples (sequences shorter than T+H?)");
    if (val_samples.empty()) throw config_error("train: no usable validation samples");

    std::vector<std::string> names;
    std::vector<Tensor*> tensors;
    for_each_param(params, [&](const std::string& name, Tensor& t) {
        names.push_back(name);
        tensors.push_back(&t);
    });
    AdamState adam = AdamState::for_params(tensors);
    AdamConfig adam_cfg;
    adam_cfg.lr = tcfg.lr;
    adam_cfg.weight_decay = tcfg.weight_decay;

    Rng shuffle_rng(Rng::derive_stream(tcfg.seed, 0x5BAFULL));
    std::vector<std::size_t> order(train_samples.size());
    std::iota(order.begin(), order.end(), 0);

    ModelParams best_params = params;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    std::vector<EpochRecord> history;

    for (std::size_t epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + tcfg.batch_size);
            std::vector<Tensor> grad_acc;
            grad_acc.reserve(tensors.size());
            for (const Tensor* t : tensors) grad_acc.push_back(Tensor::zeros(t->shape));

            for (std::size_t i = start; i < end; ++i) {
                const Sample& s = train_samples[order[i]];
                ad::Tape tape;
                const BoundParams bound = bind_params(tape, params, true);
                ad::Var loss;
                try {
                    loss = train_detail::sample_loss(tape, s, bound, mcfg);
                    tape.backward(loss);
                } catch (const numeric_error& e) {
                    throw numeric_error("train: epoch " + std::to_string(epoch) + ", batch " +
                                        std::to_string(start / tcfg.batch_size) + ": " + e.what());
                }
                loss_sum += tape.value(loss)[0];
                for (std::size_t p = 0; p < grad_acc.size(); ++p) {
                    const Tensor& g = tape.grad(bound.vars[p]);
                    for (std::size_t k = 0; k < g.size(); ++k) grad_acc[p][k] += g[k];
                }
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            std::vector<const Tensor*> grad_ptrs;
            grad_ptrs.reserve(grad_acc.size());
            for (auto& g : grad_acc) {
                for (auto& v : g.data) v *= inv;
                grad_ptrs.push_back(&g);
            }
            adam_step(tensors, grad_ptrs, names, adam, adam_cfg);
        }

        const double train_mse = loss_sum / static_cast<double>(train_samples.size());
        const double val_mse = evaluate_model(params, mcfg, val_samples).mse_overall;
        if (!std::isfinite(train_mse) || !std::isfinite(val_mse))
            throw numeric_error("train: non-finite loss at epoch " + std::to_string(epoch));

        const EpochRecord rec{epoch, train_mse, val_mse};
        history.push_back(rec);
        if (on_epoch) on_epoch(rec);

        if (val_mse < best_val) {
            best_val = val_mse;
            best_epoch = epoch;
            best_params = params;
        }
        if (epoch - best_epoch >= tcfg.early_stop_tolerance) break;
    }

    result.checkpoint.format_version = 1;
    result.checkpoint.config = mcfg;
    result.checkpoint.train_config = tcfg;
    result.checkpoint.params = std::move(best_params);
    result.checkpoint.history = std::move(history);
    result.best_val_mse = best_val;
    result.best_epoch = best_epoch;
    return result;
}

// Random-search hyperparameter tuning over layer counts, hidden sizes, and
// log-uniform lr / weight decay. Each trial trains under a reduced epoch cap
// and scores validation MSE; the argmin trial wins.
struct SearchSpace {
    std::vector<std::size_t> gcn_layers_choices = {1, 2, 3};
    std::vector<std::size_t> lstm_layers_choices = {1, 2, 3};
    std::vector<std::size_t> gcn_hidden_choices = {32, 64, 128};
    std::vector<std::size_t> lstm_hidden_choices = {32, 64, 128};
    double lr_min = 1e-4;
    double lr_max = 1e-2;
    double weight_decay_min = 1e-6;
    double weight_decay_max = 1e-3;
    std::size_t budget = 10;
    std::size_t trial_max_epochs = 15;

    void validate() const {
        if (budget < 1) throw config_error("search: budget must be >= 1");
        if (gcn_layers_choices.empty() || lstm_layers_choices.empty() || gcn_hidden_choices.empty() ||
            lstm_hidden_choices.empty())
            throw config_error("search: choice lists must be non-empty");
        if (!(lr_min > 0.0 && lr_max >= lr_min)) throw config_error("search: invalid lr range");
        if (!(weight_decay_min > 0.0 && weight_decay_max >= weight_decay_min))
            throw config_error("search: invalid weight_decay range");
        if (trial_max_epochs < 1) throw config_error("search: trial_max_epochs must be >= 1");
    }
};

struct TrialRecord {
    std::size_t trial = 0;
    ModelConfig model_config;
    TrainConfig train_config;
    double val_mse = 0.0;
};

struct SearchResult {
    ModelConfig best_model;
    TrainConfig best_train;
    std::vector<TrialRecord> trials;
};

inline SearchResult hyperparameter_search(const SearchSpace& space, const ModelConfig& base_model,
                                          const TrainConfig& base_train, const DatasetHeader& header,
                                          const std::vector<SceneSequence>& train_seqs,
                                          const std::vector<SceneSequence>& val_seqs, std::uint64_t seed,
                                          const std::function<void(const TrialRecord&)>& on_trial = nullptr) {
    space.validate();
    SearchResult result;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    for (std::size_t trial = 0; trial < space.budget; ++trial) {
        Rng rng(Rng::derive_stream(seed, 0xA11CEULL + trial));
        ModelConfig mcfg = base_model;
        mcfg.gcn_layers = space.gcn_layers_choices[rng.uniform_int(0, static_cast<std::int64_t>(space.gcn_layers_choices.size()) - 1)];
        mcfg.lstm_layers = space.lstm_layers_choices[rng.uniform_int(0, static_cast<std::int64_t>(space.lstm_layers_choices.size()) - 1)];
        mcfg.gcn_hidden = space.gcn_hidden_choices[rng.uniform_int(0, static_cast<std::int64_t>(space.gcn_hidden_choices.size()) - 1)];
        mcfg.lstm_hidden = space.lstm_hidden_choices[rng.uniform_int(0, static_cast<std::int64_t>(space.lstm_hidden_choices.size()) - 1)];
        TrainConfig tcfg = base_train;
        tcfg.lr = std::exp(rng.uniform(std::log(space.lr_min), std::log(space.lr_max)));
        tcfg.weight_decay = std::exp(rng.uniform(std::log(space.weight_decay_min), std::log(space.weight_decay_max)));
        tcfg.max_epochs = space.trial_max_epochs;

        TrialRecord rec;
        rec.trial = trial;
        rec.model_config = mcfg;
        rec.train_config = tcfg;
        try {
            rec.val_mse = train_model(mcfg, tcfg, header, train_seqs, val_seqs).best_val_mse;
        } catch (const numeric_error&) {
            rec.val_mse = std::numeric_limits<double>::quiet_NaN();
        }
        if (on_trial) on_trial(rec);
        if (std::isfinite(rec.val_mse) && rec.val_mse < best) {
            best = rec.val_mse;
            best_index = trial;
        }
        result.trials.push_back(std::move(rec));
    }
    if (!std::isfinite(best)) throw numeric_error("search: every trial diverged");
    result.best_model = result.trials[best_index].model_config;
    result.best_train = result.trials[best_index].train_config;
    return result;
}

} // namespace bevtraj
