#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bevtraj/autodiff.hpp"
#include "bevtraj/camera.hpp"
#include "bevtraj/errors.hpp"
#include "bevtraj/graph.hpp"
#include "bevtraj/rng.hpp"
#include "bevtraj/tensor.hpp"

namespace bevtraj {

struct GcnLayerParams {
    Tensor W;   // D_in x D_out
    Tensor b;   // D_out
};

// Gate weights stored input-major, (hidden + input) x hidden, consumed as
// [h_{t-1}, x_t] * W + b.
struct LstmLayerParams {
    Tensor W_f, W_i, W_C, W_o;
    Tensor b_f, b_i, b_C, b_o;
};

struct HeadParams {
    Tensor W;   // lstm_hidden x 2H
    Tensor b;   // 2H
};

struct ModelConfig {
    std::size_t feature_size = 768;   // F, raw object feature length
    std::size_t node_dim = 64;        // D, positional-encoding / node dimension (even)
    std::size_t gcn_layers = 2;
    std::size_t gcn_hidden = 64;
    std::size_t lstm_layers = 2;
    std::size_t lstm_hidden = 64;
    std::size_t window = 8;           // T, observed frames
    std::size_t horizon = 5;          // H, predicted steps
    std::size_t knn_k = 4;
    std::uint64_t seed = 1;

    void validate() const {
        if (gcn_layers < 1 || lstm_layers < 1) throw config_error("model: gcn_layers and lstm_layers must be >= 1");
        if (window < 1 || horizon < 1) throw config_error("model: window and horizon must be >= 1");
        if (node_dim < 2 || node_dim % 2 != 0) throw config_error("model: node_dim must be even and >= 2");
        if (feature_size < 1 || gcn_hidden < 1 || lstm_hidden < 1 || knn_k < 1)
            throw config_error("model: sizes must be >= 1");
    }
};

struct ModelParams {
    ProjectionParams proj;
    std::vector<GcnLayerParams> gcn;
    std::vector<LstmLayerParams> lstm;
    HeadParams head;
};

// Deterministic, fixed visit order; the same order defines parameter naming,
// checkpoint layout, and optimizer state indexing.
template <typename Fn>
void for_each_param(ModelParams& p, Fn&& fn) {
    fn("proj.W", p.proj.W);
    fn("proj.b", p.proj.b);
    for (std::size_t l = 0; l < p.gcn.size(); ++l) {
        const std::string base = "gcn" + std::to_string(l) + ".";
        fn(base + "W", p.gcn[l].W);
        fn(base + "b", p.gcn[l].b);
    }
    for (std::size_t l = 0; l < p.lstm.size(); ++l) {
        const std::string base = "lstm" + std::to_string(l) + ".";
        fn(base + "W_f", p.lstm[l].W_f);
        fn(base + "W_i", p.lstm[l].W_i);
        fn(base + "W_C", p.lstm[l].W_C);
        fn(base + "W_o", p.lstm[l].W_o);
        fn(base + "b_f", p.lstm[l].b_f);
        fn(base + "b_i", p.lstm[l].b_i);
        fn(base + "b_C", p.lstm[l].b_C);
        fn(base + "b_o", p.lstm[l].b_o);
    }
    fn("head.W", p.head.W);
    fn("head.b", p.head.b);
}

template <typename Fn>
void for_each_param(const ModelParams& p, Fn&& fn) {
    for_each_param(const_cast<ModelParams&>(p), [&](const std::string& name, Tensor& t) {
        fn(name, static_cast<const Tensor&>(t));
    });
}

inline std::size_t count_parameters(const ModelConfig& cfg) {
    cfg.validate();
    std::size_t total = cfg.feature_size * cfg.node_dim + cfg.node_dim;   // projection
    std::size_t d_in = cfg.node_dim;
    for (std::size_t l = 0; l < cfg.gcn_layers; ++l) {
        total += d_in * cfg.gcn_hidden + cfg.gcn_hidden;
        d_in = cfg.gcn_hidden;
    }
    std::size_t input = cfg.gcn_hidden;
    for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
        total += 4 * cfg.lstm_hidden * (input + cfg.lstm_hidden) + 4 * cfg.lstm_hidden;
        input = cfg.lstm_hidden;
    }
    total += cfg.lstm_hidden * 2 * cfg.horizon + 2 * cfg.horizon;   // head
    return total;
}

namespace detail {
inline Tensor uniform_init(std::vector<std::size_t> shape, std::size_t fan_in, Rng& rng) {
    Tensor t = Tensor::zeros(std::move(shape));
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : t.data) v = rng.uniform(-s, s);
    return t;
}
} // namespace detail

// uniform(-s, s) with s = 1/sqrt(fan_in); same seed, same init.
inline ModelParams init_params(const ModelConfig& cfg, Rng& rng) {
    cfg.validate();
    ModelParams p;
    p.proj.W = detail::uniform_init({cfg.feature_size, cfg.node_dim}, cfg.feature_size, rng);
    p.proj.b = detail::uniform_init({cfg.node_dim}, cfg.feature_size, rng);
    std::size_t d_in = cfg.node_dim;
    for (std::size_t l = 0; l < cfg.gcn_layers; ++l) {
        GcnLayerParams g;
        g.W = detail::uniform_init({d_in, cfg.gcn_hidden}, d_in, rng);
        g.b = detail::uniform_init({cfg.gcn_hidden}, d_in, rng);
        p.gcn.push_back(std::move(g));
        d_in = cfg.gcn_hidden;
    }
    std::size_t input = cfg.gcn_hidden;
    for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
        const std::size_t cat = input + cfg.lstm_hidden;
        LstmLayerParams m;
        m.W_f = detail::uniform_init({cat, cfg.lstm_hidden}, cat, rng);
        m.W_i = detail::uniform_init({cat, cfg.lstm_hidden}, cat, rng);
        m.W_C = detail::uniform_init({cat, cfg.lstm_hidden}, cat, rng);
        m.W_o = detail::uniform_init({cat, cfg.lstm_hidden}, cat, rng);
        m.b_f = detail::uniform_init({cfg.lstm_hidden}, cat, rng);
        m.b_i = detail::uniform_init({cfg.lstm_hidden}, cat, rng);
        m.b_C = detail::uniform_init({cfg.lstm_hidden}, cat, rng);
        m.b_o = detail::uniform_init({cfg.lstm_hidden}, cat, rng);
        p.lstm.push_back(std::move(m));
        input = cfg.lstm_hidden;
    }
    p.head.W = detail::uniform_init({cfg.lstm_hidden, 2 * cfg.horizon}, cfg.lstm_hidden, rng);
    p.head.b = detail::uniform_init({2 * cfg.horizon}, cfg.lstm_hidden, rng);
    return p;
}

// Parameter tensors bound to a tape as leaves.
struct BoundParams {
    std::vector<std::string> names;
    std::vector<ad::Var> vars;

    ad::Var operator[](const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return vars[i];
        throw config_error("unknown parameter '" + name + "'");
    }
};

inline BoundParams bind_params(ad::Tape& tape, const ModelParams& params, bool requires_grad) {
    BoundParams bound;
    for_each_param(params, [&](const std::string& name, const Tensor& t) {
        bound.names.push_back(name);
        bound.vars.push_back(tape.leaf(t, requires_grad));
    });
    return bound;
}

// One GCN layer: relu(A_hat * H * W + b); the final stacked layer omits relu.
inline ad::Var gcn_layer_forward(ad::Tape& tape, ad::Var norm_adjacency, ad::Var h_in,
                                 ad::Var W, ad::Var b, bool apply_relu) {
    ad::Var agg = tape.matmul(norm_adjacency, h_in);
    ad::Var out = tape.add(tape.matmul(agg, W), b);
    return apply_relu ? tape.relu(out) : out;
}

// Eval convenience over plain tensors (used by tests and tools).
inline Tensor gcn_layer_eval(const SceneGraph& graph, const Tensor& h_in, const GcnLayerParams& params, bool apply_relu) {
    ad::Tape tape;
    ad::Var out = gcn_layer_forward(tape, tape.leaf(graph.norm_adjacency), tape.leaf(h_in),
                                    tape.leaf(params.W), tape.leaf(params.b), apply_relu);
    return tape.value(out);
}

// Permutation-invariant mean pooling of node states.
inline ad::Var graph_readout(ad::Tape& tape, ad::Var node_states) { return tape.mean_rows(node_states); }

inline Tensor graph_readout_eval(const Tensor& node_states) {
    ad::Tape tape;
    return tape.value(tape.mean_rows(tape.leaf(node_states)));
}

struct LstmVarState {
    ad::Var h;
    ad::Var c;
};

struct LstmLayerVars {
    ad::Var W_f, W_i, W_C, W_o, b_f, b_i, b_C, b_o;
};

// One LSTM cell update:
//   f = sigmoid([h,x] W_f + b_f)      i = sigmoid([h,x] W_i + b_i)
//   C~ = tanh([h,x] W_C + b_C)        C = f*C_prev + i*C~
//   o = sigmoid([h,x] W_o + b_o)      h = o * tanh(C)
inline LstmVarState lstm_cell_step(ad::Tape& tape, ad::Var x_t, LstmVarState prev, const LstmLayerVars& p) {
    ad::Var cat = tape.concat(prev.h, x_t);
    ad::Var f = tape.sigmoid(tape.add(tape.matmul(cat, p.W_f), p.b_f));
    ad::Var i = tape.sigmoid(tape.add(tape.matmul(cat, p.W_i), p.b_i));
    ad::Var c_cand = tape.tanh(tape.add(tape.matmul(cat, p.W_C), p.b_C));
    ad::Var c = tape.add(tape.mul(f, prev.c), tape.mul(i, c_cand));
    ad::Var o = tape.sigmoid(tape.add(tape.matmul(cat, p.W_o), p.b_o));
    ad::Var h = tape.mul(o, tape.tanh(c));
    return {h, c};
}

// Eval convenience over plain vectors; returns (h_t, c_t).
inline std::pair<Tensor, Tensor> lstm_cell_eval(const Tensor& x, const Tensor& h_prev, const Tensor& c_prev,
                                                const LstmLayerParams& params) {
    ad::Tape tape;
    LstmLayerVars vars{tape.leaf(params.W_f), tape.leaf(params.W_i), tape.leaf(params.W_C), tape.leaf(params.W_o),
                       tape.leaf(params.b_f), tape.leaf(params.b_i), tape.leaf(params.b_C), tape.leaf(params.b_o)};
    LstmVarState st = lstm_cell_step(tape, tape.leaf(x), {tape.leaf(h_prev), tape.leaf(c_prev)}, vars);
    return {tape.value(st.h), tape.value(st.c)};
}

namespace detail {
inline LstmLayerVars lstm_layer_vars(const BoundParams& bound, std::size_t layer) {
    const std::string base = "lstm" + std::to_string(layer) + ".";
    return {bound[base + "W_f"], bound[base + "W_i"], bound[base + "W_C"], bound[base + "W_o"],
            bound[base + "b_f"], bound[base + "b_i"], bound[base + "b_C"], bound[base + "b_o"]};
}
} // namespace detail

// Full forward pass on an existing tape: per frame, projection + positional
// encoding, stacked GCN layers, mean readout; the embedding sequence feeds a
// stacked LSTM (h_0 = c_0 = 0, layer l consumes layer l-1's full hidden
// sequence); the last hidden state maps to 2H reals, read as H displacement
// vectors in meters from the ego position at the window end.
inline ad::Var model_forward(ad::Tape& tape, const std::vector<const SceneGraph*>& window,
                             const BoundParams& bound, const ModelConfig& cfg) {
    if (window.size() != cfg.window)
        throw config_error("model_forward: expected " + std::to_string(cfg.window) + " frames, got " +
                           std::to_string(window.size()));

    const ad::Var proj_w = bound["proj.W"];
    const ad::Var proj_b = bound["proj.b"];

    std::vector<ad::Var> embeddings;
    embeddings.reserve(window.size());
    for (const SceneGraph* graph : window) {
        if (graph->raw_features.cols() != cfg.feature_size)
            throw shape_error("model_forward: graph feature size " + std::to_string(graph->raw_features.cols()) +
                              " != config feature_size " + std::to_string(cfg.feature_size));
        ad::Var raw = tape.leaf(graph->raw_features);
        ad::Var pe = tape.leaf(graph->pe_features);
        ad::Var adj = tape.leaf(graph->norm_adjacency);
        ad::Var h = tape.add(tape.add(tape.matmul(raw, proj_w), proj_b), pe);
        for (std::size_t l = 0; l < cfg.gcn_layers; ++l) {
            const std::string base = "gcn" + std::to_string(l) + ".";
            h = gcn_layer_forward(tape, adj, h, bound[base + "W"], bound[base + "b"], l + 1 < cfg.gcn_layers);
        }
        embeddings.push_back(graph_readout(tape, h));
    }

    std::vector<ad::Var> sequence = std::move(embeddings);
    ad::Var last_h{};
    for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
        const LstmLayerVars vars = detail::lstm_layer_vars(bound, l);
        LstmVarState st{tape.leaf(Tensor::zeros({1, cfg.lstm_hidden})), tape.leaf(Tensor::zeros({1, cfg.lstm_hidden}))};
        std::vector<ad::Var> outputs;
        outputs.reserve(sequence.size());
        for (ad::Var x : sequence) {
            st = lstm_cell_step(tape, x, st, vars);
            outputs.push_back(st.h);
        }
        last_h = st.h;
        sequence = std::move(outputs);
    }

    return tape.add(tape.matmul(last_h, bound["head.W"]), bound["head.b"]);   // 1 x 2H
}

// Absolute future positions, t+1 ... t+H.
struct TrajectoryPrediction {
    std::vector<Vec2> points;
};

// Head output is a chain of per-step displacements; accumulate them from the
// ego position at the window end.
inline TrajectoryPrediction trajectory_from_displacements(const Tensor& row, Vec2 ego_pos, std::size_t horizon) {
    if (row.size() != 2 * horizon) throw shape_error("trajectory: expected " + std::to_string(2 * horizon) + " values");
    TrajectoryPrediction out;
    Vec2 p = ego_pos;
    for (std::size_t j = 0; j < horizon; ++j) {
        p = p + Vec2{row[2 * j], row[2 * j + 1]};
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw numeric_error("trajectory: non-finite prediction");
        out.points.push_back(p);
    }
    return out;
}

inline TrajectoryPrediction predict(const ModelParams& params, const ModelConfig& cfg,
                                    const std::vector<const SceneGraph*>& window, Vec2 ego_pos_at_window_end) {
    ad::Tape tape;
    const BoundParams bound = bind_params(tape, params, false);
    ad::Var out = model_forward(tape, window, bound, cfg);
    return trajectory_from_displacements(tape.value(out), ego_pos_at_window_end, cfg.horizon);
}

} // namespace bevtraj
