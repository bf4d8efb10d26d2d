#pragma once

#include <memory>
#include <vector>

#include "bevtraj/graph.hpp"
#include "bevtraj/model.hpp"
#include "bevtraj/rng.hpp"

namespace bevtraj::testing {

inline SceneFrame random_frame(std::size_t n_objects, std::size_t feat_dim, Rng& rng, int frame_index = 0) {
    SceneFrame f;
    f.frame_index = frame_index;
    f.ego_index = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n_objects) - 1));
    for (std::size_t i = 0; i < n_objects; ++i) {
        SceneObject o;
        o.object_id = static_cast<int>(i);
        o.cls = i == f.ego_index ? ObjectClass::Ego : ObjectClass::Vehicle;
        o.center = {rng.uniform(0.0, 799.0), rng.uniform(0.0, 599.0)};
        o.extent = {rng.uniform(5.0, 40.0), rng.uniform(5.0, 40.0)};
        for (std::size_t d = 0; d < feat_dim; ++d) o.feature.push_back(rng.uniform(-1.0, 1.0));
        f.objects.push_back(std::move(o));
    }
    return f;
}

struct GraphWindow {
    std::vector<SceneGraph> graphs;

    std::vector<const SceneGraph*> ptrs() const {
        std::vector<const SceneGraph*> out;
        for (const auto& g : graphs) out.push_back(&g);
        return out;
    }
};

inline GraphWindow random_window(const ModelConfig& cfg, const ModelParams& params,
                                 const PositionalEncodingTable& pe, std::size_t n_objects, Rng& rng) {
    GraphWindow w;
    for (std::size_t t = 0; t < cfg.window; ++t) {
        const SceneFrame f = random_frame(n_objects, cfg.feature_size, rng, static_cast<int>(t));
        w.graphs.push_back(build_scene_graph(f, cfg.knn_k, pe, params.proj));
    }
    return w;
}

inline ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.feature_size = 6;
    cfg.node_dim = 4;
    cfg.gcn_layers = 2;
    cfg.gcn_hidden = 4;
    cfg.lstm_layers = 2;
    cfg.lstm_hidden = 5;
    cfg.window = 4;
    cfg.horizon = 5;
    cfg.knn_k = 2;
    cfg.seed = 9;
    return cfg;
}

} // namespace bevtraj::testing
