#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <vector>

#include "bevtraj/camera.hpp"
#include "bevtraj/errors.hpp"
#include "bevtraj/positional_encoding.hpp"
#include "bevtraj/scene.hpp"
#include "bevtraj/tensor.hpp"

namespace bevtraj {

// Undirected edge, stored once with i < j; weight = 1/distance.
struct WeightedEdge {
    std::size_t i = 0;
    std::size_t j = 0;
    double weight = 0.0;

    bool operator==(const WeightedEdge&) const = default;
};

inline constexpr double kEdgeWeightEps = 1e-6;

// w = 1/d, clamped at eps for coincident centers.
inline double edge_weight(double d) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw config_error("edge_weight: distance must be finite and non-negative");
    return 1.0 / std::max(d, kEdgeWeightEps);
}

// Per node, directed candidates to its min(k, N-1) nearest neighbors by
// Euclidean distance; ties broken by smaller node index; result symmetrized
// by union. N = 1 gives an empty edge list.
inline std::vector<WeightedEdge> knn_edges(const std::vector<Vec2>& positions, std::size_t k) {
    const std::size_t n = positions.size();
    if (n < 1) throw config_error("knn_edges: need at least one node");
    if (k < 1) throw config_error("knn_edges: k must be >= 1");
    for (const auto& p : positions)
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw config_error("knn_edges: non-finite coordinate");

    std::set<std::pair<std::size_t, std::size_t>> chosen;
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t i = 0; i < n; ++i) {
        cand.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dx = positions[i].x - positions[j].x;
            const double dy = positions[i].y - positions[j].y;
            cand.emplace_back(std::sqrt(dx * dx + dy * dy), j);
        }
        const std::size_t take = std::min(k, n - 1);
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end());
        for (std::size_t c = 0; c < take; ++c) {
            const std::size_t j = cand[c].second;
            chosen.insert({std::min(i, j), std::max(i, j)});
        }
    }

    std::vector<WeightedEdge> edges;
    edges.reserve(chosen.size());
    for (const auto& [i, j] : chosen) {
        const double dx = positions[i].x - positions[j].x;
        const double dy = positions[i].y - positions[j].y;
        edges.push_back({i, j, edge_weight(std::sqrt(dx * dx + dy * dy))});
    }
    return edges;
}

// A_hat = D^(-1/2) (A + I) D^(-1/2) with unit self-loops; D is the row sum
// of A + I. Entries are w / sqrt(d_i * d_j), so the matrix is symmetric to
// the last bit, and row degrees are summed in sorted order so the result is
// invariant under node relabeling.
inline Tensor normalize_adjacency(const std::vector<WeightedEdge>& edges, std::size_t n) {
    if (n < 1) throw config_error("normalize_adjacency: need at least one node");
    Tensor a = Tensor::identity(n);
    for (const auto& e : edges) {
        if (e.i >= n || e.j >= n || e.i == e.j) throw config_error("normalize_adjacency: invalid edge");
        if (!(e.weight > 0.0)) throw config_error("normalize_adjacency: edge weight must be positive");
        a(e.i, e.j) = e.weight;
        a(e.j, e.i) = e.weight;
    }
    std::vector<double> degree(n, 0.0);
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) row[j] = a(i, j);
        std::sort(row.begin(), row.end());
        double acc = 0.0;
        for (double v : row) acc += v;
        degree[i] = acc;
    }
    Tensor out = Tensor::zeros({n, n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (a(i, j) != 0.0) out(i, j) = a(i, j) / std::sqrt(degree[i] * degree[j]);
    return out;
}

// Learned linear map from raw object features (F) to the node dimension (D).
struct ProjectionParams {
    Tensor W;   // F x D
    Tensor b;   // D
};

// One frame as a graph: positional-encoded node features, KNN edges weighted
// by inverse distance, and the normalized adjacency the GCN consumes. Raw
// features and PE rows are kept alongside so a training pass can recompute
// the projection differentiably.
struct SceneGraph {
    Tensor node_features;    // N x D (projection + positional encoding)
    std::vector<WeightedEdge> edges;
    Tensor norm_adjacency;   // N x N
    std::size_t ego_node = 0;

    Tensor raw_features;     // N x F
    Tensor pe_features;      // N x D
    std::vector<Vec2> centers;
    std::vector<ObjectClass> classes;
    std::vector<int> object_ids;

    std::size_t num_nodes() const { return centers.size(); }
};

inline SceneGraph build_scene_graph(const SceneFrame& frame, std::size_t k,
                                    const PositionalEncodingTable& pe,
                                    const ProjectionParams& projection) {
    const std::size_t n = frame.objects.size();
    if (n < 1) throw config_error("build_scene_graph: frame has no objects");
    const std::size_t feat = frame.objects[0].feature.size();
    if (projection.W.rank() != 2 || projection.W.rows() != feat || projection.W.cols() != pe.dim)
        throw shape_error("build_scene_graph: projection " + shape_str(projection.W) + " does not map feature size " +
                          std::to_string(feat) + " to dim " + std::to_string(pe.dim));

    SceneGraph g;
    g.ego_node = frame.ego_index;
    g.centers.reserve(n);
    g.raw_features = Tensor::zeros({n, feat});
    g.pe_features = Tensor::zeros({n, pe.dim});
    for (std::size_t i = 0; i < n; ++i) {
        const auto& o = frame.objects[i];
        if (o.feature.size() != feat)
            throw shape_error("build_scene_graph: object " + std::to_string(o.object_id) + " feature length " +
                              std::to_string(o.feature.size()) + " != " + std::to_string(feat));
        g.centers.push_back(o.center);
        g.classes.push_back(o.cls);
        g.object_ids.push_back(o.object_id);
        for (std::size_t f = 0; f < feat; ++f) g.raw_features(i, f) = o.feature[f];
        const Tensor enc = encode_node_position(o.center, pe);
        for (std::size_t d = 0; d < pe.dim; ++d) g.pe_features(i, d) = enc[d];
    }

    // node feature = project(raw) + positional encoding
    g.node_features = Tensor::zeros({n, pe.dim});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t f = 0; f < feat; ++f) {
            const double rv = g.raw_features(i, f);
            if (rv == 0.0) continue;
            for (std::size_t d = 0; d < pe.dim; ++d) g.node_features(i, d) += rv * projection.W(f, d);
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < pe.dim; ++d) g.node_features(i, d) += projection.b[d] + g.pe_features(i, d);

    g.edges = knn_edges(g.centers, k);
    g.norm_adjacency = normalize_adjacency(g.edges, n);
    return g;
}

} // namespace bevtraj
