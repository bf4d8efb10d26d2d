#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "bevtraj/graph.hpp"
#include "bevtraj/rng.hpp"

using namespace bevtraj;

namespace {

// O(N^2) reference: per node, sort all others by (distance, index), keep the
// first min(k, N-1), union the directed picks.
std::vector<WeightedEdge> knn_brute_force(const std::vector<Vec2>& pts, std::size_t k) {
    const std::size_t n = pts.size();
    std::set<std::pair<std::size_t, std::size_t>> picked;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> others;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dx = pts[i].x - pts[j].x;
            const double dy = pts[i].y - pts[j].y;
            others.emplace_back(std::sqrt(dx * dx + dy * dy), j);
        }
        std::sort(others.begin(), others.end());
        for (std::size_t c = 0; c < std::min(k, n - 1); ++c) {
            const std::size_t j = others[c].second;
            picked.insert({std::min(i, j), std::max(i, j)});
        }
    }
    std::vector<WeightedEdge> edges;
    for (auto [i, j] : picked) {
        const double dx = pts[i].x - pts[j].x;
        const double dy = pts[i].y - pts[j].y;
        const double d = std::sqrt(dx * dx + dy * dy);
        edges.push_back({i, j, 1.0 / std::max(d, 1e-6)});
    }
    return edges;
}

std::vector<Vec2> random_points(std::size_t n, Rng& rng) {
    std::vector<Vec2> pts(n);
    for (auto& p : pts) p = {rng.uniform(0.0, 800.0), rng.uniform(0.0, 600.0)};
    return pts;
}

SceneFrame frame_with(const std::vector<Vec2>& centers, std::size_t ego_index, std::size_t feat_dim, Rng& rng) {
    SceneFrame f;
    f.ego_index = ego_index;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        SceneObject o;
        o.object_id = static_cast<int>(i);
        o.cls = i == ego_index ? ObjectClass::Ego : ObjectClass::Vehicle;
        o.center = centers[i];
        o.extent = {20, 10};
        for (std::size_t d = 0; d < feat_dim; ++d) o.feature.push_back(rng.uniform(-1.0, 1.0));
        f.objects.push_back(std::move(o));
    }
    return f;
}

} // namespace

TEST_CASE("edge weight golden values") {
    CHECK(edge_weight(2.0) == 0.5);
    CHECK(edge_weight(1.0) == 1.0);
    CHECK(edge_weight(0.0) == 1e6);
    CHECK_THROWS_AS(edge_weight(-0.5), config_error);
    CHECK_THROWS_AS(edge_weight(std::nan("")), config_error);
}

TEST_CASE("edge weight is strictly decreasing beyond the clamp") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const double a = rng.uniform(1e-6, 500.0);
        const double b = a + rng.uniform(1e-9, 100.0);
        CHECK(edge_weight(a) > edge_weight(b));
    }
}

TEST_CASE("knn on a single node yields no edges") {
    CHECK(knn_edges({{10, 10}}, 3).empty());
}

TEST_CASE("knn on a collinear triple with k=1") {
    const auto edges = knn_edges({{0, 0}, {1, 0}, {5, 0}}, 1);
    REQUIRE(edges.size() == 2);
    CHECK(edges[0] == WeightedEdge{0, 1, 1.0});
    CHECK(edges[1] == WeightedEdge{1, 2, 0.25});
}

TEST_CASE("k >= N-1 gives the complete graph") {
    Rng rng(17);
    const auto pts = random_points(7, rng);
    for (std::size_t k : {6ul, 9ul, 50ul}) {
        const auto edges = knn_edges(pts, k);
        CHECK(edges.size() == 7 * 6 / 2);
    }
}

TEST_CASE("knn matches brute force on 100 random instances") {
    Rng rng(2024);
    for (int inst = 0; inst < 100; ++inst) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(1, 50));
        const auto k = static_cast<std::size_t>(rng.uniform_int(1, 8));
        const auto pts = random_points(n, rng);
        const auto got = knn_edges(pts, k);
        const auto expected = knn_brute_force(pts, k);
        REQUIRE(got.size() == expected.size());
        for (std::size_t e = 0; e < got.size(); ++e) {
            CHECK(got[e].i == expected[e].i);
            CHECK(got[e].j == expected[e].j);
            CHECK(got[e].weight == expected[e].weight);
        }
    }
}

TEST_CASE("knn rejects non-finite coordinates") {
    CHECK_THROWS_AS(knn_edges({{0, 0}, {std::nan(""), 1}}, 1), config_error);
}

TEST_CASE("normalized adjacency of an isolated node is [[1]]") {
    const Tensor a = normalize_adjacency({}, 1);
    REQUIRE(a.shape == std::vector<std::size_t>{1, 1});
    CHECK(a[0] == 1.0);
}

TEST_CASE("two nodes with a unit edge normalize to all 0.5") {
    const Tensor a = normalize_adjacency({{0, 1, 1.0}}, 2);
    for (double v : a.data) CHECK(v == 0.5);
}

TEST_CASE("normalized adjacency is symmetric to the last bit") {
    Rng rng(5);
    for (int inst = 0; inst < 20; ++inst) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(2, 30));
        const auto pts = random_points(n, rng);
        const auto edges = knn_edges(pts, 3);
        const Tensor a = normalize_adjacency(edges, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) CHECK(a(i, j) == a(j, i));
    }
}

TEST_CASE("complete graph with equal weights has equal off-diagonal entries") {
    std::vector<WeightedEdge> edges;
    const std::size_t n = 5;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, 0.7});
    const Tensor a = normalize_adjacency(edges, n);
    const double off = a(0, 1);
    const double diag = a(0, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) CHECK(a(i, j) == (i == j ? diag : off));
}

TEST_CASE("single-object frame builds a trivial graph") {
    Rng rng(11);
    const SceneFrame f = frame_with({{400, 300}}, 0, 6, rng);
    const auto pe = positional_encoding(4, 801);
    ProjectionParams proj{Tensor::zeros({6, 4}), Tensor::zeros({4})};
    const SceneGraph g = build_scene_graph(f, 3, pe, proj);
    CHECK(g.edges.empty());
    REQUIRE(g.norm_adjacency.shape == std::vector<std::size_t>{1, 1});
    CHECK(g.norm_adjacency[0] == 1.0);
    CHECK(g.node_features.shape == std::vector<std::size_t>{1, 4});
    CHECK(g.ego_node == 0);
}

TEST_CASE("node features combine projection and positional encoding") {
    Rng rng(12);
    const SceneFrame f = frame_with({{10, 20}, {30, 40}}, 0, 3, rng);
    const auto pe = positional_encoding(4, 801);
    ProjectionParams proj{Tensor::zeros({3, 4}), Tensor::zeros({4})};
    for (auto& v : proj.W.data) v = rng.uniform(-1.0, 1.0);
    for (auto& v : proj.b.data) v = rng.uniform(-1.0, 1.0);

    const SceneGraph g = build_scene_graph(f, 1, pe, proj);
    for (std::size_t i = 0; i < 2; ++i) {
        const Tensor enc = encode_node_position(f.objects[i].center, pe);
        for (std::size_t d = 0; d < 4; ++d) {
            double expected = proj.b[d] + enc[d];
            for (std::size_t k = 0; k < 3; ++k) expected += f.objects[i].feature[k] * proj.W(k, d);
            CHECK(g.node_features(i, d) == Catch::Approx(expected).margin(1e-12));
        }
    }
    CHECK(g.node_features.cols() == 4);
}

TEST_CASE("relabeling objects permutes the graph exactly") {
    Rng rng(13);
    for (int inst = 0; inst < 10; ++inst) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(2, 12));
        const auto pts = random_points(n, rng);
        const std::size_t ego = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
        SceneFrame f = frame_with(pts, ego, 5, rng);

        const auto pe = positional_encoding(6, 801);
        ProjectionParams proj{Tensor::zeros({5, 6}), Tensor::zeros({6})};
        for (auto& v : proj.W.data) v = rng.uniform(-1.0, 1.0);

        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);   // perm[new_index] = old_index

        SceneFrame pf;
        pf.frame_index = f.frame_index;
        for (std::size_t i = 0; i < n; ++i) {
            pf.objects.push_back(f.objects[perm[i]]);
            if (perm[i] == f.ego_index) pf.ego_index = i;
        }

        const SceneGraph g = build_scene_graph(f, 2, pe, proj);
        const SceneGraph pg = build_scene_graph(pf, 2, pe, proj);

        REQUIRE(pg.num_nodes() == g.num_nodes());
        CHECK(pg.ego_node == pf.ego_index);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < 6; ++d) CHECK(pg.node_features(i, d) == g.node_features(perm[i], d));
            for (std::size_t j = 0; j < n; ++j) CHECK(pg.norm_adjacency(i, j) == g.norm_adjacency(perm[i], perm[j]));
        }

        // Edge sets map through the permutation with identical weights.
        std::vector<std::size_t> inv(n);
        for (std::size_t i = 0; i < n; ++i) inv[perm[i]] = i;
        std::set<std::tuple<std::size_t, std::size_t, double>> expect, got;
        for (const auto& e : g.edges) {
            const auto a = std::min(inv[e.i], inv[e.j]);
            const auto b = std::max(inv[e.i], inv[e.j]);
            expect.insert({a, b, e.weight});
        }
        for (const auto& e : pg.edges) got.insert({e.i, e.j, e.weight});
        CHECK(expect == got);
    }
}
