#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bevtraj/grad_check.hpp"
#include "bevtraj/model.hpp"
#include "bevtraj/positional_encoding.hpp"
#include "test_helpers.hpp"

using namespace bevtraj;
using bevtraj::testing::tiny_config;

namespace {

LstmLayerParams zero_lstm(std::size_t input, std::size_t hidden) {
    LstmLayerParams p;
    const std::size_t cat = input + hidden;
    p.W_f = Tensor::zeros({cat, hidden});
    p.W_i = Tensor::zeros({cat, hidden});
    p.W_C = Tensor::zeros({cat, hidden});
    p.W_o = Tensor::zeros({cat, hidden});
    p.b_f = Tensor::zeros({hidden});
    p.b_i = Tensor::zeros({hidden});
    p.b_C = Tensor::zeros({hidden});
    p.b_o = Tensor::zeros({hidden});
    return p;
}

SceneGraph trivial_graph(std::size_t n, std::size_t feat, std::size_t dim, Rng& rng) {
    const auto pe = positional_encoding(dim, 801);
    ProjectionParams proj{Tensor::zeros({feat, dim}), Tensor::zeros({dim})};
    for (auto& v : proj.W.data) v = rng.uniform(-0.3, 0.3);
    const SceneFrame f = bevtraj::testing::random_frame(n, feat, rng);
    return build_scene_graph(f, 2, pe, proj);
}

} // namespace

TEST_CASE("gcn layer with identity weights on a single node is relu") {
    SceneGraph g;
    g.norm_adjacency = Tensor::matrix(1, 1, {1.0});
    GcnLayerParams p{Tensor::identity(3), Tensor::zeros({3})};
    const Tensor h = Tensor::matrix(1, 3, {-2.0, 0.5, 1.5});
    const Tensor out = gcn_layer_eval(g, h, p, true);
    CHECK(out(0, 0) == 0.0);
    CHECK(out(0, 1) == 0.5);
    CHECK(out(0, 2) == 1.5);
    const Tensor linear = gcn_layer_eval(g, h, p, false);
    CHECK(linear(0, 0) == -2.0);
}

TEST_CASE("identical nodes under a symmetric adjacency stay identical") {
    SceneGraph g;
    g.norm_adjacency = Tensor::matrix(2, 2, {0.5, 0.5, 0.5, 0.5});
    Rng rng(3);
    GcnLayerParams p{Tensor::zeros({3, 4}), Tensor::zeros({4})};
    for (auto& v : p.W.data) v = rng.uniform(-1.0, 1.0);
    const Tensor h = Tensor::matrix(2, 3, {0.3, -0.7, 1.1, 0.3, -0.7, 1.1});
    const Tensor out = gcn_layer_eval(g, h, p, true);
    for (std::size_t c = 0; c < 4; ++c) CHECK(out(0, c) == out(1, c));
}

TEST_CASE("three-node path graph matches a hand matrix multiply") {
    // Path 0-1-2 with unit weights; degrees (2, 3, 2) with self-loops.
    const Tensor adj = normalize_adjacency({{0, 1, 1.0}, {1, 2, 1.0}}, 3);
    SceneGraph g;
    g.norm_adjacency = adj;
    GcnLayerParams p{Tensor::identity(2), Tensor::zeros({2})};
    const Tensor h = Tensor::matrix(3, 2, {1.0, -1.0, 2.0, 0.5, -3.0, 4.0});
    const Tensor out = gcn_layer_eval(g, h, p, true);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t c = 0; c < 2; ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < 3; ++j) acc += adj(i, j) * h(j, c);
            CHECK(out(i, c) == std::max(acc, 0.0));
        }
}

TEST_CASE("readout of a single node returns that node") {
    const Tensor h = Tensor::matrix(1, 3, {0.1, -0.2, 0.3});
    const Tensor out = graph_readout_eval(h);
    REQUIRE(out.shape == std::vector<std::size_t>{1, 3});
    CHECK(out[0] == 0.1);
    CHECK(out[1] == -0.2);
    CHECK(out[2] == 0.3);
}

TEST_CASE("readout averages and is bit-identical under row permutation") {
    const Tensor a = Tensor::matrix(2, 2, {0.0, 2.0, 2.0, 0.0});
    const Tensor out = graph_readout_eval(a);
    CHECK(out[0] == 1.0);
    CHECK(out[1] == 1.0);

    Rng rng(77);
    Tensor m = Tensor::zeros({7, 5});
    for (auto& v : m.data) v = rng.uniform(-10.0, 10.0);
    // Rotate rows; the multiset of addends per column is unchanged.
    Tensor rotated = m;
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 5; ++j) rotated((i + 3) % 7, j) = m(i, j);
    CHECK(graph_readout_eval(m).data == graph_readout_eval(rotated).data);
}

TEST_CASE("zero-weight lstm cell golden values") {
    SECTION("zero previous cell state stays at rest") {
        const auto p = zero_lstm(2, 3);
        const auto [h, c] = lstm_cell_eval(Tensor::row({0.4, -0.4}), Tensor::zeros({1, 3}), Tensor::zeros({1, 3}), p);
        for (double v : c.data) CHECK(v == 0.0);
        for (double v : h.data) CHECK(v == 0.0);
    }
    SECTION("unit previous cell state halves and squashes") {
        // f = i = o = sigmoid(0) = 0.5, C~ = tanh(0) = 0:
        //   c = 0.5 * 1 = 0.5, h = 0.5 * tanh(0.5) = 0.231059.
        const auto p = zero_lstm(1, 1);
        const auto [h, c] = lstm_cell_eval(Tensor::row({0.7}), Tensor::zeros({1, 1}), Tensor::row({1.0}), p);
        CHECK(c[0] == Catch::Approx(0.5).margin(1e-12));
        CHECK(h[0] == Catch::Approx(0.231059).margin(1e-6));
    }
    SECTION("saturated forget gate carries the cell state") {
        auto p = zero_lstm(1, 1);
        p.b_f = Tensor::vec({10.0});
        const auto [h, c] = lstm_cell_eval(Tensor::row({0.0}), Tensor::zeros({1, 1}), Tensor::row({1.0}), p);
        CHECK(c[0] == Catch::Approx(0.999955).margin(1e-6));
        (void)h;
    }
}

TEST_CASE("each gate responds to its own bias") {
    // Drive one bias at a time and compare against the scalar recurrences.
    const double x = 0.3, c_prev = 0.8;
    auto sigma = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    struct Case {
        Tensor LstmLayerParams::*field;
        double bias;
    };
    for (const auto& [field, bias] : {Case{&LstmLayerParams::b_f, 1.2}, Case{&LstmLayerParams::b_i, -0.7},
                                      Case{&LstmLayerParams::b_C, 0.9}, Case{&LstmLayerParams::b_o, -1.1}}) {
        auto p = zero_lstm(1, 1);
        (p.*field) = Tensor::vec({bias});
        const auto [h, c] = lstm_cell_eval(Tensor::row({x}), Tensor::zeros({1, 1}), Tensor::row({c_prev}), p);
        const double f = sigma(field == &LstmLayerParams::b_f ? bias : 0.0);
        const double i = sigma(field == &LstmLayerParams::b_i ? bias : 0.0);
        const double cc = std::tanh(field == &LstmLayerParams::b_C ? bias : 0.0);
        const double o = sigma(field == &LstmLayerParams::b_o ? bias : 0.0);
        const double c_expect = f * c_prev + i * cc;
        CHECK(c[0] == Catch::Approx(c_expect).epsilon(1e-12));
        CHECK(h[0] == Catch::Approx(o * std::tanh(c_expect)).epsilon(1e-12));
    }
}

TEST_CASE("saturated gates carry the cell state across 50 steps") {
    // f ~= 1 and i ~= 0 via +/-20 biases; c must persist within 1e-8.
    auto p = zero_lstm(3, 4);
    p.b_f = Tensor::full({4}, 20.0);
    p.b_i = Tensor::full({4}, -20.0);
    Tensor h = Tensor::zeros({1, 4});
    Tensor c = Tensor::full({1, 4}, 0.6);
    Rng rng(4);
    for (int t = 0; t < 50; ++t) {
        Tensor x = Tensor::zeros({1, 3});
        for (auto& v : x.data) v = rng.uniform(-1.0, 1.0);
        std::tie(h, c) = lstm_cell_eval(x, h, c, p);
    }
    for (double v : c.data) CHECK(v == Catch::Approx(0.6).margin(1e-8));
}

TEST_CASE("count_parameters closed forms") {
    // Single LSTM layer, input 64, hidden 32: 4*32*96 + 4*32 = 12416.
    ModelConfig lstm_only;
    lstm_only.feature_size = 1;
    lstm_only.node_dim = 2;
    lstm_only.gcn_layers = 1;
    lstm_only.gcn_hidden = 64;
    lstm_only.lstm_layers = 1;
    lstm_only.lstm_hidden = 32;
    lstm_only.window = 1;
    lstm_only.horizon = 1;
    const std::size_t proj = 1 * 2 + 2;
    const std::size_t gcn = 2 * 64 + 64;
    const std::size_t head = 32 * 2 + 2;
    CHECK(count_parameters(lstm_only) == proj + gcn + 12416 + head);

    // GCN layer 16 -> 16 contributes 16*16 + 16 = 272.
    ModelConfig one;
    one.feature_size = 4;
    one.node_dim = 16;
    one.gcn_layers = 1;
    one.gcn_hidden = 16;
    one.lstm_layers = 1;
    one.lstm_hidden = 8;
    one.horizon = 2;
    ModelConfig two = one;
    two.gcn_layers = 2;
    CHECK(count_parameters(two) - count_parameters(one) == 272);
}

TEST_CASE("default config is in the paper's parameter-count regime") {
    ModelConfig cfg;   // F = 768 default
    const std::size_t count = count_parameters(cfg);
    CHECK(count < 500000);
    CHECK(count * 10 <= 4700000);

    Rng rng(cfg.seed);
    ModelParams params = init_params(cfg, rng);
    std::size_t total = 0;
    for_each_param(params, [&](const std::string&, const Tensor& t) { total += t.size(); });
    CHECK(total == count);
}

TEST_CASE("init is deterministic and bounded by 1/sqrt(fan_in)") {
    const ModelConfig cfg = tiny_config();
    Rng r1(cfg.seed), r2(cfg.seed);
    ModelParams a = init_params(cfg, r1);
    ModelParams b = init_params(cfg, r2);
    bool equal = true;
    for_each_param(a, [&](const std::string& name, const Tensor& t) {
        for_each_param(b, [&](const std::string& name2, const Tensor& t2) {
            if (name == name2) equal = equal && t.data == t2.data;
        });
    });
    CHECK(equal);
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.feature_size));
    for (double v : a.proj.W.data) CHECK(std::abs(v) <= bound);
}

TEST_CASE("forward emits H points and a zero head repeats the anchor") {
    const ModelConfig cfg = tiny_config();
    Rng rng(cfg.seed);
    ModelParams params = init_params(cfg, rng);
    const auto pe = positional_encoding(cfg.node_dim, 801);
    Rng frame_rng(100);
    auto window = bevtraj::testing::random_window(cfg, params, pe, 3, frame_rng);

    const Vec2 anchor{2.5, -1.0};
    TrajectoryPrediction pred = predict(params, cfg, window.ptrs(), anchor);
    CHECK(pred.points.size() == 5);

    params.head.W = Tensor::zeros(params.head.W.shape);
    params.head.b = Tensor::zeros(params.head.b.shape);
    pred = predict(params, cfg, window.ptrs(), anchor);
    for (const Vec2& p : pred.points) CHECK(p == anchor);
}

TEST_CASE("forward is deterministic and rejects a wrong window size") {
    const ModelConfig cfg = tiny_config();
    Rng rng(cfg.seed);
    const ModelParams params = init_params(cfg, rng);
    const auto pe = positional_encoding(cfg.node_dim, 801);
    Rng frame_rng(7);
    auto window = bevtraj::testing::random_window(cfg, params, pe, 3, frame_rng);

    const auto a = predict(params, cfg, window.ptrs(), {0, 0});
    const auto b = predict(params, cfg, window.ptrs(), {0, 0});
    CHECK(a.points == b.points);

    auto short_window = window.ptrs();
    short_window.pop_back();
    CHECK_THROWS_AS(predict(params, cfg, short_window, Vec2{0, 0}), config_error);
}

TEST_CASE("prediction is invariant under node relabeling within 1e-12") {
    const ModelConfig cfg = tiny_config();
    Rng rng(cfg.seed);
    const ModelParams params = init_params(cfg, rng);
    const auto pe = positional_encoding(cfg.node_dim, 801);

    Rng frame_rng(55);
    for (int inst = 0; inst < 10; ++inst) {
        std::vector<SceneFrame> frames;
        std::vector<SceneFrame> permuted;
        for (std::size_t t = 0; t < cfg.window; ++t) {
            SceneFrame f = bevtraj::testing::random_frame(4, cfg.feature_size, frame_rng, static_cast<int>(t));
            std::vector<std::size_t> perm(f.objects.size());
            std::iota(perm.begin(), perm.end(), 0);
            frame_rng.shuffle(perm);
            SceneFrame pf;
            pf.frame_index = f.frame_index;
            for (std::size_t i = 0; i < perm.size(); ++i) {
                pf.objects.push_back(f.objects[perm[i]]);
                if (perm[i] == f.ego_index) pf.ego_index = i;
            }
            frames.push_back(std::move(f));
            permuted.push_back(std::move(pf));
        }
        std::vector<SceneGraph> ga, gb;
        for (std::size_t t = 0; t < cfg.window; ++t) {
            ga.push_back(build_scene_graph(frames[t], cfg.knn_k, pe, params.proj));
            gb.push_back(build_scene_graph(permuted[t], cfg.knn_k, pe, params.proj));
        }
        std::vector<const SceneGraph*> pa, pb;
        for (std::size_t t = 0; t < cfg.window; ++t) {
            pa.push_back(&ga[t]);
            pb.push_back(&gb[t]);
        }
        const auto ta = predict(params, cfg, pa, {0, 0});
        const auto tb = predict(params, cfg, pb, {0, 0});
        for (std::size_t j = 0; j < ta.points.size(); ++j) {
            CHECK(std::abs(ta.points[j].x - tb.points[j].x) <= 1e-12);
            CHECK(std::abs(ta.points[j].y - tb.points[j].y) <= 1e-12);
        }
    }
}

TEST_CASE("end-to-end gradient passes the finite-difference oracle") {
    // 3-node graphs, T = 4, H = 5 micro-instance over every parameter.
    const ModelConfig cfg = tiny_config();
    Rng rng(cfg.seed);
    ModelParams params = init_params(cfg, rng);
    const auto pe = positional_encoding(cfg.node_dim, 801);
    Rng frame_rng(21);
    auto window = bevtraj::testing::random_window(cfg, params, pe, 3, frame_rng);

    Tensor target = Tensor::zeros({cfg.horizon, 2});
    for (auto& v : target.data) v = frame_rng.uniform(-1.0, 1.0);

    std::vector<std::string> names;
    std::vector<Tensor> init;
    for_each_param(params, [&](const std::string& name, const Tensor& t) {
        names.push_back(name);
        init.push_back(t);
    });

    const double err = grad_check(
        [&](ad::Tape& tape, const std::vector<ad::Var>& leaves) {
            BoundParams bound;
            bound.names = names;
            bound.vars = leaves;
            ad::Var out = model_forward(tape, window.ptrs(), bound, cfg);
            ad::Var steps = tape.reshape(out, {cfg.horizon, 2});
            Tensor ltri = Tensor::zeros({cfg.horizon, cfg.horizon});
            for (std::size_t i = 0; i < cfg.horizon; ++i)
                for (std::size_t j = 0; j <= i; ++j) ltri(i, j) = 1.0;
            return tape.mse(target, tape.matmul(tape.leaf(ltri), steps));
        },
        init);
    CHECK(err <= 1e-4);
}
