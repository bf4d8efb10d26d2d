#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bevtraj/errors.hpp"
#include "bevtraj/model.hpp"

namespace bevtraj {

struct TrainConfig {
    std::size_t max_epochs = 100;
    std::size_t early_stop_tolerance = 10;
    double lr = 2e-3;
    double weight_decay = 1e-5;
    std::size_t batch_size = 16;
    std::uint64_t seed = 1;
    double train_fraction = 0.8;
    double val_fraction = 0.1;
    double test_fraction = 0.1;

    void validate() const {
        if (max_epochs < 1) throw config_error("train: max_epochs must be >= 1");
        if (early_stop_tolerance < 1) throw config_error("train: early_stop_tolerance must be >= 1");
        if (!(lr >= 0.0)) throw config_error("train: lr must be non-negative");
        if (!(weight_decay >= 0.0)) throw config_error("train: weight_decay must be non-negative");
        if (batch_size < 1) throw config_error("train: batch_size must be >= 1");
        const double total = train_fraction + val_fraction + test_fraction;
        if (std::abs(total - 1.0) > 1e-12) throw config_error("train: split fractions must sum to 1");
    }
};

struct EpochRecord {
    std::size_t epoch = 0;   // 1-based
    double train_mse = 0.0;
    double val_mse = 0.0;
};

struct Checkpoint {
    int format_version = 1;
    ModelConfig config;
    TrainConfig train_config;
    ModelParams params;
    std::vector<EpochRecord> history;
};

namespace ckpt_detail {

using ojson = nlohmann::ordered_json;

inline ojson model_config_to_json(const ModelConfig& c) {
    return ojson{{"feature_size", c.feature_size}, {"node_dim", c.node_dim},     {"gcn_layers", c.gcn_layers},
                 {"gcn_hidden", c.gcn_hidden},     {"lstm_layers", c.lstm_layers}, {"lstm_hidden", c.lstm_hidden},
                 {"window", c.window},             {"horizon", c.horizon},          {"knn_k", c.knn_k},
                 {"seed", c.seed}};
}

inline ModelConfig model_config_from_json(const ojson& j) {
    ModelConfig c;
    c.feature_size = j.at("feature_size").get<std::size_t>();
    c.node_dim = j.at("node_dim").get<std::size_t>();
    c.gcn_layers = j.at("gcn_layers").get<std::size_t>();
    c.gcn_hidden = j.at("gcn_hidden").get<std::size_t>();
    c.lstm_layers = j.at("lstm_layers").get<std::size_t>();
    c.lstm_hidden = j.at("lstm_hidden").get<std::size_t>();
    c.window = j.at("window").get<std::size_t>();
    c.horizon = j.at("horizon").get<std::size_t>();
    c.knn_k = j.at("knn_k").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

inline ojson train_config_to_json(const TrainConfig& c) {
    return ojson{{"max_epochs", c.max_epochs},
                 {"early_stop_tolerance", c.early_stop_tolerance},
                 {"lr", c.lr},
                 {"weight_decay", c.weight_decay},
                 {"batch_size", c.batch_size},
                 {"seed", c.seed},
                 {"train_fraction", c.train_fraction},
                 {"val_fraction", c.val_fraction},
                 {"test_fraction", c.test_fraction}};
}

inline TrainConfig train_config_from_json(const ojson& j) {
    TrainConfig c;
    c.max_epochs = j.at("max_epochs").get<std::size_t>();
    c.early_stop_tolerance = j.at("early_stop_tolerance").get<std::size_t>();
    c.lr = j.at("lr").get<double>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.train_fraction = j.at("train_fraction").get<double>();
    c.val_fraction = j.at("val_fraction").get<double>();
    c.test_fraction = j.at("test_fraction").get<double>();
    return c;
}

} // namespace ckpt_detail

// Expected parameter shapes for a config, in for_each_param order.
inline std::vector<std::pair<std::string, std::vector<std::size_t>>> parameter_shapes(const ModelConfig& cfg) {
    Rng rng(0);
    ModelParams tmpl;
    {
        // Shapes only; values irrelevant.
        tmpl = init_params(cfg, rng);
    }
    std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
    for_each_param(tmpl, [&](const std::string& name, const Tensor& t) { out.emplace_back(name, t.shape); });
    return out;
}

inline void save_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
    using ckpt_detail::ojson;
    ojson j;
    j["format_version"] = ckpt.format_version;
    j["model_config"] = ckpt_detail::model_config_to_json(ckpt.config);
    j["train_config"] = ckpt_detail::train_config_to_json(ckpt.train_config);
    ojson params = ojson::object();
    for_each_param(ckpt.params, [&](const std::string& name, const Tensor& t) {
        params[name] = ojson{{"shape", t.shape}, {"data", t.data}};
    });
    j["params"] = std::move(params);
    ojson hist = ojson::array();
    for (const auto& r : ckpt.history)
        hist.push_back(ojson{{"epoch", r.epoch}, {"train_mse", r.train_mse}, {"val_mse", r.val_mse}});
    j["history"] = std::move(hist);
    out << j.dump() << '\n';
}

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    save_checkpoint(ckpt, out);
    out.flush();
    if (!out) throw io_error("write to '" + path + "' failed");
}

inline Checkpoint load_checkpoint(std::istream& in) {
    using ckpt_detail::ojson;
    ojson j;
    try {
        j = ojson::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(std::string("checkpoint: malformed JSON: ") + e.what());
    }
    Checkpoint ckpt;
    try {
        ckpt.format_version = j.at("format_version").get<int>();
        if (ckpt.format_version != 1)
            throw parse_error("checkpoint: unsupported format version " + std::to_string(ckpt.format_version));
        ckpt.config = ckpt_detail::model_config_from_json(j.at("model_config"));
        ckpt.train_config = ckpt_detail::train_config_from_json(j.at("train_config"));
        ckpt.config.validate();

        Rng rng(ckpt.config.seed);
        ckpt.params = init_params(ckpt.config, rng);
        const ojson& params = j.at("params");
        for_each_param(ckpt.params, [&](const std::string& name, Tensor& t) {
            auto it = params.find(name);
            if (it == params.end()) throw shape_error("checkpoint: missing parameter '" + name + "'");
            const auto shape = it->at("shape").get<std::vector<std::size_t>>();
            if (shape != t.shape) {
                Tensor claimed;
                claimed.shape = shape;
                throw shape_error("checkpoint: parameter '" + name + "' has shape " + shape_str(claimed) +
                                  ", config requires " + shape_str(t));
            }
            const auto data = it->at("data").get<std::vector<double>>();
            if (data.size() != t.size()) throw shape_error("checkpoint: parameter '" + name + "' data length mismatch");
            t.data = data;
            if (!t.all_finite()) throw numeric_error("checkpoint: parameter '" + name + "' contains non-finite values");
        });

        for (const auto& r : j.at("history")) {
            EpochRecord rec;
            rec.epoch = r.at("epoch").get<std::size_t>();
            rec.train_mse = r.at("train_mse").get<double>();
            rec.val_mse = r.at("val_mse").get<double>();
            ckpt.history.push_back(rec);
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("checkpoint: ") + e.what());
    }
    return ckpt;
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    return load_checkpoint(in);
}

} // namespace bevtraj
