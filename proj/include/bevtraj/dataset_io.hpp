#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bevtraj/errors.hpp"
#include "bevtraj/scene.hpp"
#include "bevtraj/scenegen.hpp"

namespace bevtraj {

// Line-delimited UTF-8 text: one JSON header line, then one JSON object per
// SceneSequence. Doubles are rendered shortest-round-trip, so load(save(x))
// reproduces every floating-point field exactly. Schema details in
// docs/dataset-format.md.

namespace io_detail {

using ojson = nlohmann::ordered_json;

inline const ojson& require(const ojson& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw parse_error("line " + std::to_string(line) + ": missing field '" + key + "'");
    return *it;
}

inline ojson camera_to_json(const CameraConfig& cam) {
    return ojson{{"image_width", cam.image_width},
                 {"image_height", cam.image_height},
                 {"fov_deg", cam.fov_deg},
                 {"height_m", cam.height_m}};
}

inline CameraConfig camera_from_json(const ojson& j, std::size_t line) {
    CameraConfig cam;
    cam.image_width = require(j, "image_width", line).get<int>();
    cam.image_height = require(j, "image_height", line).get<int>();
    cam.fov_deg = require(j, "fov_deg", line).get<double>();
    cam.height_m = require(j, "height_m", line).get<double>();
    return cam;
}

inline ojson sequence_to_json(const SceneSequence& seq) {
    ojson js;
    js["sequence_id"] = seq.sequence_id;
    js["meta"] = ojson{{"level", seq.meta.level}, {"seed", seq.meta.seed}, {"scenario_kind", to_string(seq.meta.kind)}};
    ojson truth = ojson::array();
    for (const auto& p : seq.ego_truth_m) truth.push_back(ojson::array({p.x, p.y}));
    js["ego_truth_m"] = std::move(truth);
    ojson frames = ojson::array();
    for (const auto& f : seq.frames) {
        ojson jf;
        jf["frame_index"] = f.frame_index;
        jf["ego_index"] = f.ego_index;
        ojson objs = ojson::array();
        for (const auto& o : f.objects) {
            ojson jo;
            jo["object_id"] = o.object_id;
            jo["class_id"] = to_string(o.cls);
            jo["center"] = ojson::array({o.center.x, o.center.y});
            jo["extent"] = ojson::array({o.extent.x, o.extent.y});
            jo["feature"] = o.feature;
            objs.push_back(std::move(jo));
        }
        jf["objects"] = std::move(objs);
        frames.push_back(std::move(jf));
    }
    js["frames"] = std::move(frames);
    return js;
}

inline Vec2 vec2_from_json(const ojson& j, std::size_t line, const char* field) {
    if (!j.is_array() || j.size() != 2)
        throw parse_error("line " + std::to_string(line) + ": field '" + field + "' must be a 2-element array");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline SceneSequence sequence_from_json(const ojson& js, std::size_t line) {
    SceneSequence seq;
    seq.sequence_id = require(js, "sequence_id", line).get<int>();
    const ojson& meta = require(js, "meta", line);
    seq.meta.level = require(meta, "level", line).get<int>();
    seq.meta.seed = require(meta, "seed", line).get<std::uint64_t>();
    seq.meta.kind = scenario_kind_from_string(require(meta, "scenario_kind", line).get<std::string>());
    for (const auto& p : require(js, "ego_truth_m", line)) seq.ego_truth_m.push_back(vec2_from_json(p, line, "ego_truth_m"));
    for (const auto& jf : require(js, "frames", line)) {
        SceneFrame f;
        f.frame_index = require(jf, "frame_index", line).get<int>();
        f.ego_index = require(jf, "ego_index", line).get<std::size_t>();
        for (const auto& jo : require(jf, "objects", line)) {
            SceneObject o;
            o.object_id = require(jo, "object_id", line).get<int>();
            o.cls = object_class_from_string(require(jo, "class_id", line).get<std::string>());
            o.center = vec2_from_json(require(jo, "center", line), line, "center");
            o.extent = vec2_from_json(require(jo, "extent", line), line, "extent");
            o.feature = require(jo, "feature", line).get<std::vector<double>>();
            f.objects.push_back(std::move(o));
        }
        seq.frames.push_back(std::move(f));
    }
    return seq;
}

} // namespace io_detail

inline void save_dataset(const Dataset& ds, std::ostream& out) {
    using io_detail::ojson;
    for (const auto& seq : ds.sequences) validate_sequence(seq, ds.header.camera);
    ojson header;
    header["format_version"] = ds.header.format_version;
    header["camera"] = io_detail::camera_to_json(ds.header.camera);
    header["feature_size"] = ds.header.feature_size;
    header["dt_s"] = ds.header.dt_s;
    out << header.dump() << '\n';
    for (const auto& seq : ds.sequences) out << io_detail::sequence_to_json(seq).dump() << '\n';
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    save_dataset(ds, out);
    out.flush();
    if (!out) throw io_error("write to '" + path + "' failed");
}

inline Dataset load_dataset(std::istream& in) {
    using io_detail::ojson;
    Dataset ds;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ojson j;
        try {
            j = ojson::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw parse_error("line " + std::to_string(line_no) + ": malformed record: " + e.what());
        }
        if (!have_header) {
            const int version = io_detail::require(j, "format_version", line_no).get<int>();
            if (version != 1)
                throw parse_error("line " + std::to_string(line_no) + ": unsupported dataset format version " +
                                  std::to_string(version) + " (expected 1)");
            ds.header.format_version = version;
            ds.header.camera = io_detail::camera_from_json(io_detail::require(j, "camera", line_no), line_no);
            ds.header.feature_size = io_detail::require(j, "feature_size", line_no).get<std::size_t>();
            ds.header.dt_s = io_detail::require(j, "dt_s", line_no).get<double>();
            have_header = true;
            continue;
        }
        try {
            ds.sequences.push_back(io_detail::sequence_from_json(j, line_no));
        } catch (const nlohmann::json::exception& e) {
            throw parse_error("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    for (const auto& seq : ds.sequences) {
        try {
            validate_sequence(seq, ds.header.camera);
        } catch (const std::exception& e) {
            throw parse_error(std::string("dataset failed validation: ") + e.what());
        }
    }
    return ds;
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    return load_dataset(in);
}

inline std::string dataset_to_string(const Dataset& ds) {
    std::ostringstream ss;
    save_dataset(ds, ss);
    return ss.str();
}

} // namespace bevtraj
