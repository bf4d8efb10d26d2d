#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bevtraj/camera.hpp"
#include "bevtraj/errors.hpp"

namespace bevtraj {

enum class ObjectClass { Ego, Vehicle, Pedestrian, TrafficLight, StaticObstacle };

inline const char* to_string(ObjectClass c) {
    switch (c) {
        case ObjectClass::Ego: return "ego";
        case ObjectClass::Vehicle: return "vehicle";
        case ObjectClass::Pedestrian: return "pedestrian";
        case ObjectClass::TrafficLight: return "traffic_light";
        case ObjectClass::StaticObstacle: return "static_obstacle";
    }
    return "?";
}

inline ObjectClass object_class_from_string(const std::string& s) {
    if (s == "ego") return ObjectClass::Ego;
    if (s == "vehicle") return ObjectClass::Vehicle;
    if (s == "pedestrian") return ObjectClass::Pedestrian;
    if (s == "traffic_light") return ObjectClass::TrafficLight;
    if (s == "static_obstacle") return ObjectClass::StaticObstacle;
    throw parse_error("unknown class_id '" + s + "'");
}

enum class ScenarioKind { Straight, Turn, PedestrianCrossing };

inline const char* to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::Straight: return "straight";
        case ScenarioKind::Turn: return "turn";
        case ScenarioKind::PedestrianCrossing: return "pedestrian_crossing";
    }
    return "?";
}

inline ScenarioKind scenario_kind_from_string(const std::string& s) {
    if (s == "straight") return ScenarioKind::Straight;
    if (s == "turn") return ScenarioKind::Turn;
    if (s == "pedestrian_crossing") return ScenarioKind::PedestrianCrossing;
    throw parse_error("unknown scenario_kind '" + s + "'");
}

struct SceneObject {
    int object_id = 0;
    ObjectClass cls = ObjectClass::Vehicle;
    Vec2 center;          // continuous pixel coordinates
    Vec2 extent;          // (w, h) in pixels
    std::vector<double> feature;
};

struct SceneFrame {
    int frame_index = 0;
    std::vector<SceneObject> objects;
    std::size_t ego_index = 0;
};

struct SequenceMeta {
    int level = 1;
    std::uint64_t seed = 0;
    ScenarioKind kind = ScenarioKind::Straight;
};

struct SceneSequence {
    int sequence_id = 0;
    std::vector<SceneFrame> frames;
    std::vector<Vec2> ego_truth_m;   // ground-plane ego position per frame
    SequenceMeta meta;
};

struct GenerationSpec {
    std::size_t n_sequences = 1000;
    std::size_t frames_per_sequence = 16;
    int level = 1;
    std::uint64_t seed = 0;
    double dt_s = 1.0;
    std::size_t feature_size = 768;
    double max_speed_mps = 2.0;
    CameraConfig camera;
    // Background object class mix (ego excluded).
    std::map<ObjectClass, double> class_mix = {
        {ObjectClass::Vehicle, 0.5},
        {ObjectClass::Pedestrian, 0.2},
        {ObjectClass::TrafficLight, 0.15},
        {ObjectClass::StaticObstacle, 0.15},
    };
    // Scenario kind mix: straight / turn / pedestrian crossing.
    std::vector<double> scenario_weights = {0.4, 0.3, 0.3};

    void validate() const {
        camera.validate();
        if (n_sequences < 1) throw config_error("generation: n_sequences must be >= 1");
        if (!(dt_s > 0.0)) throw config_error("generation: dt_s must be positive");
        if (feature_size < 1) throw config_error("generation: feature_size must be >= 1");
        if (level != 1 && level != 2) throw config_error("generation: level must be 1 or 2");
    }
};

inline void validate_frame(const SceneFrame& frame, const CameraConfig& cam) {
    if (frame.objects.empty()) throw config_error("frame " + std::to_string(frame.frame_index) + ": needs at least one object");
    std::size_t ego_count = 0;
    for (const auto& o : frame.objects) {
        if (o.cls == ObjectClass::Ego) ++ego_count;
        if (!(o.center.x >= 0.0 && o.center.x < cam.image_width && o.center.y >= 0.0 && o.center.y < cam.image_height))
            throw config_error("frame " + std::to_string(frame.frame_index) + ": object " + std::to_string(o.object_id) +
                               " center outside image bounds");
        if (!(o.extent.x > 0.0 && o.extent.y > 0.0))
            throw config_error("frame " + std::to_string(frame.frame_index) + ": object " + std::to_string(o.object_id) +
                               " extent must be positive");
        for (double v : o.feature)
            if (!std::isfinite(v))
                throw numeric_error("frame " + std::to_string(frame.frame_index) + ": object " + std::to_string(o.object_id) +
                                    " has a non-finite feature");
    }
    if (ego_count != 1) throw config_error("frame " + std::to_string(frame.frame_index) + ": expected exactly one ego object");
    if (frame.ego_index >= frame.objects.size() || frame.objects[frame.ego_index].cls != ObjectClass::Ego)
        throw config_error("frame " + std::to_string(frame.frame_index) + ": ego_index does not point at the ego object");
}

inline void validate_sequence(const SceneSequence& seq, const CameraConfig& cam) {
    if (seq.ego_truth_m.size() != seq.frames.size())
        throw config_error("sequence " + std::to_string(seq.sequence_id) + ": ego_truth_m length != frames length");
    int prev_index = -1;
    for (std::size_t t = 0; t < seq.frames.size(); ++t) {
        const auto& f = seq.frames[t];
        if (f.frame_index <= prev_index)
            throw config_error("sequence " + std::to_string(seq.sequence_id) + ": frames not strictly ordered by frame_index");
        prev_index = f.frame_index;
        validate_frame(f, cam);
        const Vec2 derived = pixels_to_meters(f.objects[f.ego_index].center, cam);
        const Vec2 d = derived - seq.ego_truth_m[t];
        if (d.norm() > 1e-9)
            throw config_error("sequence " + std::to_string(seq.sequence_id) + ": ego_truth_m[" + std::to_string(t) +
                               "] does not match the ego pixel center");
    }
}

} // namespace bevtraj
