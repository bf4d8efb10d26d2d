#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bevtraj/camera.hpp"
#include "bevtraj/errors.hpp"
#include "bevtraj/rng.hpp"
#include "bevtraj/scene.hpp"

namespace bevtraj {

// Default observation window (8 frames) + prediction horizon (5 steps); a
// sequence shorter than this cannot produce a single training sample.
inline constexpr std::size_t kDefaultWindow = 8;
inline constexpr std::size_t kDefaultHorizon = 5;
inline constexpr std::size_t kMinFramesPerSequence = kDefaultWindow + kDefaultHorizon;

inline constexpr std::size_t kClassEmbedDim = 16;
inline constexpr std::size_t kGeomFeatureDim = 4;

struct DatasetHeader {
    int format_version = 1;
    CameraConfig camera;
    std::size_t feature_size = 768;
    double dt_s = 1.0;
};

struct Dataset {
    DatasetHeader header;
    std::vector<SceneSequence> sequences;
};

inline GenerationSpec level_preset(int level, std::uint64_t seed) {
    GenerationSpec spec;
    spec.level = level;
    spec.seed = seed;
    if (level == 1) {
        spec.n_sequences = 1000;
        spec.scenario_weights = {0.4, 0.3, 0.3};
    } else if (level == 2) {
        spec.n_sequences = 5000;
        spec.scenario_weights = {0.3, 0.35, 0.35};
        spec.class_mix = {
            {ObjectClass::Vehicle, 0.45},
            {ObjectClass::Pedestrian, 0.3},
            {ObjectClass::TrafficLight, 0.1},
            {ObjectClass::StaticObstacle, 0.15},
        };
    } else {
        throw config_error("level must be 1 or 2, got " + std::to_string(level));
    }
    return spec;
}

namespace gen_detail {

struct WorldBounds {
    double half_w;
    double half_h;
    double margin;

    double lo_x() const { return -half_w + margin; }
    double hi_x() const { return half_w - margin; }
    double lo_y() const { return -half_h + margin; }
    double hi_y() const { return half_h - margin; }

    bool contains(Vec2 p) const { return p.x >= lo_x() && p.x <= hi_x() && p.y >= lo_y() && p.y <= hi_y(); }
    Vec2 clamp(Vec2 p) const {
        return {std::clamp(p.x, lo_x(), hi_x()), std::clamp(p.y, lo_y(), hi_y())};
    }
};

// Shift a path built around the origin so it fits the bounds; if it cannot
// fit, the caller shrinks the path and retries.
inline bool place_path(std::vector<Vec2>& path, const WorldBounds& wb, Rng& rng) {
    double xmin = path[0].x, xmax = path[0].x, ymin = path[0].y, ymax = path[0].y;
    for (const auto& p : path) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const double ox_lo = wb.lo_x() - xmin, ox_hi = wb.hi_x() - xmax;
    const double oy_lo = wb.lo_y() - ymin, oy_hi = wb.hi_y() - ymax;
    if (ox_lo > ox_hi || oy_lo > oy_hi) return false;
    const Vec2 offset{rng.uniform(ox_lo, ox_hi), rng.uniform(oy_lo, oy_hi)};
    for (auto& p : path) p = p + offset;
    return true;
}

inline std::vector<Vec2> ego_path_straight(std::size_t n, double dt, const WorldBounds& wb, Rng& rng) {
    const double heading = rng.uniform(0.0, 2.0 * std::acos(-1.0));
    double speed = rng.uniform(0.8, 1.6) * dt;
    for (int attempt = 0; attempt < 12; ++attempt) {
        std::vector<Vec2> path(n);
        for (std::size_t t = 0; t < n; ++t)
            path[t] = Vec2{speed * std::cos(heading), speed * std::sin(heading)} * static_cast<double>(t);
        if (place_path(path, wb, rng)) return path;
        speed *= 0.8;
    }
    // Degenerate fallback: stay at a fixed point.
    return std::vector<Vec2>(n, wb.clamp(Vec2{0, 0}));
}

inline std::vector<Vec2> ego_path_turn(std::size_t n, double dt, const WorldBounds& wb, Rng& rng) {
    const double heading0 = rng.uniform(0.0, 2.0 * std::acos(-1.0));
    const double yaw_rate = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(0.05, 0.13);
    double speed = rng.uniform(0.8, 1.5) * dt;
    for (int attempt = 0; attempt < 12; ++attempt) {
        std::vector<Vec2> path(n);
        double heading = heading0;
        Vec2 p{0, 0};
        path[0] = p;
        for (std::size_t t = 1; t < n; ++t) {
            p = p + Vec2{speed * std::cos(heading), speed * std::sin(heading)};
            heading += yaw_rate;
            path[t] = p;
        }
        if (place_path(path, wb, rng)) return path;
        speed *= 0.8;
    }
    return std::vector<Vec2>(n, wb.clamp(Vec2{0, 0}));
}

struct PedScenario {
    std::vector<Vec2> ego;       // n positions
    std::vector<Vec2> walker;    // positions from appear_frame onward
    std::size_t appear_frame;
};

// Ego drives toward a crossing point and brakes to a stop ahead of it while
// a pedestrian crosses its lane. Built in a canonical +x frame, then mapped
// through one of 8 axis-preserving isometries.
inline PedScenario ego_path_pedestrian(std::size_t n, double dt, const WorldBounds& wb, Rng& rng) {
    const double speed = rng.uniform(0.8, 1.5) * dt;
    const std::size_t brake_frames = 4;
    const std::size_t brake_start = std::min<std::size_t>(5 + static_cast<std::size_t>(rng.uniform_int(0, 2)), n - 2);
    const double stop_gap = rng.uniform(1.5, 2.5);

    std::vector<Vec2> ego(n);
    double x = 0.0, v = speed;
    for (std::size_t t = 0; t < n; ++t) {
        ego[t] = {x, 0.0};
        if (t >= brake_start && v > 0.0) {
            const double step = static_cast<double>(t - brake_start + 1);
            v = speed * std::max(0.0, 1.0 - step / static_cast<double>(brake_frames));
        }
        x += v;
    }
    const double brake_dist = [&] {
        double d = 0.0, vv = speed;
        for (std::size_t i = 1; i <= brake_frames; ++i) {
            vv = speed * std::max(0.0, 1.0 - static_cast<double>(i) / brake_frames);
            d += vv;
        }
        return d;
    }();
    const double cross_x = ego[brake_start].x + speed + brake_dist + stop_gap;

    const std::size_t appear = 2 + static_cast<std::size_t>(rng.uniform_int(0, 1));
    const double walk_speed = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(0.4, 0.8) * dt;
    const double y_start = -walk_speed * static_cast<double>(brake_start + 2 - appear);
    std::vector<Vec2> walker;
    for (std::size_t t = appear; t < n; ++t)
        walker.push_back({cross_x, y_start + walk_speed * static_cast<double>(t - appear)});

    // Isometry: optional swap to +/-y travel, optional sign flips.
    const bool swap_axes = rng.bernoulli(0.5);
    const double sx = rng.bernoulli(0.5) ? 1.0 : -1.0;
    const double sy = rng.bernoulli(0.5) ? 1.0 : -1.0;
    auto map = [&](Vec2 p) -> Vec2 {
        Vec2 q = swap_axes ? Vec2{p.y, p.x} : p;
        return {q.x * sx, q.y * sy};
    };
    PedScenario sc;
    sc.appear_frame = appear;
    sc.ego.reserve(n);
    for (auto& p : ego) sc.ego.push_back(map(p));
    for (auto& p : walker) sc.walker.push_back(map(p));

    // Single joint shift so all actors stay in bounds.
    std::vector<Vec2> all = sc.ego;
    all.insert(all.end(), sc.walker.begin(), sc.walker.end());
    std::vector<Vec2> placed = all;
    if (place_path(placed, wb, rng)) {
        const Vec2 offset = placed[0] - all[0];
        for (auto& p : sc.ego) p = p + offset;
        for (auto& p : sc.walker) p = p + offset;
    } else {
        for (auto& p : sc.ego) p = wb.clamp(p);
        for (auto& p : sc.walker) p = wb.clamp(p);
    }
    return sc;
}

struct MovingObject {
    int object_id;
    ObjectClass cls;
    Vec2 extent_px;
    std::vector<Vec2> positions;   // meters, one per frame it exists
    std::size_t first_frame = 0;
};

inline Vec2 class_extent_px(ObjectClass cls, Rng& rng) {
    switch (cls) {
        case ObjectClass::Ego: return {rng.uniform(105, 125), rng.uniform(48, 60)};
        case ObjectClass::Vehicle: return {rng.uniform(100, 130), rng.uniform(45, 60)};
        case ObjectClass::Pedestrian: return {rng.uniform(12, 20), rng.uniform(12, 20)};
        case ObjectClass::TrafficLight: return {rng.uniform(10, 16), rng.uniform(10, 16)};
        case ObjectClass::StaticObstacle: return {rng.uniform(20, 60), rng.uniform(20, 60)};
    }
    return {10, 10};
}

// Constant velocity, reflecting off the world margins.
inline std::vector<Vec2> bouncing_path(Vec2 start, Vec2 vel, std::size_t n, const WorldBounds& wb) {
    std::vector<Vec2> path;
    path.reserve(n);
    Vec2 p = start, v = vel;
    for (std::size_t t = 0; t < n; ++t) {
        path.push_back(p);
        Vec2 next = p + v;
        if (next.x < wb.lo_x() || next.x > wb.hi_x()) v.x = -v.x;
        if (next.y < wb.lo_y() || next.y > wb.hi_y()) v.y = -v.y;
        p = wb.clamp(p + v);
    }
    return path;
}

} // namespace gen_detail

// Deterministic synthetic BEV sequences: straight constant-velocity driving,
// constant-yaw-rate turns, and pedestrian-at-crosswalk braking events, plus
// level-dependent background traffic. Same spec and seed reproduce the same
// dataset byte for byte.
inline Dataset generate_dataset(const GenerationSpec& spec) {
    spec.validate();
    if (spec.frames_per_sequence < kMinFramesPerSequence)
        throw config_error("generation: frames_per_sequence must be >= T+H = " + std::to_string(kMinFramesPerSequence) +
                           " (observation window T=" + std::to_string(kDefaultWindow) + " plus horizon H=" +
                           std::to_string(kDefaultHorizon) + "), got " + std::to_string(spec.frames_per_sequence));

    const CameraConfig& cam = spec.camera;
    const gen_detail::WorldBounds wb{cam.footprint_width_m() / 2.0, cam.footprint_height_m() / 2.0, 1.0};
    const std::size_t n = spec.frames_per_sequence;
    const std::size_t F = spec.feature_size;

    // Class embeddings are dataset-wide, derived from the dataset seed.
    std::vector<std::vector<double>> class_emb(5);
    for (std::size_t c = 0; c < 5; ++c) {
        Rng r(Rng::derive_stream(spec.seed, 0xC1A55ULL + c));
        class_emb[c].resize(kClassEmbedDim);
        for (auto& v : class_emb[c]) v = r.uniform(-1.0, 1.0);
    }

    std::vector<ObjectClass> mix_classes;
    std::vector<double> mix_weights;
    for (const auto& [cls, w] : spec.class_mix) {
        if (w > 0.0) {
            mix_classes.push_back(cls);
            mix_weights.push_back(w);
        }
    }

    Dataset ds;
    ds.header = {1, cam, F, spec.dt_s};
    ds.sequences.reserve(spec.n_sequences);

    for (std::size_t sid = 0; sid < spec.n_sequences; ++sid) {
        const std::uint64_t sub_seed = Rng::derive_stream(spec.seed, sid);
        Rng rng(sub_seed);

        const std::size_t kidx = rng.weighted_index(spec.scenario_weights);
        const ScenarioKind kind = kidx == 0   ? ScenarioKind::Straight
                                  : kidx == 1 ? ScenarioKind::Turn
                                              : ScenarioKind::PedestrianCrossing;

        std::vector<gen_detail::MovingObject> actors;

        // Ego is always object 0.
        gen_detail::MovingObject ego;
        ego.object_id = 0;
        ego.cls = ObjectClass::Ego;
        ego.extent_px = gen_detail::class_extent_px(ObjectClass::Ego, rng);
        std::size_t walker_count = 0;
        gen_detail::PedScenario ped;
        switch (kind) {
            case ScenarioKind::Straight: ego.positions = gen_detail::ego_path_straight(n, spec.dt_s, wb, rng); break;
            case ScenarioKind::Turn: ego.positions = gen_detail::ego_path_turn(n, spec.dt_s, wb, rng); break;
            case ScenarioKind::PedestrianCrossing:
                ped = gen_detail::ego_path_pedestrian(n, spec.dt_s, wb, rng);
                ego.positions = ped.ego;
                walker_count = 1;
                break;
        }
        actors.push_back(std::move(ego));

        if (walker_count) {
            gen_detail::MovingObject w;
            w.object_id = 1;
            w.cls = ObjectClass::Pedestrian;
            w.extent_px = gen_detail::class_extent_px(ObjectClass::Pedestrian, rng);
            w.positions = ped.walker;
            w.first_frame = ped.appear_frame;
            actors.push_back(std::move(w));
        }

        // Background traffic.
        const std::size_t n_bg = spec.level == 1 ? static_cast<std::size_t>(rng.uniform_int(3, 6))
                                                 : static_cast<std::size_t>(rng.uniform_int(7, 12));
        std::vector<ObjectClass> bg_classes;
        for (std::size_t i = 0; i < n_bg; ++i) bg_classes.push_back(mix_classes[rng.weighted_index(mix_weights)]);
        // Presets guarantee vehicles, and pedestrians on level 2.
        if (!bg_classes.empty()) {
            if (std::find(bg_classes.begin(), bg_classes.end(), ObjectClass::Vehicle) == bg_classes.end())
                bg_classes[0] = ObjectClass::Vehicle;
            if (spec.level == 2 && walker_count == 0 &&
                std::find(bg_classes.begin(), bg_classes.end(), ObjectClass::Pedestrian) == bg_classes.end())
                bg_classes[bg_classes.size() - 1] = ObjectClass::Pedestrian;
        }
        int next_id = 10;
        for (ObjectClass cls : bg_classes) {
            gen_detail::MovingObject o;
            o.object_id = next_id++;
            o.cls = cls;
            o.extent_px = gen_detail::class_extent_px(cls, rng);
            const Vec2 start{rng.uniform(wb.lo_x(), wb.hi_x()), rng.uniform(wb.lo_y(), wb.hi_y())};
            Vec2 vel{0, 0};
            if (cls == ObjectClass::Vehicle && rng.bernoulli(0.5)) {
                const double h = rng.uniform(0.0, 2.0 * std::acos(-1.0));
                const double s = rng.uniform(0.3, 1.2) * spec.dt_s;
                vel = {s * std::cos(h), s * std::sin(h)};
            } else if (cls == ObjectClass::Pedestrian) {
                const double h = rng.uniform(0.0, 2.0 * std::acos(-1.0));
                const double s = rng.uniform(0.2, 0.6) * spec.dt_s;
                vel = {s * std::cos(h), s * std::sin(h)};
            }
            o.positions = gen_detail::bouncing_path(start, vel, n, wb);
            actors.push_back(std::move(o));
        }

        // Per-object appearance texture, constant across the sequence.
        std::vector<std::vector<double>> textures(actors.size());
        const std::size_t tex_dim = F > kClassEmbedDim + kGeomFeatureDim ? F - kClassEmbedDim - kGeomFeatureDim : 0;
        for (std::size_t a = 0; a < actors.size(); ++a) {
            Rng tr(Rng::derive_stream(sub_seed, 0x7E47ULL + static_cast<std::uint64_t>(actors[a].object_id)));
            textures[a].resize(tex_dim);
            for (auto& v : textures[a]) v = tr.uniform(-1.0, 1.0);
        }

        SceneSequence seq;
        seq.sequence_id = static_cast<int>(sid);
        seq.meta = {spec.level, sub_seed, kind};
        for (std::size_t t = 0; t < n; ++t) {
            SceneFrame frame;
            frame.frame_index = static_cast<int>(t);
            for (std::size_t a = 0; a < actors.size(); ++a) {
                const auto& actor = actors[a];
                if (t < actor.first_frame) continue;
                const Vec2 pos_m = actor.positions[t - actor.first_frame];
                Vec2 px = meters_to_pixels(pos_m, cam);
                px.x = std::clamp(px.x, 0.0, cam.image_width - 1e-3);
                px.y = std::clamp(px.y, 0.0, cam.image_height - 1e-3);

                SceneObject obj;
                obj.object_id = actor.object_id;
                obj.cls = actor.cls;
                obj.center = px;
                obj.extent = actor.extent_px;
                obj.feature.reserve(F);
                const auto& emb = class_emb[static_cast<std::size_t>(actor.cls)];
                for (double v : emb) obj.feature.push_back(v);
                obj.feature.push_back(px.x / cam.image_width);
                obj.feature.push_back(px.y / cam.image_height);
                obj.feature.push_back(actor.extent_px.x / cam.image_width);
                obj.feature.push_back(actor.extent_px.y / cam.image_height);
                for (double v : textures[a]) obj.feature.push_back(v);
                obj.feature.resize(F, 0.0);

                if (actor.cls == ObjectClass::Ego) frame.ego_index = frame.objects.size();
                frame.objects.push_back(std::move(obj));
            }
            seq.ego_truth_m.push_back(pixels_to_meters(frame.objects[frame.ego_index].center, cam));
            seq.frames.push_back(std::move(frame));
        }
        validate_sequence(seq, cam);
        ds.sequences.push_back(std::move(seq));
    }
    return ds;
}

} // namespace bevtraj
