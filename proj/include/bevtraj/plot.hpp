#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "bevtraj/camera.hpp"
#include "bevtraj/errors.hpp"
#include "bevtraj/graph.hpp"
#include "bevtraj/model.hpp"
#include "bevtraj/scene.hpp"

namespace bevtraj {

namespace plot_detail {

inline std::string fmt(double v, int precision = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

inline std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline const char* class_color(ObjectClass c) {
    switch (c) {
        case ObjectClass::Ego: return "#222222";
        case ObjectClass::Vehicle: return "#888888";
        case ObjectClass::Pedestrian: return "#e69500";
        case ObjectClass::TrafficLight: return "#7a52c7";
        case ObjectClass::StaticObstacle: return "#6b8e23";
    }
    return "#000000";
}

} // namespace plot_detail

// Everything the trajectory figure shows for one window-end frame: the BEV
// footprint, the frame's objects and graph edges, the true future in blue
// (with a blue start marker) and the predicted path in red.
struct ScenePlot {
    CameraConfig camera;
    const SceneFrame* frame = nullptr;
    const SceneGraph* graph = nullptr;
    Vec2 start_m;                      // ego position at the window end
    std::vector<Vec2> truth_m;         // H future positions
    std::vector<Vec2> predicted_m;     // H predicted positions
};

inline std::string render_scene_svg(const ScenePlot& plot) {
    using plot_detail::fmt;
    const CameraConfig& cam = plot.camera;
    const double w = cam.image_width, h = cam.image_height;
    auto px = [&](Vec2 m) { return meters_to_pixels(m, cam); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + fmt(w, 0) + " " + fmt(h, 0) +
           "\" width=\"" + fmt(w, 0) + "\" height=\"" + fmt(h, 0) + "\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt(w, 0) + "\" height=\"" + fmt(h, 0) +
           "\" fill=\"#f7f7f2\" stroke=\"#333333\"/>\n";

    if (plot.graph) {
        for (const auto& e : plot.graph->edges) {
            const Vec2 a = plot.graph->centers[e.i];
            const Vec2 b = plot.graph->centers[e.j];
            svg += "<line x1=\"" + fmt(a.x) + "\" y1=\"" + fmt(a.y) + "\" x2=\"" + fmt(b.x) + "\" y2=\"" +
                   fmt(b.y) + "\" stroke=\"#b0c4b0\" stroke-width=\"1\"/>\n";
        }
    }
    if (plot.frame) {
        for (const auto& o : plot.frame->objects) {
            svg += "<rect x=\"" + fmt(o.center.x - o.extent.x / 2) + "\" y=\"" + fmt(o.center.y - o.extent.y / 2) +
                   "\" width=\"" + fmt(o.extent.x) + "\" height=\"" + fmt(o.extent.y) + "\" fill=\"none\" stroke=\"" +
                   plot_detail::class_color(o.cls) + "\" stroke-width=\"1.5\"/>\n";
        }
    }

    auto polyline = [&](const std::vector<Vec2>& pts, Vec2 start, const char* color) {
        std::string points;
        const Vec2 s = px(start);
        points += fmt(s.x) + "," + fmt(s.y);
        for (const Vec2& m : pts) {
            const Vec2 p = px(m);
            points += " " + fmt(p.x) + "," + fmt(p.y);
        }
        svg += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    };
    if (!plot.truth_m.empty()) polyline(plot.truth_m, plot.start_m, "blue");
    if (!plot.predicted_m.empty()) polyline(plot.predicted_m, plot.start_m, "red");

    const Vec2 s = px(plot.start_m);
    svg += "<circle cx=\"" + fmt(s.x) + "\" cy=\"" + fmt(s.y) + "\" r=\"5\" fill=\"blue\"/>\n";
    svg += "</svg>\n";
    return svg;
}

// Companion table: header plus H+1 data rows (the start, then each horizon
// step) in full-precision meter coordinates.
inline std::string trajectory_table_csv(Vec2 start, const std::vector<Vec2>& predicted,
                                        const std::vector<Vec2>& truth) {
    using plot_detail::fmt_full;
    if (truth.size() != predicted.size()) throw shape_error("trajectory table: truth/prediction length mismatch");
    std::string csv = "step,pred_x_m,pred_y_m,truth_x_m,truth_y_m\n";
    csv += "0," + fmt_full(start.x) + "," + fmt_full(start.y) + "," + fmt_full(start.x) + "," + fmt_full(start.y) + "\n";
    for (std::size_t j = 0; j < predicted.size(); ++j) {
        csv += std::to_string(j + 1) + "," + fmt_full(predicted[j].x) + "," + fmt_full(predicted[j].y) + "," +
               fmt_full(truth[j].x) + "," + fmt_full(truth[j].y) + "\n";
    }
    return csv;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) throw io_error("write to '" + path + "' failed");
}

} // namespace bevtraj
