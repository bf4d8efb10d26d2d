#pragma once

#include <cmath>
#include <string>

#include "bevtraj/errors.hpp"

namespace bevtraj {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Vec2&) const = default;
    double norm() const { return std::sqrt(x * x + y * y); }
};

// Nadir camera over the ego vehicle. One scale for both axes, derived from
// the horizontal FOV: ground footprint width = 2 * height_m * tan(fov/2).
struct CameraConfig {
    int image_width = 800;
    int image_height = 600;
    double fov_deg = 90.0;
    double height_m = 15.0;

    void validate() const {
        if (image_width <= 0 || image_height <= 0) throw config_error("camera: image dimensions must be positive");
        if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw config_error("camera: fov_deg must be in (0, 180)");
        if (!(height_m > 0.0)) throw config_error("camera: height_m must be positive");
    }

    double meters_per_pixel() const {
        const double half_fov_rad = fov_deg * (std::acos(-1.0) / 180.0) / 2.0;
        return 2.0 * height_m * std::tan(half_fov_rad) / static_cast<double>(image_width);
    }

    double footprint_width_m() const { return meters_per_pixel() * image_width; }
    double footprint_height_m() const { return meters_per_pixel() * image_height; }
};

// Pixel -> ground plane, ego-centered, y-up. Accepts the closed image
// rectangle [0,w] x [0,h]; object centers proper are half-open but the
// footprint edge itself is a valid conversion input.
inline Vec2 pixels_to_meters(Vec2 p, const CameraConfig& cam) {
    cam.validate();
    if (!(p.x >= 0.0 && p.x <= cam.image_width && p.y >= 0.0 && p.y <= cam.image_height))
        throw config_error("pixels_to_meters: point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                           ") outside image bounds");
    const double s = cam.meters_per_pixel();
    return {(p.x - cam.image_width / 2.0) * s, (cam.image_height / 2.0 - p.y) * s};
}

// Exact inverse of pixels_to_meters on its range; may return out-of-image
// coordinates, the caller clips.
inline Vec2 meters_to_pixels(Vec2 q, const CameraConfig& cam) {
    cam.validate();
    const double s = cam.meters_per_pixel();
    return {cam.image_width / 2.0 + q.x / s, cam.image_height / 2.0 - q.y / s};
}

} // namespace bevtraj
