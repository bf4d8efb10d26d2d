#include <catch2/catch_amalgamated.hpp>

#include "bevtraj/camera.hpp"
#include "bevtraj/rng.hpp"

using namespace bevtraj;

TEST_CASE("default camera scale follows the pinhole footprint") {
    // 2 * 15 * tan(45 deg) / 800 = 30 / 800 = 0.0375 m/px
    CameraConfig cam;
    CHECK(cam.meters_per_pixel() == Catch::Approx(0.0375).epsilon(1e-12));
    CHECK(cam.footprint_width_m() == Catch::Approx(30.0).epsilon(1e-12));
    CHECK(cam.footprint_height_m() == Catch::Approx(22.5).epsilon(1e-12));
}

TEST_CASE("image center maps to the origin") {
    CameraConfig cam;
    const Vec2 m = pixels_to_meters({400, 300}, cam);
    CHECK(m.x == 0.0);
    CHECK(m.y == 0.0);
    const Vec2 p = meters_to_pixels({0, 0}, cam);
    CHECK(p.x == 400.0);
    CHECK(p.y == 300.0);
}

TEST_CASE("right image edge maps to +15 m") {
    CameraConfig cam;
    const Vec2 m = pixels_to_meters({800, 300}, cam);
    CHECK(m.x == Catch::Approx(15.0).epsilon(1e-9));
    CHECK(m.y == Catch::Approx(0.0).margin(1e-12));
    const Vec2 p = meters_to_pixels({15.0, 0.0}, cam);
    CHECK(p.x == Catch::Approx(800.0).epsilon(1e-9));
    CHECK(p.y == Catch::Approx(300.0).margin(1e-9));
}

TEST_CASE("points outside the image are rejected") {
    CameraConfig cam;
    CHECK_THROWS_AS(pixels_to_meters({-1.0, 10.0}, cam), config_error);
    CHECK_THROWS_AS(pixels_to_meters({10.0, 600.5}, cam), config_error);
}

TEST_CASE("meters_to_pixels inverts pixels_to_meters on random points") {
    CameraConfig cam;
    Rng rng(99);
    for (int i = 0; i < 1000; ++i) {
        const Vec2 p{rng.uniform(0.0, 800.0), rng.uniform(0.0, 600.0)};
        const Vec2 round = meters_to_pixels(pixels_to_meters(p, cam), cam);
        CHECK(std::abs(round.x - p.x) <= 1e-9 * std::max(1.0, std::abs(p.x)));
        CHECK(std::abs(round.y - p.y) <= 1e-9 * std::max(1.0, std::abs(p.y)));
    }
}

TEST_CASE("invalid camera configs are rejected") {
    CameraConfig cam;
    cam.fov_deg = 180.0;
    CHECK_THROWS_AS(cam.validate(), config_error);
    cam = CameraConfig{};
    cam.image_width = 0;
    CHECK_THROWS_AS(cam.validate(), config_error);
    cam = CameraConfig{};
    cam.height_m = -1.0;
    CHECK_THROWS_AS(cam.validate(), config_error);
}
