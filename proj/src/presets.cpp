#include "capsim/presets.hpp"

#include <cmath>
#include <string>

#include "capsim/errors.hpp"

namespace capsim::presets {

namespace {

// Planar serpentine in z = 0: straight limbs along ±x joined by half-circle
// turns, sampled densely enough for the spline to keep the turn radius.
std::vector<Vec3> serpentine(int limbs, double limb_len, double turn_radius) {
    std::vector<Vec3> pts;
    double y = 0.0;
    int dir = 1;
    Vec3 cursor(0.0, 0.0, 0.0);
    pts.push_back(cursor);
    for (int k = 0; k < limbs; ++k) {
        // Limb with a midpoint to keep the spline taut.
        for (int i = 1; i <= 2; ++i) {
            Vec3 p = cursor;
            p.x() += dir * limb_len * (i / 2.0);
            pts.push_back(p);
        }
        cursor.x() += dir * limb_len;
        if (k + 1 < limbs) {
            // Half circle from heading `dir` to `-dir`, advancing +y.
            const double cx = cursor.x();
            const double cy = y + turn_radius;
            for (int i = 1; i <= 3; ++i) {
                const double ang = kPi * i / 4.0;  // quarter steps of the half turn
                Vec3 p(cx + dir * turn_radius * std::sin(ang), cy - turn_radius * std::cos(ang),
                       0.0);
                pts.push_back(p);
            }
            y += 2.0 * turn_radius;
            cursor = Vec3(cx, y, 0.0);
            pts.push_back(cursor);
            dir = -dir;
        }
    }
    return pts;
}

std::vector<Vec3> straight(double length) {
    return {{0, 0, 0}, {length / 2.0, 0, 0}, {length, 0, 0}};
}

// Flat approach, 30° climb, flat top.
std::vector<Vec3> slope30() {
    const double flat = 0.020, climb = 0.050, ang = deg2rad(30.0);
    std::vector<Vec3> pts;
    pts.push_back({0, 0, 0});
    pts.push_back({flat, 0, 0});
    for (int i = 1; i <= 2; ++i) {
        const double u = climb * i / 2.0;
        pts.push_back({flat + u * std::cos(ang), 0, u * std::sin(ang)});
    }
    const Vec3 top = pts.back();
    pts.push_back({top.x() + flat / 2.0, 0, top.z()});
    pts.push_back({top.x() + flat, 0, top.z()});
    return pts;
}

// 180° bend followed by a 90° bend, total length ≈ 244 mm.
std::vector<Vec3> bent244() {
    const double r = 0.016;
    std::vector<Vec3> pts;
    // Straight 70 mm along +x.
    pts.push_back({0, 0, 0});
    pts.push_back({0.035, 0, 0});
    pts.push_back({0.070, 0, 0});
    // 180° turn to -x around (0.070, r) (length pi*r ≈ 50.3 mm).
    for (int i = 1; i <= 4; ++i) {
        const double a = kPi * i / 4.0;
        pts.push_back({0.070 + r * std::sin(a), r - r * std::cos(a), 0.0});
    }
    // Straight 70 mm along -x.
    pts.push_back({0.035, 2 * r, 0});
    pts.push_back({0.0, 2 * r, 0});
    // 90° turn from -x heading to +y around (0, 3r) (length pi*r/2 ≈ 25.1 mm).
    for (int i = 1; i <= 3; ++i) {
        const double a = 0.5 * kPi * i / 3.0;
        pts.push_back({-r * std::sin(a), 3 * r - r * std::cos(a), 0.0});
    }
    // Straight ~28.5 mm along +y.
    pts.push_back({-r, 3 * r + 0.0143, 0});
    pts.push_back({-r, 3 * r + 0.0286, 0});
    return pts;
}

}  // namespace

std::vector<Vec3> path_preset(std::string_view name) {
    if (name == "straight215") return straight(0.215);
    if (name == "slope30") return slope30();
    if (name == "bent244") return bent244();
    if (name == "complex684") return serpentine(5, 0.100, 0.0146);
    if (name == "intestine246") return serpentine(8, 0.250, 0.0209);
    if (name == "serpentine300") return serpentine(3, 0.070, 0.0150);
    throw ConfigError("unknown path preset: " + std::string(name));
}

const std::vector<std::string>& path_preset_names() {
    static const std::vector<std::string> names = {
        "straight215", "slope30", "bent244", "complex684", "intestine246", "serpentine300"};
    return names;
}

}  // namespace capsim::presets
