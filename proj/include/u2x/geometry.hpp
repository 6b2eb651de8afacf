#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace u2x {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

/// Horizontal (ground-plane) separation, ignoring altitude.
inline double horizontal_distance(const Vec3& a, const Vec3& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// The cell is a vertical cylinder: a disc of given radius around the BS
/// ground position plus an altitude band for airborne entities.
struct CellRegion {
    Vec3 center;          // BS ground position, z ignored for the disc
    double radius = 500.0;
    double min_alt = 50.0;
    double max_alt = 150.0;

    bool contains(const Vec3& p) const {
        return horizontal_distance(p, center) <= radius + 1e-9 &&
               p.z >= min_alt - 1e-9 && p.z <= max_alt + 1e-9;
    }
};

/// Project p into the region: radial projection onto the disc, altitude
/// clamped to the band. Idempotent; interior points pass through.
inline Vec3 clip_to_region(const Vec3& p, const CellRegion& r) {
    Vec3 q = p;
    double hd = horizontal_distance(p, r.center);
    if (hd > r.radius) {
        double scale = r.radius / hd;
        q.x = r.center.x + (p.x - r.center.x) * scale;
        q.y = r.center.y + (p.y - r.center.y) * scale;
    }
    q.z = std::clamp(q.z, r.min_alt, r.max_alt);
    return q;
}

struct MotionLimits {
    double lattice_step = 25.0;   // meters per cycle along each axis
    // One lattice move per cycle; the corner move is the fastest possible.
    double v_max() const { return lattice_step * std::sqrt(3.0); }
};

constexpr int kLatticeActions = 27;

/// Offset for action index a, components in {-1, 0, +1}.
/// Index 13 is the all-zero (hover) offset.
inline Vec3 lattice_offset(int action) {
    int dx = action / 9 - 1;
    int dy = (action / 3) % 3 - 1;
    int dz = action % 3 - 1;
    return {double(dx), double(dy), double(dz)};
}

/// The 27 candidate positions reachable from p in one cycle, each clipped
/// to the region. Order is fixed: index = (dx+1)*9 + (dy+1)*3 + (dz+1).
inline std::array<Vec3, kLatticeActions> lattice_actions(const Vec3& p, double step,
                                                         const CellRegion& region) {
    std::array<Vec3, kLatticeActions> out;
    for (int a = 0; a < kLatticeActions; ++a) {
        out[a] = clip_to_region(p + lattice_offset(a) * step, region);
    }
    return out;
}

}  // namespace u2x
