#pragma once

#include <cmath>

namespace pupilnet {

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Round half up, the single rounding rule used for coordinates and counts.
inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

/// Downscaled pixel u covers original pixels [factor*u, factor*u + factor - 1];
/// these maps send block centers to each other.
inline double to_original(double downscaled, int factor) {
    return factor * downscaled + (factor - 1) / 2.0;
}

inline double to_downscaled(double original, int factor) {
    return (original - (factor - 1) / 2.0) / factor;
}

}  // namespace pupilnet
