#pragma once

#include <numbers>

namespace tribell {

struct Degrees;

/// Angle in radians. Used where a formula is only valid in one unit.
struct Radians {
    double value = 0.0;
    constexpr Degrees to_degrees() const;
};

struct Degrees {
    double value = 0.0;
    constexpr Radians to_radians() const { return {value * std::numbers::pi / 180.0}; }
};

constexpr Degrees Radians::to_degrees() const { return {value * 180.0 / std::numbers::pi}; }

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace tribell
