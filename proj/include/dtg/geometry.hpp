#pragma once

#include <cmath>

namespace dtg {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double norm() const { return std::hypot(x, y); }
};

// normalize angle to (-pi, pi]
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians in (-pi, pi]

  Vec2 position() const { return {x, y}; }

  // world point expressed in this pose's frame (pose at origin, heading = +x)
  Vec2 to_frame(const Vec2& world) const {
    double dx = world.x - x, dy = world.y - y;
    double c = std::cos(heading), s = std::sin(heading);
    return {c * dx + s * dy, -s * dx + c * dy};
  }

  // frame point expressed in world coordinates
  Vec2 to_world(const Vec2& local) const {
    double c = std::cos(heading), s = std::sin(heading);
    return {x + c * local.x - s * local.y, y + s * local.x + c * local.y};
  }
};

}  // namespace dtg
