#pragma once

#include <vector>

#include "dtg/geometry.hpp"

namespace dtg {

// Planar trajectory as M frame-relative increments; waypoints are their
// prefix sums. The robot sits at the implicit origin before waypoint 1.
struct Trajectory {
  std::vector<Vec2> increments;

  std::size_t size() const { return increments.size(); }

  std::vector<Vec2> waypoints() const {
    std::vector<Vec2> w(increments.size());
    Vec2 acc{0.0, 0.0};
    for (std::size_t i = 0; i < increments.size(); ++i) {
      acc = acc + increments[i];
      w[i] = acc;
    }
    return w;
  }

  static Trajectory from_waypoints(const std::vector<Vec2>& w) {
    Trajectory t;
    t.increments.resize(w.size());
    Vec2 prev{0.0, 0.0};
    for (std::size_t i = 0; i < w.size(); ++i) {
      t.increments[i] = w[i] - prev;
      prev = w[i];
    }
    return t;
  }

  double arc_length() const {
    double s = 0.0;
    for (const Vec2& d : increments) s += d.norm();
    return s;
  }
};

}  // namespace dtg
