#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dtg/geometry.hpp"

namespace dtg {

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell& o) const { return x == o.x && y == o.y; }
};

// Non-owning view of a scalar field over the grid, consumed by the autodiff
// bilinear sampler without pulling grid_world into the tensor layer.
struct FieldRef {
  const double* data = nullptr;
  int width = 0;
  int height = 0;
  double resolution = 0.0;
};

// Rasterized traversability map. Cell (i, j) covers
// [i*res, (i+1)*res) x [j*res, (j+1)*res); its center is ((i+0.5)res, (j+0.5)res).
// `clearance` holds the Euclidean distance (meters, center-to-center) from each
// cell to the nearest non-traversable cell, clipped to [0, 1] m, and is 0 on
// non-traversable cells. Immutable after construction.
class GridWorld {
public:
  GridWorld() = default;
  GridWorld(double resolution, int width, int height, std::vector<uint8_t> traversable);

  double resolution() const { return resolution_; }
  int width() const { return width_; }
  int height() const { return height_; }
  double size_x() const { return width_ * resolution_; }
  double size_y() const { return height_ * resolution_; }

  bool in_bounds(const Cell& c) const {
    return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_;
  }
  bool traversable(const Cell& c) const {
    return in_bounds(c) && traversable_[index(c)] != 0;
  }
  double clearance_at(const Cell& c) const { return clearance_[index(c)]; }

  Cell cell_of(const Vec2& p) const {
    return {static_cast<int>(std::floor(p.x / resolution_)),
            static_cast<int>(std::floor(p.y / resolution_))};
  }
  Vec2 center_of(const Cell& c) const {
    return {(c.x + 0.5) * resolution_, (c.y + 0.5) * resolution_};
  }
  bool traversable_at(const Vec2& p) const { return traversable(cell_of(p)); }

  std::size_t index(const Cell& c) const {
    return static_cast<std::size_t>(c.y) * width_ + c.x;
  }

  const std::vector<uint8_t>& traversable_grid() const { return traversable_; }
  const std::vector<double>& clearance_grid() const { return clearance_; }
  FieldRef clearance_field_ref() const {
    return {clearance_.data(), width_, height_, resolution_};
  }

  // every traversable cell reaches every other through 8-connected moves
  bool connected() const;
  std::size_t traversable_count() const;

  // nearest traversable cell to `p` within `max_dist` meters (center-to-point),
  // or {false, {}} if none
  std::pair<bool, Cell> nearest_traversable(const Vec2& p, double max_dist) const;

  void save(const std::string& path) const;
  static GridWorld load(const std::string& path);

private:
  double resolution_ = 0.25;
  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> traversable_;
  std::vector<double> clearance_;  // meters, clipped to [0, 1]
};

// Exact Euclidean distance transform over cell centers, clipped to [0, 1] m.
// Distance is measured to the nearest non-traversable cell center; a grid with
// no obstacles saturates at 1.0 everywhere.
std::vector<double> clearance_field(const std::vector<uint8_t>& traversable, int width,
                                    int height, double resolution);

}  // namespace dtg
