#include "dtg/grid_world.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>

#include "dtg/error.hpp"

namespace dtg {

GridWorld::GridWorld(double resolution, int width, int height,
                     std::vector<uint8_t> traversable)
    : resolution_(resolution), width_(width), height_(height),
      traversable_(std::move(traversable)) {
  if (width_ <= 0 || height_ <= 0) fail("bad-grid", "empty grid");
  if (resolution_ <= 0.0) fail("bad-grid", "non-positive resolution");
  if (traversable_.size() != static_cast<std::size_t>(width_) * height_)
    fail("bad-grid", "traversable bitmask size mismatch");
  clearance_ = clearance_field(traversable_, width_, height_, resolution_);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-D squared distance transform (Felzenszwalb & Huttenlocher), restricted to
// sites with finite cost. f: input costs, d: output, n: length. v/z are
// scratch of size n / n+1.
void edt_1d(const double* f, double* d, int n, int* v, double* z) {
  auto intersect = [&](int p, int q) {
    return ((f[q] + static_cast<double>(q) * q) -
            (f[p] + static_cast<double>(p) * p)) /
           (2.0 * q - 2.0 * p);
  };
  int k = -1;  // index of last parabola in the lower envelope
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s = intersect(v[k], q);
    while (k > 0 && s <= z[k]) {
      --k;
      s = intersect(v[k], q);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) d[q] = kInf;
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    double dq = q - v[j];
    d[q] = dq * dq + f[v[j]];
  }
}

}  // namespace

std::vector<double> clearance_field(const std::vector<uint8_t>& traversable, int width,
                                    int height, double resolution) {
  if (width <= 0 || height <= 0) fail("bad-grid", "empty grid");
  std::vector<double> sq(static_cast<std::size_t>(width) * height);

  // column pass: squared distance to nearest obstacle in the same column
  {
    std::vector<double> f(height), d(height), z(height + 1);
    std::vector<int> v(height);
    for (int x = 0; x < width; ++x) {
      for (int y = 0; y < height; ++y)
        f[y] = traversable[static_cast<std::size_t>(y) * width + x] ? kInf : 0.0;
      edt_1d(f.data(), d.data(), height, v.data(), z.data());
      for (int y = 0; y < height; ++y) sq[static_cast<std::size_t>(y) * width + x] = d[y];
    }
  }
  // row pass
  {
    std::vector<double> f(width), d(width), z(width + 1);
    std::vector<int> v(width);
    for (int y = 0; y < height; ++y) {
      double* row = sq.data() + static_cast<std::size_t>(y) * width;
      std::memcpy(f.data(), row, sizeof(double) * width);
      edt_1d(f.data(), d.data(), width, v.data(), z.data());
      std::memcpy(row, d.data(), sizeof(double) * width);
    }
  }

  std::vector<double> out(sq.size());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    double dm = (sq[i] == kInf) ? kInf : std::sqrt(sq[i]) * resolution;
    out[i] = std::min(dm, 1.0);
  }
  return out;
}

bool GridWorld::connected() const {
  std::size_t total = traversable_count();
  if (total == 0) return false;
  std::vector<uint8_t> seen(traversable_.size(), 0);
  std::vector<Cell> stack;
  Cell seed{-1, -1};
  for (int y = 0; y < height_ && seed.x < 0; ++y)
    for (int x = 0; x < width_; ++x)
      if (traversable_[static_cast<std::size_t>(y) * width_ + x]) {
        seed = {x, y};
        break;
      }
  stack.push_back(seed);
  seen[index(seed)] = 1;
  std::size_t reached = 0;
  while (!stack.empty()) {
    Cell c = stack.back();
    stack.pop_back();
    ++reached;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        Cell n{c.x + dx, c.y + dy};
        if (!traversable(n)) continue;
        std::size_t ni = index(n);
        if (!seen[ni]) {
          seen[ni] = 1;
          stack.push_back(n);
        }
      }
  }
  return reached == total;
}

std::size_t GridWorld::traversable_count() const {
  std::size_t n = 0;
  for (uint8_t t : traversable_) n += t ? 1 : 0;
  return n;
}

std::pair<bool, Cell> GridWorld::nearest_traversable(const Vec2& p, double max_dist) const {
  Cell c0 = cell_of(p);
  if (traversable(c0)) return {true, c0};
  int r_cells = static_cast<int>(std::ceil(max_dist / resolution_)) + 1;
  double best = std::numeric_limits<double>::infinity();
  Cell best_cell{};
  for (int dy = -r_cells; dy <= r_cells; ++dy)
    for (int dx = -r_cells; dx <= r_cells; ++dx) {
      Cell c{c0.x + dx, c0.y + dy};
      if (!traversable(c)) continue;
      double d = (center_of(c) - p).norm();
      if (d < best || (d == best && (c.y < best_cell.y || (c.y == best_cell.y && c.x < best_cell.x)))) {
        best = d;
        best_cell = c;
      }
    }
  if (best <= max_dist) return {true, best_cell};
  return {false, {}};
}

// ---------------------------------------------------------------------------
// World file: "DTGW" | u32 version | f64 resolution | u32 width | u32 height |
// row-major bit-packed traversable mask. Clearance is recomputed on load.
// ---------------------------------------------------------------------------

namespace {
constexpr char kWorldMagic[4] = {'D', 'T', 'G', 'W'};
constexpr uint32_t kWorldVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) fail("corrupt-file", "truncated read");
  return v;
}
}  // namespace

void GridWorld::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail("io", "cannot open for write: " + path);
  os.write(kWorldMagic, 4);
  write_pod(os, kWorldVersion);
  write_pod(os, resolution_);
  write_pod(os, static_cast<uint32_t>(width_));
  write_pod(os, static_cast<uint32_t>(height_));
  std::vector<uint8_t> packed((traversable_.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < traversable_.size(); ++i)
    if (traversable_[i]) packed[i / 8] |= static_cast<uint8_t>(1u << (i % 8));
  os.write(reinterpret_cast<const char*>(packed.data()),
           static_cast<std::streamsize>(packed.size()));
  if (!os) fail("io", "write failed: " + path);
}

GridWorld GridWorld::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail("io", "cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kWorldMagic, 4) != 0)
    fail("bad-magic", "not a world file: " + path);
  uint32_t version = read_pod<uint32_t>(is);
  if (version != kWorldVersion)
    fail("version-mismatch", "world file version " + std::to_string(version));
  double resolution = read_pod<double>(is);
  uint32_t w = read_pod<uint32_t>(is);
  uint32_t h = read_pod<uint32_t>(is);
  std::size_t cells = static_cast<std::size_t>(w) * h;
  std::vector<uint8_t> packed((cells + 7) / 8);
  is.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
  if (!is) fail("corrupt-file", "truncated traversable mask: " + path);
  std::vector<uint8_t> traversable(cells);
  for (std::size_t i = 0; i < cells; ++i)
    traversable[i] = (packed[i / 8] >> (i % 8)) & 1u;
  return GridWorld(resolution, static_cast<int>(w), static_cast<int>(h),
                   std::move(traversable));
}

}  // namespace dtg
