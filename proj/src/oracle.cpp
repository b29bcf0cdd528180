#include "dtg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "dtg/error.hpp"

namespace dtg {

namespace {
const double kSqrt2 = std::sqrt(2.0);

struct NodeCost {
  StepCost g;
  int parent = -1;
  bool settled = false;
  bool seen = false;
};

// octile heuristic as a StepCost (admissible and consistent)
StepCost octile(const Cell& a, const Cell& b) {
  int dx = std::abs(a.x - b.x), dy = std::abs(a.y - b.y);
  int d = std::min(dx, dy);
  return {std::max(dx, dy) - d, d};
}

struct QueueEntry {
  double f;
  double g;  // tie-break toward larger g (deeper nodes first)
  int cell;
  bool operator>(const QueueEntry& o) const {
    if (f != o.f) return f > o.f;
    if (g != o.g) return g < o.g;
    return cell > o.cell;
  }
};

constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

}  // namespace

double StepCost::value() const { return straight + diagonal * kSqrt2; }

PathResult shortest_path(const GridWorld& world, const Cell& from, const Cell& to) {
  if (!world.traversable(from) || !world.traversable(to))
    fail("bad-endpoint", "endpoint not on a traversable cell");

  const int w = world.width(), h = world.height();
  std::vector<NodeCost> nodes(static_cast<std::size_t>(w) * h);
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<QueueEntry>> open;

  auto idx = [&](const Cell& c) { return static_cast<std::size_t>(c.y) * w + c.x; };
  auto cell_at = [&](int i) { return Cell{i % w, i / w}; };

  std::size_t s = idx(from);
  nodes[s].g = {};
  nodes[s].seen = true;
  open.push({octile(from, to).value(), 0.0, static_cast<int>(s)});

  while (!open.empty()) {
    QueueEntry top = open.top();
    open.pop();
    Cell c = cell_at(top.cell);
    NodeCost& nc = nodes[top.cell];
    if (nc.settled) continue;
    if (nc.g.value() + octile(c, to).value() != top.f) continue;  // stale entry
    nc.settled = true;
    if (c == to) break;
    for (int k = 0; k < 8; ++k) {
      Cell n{c.x + kDx[k], c.y + kDy[k]};
      if (!world.traversable(n)) continue;
      StepCost ng = nc.g;
      (k < 4 ? ng.straight : ng.diagonal) += 1;
      std::size_t ni = idx(n);
      if (!nodes[ni].seen || ng.value() < nodes[ni].g.value()) {
        nodes[ni].seen = true;
        nodes[ni].g = ng;
        nodes[ni].parent = top.cell;
        open.push({ng.value() + octile(n, to).value(), ng.value(), static_cast<int>(ni)});
      }
    }
  }

  std::size_t t = idx(to);
  if (!nodes[t].settled && !(from == to))
    fail("unreachable", "no path between endpoints");

  PathResult res;
  res.cost = nodes[t].g;
  res.length_m = res.cost.meters(world.resolution());
  for (int i = static_cast<int>(t); i >= 0; i = nodes[i].parent) {
    res.cells.push_back(cell_at(i));
    if (nodes[i].parent < 0) break;
  }
  std::reverse(res.cells.begin(), res.cells.end());
  return res;
}

std::vector<double> distance_field(const GridWorld& world, const Cell& source) {
  if (!world.traversable(source)) fail("bad-endpoint", "source not traversable");
  const int w = world.width(), h = world.height();
  std::vector<StepCost> g(static_cast<std::size_t>(w) * h);
  std::vector<uint8_t> seen(g.size(), 0), settled(g.size(), 0);
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<QueueEntry>> open;

  std::size_t s = static_cast<std::size_t>(source.y) * w + source.x;
  seen[s] = 1;
  open.push({0.0, 0.0, static_cast<int>(s)});
  while (!open.empty()) {
    QueueEntry top = open.top();
    open.pop();
    if (settled[top.cell]) continue;
    if (g[top.cell].value() != top.f) continue;
    settled[top.cell] = 1;
    Cell c{top.cell % w, top.cell / w};
    for (int k = 0; k < 8; ++k) {
      Cell n{c.x + kDx[k], c.y + kDy[k]};
      if (!world.traversable(n)) continue;
      StepCost ng = g[top.cell];
      (k < 4 ? ng.straight : ng.diagonal) += 1;
      std::size_t ni = static_cast<std::size_t>(n.y) * w + n.x;
      if (!seen[ni] || ng.value() < g[ni].value()) {
        seen[ni] = 1;
        g[ni] = ng;
        open.push({ng.value(), ng.value(), static_cast<int>(ni)});
      }
    }
  }

  std::vector<double> out(g.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < g.size(); ++i)
    if (settled[i]) out[i] = g[i].meters(world.resolution());
  return out;
}

namespace {
Cell snap_endpoint(const GridWorld& world, const Vec2& p, const char* what) {
  auto [ok, cell] = world.nearest_traversable(p, 1.0);
  if (!ok) fail("bad-endpoint", std::string(what) + " has no traversable cell within 1 m");
  return cell;
}
}  // namespace

double travel_distance(const GridWorld& world, const Vec2& point, const Vec2& goal) {
  Cell a = snap_endpoint(world, point, "point");
  Cell b = snap_endpoint(world, goal, "goal");
  return shortest_path(world, a, b).length_m;
}

Trajectory ground_truth_trajectory(const GridWorld& world, const Pose& start,
                                   const Vec2& goal, int waypoint_count,
                                   double truncate_len) {
  Cell from = snap_endpoint(world, start.position(), "start");
  Cell to = snap_endpoint(world, goal, "goal");
  PathResult path = shortest_path(world, from, to);

  // polyline of cell centers in the robot frame of `start`
  std::vector<Vec2> poly(path.cells.size());
  for (std::size_t i = 0; i < path.cells.size(); ++i)
    poly[i] = start.to_frame(world.center_of(path.cells[i]));

  std::vector<double> cum(poly.size(), 0.0);
  for (std::size_t i = 1; i < poly.size(); ++i)
    cum[i] = cum[i - 1] + (poly[i] - poly[i - 1]).norm();
  double total = cum.back();

  double len = std::min(total, truncate_len);
  double spacing = len / waypoint_count;
  if (spacing <= world.resolution() * 0.5)
    fail("path-too-short", "A* path shorter than one waypoint spacing");

  // sample at arc lengths m * spacing, m = 1..M
  std::vector<Vec2> waypoints(waypoint_count);
  std::size_t seg = 0;
  for (int m = 1; m <= waypoint_count; ++m) {
    double target = m * spacing;
    while (seg + 1 < cum.size() && cum[seg + 1] < target) ++seg;
    if (seg + 1 >= cum.size()) {
      waypoints[m - 1] = poly.back();
      continue;
    }
    double seg_len = cum[seg + 1] - cum[seg];
    double f = seg_len > 0.0 ? (target - cum[seg]) / seg_len : 0.0;
    waypoints[m - 1] = poly[seg] + (poly[seg + 1] - poly[seg]) * f;
  }
  return Trajectory::from_waypoints(waypoints);
}

}  // namespace dtg
