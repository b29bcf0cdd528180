#include "dtg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "dtg/error.hpp"
#include "dtg/oracle.hpp"

namespace dtg {

bool binary_traversability(const GridWorld& world, const std::vector<Vec2>& waypoints) {
  for (const Vec2& w : waypoints)
    if (!world.traversable_at(w)) return false;
  return true;
}

double point_clearance(const GridWorld& world, const Vec2& p, double clip) {
  Cell c0 = world.cell_of(p);
  if (!world.in_bounds(c0)) return 0.0;
  int r_cells = static_cast<int>(std::ceil(clip / world.resolution())) + 1;
  double best_sq = clip * clip;
  bool found = false;
  for (int dy = -r_cells; dy <= r_cells; ++dy)
    for (int dx = -r_cells; dx <= r_cells; ++dx) {
      Cell c{c0.x + dx, c0.y + dy};
      if (!world.in_bounds(c) || world.traversable(c)) continue;
      Vec2 d = world.center_of(c) - p;
      double sq = d.x * d.x + d.y * d.y;
      if (sq < best_sq) {
        best_sq = sq;
        found = true;
      }
    }
  return found ? std::sqrt(best_sq) : clip;
}

double clearance_traversability(const GridWorld& world, const std::vector<Vec2>& waypoints,
                                double robot_radius) {
  if (waypoints.empty()) fail("bad-input", "no waypoints");
  double s = 0.0;
  for (const Vec2& w : waypoints) s += point_clearance(world, w, robot_radius);
  return s / (waypoints.size() * robot_radius);
}

DistanceRatioResult distance_ratio(const GridWorld& world, const Trajectory& trajectory,
                                   const Pose& start, const Vec2& goal) {
  DistanceRatioResult r;
  r.traj_len = trajectory.arc_length();
  if (r.traj_len <= 0.0) fail("bad-input", "trajectory has zero length");

  std::vector<Vec2> wps = trajectory.waypoints();
  Vec2 last_world = start.to_world(wps.back());

  r.h_c = travel_distance(world, start.position(), goal);
  try {
    r.h_t = travel_distance(world, last_world, goal);
  } catch (const Error&) {
    r.excluded = true;
    return r;
  }

  double raw = (r.h_c - r.h_t + r.traj_len) / (2.0 * r.traj_len);
  r.clamped = raw < 0.0 || raw > 1.0;
  r.signed_ratio = std::clamp(raw, 0.0, 1.0);
  r.literal = 1.0 - std::abs(r.h_t - r.h_c) / (2.0 * r.traj_len);
  return r;
}

namespace {
MetricStats compute_stats(const std::vector<double>& xs) {
  MetricStats s;
  s.count = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / xs.size();
  if (xs.size() > 1) {
    double acc = 0.0;
    for (double x : xs) acc += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(acc / (xs.size() - 1));
  }
  return s;
}
}  // namespace

Summary aggregate(const std::vector<EvalRecord>& records) {
  if (records.empty()) fail("bad-input", "no records to aggregate");
  Summary out;
  out.total = static_cast<int>(records.size());
  std::vector<double> bin, clr, rs, rl, it;
  for (const EvalRecord& r : records) {
    bin.push_back(r.binary_traversable ? 1.0 : 0.0);
    clr.push_back(r.clearance_score);
    it.push_back(r.inference_time_s);
    if (r.excluded) {
      ++out.excluded_count;
    } else {
      rs.push_back(r.distance_ratio_signed);
      rl.push_back(r.distance_ratio_literal);
    }
  }
  out.binary = compute_stats(bin);
  out.clearance = compute_stats(clr);
  out.ratio_signed = compute_stats(rs);
  out.ratio_literal = compute_stats(rl);
  out.inference_time = compute_stats(it);
  return out;
}

void write_eval_csv(const std::string& path, const std::vector<EvalRecord>& records) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) fail("io", "cannot open for write: " + path);
  os << "scenario_id,binary_traversable,clearance_score,distance_ratio_signed,"
        "distance_ratio_literal,inference_time_s,excluded\n";
  for (const EvalRecord& r : records) {
    char line[256];
    std::snprintf(line, sizeof(line), "%d,%d,%.9g,%.9g,%.9g,%.9g,%d\n", r.scenario_id,
                  r.binary_traversable ? 1 : 0, r.clearance_score, r.distance_ratio_signed,
                  r.distance_ratio_literal, r.inference_time_s, r.excluded ? 1 : 0);
    os << line;
  }
}

std::vector<EvalRecord> read_eval_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail("io", "cannot open: " + path);
  std::string line;
  if (!std::getline(is, line)) fail("corrupt-file", "empty csv: " + path);
  std::vector<EvalRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    EvalRecord r;
    int bin = 0, exc = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf,%lf,%d", &r.scenario_id, &bin,
                    &r.clearance_score, &r.distance_ratio_signed, &r.distance_ratio_literal,
                    &r.inference_time_s, &exc) != 7)
      fail("corrupt-file", "bad csv row: " + line);
    r.binary_traversable = bin != 0;
    r.excluded = exc != 0;
    out.push_back(r);
  }
  return out;
}

void print_summary_table(std::ostream& os, const std::vector<std::string>& names,
                         const std::vector<Summary>& summaries) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-24s %14s %16s %14s %14s %10s\n", "Evaluation",
                "DistRatio (%)", "DistRatioLit (%)", "Traversab (%)", "Clearance (%)",
                "Excluded");
  os << buf;
  os << std::string(96, '-') << "\n";
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const Summary& s = summaries[i];
    std::snprintf(buf, sizeof(buf), "%-24s %14.2f %16.2f %14.2f %14.2f %7d/%d\n",
                  names[i].c_str(), 100.0 * s.ratio_signed.mean,
                  100.0 * s.ratio_literal.mean, 100.0 * s.binary.mean,
                  100.0 * s.clearance.mean, s.excluded_count, s.total);
    os << buf;
  }
}

}  // namespace dtg
