#include "panonav/mapping.hpp"

#include <cstdio>
#include <fstream>
#include <vector>

namespace panonav {

namespace {

void mark_explored_free(OccupancyMap& map, Cell c) {
  if (!map.explored.in_bounds(c)) return;
  map.explored.at(c) = 1;
  // obstacle stays sticky: never cleared once set
}

}  // namespace

void integrate_scan(OccupancyMap& map, const Pose& pose, const Panorama& pano,
                    const PanoramaConfig& cfg) {
  const double h = map.cell_size_m;
  const Cell agent = map.cell_at(pose.x, pose.y);
  if (map.visit_count.in_bounds(agent)) {
    map.visit_count.at(agent) += 1;
    mark_explored_free(map, agent);
  }
  const int n = static_cast<int>(pano.ranges.size());
  for (int i = 0; i < n; ++i) {
    const double theta = 2.0 * M_PI * i / n;
    const double r = pano.ranges[i];
    const bool hit = r < cfg.max_range_m - 1e-12;
    // walk the ray in quarter-cell increments up to just short of the hit
    const int steps = static_cast<int>(std::floor(r / (h * 0.25)));
    for (int s = 0; s <= steps; ++s) {
      const double d = s * h * 0.25;
      if (d >= r) break;
      mark_explored_free(map, map.cell_at(pose.x + d * std::cos(theta),
                                          pose.y + d * std::sin(theta)));
    }
    if (hit) {
      // nudge past the boundary so the struck cell itself is indexed
      const double d = r + h * 1e-6;
      const Cell hc = map.cell_at(pose.x + d * std::cos(theta), pose.y + d * std::sin(theta));
      if (map.obstacle.in_bounds(hc)) {
        map.obstacle.at(hc) = 1;
        map.explored.at(hc) = 1;
      }
    }
  }
}

double explored_area(const OccupancyMap& map) {
  int n = 0;
  for (size_t i = 0; i < map.explored.size(); ++i)
    if (map.explored[i]) ++n;
  return n * map.cell_size_m * map.cell_size_m;
}

ChannelMap assemble_channels(const OccupancyMap& map, const Pose& pose) {
  const int W = map.obstacle.width(), H = map.obstacle.height();
  ChannelMap ch{Grid<double>(W, H, 0.0), Grid<double>(W, H, 0.0), Grid<double>(W, H, 0.0),
                Grid<double>(W, H, 0.0)};
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      ch.obstacle.at(x, y) = map.obstacle.at(x, y) ? 1.0 : 0.0;
      ch.explored.at(x, y) = map.explored.at(x, y) ? 1.0 : 0.0;
      ch.past_locations.at(x, y) = map.visit_count.at(x, y) > 0 ? 1.0 : 0.0;
    }
  }
  const Cell a = map.cell_at(pose.x, pose.y);
  const Cell disk[5] = {a, {a.x + 1, a.y}, {a.x - 1, a.y}, {a.x, a.y + 1}, {a.x, a.y - 1}};
  for (Cell c : disk)
    if (ch.current_location.in_bounds(c)) ch.current_location.at(c) = 1.0;
  return ch;
}

bool is_known_reachable(const OccupancyMap& map, Cell cell, Cell agent_cell) {
  if (!map.obstacle.in_bounds(cell) || !map.obstacle.in_bounds(agent_cell)) return false;
  auto traversable = [&](Cell c) { return map.explored.at(c) && !map.obstacle.at(c); };
  if (!traversable(cell) || !traversable(agent_cell)) return false;
  if (cell == agent_cell) return true;
  Grid<uint8_t> seen(map.obstacle.width(), map.obstacle.height(), 0);
  std::vector<Cell> stack{agent_cell};
  seen.at(agent_cell) = 1;
  while (!stack.empty()) {
    Cell c = stack.back();
    stack.pop_back();
    const Cell nbrs[4] = {{c.x + 1, c.y}, {c.x - 1, c.y}, {c.x, c.y + 1}, {c.x, c.y - 1}};
    for (Cell n : nbrs) {
      if (!seen.in_bounds(n) || seen.at(n) || !traversable(n)) continue;
      if (n == cell) return true;
      seen.at(n) = 1;
      stack.push_back(n);
    }
  }
  return false;
}

void save_plane_pgm(const Grid<double>& plane, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "P2\n" << plane.width() << " " << plane.height() << "\n255\n";
  for (int y = 0; y < plane.height(); ++y) {
    for (int x = 0; x < plane.width(); ++x) {
      const int v = std::min(255, std::max(0, static_cast<int>(std::lround(plane.at(x, y) * 255.0))));
      f << v << (x + 1 < plane.width() ? " " : "");
    }
    f << "\n";
  }
}

void save_map_pgm(const OccupancyMap& map, const std::string& path_prefix) {
  ChannelMap ch = assemble_channels(map, Pose{});
  save_plane_pgm(ch.obstacle, path_prefix + "_obstacle.pgm");
  save_plane_pgm(ch.explored, path_prefix + "_explored.pgm");
  save_plane_pgm(ch.past_locations, path_prefix + "_past.pgm");
}

}  // namespace panonav
