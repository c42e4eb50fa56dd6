#pragma once

#include <string>

#include "panonav/world.hpp"

namespace panonav {

// Online occupancy/exploration map. Cells never transition obstacle -> free.
struct OccupancyMap {
  Grid<uint8_t> obstacle;
  Grid<uint8_t> explored;
  Grid<int> visit_count;
  double cell_size_m = 0.10;

  OccupancyMap() = default;
  OccupancyMap(int cells_x, int cells_y, double cell_size)
      : obstacle(cells_x, cells_y, 0),
        explored(cells_x, cells_y, 0),
        visit_count(cells_x, cells_y, 0),
        cell_size_m(cell_size) {}

  Cell cell_at(double x, double y) const {
    return {static_cast<int>(std::floor(x / cell_size_m)),
            static_cast<int>(std::floor(y / cell_size_m))};
  }
};

// Policy-facing stack: obstacle, explored, current-location disk (radius one
// cell), past locations (visit_count clipped to {0,1}).
struct ChannelMap {
  Grid<double> obstacle;
  Grid<double> explored;
  Grid<double> current_location;
  Grid<double> past_locations;
};

// Marks cells along each ray explored/free up to the hit, the hit cell
// obstacle, and increments visit_count at the agent cell.
void integrate_scan(OccupancyMap& map, const Pose& pose, const Panorama& pano,
                    const PanoramaConfig& cfg = {});

double explored_area(const OccupancyMap& map);  // square meters

ChannelMap assemble_channels(const OccupancyMap& map, const Pose& pose);

// Explored, free, and connected to the agent cell through explored free cells.
bool is_known_reachable(const OccupancyMap& map, Cell cell, Cell agent_cell);

// One P2 ASCII PGM per plane (values 0/255; visit_count clipped).
void save_map_pgm(const OccupancyMap& map, const std::string& path_prefix);
void save_plane_pgm(const Grid<double>& plane, const std::string& path);

}  // namespace panonav
