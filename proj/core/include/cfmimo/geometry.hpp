// Deterministic network layout: hexagonal three-sector macro sites, cell-free
// access points and user drops.
#pragma once

#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

#include "cfmimo/random.hpp"

namespace cfmimo {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

enum class ApMode { Uniform, CellEdge };
enum class UserClass { CellInside, CellEdge };

// Users and uniformly dropped APs live in an annulus around the cell center;
// cell-edge APs sit on a fixed circle.
inline constexpr double kUeMinRadiusM = 15.0;
inline constexpr double kUeMaxRadiusFrac = 0.97;  // of ISD/2
inline constexpr double kApCircleFrac = 0.8;      // of ISD/2

struct NetworkLayout {
  double isd = 0.0;
  double h_bs = 25.0;
  double h_ap = 10.0;
  double h_ue = 1.5;

  std::vector<Vec2> site_positions;         // one per macro site (cell)
  std::vector<double> sector_orientations;  // boresight azimuth, 3 per site
  std::vector<Vec2> ap_positions;
  std::vector<int> ap_cell;
  std::vector<Vec2> ue_positions;
  std::vector<int> ue_cell;
  std::vector<int> ue_sector;  // global sector index
  std::vector<int> evaluation_cell_ids;

  int num_sites() const { return static_cast<int>(site_positions.size()); }
  int num_sectors() const { return 3 * num_sites(); }
  int num_aps() const { return static_cast<int>(ap_positions.size()); }
  int num_users() const { return static_cast<int>(ue_positions.size()); }

  // Site hosting a sector, and that sector's boresight.
  int sector_site(int sector) const { return sector / 3; }
  const Vec2& sector_position(int sector) const {
    return site_positions[sector / 3];
  }
  double sector_boresight(int sector) const {
    return sector_orientations[sector];
  }

  double ue_max_radius() const { return kUeMaxRadiusFrac * isd / 2.0; }
  double ap_circle_radius() const { return kApCircleFrac * isd / 2.0; }

  bool is_evaluation_cell(int cell) const;
};

// Hex grid of three-sector sites: `n_center_cells` evaluation cells plus a
// guard ring of `n_ring_cells` interferer cells. Site 0 sits at the origin.
NetworkLayout build_hex_layout(double isd, int n_center_cells,
                               int n_ring_cells);

// Drops `per_cell` APs in every cell. Uniform mode draws positions in the
// user annulus; CellEdge mode spaces them equally on the cell-edge circle
// with a random per-cell rotation.
NetworkLayout place_aps(NetworkLayout layout, ApMode mode, int per_cell,
                        Rng& rng);

// Drops `users_per_sector` users per sector, uniformly over the sector wedge
// intersected with the [15 m, 0.97*ISD/2] annulus.
NetworkLayout drop_users(NetworkLayout layout, int users_per_sector, Rng& rng);

// CellInside iff the distance to the closest macro site is strictly below
// ISD/3.
UserClass classify_user(const Vec2& ue_position, const NetworkLayout& layout);

// Plain-text table (entity_type,id,x,y,z,cell_id) for deterministic replay.
void export_layout_csv(const NetworkLayout& layout, std::ostream& out);
NetworkLayout import_layout_csv(std::istream& in);
void export_layout_csv_file(const NetworkLayout& layout,
                            const std::string& path);
NetworkLayout import_layout_csv_file(const std::string& path);

}  // namespace cfmimo
