#include "cfmimo/geometry.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace cfmimo {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// Axial hex-lattice coordinates; position = isd * (q + r/2, r*sqrt(3)/2).
struct HexCoord {
  int q = 0;
  int r = 0;
};

Vec2 hex_to_xy(const HexCoord& c, double isd) {
  return {isd * (c.q + 0.5 * c.r), isd * (std::sqrt(3.0) / 2.0) * c.r};
}

// Squared lattice distance (in units of isd^2) is the integer q^2 + qr + r^2.
long long lattice_dist2(int q, int r) {
  long long lq = q, lr = r;
  return lq * lq + lq * lr + lr * lr;
}

double angle_in_2pi(double y, double x) {
  double a = std::atan2(y, x);
  if (a < 0.0) a += kTwoPi;
  return a;
}

// Area-uniform radius in [r_min, r_max].
double annulus_radius(double r_min, double r_max, Rng& rng) {
  double u = rng.uniform();
  return std::sqrt(r_min * r_min + u * (r_max * r_max - r_min * r_min));
}

}  // namespace

bool NetworkLayout::is_evaluation_cell(int cell) const {
  return std::find(evaluation_cell_ids.begin(), evaluation_cell_ids.end(),
                   cell) != evaluation_cell_ids.end();
}

NetworkLayout build_hex_layout(double isd, int n_center_cells,
                               int n_ring_cells) {
  if (isd <= 0.0) throw std::invalid_argument("build_hex_layout: isd must be > 0");
  if (n_center_cells < 1)
    throw std::invalid_argument("build_hex_layout: need at least one center cell");
  if (n_ring_cells < 0)
    throw std::invalid_argument("build_hex_layout: negative ring cell count");

  const int total = n_center_cells + n_ring_cells;

  // Candidate lattice patch, comfortably larger than the requested layout.
  int radius = 2;
  while ((3 * radius * (radius + 1) + 1) < 4 * total) ++radius;
  std::vector<HexCoord> patch;
  for (int q = -radius; q <= radius; ++q)
    for (int r = -radius; r <= radius; ++r)
      if (std::abs(q + r) <= radius) patch.push_back({q, r});

  // Center cells: closest to the origin, ties by azimuth then lattice coords.
  std::sort(patch.begin(), patch.end(), [&](const HexCoord& a, const HexCoord& b) {
    auto ka = lattice_dist2(a.q, a.r);
    auto kb = lattice_dist2(b.q, b.r);
    if (ka != kb) return ka < kb;
    Vec2 pa = hex_to_xy(a, 1.0), pb = hex_to_xy(b, 1.0);
    double aa = angle_in_2pi(pa.y, pa.x), ab = angle_in_2pi(pb.y, pb.x);
    if (aa != ab) return aa < ab;
    return std::tie(a.q, a.r) < std::tie(b.q, b.r);
  });

  std::vector<HexCoord> sites(patch.begin(), patch.begin() + n_center_cells);

  if (n_ring_cells > 0) {
    // Ring cells: nearest remaining lattice points to the center-cluster
    // centroid. Distances are compared exactly via the scaled lattice metric
    // (n*q - sum_q, n*r - sum_r).
    long long sum_q = 0, sum_r = 0;
    for (const auto& s : sites) {
      sum_q += s.q;
      sum_r += s.r;
    }
    const long long n = n_center_cells;
    Vec2 centroid{0.0, 0.0};
    for (const auto& s : sites) {
      Vec2 p = hex_to_xy(s, 1.0);
      centroid.x += p.x / n;
      centroid.y += p.y / n;
    }
    std::vector<HexCoord> rest(patch.begin() + n_center_cells, patch.end());
    std::sort(rest.begin(), rest.end(), [&](const HexCoord& a, const HexCoord& b) {
      auto key = [&](const HexCoord& c) {
        long long dq = n * c.q - sum_q, dr = n * c.r - sum_r;
        return dq * dq + dq * dr + dr * dr;
      };
      auto ka = key(a), kb = key(b);
      if (ka != kb) return ka < kb;
      Vec2 pa = hex_to_xy(a, 1.0), pb = hex_to_xy(b, 1.0);
      double aa = angle_in_2pi(pa.y - centroid.y, pa.x - centroid.x);
      double ab = angle_in_2pi(pb.y - centroid.y, pb.x - centroid.x);
      if (aa != ab) return aa < ab;
      return std::tie(a.q, a.r) < std::tie(b.q, b.r);
    });
    sites.insert(sites.end(), rest.begin(), rest.begin() + n_ring_cells);
  }

  NetworkLayout layout;
  layout.isd = isd;
  layout.site_positions.reserve(total);
  for (const auto& s : sites) layout.site_positions.push_back(hex_to_xy(s, isd));

  layout.sector_orientations.reserve(3 * total);
  for (int s = 0; s < total; ++s)
    for (int j = 0; j < 3; ++j)
      layout.sector_orientations.push_back(j * kTwoPi / 3.0);

  layout.evaluation_cell_ids.resize(n_center_cells);
  for (int c = 0; c < n_center_cells; ++c) layout.evaluation_cell_ids[c] = c;
  return layout;
}

NetworkLayout place_aps(NetworkLayout layout, ApMode mode, int per_cell,
                        Rng& rng) {
  if (per_cell < 0)
    throw std::invalid_argument("place_aps: negative per-cell count");
  layout.ap_positions.clear();
  layout.ap_cell.clear();
  layout.ap_positions.reserve(layout.num_sites() * per_cell);
  for (int c = 0; c < layout.num_sites(); ++c) {
    const Vec2& center = layout.site_positions[c];
    if (mode == ApMode::Uniform) {
      for (int i = 0; i < per_cell; ++i) {
        double r = annulus_radius(kUeMinRadiusM, layout.ue_max_radius(), rng);
        double a = rng.uniform(0.0, kTwoPi);
        layout.ap_positions.push_back(
            {center.x + r * std::cos(a), center.y + r * std::sin(a)});
        layout.ap_cell.push_back(c);
      }
    } else {
      // Equally spaced on the cell-edge circle, random per-cell rotation.
      double rot = per_cell > 0 ? rng.uniform(0.0, kTwoPi) : 0.0;
      double radius = layout.ap_circle_radius();
      for (int i = 0; i < per_cell; ++i) {
        double a = rot + kTwoPi * i / per_cell;
        layout.ap_positions.push_back(
            {center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
        layout.ap_cell.push_back(c);
      }
    }
  }
  return layout;
}

NetworkLayout drop_users(NetworkLayout layout, int users_per_sector, Rng& rng) {
  if (users_per_sector < 1)
    throw std::invalid_argument("drop_users: need at least one user per sector");
  layout.ue_positions.clear();
  layout.ue_cell.clear();
  layout.ue_sector.clear();
  const int sectors = layout.num_sectors();
  layout.ue_positions.reserve(sectors * users_per_sector);
  for (int sec = 0; sec < sectors; ++sec) {
    const int site = layout.sector_site(sec);
    const Vec2& center = layout.site_positions[site];
    const double boresight = layout.sector_boresight(sec);
    for (int i = 0; i < users_per_sector; ++i) {
      double r = annulus_radius(kUeMinRadiusM, layout.ue_max_radius(), rng);
      double a = boresight + rng.uniform(-M_PI / 3.0, M_PI / 3.0);
      layout.ue_positions.push_back(
          {center.x + r * std::cos(a), center.y + r * std::sin(a)});
      layout.ue_cell.push_back(site);
      layout.ue_sector.push_back(sec);
    }
  }
  return layout;
}

UserClass classify_user(const Vec2& ue_position, const NetworkLayout& layout) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& site : layout.site_positions)
    best = std::min(best, distance(ue_position, site));
  return best < layout.isd / 3.0 ? UserClass::CellInside : UserClass::CellEdge;
}

void export_layout_csv(const NetworkLayout& layout, std::ostream& out) {
  out.precision(17);
  out << "# isd=" << layout.isd << "\n";
  out << "# heights=" << layout.h_bs << "," << layout.h_ap << ","
      << layout.h_ue << "\n";
  out << "# eval_cells=";
  for (size_t i = 0; i < layout.evaluation_cell_ids.size(); ++i)
    out << (i ? "," : "") << layout.evaluation_cell_ids[i];
  out << "\n";
  out << "entity_type,id,x,y,z,cell_id\n";
  for (int s = 0; s < layout.num_sites(); ++s)
    out << "site," << s << "," << layout.site_positions[s].x << ","
        << layout.site_positions[s].y << "," << layout.h_bs << "," << s << "\n";
  for (int m = 0; m < layout.num_aps(); ++m)
    out << "ap," << m << "," << layout.ap_positions[m].x << ","
        << layout.ap_positions[m].y << "," << layout.h_ap << ","
        << layout.ap_cell[m] << "\n";
  for (int k = 0; k < layout.num_users(); ++k)
    out << "ue," << k << "," << layout.ue_positions[k].x << ","
        << layout.ue_positions[k].y << "," << layout.h_ue << ","
        << layout.ue_cell[k] << "\n";
}

NetworkLayout import_layout_csv(std::istream& in) {
  NetworkLayout layout;
  std::string line;
  bool have_isd = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(2, eq - 2);
      std::string value = line.substr(eq + 1);
      if (key == "isd") {
        layout.isd = std::stod(value);
        have_isd = true;
      } else if (key == "heights") {
        std::istringstream vs(value);
        char comma;
        vs >> layout.h_bs >> comma >> layout.h_ap >> comma >> layout.h_ue;
      } else if (key == "eval_cells") {
        std::istringstream vs(value);
        std::string tok;
        while (std::getline(vs, tok, ','))
          if (!tok.empty()) layout.evaluation_cell_ids.push_back(std::stoi(tok));
      }
      continue;
    }
    if (line.rfind("entity_type", 0) == 0) continue;
    std::istringstream ls(line);
    std::string type, tok;
    std::getline(ls, type, ',');
    std::getline(ls, tok, ',');
    int id = std::stoi(tok);
    std::getline(ls, tok, ',');
    double x = std::stod(tok);
    std::getline(ls, tok, ',');
    double y = std::stod(tok);
    std::getline(ls, tok, ',');  // z (height), already in the header comment
    std::getline(ls, tok, ',');
    int cell = std::stoi(tok);
    if (type == "site") {
      if (static_cast<int>(layout.site_positions.size()) != id)
        throw std::runtime_error("layout import: sites out of order");
      layout.site_positions.push_back({x, y});
    } else if (type == "ap") {
      (void)id;
      layout.ap_positions.push_back({x, y});
      layout.ap_cell.push_back(cell);
    } else if (type == "ue") {
      layout.ue_positions.push_back({x, y});
      layout.ue_cell.push_back(cell);
    } else {
      throw std::runtime_error("layout import: unknown entity type " + type);
    }
  }
  if (!have_isd) throw std::runtime_error("layout import: missing isd header");

  for (int s = 0; s < layout.num_sites(); ++s)
    for (int j = 0; j < 3; ++j)
      layout.sector_orientations.push_back(j * kTwoPi / 3.0);

  // Sector of a user is recovered from its bearing within the cell.
  for (int k = 0; k < layout.num_users(); ++k) {
    const Vec2& c = layout.site_positions[layout.ue_cell[k]];
    double a = angle_in_2pi(layout.ue_positions[k].y - c.y,
                            layout.ue_positions[k].x - c.x);
    int j = static_cast<int>(std::floor((a + M_PI / 3.0) / (kTwoPi / 3.0))) % 3;
    layout.ue_sector.push_back(3 * layout.ue_cell[k] + j);
  }
  return layout;
}

void export_layout_csv_file(const NetworkLayout& layout,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  export_layout_csv(layout, out);
}

NetworkLayout import_layout_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return import_layout_csv(in);
}

}  // namespace cfmimo
