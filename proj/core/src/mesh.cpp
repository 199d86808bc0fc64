#include "mlqd/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace mlqd::mesh {

MaterialGrid::MaterialGrid(double lx, double ly, std::size_t nx, std::size_t ny)
    : lx_(lx), ly_(ly), nx_(nx), ny_(ny) {
  if (nx == 0 || ny == 0) throw std::invalid_argument("material grid needs nx, ny >= 1");
  if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("material grid extents must be positive");
  boundary_of_face_.assign(num_faces(), -1);
  boundary_faces_.reserve(num_boundary_faces());
  for (std::size_t iy = 0; iy < ny_; ++iy) boundary_faces_.push_back(x_face(0, iy));
  for (std::size_t iy = 0; iy < ny_; ++iy) boundary_faces_.push_back(x_face(nx_, iy));
  for (std::size_t ix = 0; ix < nx_; ++ix) boundary_faces_.push_back(y_face(ix, 0));
  for (std::size_t ix = 0; ix < nx_; ++ix) boundary_faces_.push_back(y_face(ix, ny_));
  for (std::size_t b = 0; b < boundary_faces_.size(); ++b) {
    boundary_of_face_[boundary_faces_[b]] = static_cast<std::ptrdiff_t>(b);
  }
  face_cells_.resize(num_faces());
  for (std::size_t f = 0; f < num_faces(); ++f) {
    const auto [a, b] = face_coords(f);
    std::ptrdiff_t lo = -1;
    std::ptrdiff_t hi = -1;
    if (is_x_face(f)) {
      // a = line index ix in [0, nx], b = row iy
      if (a > 0) lo = static_cast<std::ptrdiff_t>(cell(a - 1, b));
      if (a < nx_) hi = static_cast<std::ptrdiff_t>(cell(a, b));
    } else {
      // a = column ix, b = line index iy in [0, ny]
      if (b > 0) lo = static_cast<std::ptrdiff_t>(cell(a, b - 1));
      if (b < ny_) hi = static_cast<std::ptrdiff_t>(cell(a, b));
    }
    face_cells_[f] = {lo, hi};
  }
}

MaterialGrid MaterialGrid::with_cell_width(double lx, double ly, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("h_mat must be positive");
  auto count = [h](double extent, const char* name) {
    const double n = extent / h;
    const double rounded = std::round(n);
    if (rounded < 1.0 || std::abs(n - rounded) > 1e-9 * std::max(1.0, n)) {
      throw std::invalid_argument(std::string("h_mat must divide ") + name);
    }
    return static_cast<std::size_t>(rounded);
  };
  return MaterialGrid(lx, ly, count(lx, "Lx"), count(ly, "Ly"));
}

std::pair<std::size_t, std::size_t> MaterialGrid::face_coords(std::size_t f) const {
  if (is_x_face(f)) return {f % (nx_ + 1), f / (nx_ + 1)};
  const std::size_t k = f - num_x_faces();
  return {k % nx_, k / nx_};
}

Side MaterialGrid::boundary_side(std::size_t b) const {
  if (b < ny_) return Side::left;
  if (b < 2 * ny_) return Side::right;
  if (b < 2 * ny_ + nx_) return Side::bottom;
  return Side::top;
}

std::size_t MaterialGrid::side_face(Side side, std::size_t k) const {
  switch (side) {
    case Side::left: return x_face(0, k);
    case Side::right: return x_face(nx_, k);
    case Side::bottom: return y_face(k, 0);
    case Side::top: return y_face(k, ny_);
  }
  return 0;
}

namespace {

struct Strip {
  double offset;
  double width;
};

// Split a strip into 2^n equal children so that none is wider than h_max.
void split_strip(double lo, double width, double h_max, std::vector<Strip>& out) {
  std::size_t pieces = 1;
  double w = width;
  while (w > h_max * (1.0 + 1e-12)) {
    w *= 0.5;
    pieces *= 2;
  }
  for (std::size_t k = 0; k < pieces; ++k) {
    out.push_back({lo + (static_cast<double>(k) + 0.5) * w, w});
  }
}

}  // namespace

DirectionalGrid trace_direction(const MaterialGrid& grid, double ux, double uy, double h_moc) {
  if (!(h_moc > 0.0)) throw std::invalid_argument("h_moc must be positive");
  const double norm = std::hypot(ux, uy);
  if (!(norm > 0.0)) throw std::invalid_argument("trace_direction: zero in-plane direction");
  ux /= norm;
  uy /= norm;
  if (std::abs(ux) <= 1e-12 || std::abs(uy) <= 1e-12) {
    throw std::invalid_argument("trace_direction: degenerate (axis-aligned) direction");
  }

  DirectionalGrid out;
  out.ux = ux;
  out.uy = uy;

  const std::size_t nx = grid.nx();
  const std::size_t ny = grid.ny();
  const double dx = grid.dx();
  const double dy = grid.dy();
  // Normal to the ray direction; projections onto it label rays.
  const double px = -uy;
  const double py = ux;

  std::vector<double> proj;
  proj.reserve((nx + 1) * (ny + 1));
  for (std::size_t j = 0; j <= ny; ++j) {
    for (std::size_t i = 0; i <= nx; ++i) {
      proj.push_back(px * (static_cast<double>(i) * dx) + py * (static_cast<double>(j) * dy));
    }
  }
  std::sort(proj.begin(), proj.end());
  const double merge_tol = 1e-12 * std::min(dx, dy);
  std::vector<double> breaks;
  breaks.reserve(proj.size());
  for (double s : proj) {
    if (breaks.empty() || s - breaks.back() > merge_tol) breaks.push_back(s);
  }

  std::vector<Strip> strips;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    split_strip(breaks[k], breaks[k + 1] - breaks[k], h_moc, strips);
  }

  out.rays.reserve(strips.size());
  std::vector<std::pair<double, std::ptrdiff_t>> crossings;  // (t, +ix+1 for x-lines, -(iy+1) for y-lines)

  for (const Strip& strip : strips) {
    const double x0 = strip.offset * px;
    const double y0 = strip.offset * py;
    // Parametric range inside the box.
    const double tx_a = (0.0 - x0) / ux;
    const double tx_b = (grid.lx() - x0) / ux;
    const double ty_a = (0.0 - y0) / uy;
    const double ty_b = (grid.ly() - y0) / uy;
    const double tx_in = std::min(tx_a, tx_b);
    const double tx_out = std::max(tx_a, tx_b);
    const double ty_in = std::min(ty_a, ty_b);
    const double ty_out = std::max(ty_a, ty_b);
    const double t_in = std::max(tx_in, ty_in);
    const double t_out = std::min(tx_out, ty_out);
    if (!(t_out > t_in)) continue;  // cannot happen for a strip inside the domain projection

    const bool enter_x = tx_in >= ty_in;
    const bool exit_x = tx_out <= ty_out;
    Ray ray;
    ray.offset = strip.offset;
    ray.width = strip.width;
    ray.first_segment = out.segments.size();
    ray.entry_side = enter_x ? (ux > 0.0 ? Side::left : Side::right)
                             : (uy > 0.0 ? Side::bottom : Side::top);

    // Interior grid lines crossed, in order of increasing t.
    crossings.clear();
    for (std::size_t i = 1; i < nx; ++i) {
      const double t = (static_cast<double>(i) * dx - x0) / ux;
      if (t > t_in && t < t_out) crossings.emplace_back(t, static_cast<std::ptrdiff_t>(i) + 1);
    }
    for (std::size_t j = 1; j < ny; ++j) {
      const double t = (static_cast<double>(j) * dy - y0) / uy;
      if (t > t_in && t < t_out) crossings.emplace_back(t, -static_cast<std::ptrdiff_t>(j) - 1);
    }
    std::sort(crossings.begin(), crossings.end());

    double t_prev = t_in;
    std::ptrdiff_t prev_line = 0;
    for (std::size_t c = 0; c <= crossings.size(); ++c) {
      const double t_next = (c < crossings.size()) ? crossings[c].first : t_out;
      const double tm = 0.5 * (t_prev + t_next);
      const double xm = x0 + tm * ux;
      const double ym = y0 + tm * uy;
      const auto ix = static_cast<std::size_t>(
          std::clamp(std::floor(xm / dx), 0.0, static_cast<double>(nx - 1)));
      const auto iy = static_cast<std::size_t>(
          std::clamp(std::floor(ym / dy), 0.0, static_cast<double>(ny - 1)));

      Segment seg;
      seg.cell = static_cast<std::uint32_t>(grid.cell(ix, iy));
      seg.length = t_next - t_prev;
      if (c == 0) {
        switch (ray.entry_side) {
          case Side::left: seg.upwind_face = static_cast<std::uint32_t>(grid.x_face(0, iy)); break;
          case Side::right: seg.upwind_face = static_cast<std::uint32_t>(grid.x_face(nx, iy)); break;
          case Side::bottom: seg.upwind_face = static_cast<std::uint32_t>(grid.y_face(ix, 0)); break;
          case Side::top: seg.upwind_face = static_cast<std::uint32_t>(grid.y_face(ix, ny)); break;
        }
      } else if (prev_line > 0) {
        seg.upwind_face = static_cast<std::uint32_t>(grid.x_face(static_cast<std::size_t>(prev_line - 1), iy));
      } else {
        seg.upwind_face = static_cast<std::uint32_t>(grid.y_face(ix, static_cast<std::size_t>(-prev_line - 1)));
      }
      if (c < crossings.size()) {
        const std::ptrdiff_t line = crossings[c].second;
        seg.downwind_face = line > 0
            ? static_cast<std::uint32_t>(grid.x_face(static_cast<std::size_t>(line - 1), iy))
            : static_cast<std::uint32_t>(grid.y_face(ix, static_cast<std::size_t>(-line - 1)));
        prev_line = line;
      } else if (exit_x) {
        seg.downwind_face = static_cast<std::uint32_t>(grid.x_face(ux > 0.0 ? nx : 0, iy));
      } else {
        seg.downwind_face = static_cast<std::uint32_t>(grid.y_face(ix, uy > 0.0 ? ny : 0));
      }
      if (seg.length > 0.0) out.segments.push_back(seg);
      t_prev = t_next;
    }
    ray.segment_count = out.segments.size() - ray.first_segment;
    if (ray.segment_count > 0) out.rays.push_back(ray);
  }
  return out;
}

CharacteristicGrid::CharacteristicGrid(std::vector<DirectionalGrid> planar,
                                       std::vector<std::size_t> planar_of_direction)
    : planar_(std::move(planar)), planar_of_direction_(std::move(planar_of_direction)) {
  directions_of_.resize(planar_.size());
  for (std::size_t m = 0; m < planar_of_direction_.size(); ++m) {
    directions_of_.at(planar_of_direction_[m]).push_back(m);
  }
}

std::size_t CharacteristicGrid::total_rays() const {
  std::size_t n = 0;
  for (const auto& p : planar_) n += p.rays.size();
  return n;
}

std::size_t CharacteristicGrid::total_segments() const {
  std::size_t n = 0;
  for (const auto& p : planar_) n += p.segments.size();
  return n;
}

CharacteristicGrid build_characteristic_grids(const MaterialGrid& grid,
                                              const quadrature::AngularQuadrature& quad,
                                              double h_moc) {
  std::vector<std::pair<double, double>> keys;
  std::vector<std::size_t> planar_of(quad.size());
  for (std::size_t m = 0; m < quad.size(); ++m) {
    const double s = quad[m].sin_polar();
    const double ux = quad[m].x / s;
    const double uy = quad[m].y / s;
    std::size_t a = 0;
    for (; a < keys.size(); ++a) {
      if (std::abs(keys[a].first - ux) < 1e-13 && std::abs(keys[a].second - uy) < 1e-13) break;
    }
    if (a == keys.size()) keys.emplace_back(ux, uy);
    planar_of[m] = a;
  }
  std::vector<DirectionalGrid> planar(keys.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t a = 0; a < static_cast<std::ptrdiff_t>(keys.size()); ++a) {
    const auto& key = keys[static_cast<std::size_t>(a)];
    planar[static_cast<std::size_t>(a)] = trace_direction(grid, key.first, key.second, h_moc);
  }
  return CharacteristicGrid(std::move(planar), std::move(planar_of));
}

std::vector<double> cell_coverage(const MaterialGrid& grid, const DirectionalGrid& dir) {
  std::vector<double> area(grid.num_cells(), 0.0);
  for (const Ray& ray : dir.rays) {
    for (const Segment& s : dir.segments_of(ray)) area[s.cell] += s.length * ray.width;
  }
  return area;
}

std::vector<double> face_coverage(const MaterialGrid& grid, const DirectionalGrid& dir) {
  std::vector<double> width(grid.num_faces(), 0.0);
  for (const Ray& ray : dir.rays) {
    const auto segs = dir.segments_of(ray);
    for (const Segment& s : segs) width[s.upwind_face] += ray.width;
    width[segs.back().downwind_face] += ray.width;
  }
  return width;
}

std::vector<double> projected_face_lengths(const MaterialGrid& grid, const DirectionalGrid& dir) {
  std::vector<double> out(grid.num_faces());
  for (std::size_t f = 0; f < grid.num_faces(); ++f) {
    out[f] = grid.is_x_face(f) ? grid.dy() * std::abs(dir.ux) : grid.dx() * std::abs(dir.uy);
  }
  return out;
}

void write_mesh_csv(std::ostream& out, const CharacteristicGrid& chars) {
  out << "m,k,s,cell,length,width\n";
  const auto old_precision = out.precision(17);
  for (std::size_t m = 0; m < chars.num_directions(); ++m) {
    const DirectionalGrid& dir = chars.for_direction(m);
    for (std::size_t k = 0; k < dir.rays.size(); ++k) {
      const Ray& ray = dir.rays[k];
      std::size_t s = 0;
      for (const Segment& seg : dir.segments_of(ray)) {
        out << m << ',' << k << ',' << s++ << ',' << seg.cell << ',' << seg.length << ','
            << ray.width << '\n';
      }
    }
  }
  out.precision(old_precision);
}

}  // namespace mlqd::mesh
