#pragma once

// Material grid (uniform, orthogonal, cell-centred unknowns with x- and
// y-faces) and the characteristic grid of long rays traced over it.

#include "mlqd/quadrature.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace mlqd::mesh {

enum class Side : std::uint8_t { left = 0, right = 1, bottom = 2, top = 3 };

inline constexpr std::size_t kNumSides = 4;

/// Uniform nx-by-ny grid over [0, Lx] x [0, Ly].
///
/// Cell ids run x-fastest. Face ids put all x-faces (normal along x,
/// (nx+1)*ny of them) first, then y-faces (nx*(ny+1)). Boundary faces get a
/// second dense index: left, right, bottom, top, each ordered along the side.
class MaterialGrid {
 public:
  MaterialGrid(double lx, double ly, std::size_t nx, std::size_t ny);

  /// Square cells of width h; h must divide both extents.
  static MaterialGrid with_cell_width(double lx, double ly, double h);

  double lx() const { return lx_; }
  double ly() const { return ly_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double dx() const { return lx_ / static_cast<double>(nx_); }
  double dy() const { return ly_ / static_cast<double>(ny_); }
  double cell_area() const { return dx() * dy(); }

  std::size_t num_cells() const { return nx_ * ny_; }
  std::size_t cell(std::size_t ix, std::size_t iy) const { return iy * nx_ + ix; }
  std::size_t cell_ix(std::size_t c) const { return c % nx_; }
  std::size_t cell_iy(std::size_t c) const { return c / nx_; }

  std::size_t num_x_faces() const { return (nx_ + 1) * ny_; }
  std::size_t num_y_faces() const { return nx_ * (ny_ + 1); }
  std::size_t num_faces() const { return num_x_faces() + num_y_faces(); }
  /// x-face on the vertical line x = ix*dx, row iy.
  std::size_t x_face(std::size_t ix, std::size_t iy) const { return iy * (nx_ + 1) + ix; }
  /// y-face on the horizontal line y = iy*dy, column ix.
  std::size_t y_face(std::size_t ix, std::size_t iy) const {
    return num_x_faces() + iy * nx_ + ix;
  }
  bool is_x_face(std::size_t f) const { return f < num_x_faces(); }
  /// (line index, position along the line) of a face.
  std::pair<std::size_t, std::size_t> face_coords(std::size_t f) const;
  double face_length(std::size_t f) const { return is_x_face(f) ? dy() : dx(); }

  /// Cells on the low and high side of a face; -1 where the face is on the boundary.
  std::pair<std::ptrdiff_t, std::ptrdiff_t> face_cells(std::size_t f) const { return face_cells_[f]; }

  std::size_t num_boundary_faces() const { return 2 * (nx_ + ny_); }
  /// Dense boundary index, or -1 for interior faces.
  std::ptrdiff_t boundary_index(std::size_t f) const { return boundary_of_face_[f]; }
  std::size_t boundary_face(std::size_t b) const { return boundary_faces_[b]; }
  Side boundary_side(std::size_t b) const;
  /// +1 when the outward normal points along +x/+y, -1 otherwise.
  static double outward_sign(Side side) {
    return (side == Side::right || side == Side::top) ? 1.0 : -1.0;
  }
  /// Boundary face on `side` at position `k` along that side.
  std::size_t side_face(Side side, std::size_t k) const;

 private:
  double lx_;
  double ly_;
  std::size_t nx_;
  std::size_t ny_;
  std::vector<std::size_t> boundary_faces_;
  std::vector<std::ptrdiff_t> boundary_of_face_;
  std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> face_cells_;
};

/// Portion of a ray inside one material cell.
struct Segment {
  std::uint32_t cell = 0;
  std::uint32_t upwind_face = 0;
  std::uint32_t downwind_face = 0;
  double length = 0.0;  ///< in-plane length, cm
};

struct Ray {
  double offset = 0.0;  ///< signed distance of the centre line from the origin, along the in-plane normal
  double width = 0.0;
  std::size_t first_segment = 0;
  std::size_t segment_count = 0;
  Side entry_side = Side::left;
};

/// All rays for one in-plane direction. Every quadrature direction with the
/// same in-plane projection shares one of these.
struct DirectionalGrid {
  double ux = 0.0;  ///< normalized in-plane direction
  double uy = 0.0;
  std::vector<Ray> rays;
  std::vector<Segment> segments;

  std::span<const Segment> segments_of(const Ray& ray) const {
    return {segments.data() + ray.first_segment, ray.segment_count};
  }
};

/// Trace rays for in-plane direction (ux, uy) (normalized internally):
/// strips between sorted vertex projections, halved until no wider than
/// h_moc, then cut at every cell-boundary crossing.
DirectionalGrid trace_direction(const MaterialGrid& grid, double ux, double uy, double h_moc);

class CharacteristicGrid {
 public:
  CharacteristicGrid(std::vector<DirectionalGrid> planar, std::vector<std::size_t> planar_of_direction);

  std::size_t num_planar() const { return planar_.size(); }
  const DirectionalGrid& planar(std::size_t a) const { return planar_[a]; }
  const DirectionalGrid& for_direction(std::size_t m) const { return planar_[planar_of_direction_[m]]; }
  std::size_t planar_index(std::size_t m) const { return planar_of_direction_[m]; }
  std::size_t num_directions() const { return planar_of_direction_.size(); }
  /// Directions sharing planar grid a, in quadrature order.
  const std::vector<std::size_t>& directions_of(std::size_t a) const { return directions_of_[a]; }

  std::size_t total_rays() const;
  std::size_t total_segments() const;

 private:
  std::vector<DirectionalGrid> planar_;
  std::vector<std::size_t> planar_of_direction_;
  std::vector<std::vector<std::size_t>> directions_of_;
};

CharacteristicGrid build_characteristic_grids(const MaterialGrid& grid,
                                              const quadrature::AngularQuadrature& quad,
                                              double h_moc);

/// Sum of segment area (length * width) per cell.
std::vector<double> cell_coverage(const MaterialGrid& grid, const DirectionalGrid& dir);

/// Sum of crossing ray widths per face.
std::vector<double> face_coverage(const MaterialGrid& grid, const DirectionalGrid& dir);

/// L_f * |u . n_f| for every face: the exact value face_coverage must reach.
std::vector<double> projected_face_lengths(const MaterialGrid& grid, const DirectionalGrid& dir);

/// CSV rows "m,k,s,cell,length,width" for every direction.
void write_mesh_csv(std::ostream& out, const CharacteristicGrid& chars);

}  // namespace mlqd::mesh
