#include "mlqd/transport.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mlqd::transport {

SegmentResult step_segment(double incoming, double tau, double source_ratio) {
  if (!(tau >= 0.0)) throw std::invalid_argument("step_segment: optical thickness must be >= 0");
  return step_segment_unchecked(incoming, tau, source_ratio);
}

BoundaryIntensity BoundaryIntensity::vacuum(std::size_t groups) {
  BoundaryIntensity b;
  for (auto& s : b.side) s.assign(groups, 0.0);
  return b;
}

CellSource make_cell_source(std::size_t cells, std::size_t groups, std::size_t directions,
                            std::span<const double> kappa, std::span<const double> emission,
                            std::span<const double> previous_intensity, double inv_c_dt) {
  const std::size_t cg = cells * groups;
  if (kappa.size() != cg || emission.size() != cg) {
    throw std::invalid_argument("make_cell_source: kappa/emission size mismatch");
  }
  const bool have_prev = !previous_intensity.empty();
  if (have_prev && previous_intensity.size() != directions * cg) {
    throw std::invalid_argument("make_cell_source: previous intensity size mismatch");
  }
  if (!have_prev && inv_c_dt != 0.0) {
    throw std::invalid_argument("make_cell_source: time-dependent source needs previous intensities");
  }
  CellSource src;
  src.cells = cells;
  src.groups = groups;
  src.directions = directions;
  src.total_opacity.resize(cg);
  src.source_ratio.resize(directions * cg);
  for (std::size_t k = 0; k < cg; ++k) src.total_opacity[k] = kappa[k] + inv_c_dt;
  for (std::size_t m = 0; m < directions; ++m) {
    double* out = src.source_ratio.data() + m * cg;
    for (std::size_t k = 0; k < cg; ++k) {
      const double kt = src.total_opacity[k];
      if (kt > 0.0) {
        const double q = kappa[k] * emission[k] + (have_prev ? inv_c_dt * previous_intensity[m * cg + k] : 0.0);
        out[k] = q / kt;
      } else {
        out[k] = 0.0;  // transparent, source-free
      }
    }
  }
  return src;
}

AngularTallies sweep(const mesh::MaterialGrid& grid, const quadrature::AngularQuadrature& quad,
                     const mesh::CharacteristicGrid& chars, const CellSource& source,
                     const BoundaryIntensity& boundary) {
  const std::size_t G = source.groups;
  const std::size_t cells = grid.num_cells();
  const std::size_t faces = grid.num_faces();
  const std::size_t M = quad.size();
  if (source.cells != cells || source.directions != M || chars.num_directions() != M) {
    throw std::invalid_argument("sweep: inconsistent grid/quadrature/source sizes");
  }
  for (const auto& s : boundary.side) {
    if (s.size() != G) throw std::invalid_argument("sweep: missing boundary intensity for some side/group");
  }

  AngularTallies out;
  out.cells = cells;
  out.faces = faces;
  out.groups = G;
  out.directions = M;
  out.cell_intensity.assign(M * cells * G, 0.0);
  out.face_intensity.assign(M * faces * G, 0.0);

  const double inv_area = 1.0 / grid.cell_area();

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ai = 0; ai < static_cast<std::ptrdiff_t>(chars.num_planar()); ++ai) {
    const auto a = static_cast<std::size_t>(ai);
    const mesh::DirectionalGrid& dir = chars.planar(a);
    const std::vector<std::size_t>& dirs = chars.directions_of(a);
    const std::size_t P = dirs.size();
    std::vector<double> inv_sin(P);
    for (std::size_t p = 0; p < P; ++p) inv_sin[p] = 1.0 / quad[dirs[p]].sin_polar();
    std::vector<double> intensity(P * G);

    for (const mesh::Ray& ray : dir.rays) {
      const std::vector<double>& incoming = boundary.on(ray.entry_side);
      for (std::size_t p = 0; p < P; ++p) {
        for (std::size_t g = 0; g < G; ++g) intensity[p * G + g] = incoming[g];
      }
      const double w = ray.width;
      const auto segs = dir.segments_of(ray);
      for (const mesh::Segment& seg : segs) {
        const double* kt = source.total_opacity.data() + seg.cell * G;
        const double wl = w * seg.length;
        for (std::size_t p = 0; p < P; ++p) {
          const std::size_t m = dirs[p];
          const double path = seg.length * inv_sin[p];
          const double* s = source.source_ratio.data() + (m * cells + seg.cell) * G;
          double* face_acc = out.face_intensity.data() + (m * faces + seg.upwind_face) * G;
          double* cell_acc = out.cell_intensity.data() + (m * cells + seg.cell) * G;
          double* cur = intensity.data() + p * G;
          for (std::size_t g = 0; g < G; ++g) {
            face_acc[g] += w * cur[g];
            const SegmentResult r = step_segment_unchecked(cur[g], kt[g] * path, s[g]);
            cell_acc[g] += wl * r.average;
            cur[g] = r.outgoing;
          }
        }
      }
      const std::size_t exit_face = segs.back().downwind_face;
      for (std::size_t p = 0; p < P; ++p) {
        double* face_acc = out.face_intensity.data() + (dirs[p] * faces + exit_face) * G;
        const double* cur = intensity.data() + p * G;
        for (std::size_t g = 0; g < G; ++g) face_acc[g] += w * cur[g];
      }
    }

    const std::vector<double> projected = mesh::projected_face_lengths(grid, dir);
    for (std::size_t m : dirs) {
      double* cell_acc = out.cell_intensity.data() + m * cells * G;
      for (std::size_t k = 0; k < cells * G; ++k) cell_acc[k] *= inv_area;
      double* face_acc = out.face_intensity.data() + m * faces * G;
      for (std::size_t f = 0; f < faces; ++f) {
        const double inv = 1.0 / projected[f];
        for (std::size_t g = 0; g < G; ++g) face_acc[f * G + g] *= inv;
      }
    }
  }
  return out;
}

namespace {

// Second moments over zeroth moment, isotropic when the zeroth moment vanishes.
EddingtonTensor make_tensor(double zeroth, double xx, double yy, double zz, double xy) {
  if (!(zeroth != 0.0)) return EddingtonTensor{};
  const double inv = 1.0 / zeroth;
  return {xx * inv, yy * inv, zz * inv, xy * inv};
}

}  // namespace

std::vector<BoundaryMoments> boundary_partial_moments(const AngularTallies& tallies,
                                                      const mesh::MaterialGrid& grid,
                                                      const quadrature::AngularQuadrature& quad,
                                                      const BoundaryIntensity& boundary, double c) {
  const std::size_t G = tallies.groups;
  const std::size_t nb = grid.num_boundary_faces();
  std::vector<BoundaryMoments> out(nb * G);
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t f = grid.boundary_face(b);
    const mesh::Side side = grid.boundary_side(b);
    const double sign = mesh::MaterialGrid::outward_sign(side);
    const bool x_normal = grid.is_x_face(f);
    const std::vector<double>& incoming = boundary.on(side);
    for (std::size_t m = 0; m < quad.size(); ++m) {
      const auto& d = quad[m];
      const double mu_n = sign * (x_normal ? d.x : d.y);
      for (std::size_t g = 0; g < G; ++g) {
        BoundaryMoments& bm = out[b * G + g];
        const double i_f = tallies.face(m, f, g);
        bm.energy += d.weight * i_f;
        bm.normal_flux += d.weight * mu_n * i_f;
        if (mu_n < 0.0) bm.incoming_flux += d.weight * (-mu_n) * incoming[g];
      }
    }
    for (std::size_t g = 0; g < G; ++g) out[b * G + g].energy /= c;
  }
  return out;
}

MomentTallies compute_moments(const AngularTallies& tallies, const mesh::MaterialGrid& grid,
                              const quadrature::AngularQuadrature& quad,
                              const BoundaryIntensity& boundary, double c) {
  const std::size_t G = tallies.groups;
  const std::size_t cells = tallies.cells;
  const std::size_t faces = tallies.faces;
  MomentTallies out;
  out.cells = cells;
  out.faces = faces;
  out.groups = G;
  out.boundary_faces = grid.num_boundary_faces();

  out.cell_zeroth.assign(cells * G, 0.0);
  out.cell_first_x.assign(cells * G, 0.0);
  out.cell_first_y.assign(cells * G, 0.0);
  out.cell_tensor.resize(cells * G);
  std::vector<double> xx(cells * G, 0.0), yy(cells * G, 0.0), zz(cells * G, 0.0), xy(cells * G, 0.0);
  for (std::size_t m = 0; m < quad.size(); ++m) {
    const auto& d = quad[m];
    const double w = d.weight;
    const double* I = tallies.cell_intensity.data() + m * cells * G;
    for (std::size_t k = 0; k < cells * G; ++k) {
      const double wi = w * I[k];
      out.cell_zeroth[k] += wi;
      out.cell_first_x[k] += wi * d.x;
      out.cell_first_y[k] += wi * d.y;
      xx[k] += wi * d.x * d.x;
      yy[k] += wi * d.y * d.y;
      zz[k] += wi * d.z * d.z;
      xy[k] += wi * d.x * d.y;
    }
  }
  for (std::size_t k = 0; k < cells * G; ++k) {
    out.cell_tensor[k] = make_tensor(out.cell_zeroth[k], xx[k], yy[k], zz[k], xy[k]);
  }

  out.face_zeroth.assign(faces * G, 0.0);
  out.face_tensor.resize(faces * G);
  xx.assign(faces * G, 0.0);
  yy.assign(faces * G, 0.0);
  zz.assign(faces * G, 0.0);
  xy.assign(faces * G, 0.0);
  for (std::size_t m = 0; m < quad.size(); ++m) {
    const auto& d = quad[m];
    const double* I = tallies.face_intensity.data() + m * faces * G;
    for (std::size_t k = 0; k < faces * G; ++k) {
      const double wi = d.weight * I[k];
      out.face_zeroth[k] += wi;
      xx[k] += wi * d.x * d.x;
      yy[k] += wi * d.y * d.y;
      zz[k] += wi * d.z * d.z;
      xy[k] += wi * d.x * d.y;
    }
  }
  for (std::size_t k = 0; k < faces * G; ++k) {
    out.face_tensor[k] = make_tensor(out.face_zeroth[k], xx[k], yy[k], zz[k], xy[k]);
  }

  out.boundary = boundary_partial_moments(tallies, grid, quad, boundary, c);
  out.boundary_factor.resize(out.boundary.size());
  for (std::size_t k = 0; k < out.boundary.size(); ++k) {
    const BoundaryMoments& bm = out.boundary[k];
    out.boundary_factor[k] =
        (bm.energy > 0.0) ? (bm.normal_flux + bm.incoming_flux) / (c * bm.energy) : 0.5;
  }

#ifndef NDEBUG
  check_tensor_properties(out);
#endif
  return out;
}

void check_tensor_properties(const MomentTallies& moments, double tolerance) {
  auto check = [tolerance](const EddingtonTensor& t, const char* where, std::size_t k) {
    const bool ok = std::abs(t.trace() - 1.0) <= tolerance && t.xx >= -tolerance &&
                    t.xx <= 1.0 + tolerance && t.yy >= -tolerance && t.yy <= 1.0 + tolerance &&
                    t.zz >= -tolerance && t.zz <= 1.0 + tolerance &&
                    t.xx * t.yy - t.xy * t.xy >= -tolerance;
    if (!ok) {
      throw std::logic_error(std::string("Eddington tensor property violated at ") + where + " " +
                             std::to_string(k));
    }
  };
  for (std::size_t k = 0; k < moments.cell_tensor.size(); ++k) check(moments.cell_tensor[k], "cell", k);
  for (std::size_t k = 0; k < moments.face_tensor.size(); ++k) check(moments.face_tensor[k], "face", k);
}

}  // namespace mlqd::transport
