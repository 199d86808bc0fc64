#include "mlqd/loqd.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mlqd::loqd {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

/// F_f = constant + sum coeff * x[index]. Terms are appended in a fixed,
/// value-independent order so the assembled pattern never changes.
struct LinearForm {
  double constant = 0.0;
  std::array<int, 20> index{};
  std::array<double, 20> coeff{};
  int n = 0;

  void add(int i, double v) {
    index[n] = i;
    coeff[n] = v;
    ++n;
  }
  void scale(double s) {
    constant *= s;
    for (int k = 0; k < n; ++k) coeff[k] *= s;
  }
};

constexpr int kMaxReuseSweeps = 12;
constexpr double kReuseTolerance = 1e-15;
constexpr double kReuseContraction = 0.25;
constexpr double kReuseFloor = 1e-13;

}  // namespace

void LowOrderCoefficients::resize(const mesh::MaterialGrid& grid) {
  const std::size_t n = grid.num_cells();
  const std::size_t f = grid.num_faces();
  const std::size_t b = grid.num_boundary_faces();
  absorption.assign(n, 0.0);
  source.assign(n, 0.0);
  previous_energy.assign(n, 0.0);
  cell_tensor.assign(n, EddingtonTensor{});
  drag.assign(f, 0.0);
  eta.assign(f, 0.0);
  previous_flux.assign(f, 0.0);
  face_tensor.assign(f, EddingtonTensor{});
  boundary_factor.assign(b, 0.0);
  incoming_flux.assign(b, 0.0);
}

struct LowOrderSystem::Impl {
  const mesh::MaterialGrid& grid;
  bool cross;
  std::size_t n_cells;
  std::size_t n_unknowns;
  std::vector<LinearForm> forms;
  std::vector<Eigen::Triplet<double>> triplets;
  SpMat matrix;
  std::vector<int> value_index;  ///< triplet k -> position in matrix.valuePtr()

  struct Factor {
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
    bool ready = false;
    Vec last;  ///< latest solution, the starting iterate on reuse
  };
  std::vector<std::unique_ptr<Factor>> factors;

  Factor& factor(std::size_t slot) {
    if (slot >= factors.size()) factors.resize(slot + 1);
    if (!factors[slot]) factors[slot] = std::make_unique<Factor>();
    return *factors[slot];
  }

  Impl(const mesh::MaterialGrid& g, bool cross_terms)
      : grid(g),
        cross(cross_terms),
        n_cells(g.num_cells()),
        n_unknowns(g.num_cells() + g.num_boundary_faces()),
        forms(g.num_faces()) {}

  int boundary_unknown(std::size_t f) const {
    return static_cast<int>(n_cells + static_cast<std::size_t>(grid.boundary_index(f)));
  }

  // m * xy_h * E_h, E_h the face energy (cell mean or boundary unknown).
  void add_q(LinearForm& form, const LowOrderCoefficients& coef, std::size_t h, double m) const {
    const double v = m * coef.face_tensor[h].xy;
    const auto [lo, hi] = grid.face_cells(h);
    if (lo < 0 || hi < 0) {
      form.add(boundary_unknown(h), v);
    } else {
      form.add(static_cast<int>(lo), 0.5 * v);
      form.add(static_cast<int>(hi), 0.5 * v);
    }
  }

  // Corner value of xy*E at vertex (vx, vy), mean of two faces meeting there.
  // x_line prefers the vertical line through the vertex (used on x-faces).
  void add_corner(LinearForm& form, const LowOrderCoefficients& coef, std::size_t vx,
                  std::size_t vy, bool x_line, double m) const {
    const std::size_t nx = grid.nx();
    const std::size_t ny = grid.ny();
    const bool inner_y = vy > 0 && vy < ny;
    const bool inner_x = vx > 0 && vx < nx;
    std::size_t a;
    std::size_t b;
    if (x_line && inner_y) {
      a = grid.x_face(vx, vy - 1);
      b = grid.x_face(vx, vy);
    } else if (!x_line && inner_x) {
      a = grid.y_face(vx - 1, vy);
      b = grid.y_face(vx, vy);
    } else if (inner_x) {
      a = grid.y_face(vx - 1, vy);
      b = grid.y_face(vx, vy);
    } else if (inner_y) {
      a = grid.x_face(vx, vy - 1);
      b = grid.x_face(vx, vy);
    } else {
      a = grid.x_face(vx, vy == 0 ? 0 : ny - 1);
      b = grid.y_face(vx == 0 ? 0 : nx - 1, vy);
    }
    add_q(form, coef, a, 0.5 * m);
    add_q(form, coef, b, 0.5 * m);
  }

  void build_form(const LowOrderCoefficients& coef, std::size_t f) {
    LinearForm& form = forms[f];
    form = LinearForm{};
    const double c = coef.c;
    const bool xf = grid.is_x_face(f);
    const double h = xf ? grid.dx() : grid.dy();
    const double t = xf ? grid.dy() : grid.dx();
    const auto [fa, fb] = grid.face_coords(f);  // (ix, iy) of the face
    const auto [lo, hi] = grid.face_cells(f);
    auto normal = [xf](const EddingtonTensor& e) { return xf ? e.xx : e.yy; };

    // -c * normal gradient of f_nn E
    if (lo >= 0 && hi >= 0) {
      form.add(static_cast<int>(hi), -c * normal(coef.cell_tensor[hi]) / h);
      form.add(static_cast<int>(lo), c * normal(coef.cell_tensor[lo]) / h);
    } else if (lo < 0) {
      form.add(static_cast<int>(hi), -2.0 * c * normal(coef.cell_tensor[hi]) / h);
      form.add(boundary_unknown(f), 2.0 * c * normal(coef.face_tensor[f]) / h);
    } else {
      form.add(boundary_unknown(f), -2.0 * c * normal(coef.face_tensor[f]) / h);
      form.add(static_cast<int>(lo), 2.0 * c * normal(coef.cell_tensor[lo]) / h);
    }

    // -c * tangential difference of f_xy E between the face's two corners
    if (cross) {
      const double m = c / t;
      if (xf) {
        add_corner(form, coef, fa, fb + 1, true, -m);
        add_corner(form, coef, fa, fb, true, m);
      } else {
        add_corner(form, coef, fa + 1, fb, false, -m);
        add_corner(form, coef, fa, fb, false, m);
      }
    }

    // -eta * E_face
    if (lo >= 0 && hi >= 0) {
      form.add(static_cast<int>(lo), -0.5 * coef.eta[f]);
      form.add(static_cast<int>(hi), -0.5 * coef.eta[f]);
    } else {
      form.add(boundary_unknown(f), -coef.eta[f]);
    }

    const double time = coef.inv_dt / c;
    form.constant = time * coef.previous_flux[f];
    const double denom = time + coef.drag[f];
    if (!(denom > 0.0)) {
      throw std::runtime_error("low-order face " + std::to_string(f) +
                               " has no drag and no time term");
    }
    form.scale(1.0 / denom);
  }

  // The first call records the pattern; later calls accumulate straight into
  // the compressed value array in the same term order.
  void assemble(const LowOrderCoefficients& coef, Vec& rhs) {
    const std::size_t nf = grid.num_faces();
    for (std::size_t f = 0; f < nf; ++f) build_form(coef, f);

    const bool record = value_index.empty();
    triplets.clear();
    double* values = record ? nullptr : matrix.valuePtr();
    if (!record) std::fill(values, values + matrix.nonZeros(), 0.0);
    std::size_t term = 0;
    auto put = [&](int row, int col, double v) {
      if (record) {
        triplets.emplace_back(row, col, v);
      } else if (term < value_index.size()) {
        values[value_index[term]] += v;
      }
      ++term;
    };

    rhs.setZero(static_cast<Eigen::Index>(n_unknowns));
    const double inv_dx = 1.0 / grid.dx();
    const double inv_dy = 1.0 / grid.dy();

    auto add_form = [&](int row, const LinearForm& form, double s) {
      for (int k = 0; k < form.n; ++k) put(row, form.index[k], s * form.coeff[k]);
      rhs[row] -= s * form.constant;
    };

    for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
      for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
        const std::size_t i = grid.cell(ix, iy);
        const int row = static_cast<int>(i);
        put(row, row, coef.inv_dt + coef.absorption[i]);
        rhs[row] += coef.source[i] + coef.inv_dt * coef.previous_energy[i];
        add_form(row, forms[grid.x_face(ix + 1, iy)], inv_dx);
        add_form(row, forms[grid.x_face(ix, iy)], -inv_dx);
        add_form(row, forms[grid.y_face(ix, iy + 1)], inv_dy);
        add_form(row, forms[grid.y_face(ix, iy)], -inv_dy);
      }
    }
    for (std::size_t b = 0; b < grid.num_boundary_faces(); ++b) {
      const std::size_t f = grid.boundary_face(b);
      const int row = static_cast<int>(n_cells + b);
      const double sigma = mesh::MaterialGrid::outward_sign(grid.boundary_side(b));
      add_form(row, forms[f], sigma);
      put(row, row, -coef.c * coef.boundary_factor[b]);
      rhs[row] -= coef.incoming_flux[b];
    }

    if (record) {
      const auto n = static_cast<Eigen::Index>(n_unknowns);
      matrix.resize(n, n);
      matrix.setFromTriplets(triplets.begin(), triplets.end());
      matrix.makeCompressed();
      value_index.resize(triplets.size());
      const int* outer = matrix.outerIndexPtr();
      const int* inner = matrix.innerIndexPtr();
      for (std::size_t k = 0; k < triplets.size(); ++k) {
        const int col = triplets[k].col();
        const int* pos = std::lower_bound(inner + outer[col], inner + outer[col + 1], triplets[k].row());
        value_index[k] = static_cast<int>(pos - inner);
      }
      // refill in recording order so every assembly sums terms identically
      values = matrix.valuePtr();
      std::fill(values, values + matrix.nonZeros(), 0.0);
      for (std::size_t k = 0; k < triplets.size(); ++k) values[value_index[k]] += triplets[k].value();
      triplets.clear();
    } else if (term != value_index.size()) {
      throw std::logic_error("low-order sparsity pattern changed between assemblies");
    }
  }
};

LowOrderSystem::LowOrderSystem(const mesh::MaterialGrid& grid, bool cross_terms)
    : grid_(grid), cross_terms_(cross_terms), impl_(std::make_unique<Impl>(grid_, cross_terms)) {}

LowOrderSystem::~LowOrderSystem() = default;

LowOrderSystem::LowOrderSystem(LowOrderSystem&& other) noexcept
    : grid_(std::move(other.grid_)), cross_terms_(other.cross_terms_) {
  // Impl refers to grid_; rebuild it against the new address.
  impl_ = std::make_unique<Impl>(grid_, cross_terms_);
  other.impl_.reset();
}

LowOrderSystem& LowOrderSystem::operator=(LowOrderSystem&& other) noexcept {
  if (this != &other) {
    grid_ = std::move(other.grid_);
    cross_terms_ = other.cross_terms_;
    impl_ = std::make_unique<Impl>(grid_, cross_terms_);
    other.impl_.reset();
  }
  return *this;
}

void LowOrderSystem::clear_factorizations() {
  for (auto& f : impl_->factors) {
    if (f) f->ready = false;
  }
}

LowOrderSolution LowOrderSystem::solve(const LowOrderCoefficients& coef, std::size_t slot) {
  Impl& s = *impl_;
  Vec rhs;
  s.assemble(coef, rhs);
  Impl::Factor& fac = s.factor(slot);

  // Preconditioned refinement with the stored factorization of an earlier
  // matrix; a slow contraction means the matrix moved too far.
  Vec x;
  bool done = false;
  if (fac.ready) {
    x = fac.last;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kMaxReuseSweeps; ++k) {
      const Vec d = fac.lu.solve(rhs - s.matrix * x);
      x += d;
      double upd = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        upd = std::max(upd, std::abs(d[i]) / std::max(std::abs(x[i]), 1e-300));
      }
      if (upd <= kReuseTolerance) {
        done = true;
        break;
      }
      if (upd > kReuseContraction * prev) {
        done = upd <= kReuseFloor;  // round-off plateau
        break;
      }
      prev = upd;
    }
  }
  if (!done) {
    if (!fac.analyzed) {
      fac.lu.analyzePattern(s.matrix);
      fac.analyzed = true;
    }
    fac.lu.factorize(s.matrix);
    if (fac.lu.info() != Eigen::Success) {
      fac.ready = false;
      throw std::runtime_error("low-order factorization failed: " + fac.lu.lastErrorMessage());
    }
    fac.ready = true;
    x = fac.lu.solve(rhs);
    x += fac.lu.solve(rhs - s.matrix * x);
  }
  fac.last = x;
  const Vec r = rhs - s.matrix * x;

  LowOrderSolution out;
  const double bn = rhs.norm();
  out.relative_residual = bn > 0.0 ? r.norm() / bn : r.norm();
  out.energy.assign(x.data(), x.data() + s.n_cells);
  out.boundary_energy.assign(x.data() + s.n_cells, x.data() + s.n_unknowns);
  out.flux.resize(grid_.num_faces());
  for (std::size_t f = 0; f < grid_.num_faces(); ++f) {
    const LinearForm& form = s.forms[f];
    double v = form.constant;
    for (int k = 0; k < form.n; ++k) v += form.coeff[k] * x[form.index[k]];
    out.flux[f] = v;
  }
  return out;
}

std::vector<double> cell_balance_residual(const mesh::MaterialGrid& grid,
                                          const LowOrderCoefficients& coef,
                                          const LowOrderSolution& sol) {
  std::vector<double> r(grid.num_cells());
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      const std::size_t i = grid.cell(ix, iy);
      const double div = (sol.flux[grid.x_face(ix + 1, iy)] - sol.flux[grid.x_face(ix, iy)]) / grid.dx() +
                         (sol.flux[grid.y_face(ix, iy + 1)] - sol.flux[grid.y_face(ix, iy)]) / grid.dy();
      r[i] = (coef.inv_dt + coef.absorption[i]) * sol.energy[i] + div - coef.source[i] -
             coef.inv_dt * coef.previous_energy[i];
    }
  }
  return r;
}

MultigroupFields MultigroupFields::zeros(const mesh::MaterialGrid& grid, std::size_t groups) {
  MultigroupFields m;
  m.groups = groups;
  m.energy.assign(grid.num_cells() * groups, 0.0);
  m.flux.assign(grid.num_faces() * groups, 0.0);
  m.boundary_energy.assign(grid.num_boundary_faces() * groups, 0.0);
  return m;
}

GroupProperties evaluate_properties(const physics::OpacityModel& opacity,
                                    const physics::FrequencyGrid& groups,
                                    const physics::PhysicalConstants& constants,
                                    std::span<const double> temperature) {
  const std::size_t G = groups.size();
  GroupProperties p;
  p.groups = G;
  p.kappa.resize(temperature.size() * G);
  p.emission.resize(temperature.size() * G);
  for (std::size_t i = 0; i < temperature.size(); ++i) {
    physics::group_opacity_all(opacity, groups, temperature[i], {p.kappa.data() + i * G, G});
    physics::group_emission_all(constants, groups, temperature[i], {p.emission.data() + i * G, G});
  }
  return p;
}

double face_opacity(const mesh::MaterialGrid& grid, std::span<const double> cell_values,
                    std::size_t groups, std::size_t f, std::size_t g) {
  const auto [lo, hi] = grid.face_cells(f);
  if (lo < 0) return cell_values[static_cast<std::size_t>(hi) * groups + g];
  if (hi < 0) return cell_values[static_cast<std::size_t>(lo) * groups + g];
  return 0.5 * (cell_values[static_cast<std::size_t>(lo) * groups + g] +
                cell_values[static_cast<std::size_t>(hi) * groups + g]);
}

MultigroupFields solve_multigroup(LowOrderSystem& system, const transport::MomentTallies& moments,
                                  const GroupProperties& props, const MultigroupFields& previous,
                                  double c, double inv_dt) {
  const mesh::MaterialGrid& grid = system.grid();
  const std::size_t G = props.groups;
  const std::size_t N = grid.num_cells();
  const std::size_t NF = grid.num_faces();
  const std::size_t NB = grid.num_boundary_faces();
  MultigroupFields out = MultigroupFields::zeros(grid, G);

  LowOrderCoefficients coef;
  coef.resize(grid);
  coef.c = c;
  coef.inv_dt = inv_dt;
  for (std::size_t g = 0; g < G; ++g) {
    for (std::size_t i = 0; i < N; ++i) {
      const double k = props.kappa[i * G + g];
      coef.absorption[i] = c * k;
      coef.source[i] = physics::kFourPi * k * props.emission[i * G + g];
      coef.previous_energy[i] = previous.energy[i * G + g];
      coef.cell_tensor[i] = moments.cell_tensor[i * G + g];
    }
    for (std::size_t f = 0; f < NF; ++f) {
      coef.drag[f] = face_opacity(grid, props.kappa, G, f, g);
      coef.previous_flux[f] = previous.flux[f * G + g];
      coef.face_tensor[f] = moments.face_tensor[f * G + g];
    }
    for (std::size_t b = 0; b < NB; ++b) {
      coef.boundary_factor[b] = moments.boundary_factor[b * G + g];
      coef.incoming_flux[b] = moments.boundary[b * G + g].incoming_flux;
    }
    const LowOrderSolution sol = system.solve(coef, g + 1);
    for (std::size_t i = 0; i < N; ++i) out.energy[i * G + g] = sol.energy[i];
    for (std::size_t f = 0; f < NF; ++f) out.flux[f * G + g] = sol.flux[f];
    for (std::size_t b = 0; b < NB; ++b) out.boundary_energy[b * G + g] = sol.boundary_energy[b];
    out.max_relative_residual = std::max(out.max_relative_residual, sol.relative_residual);
  }
  return out;
}

namespace {

EddingtonTensor weighted_tensor(const std::vector<EddingtonTensor>& t, std::size_t base,
                                std::span<const double> w, double wsum) {
  EddingtonTensor out{0.0, 0.0, 0.0, 0.0};
  for (std::size_t g = 0; g < w.size(); ++g) {
    const EddingtonTensor& e = t[base + g];
    out.xx += w[g] * e.xx;
    out.yy += w[g] * e.yy;
    out.zz += w[g] * e.zz;
    out.xy += w[g] * e.xy;
  }
  const double inv = 1.0 / wsum;
  out.xx *= inv;
  out.yy *= inv;
  out.zz *= inv;
  out.xy *= inv;
  return out;
}

double sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

GreyClosures compute_grey_closures(const mesh::MaterialGrid& grid, const MultigroupFields& mg,
                                   const GroupProperties& props,
                                   const transport::MomentTallies& moments) {
  const std::size_t G = props.groups;
  const std::size_t N = grid.num_cells();
  const std::size_t NF = grid.num_faces();
  const std::size_t NB = grid.num_boundary_faces();
  GreyClosures out;
  out.kappa_e.resize(N);
  out.kappa_b.resize(N);
  out.cell_tensor.resize(N);
  out.face_tensor.resize(NF);
  out.drag.resize(NF);
  out.eta.resize(NF);
  out.boundary_factor.resize(NB);
  out.incoming_flux.resize(NB);

  std::vector<double> w(G);
  std::vector<double> planck(G);

  for (std::size_t i = 0; i < N; ++i) {
    const std::span<const double> e(mg.energy.data() + i * G, G);
    const std::span<const double> b(props.emission.data() + i * G, G);
    const std::span<const double> k(props.kappa.data() + i * G, G);
    const double bsum = sum(b);
    double kb = 0.0;
    for (std::size_t g = 0; g < G; ++g) kb += k[g] * b[g];
    out.kappa_b[i] = kb / bsum;

    double esum = sum(e);
    std::span<const double> weights = e;
    if (!(esum > 0.0)) {
      weights = b;
      esum = bsum;
    }
    double ke = 0.0;
    for (std::size_t g = 0; g < G; ++g) ke += k[g] * weights[g];
    out.kappa_e[i] = ke / esum;
    out.cell_tensor[i] = weighted_tensor(moments.cell_tensor, i * G, weights, esum);
  }

  for (std::size_t f = 0; f < NF; ++f) {
    const auto [lo, hi] = grid.face_cells(f);
    const std::ptrdiff_t b = grid.boundary_index(f);
    const std::size_t any = static_cast<std::size_t>(lo >= 0 ? lo : hi);
    // face group energies and Planck fallback weights
    double esum = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      if (b >= 0) {
        w[g] = mg.boundary_energy[static_cast<std::size_t>(b) * G + g];
        planck[g] = props.emission[any * G + g];
      } else {
        w[g] = 0.5 * (mg.energy[static_cast<std::size_t>(lo) * G + g] +
                      mg.energy[static_cast<std::size_t>(hi) * G + g]);
        planck[g] = 0.5 * (props.emission[static_cast<std::size_t>(lo) * G + g] +
                           props.emission[static_cast<std::size_t>(hi) * G + g]);
      }
      esum += w[g];
    }
    const bool have_e = esum > 0.0;
    const std::span<const double> weights = have_e ? std::span<const double>(w) : std::span<const double>(planck);
    const double wsum = have_e ? esum : sum(planck);
    out.face_tensor[f] = weighted_tensor(moments.face_tensor, f * G, weights, wsum);

    double fk = 0.0;
    double fa = 0.0;
    double ek = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      const double kf = face_opacity(grid, props.kappa, G, f, g);
      const double af = std::abs(mg.flux[f * G + g]);
      fk += kf * af;
      fa += af;
      ek += kf * weights[g];
    }
    const double K = fa > 0.0 ? fk / fa : ek / wsum;
    out.drag[f] = K;
    double eta = 0.0;
    if (have_e) {
      for (std::size_t g = 0; g < G; ++g) {
        eta += (face_opacity(grid, props.kappa, G, f, g) - K) * mg.flux[f * G + g];
      }
      eta /= esum;
    }
    out.eta[f] = eta;
  }

  for (std::size_t bi = 0; bi < NB; ++bi) {
    const std::size_t f = grid.boundary_face(bi);
    const auto [lo, hi] = grid.face_cells(f);
    const std::size_t cell = static_cast<std::size_t>(lo >= 0 ? lo : hi);
    double esum = 0.0;
    double cb = 0.0;
    double fin = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      const double e = mg.boundary_energy[bi * G + g];
      esum += e;
      cb += moments.boundary_factor[bi * G + g] * e;
      fin += moments.boundary[bi * G + g].incoming_flux;
    }
    if (!(esum > 0.0)) {
      esum = 0.0;
      cb = 0.0;
      for (std::size_t g = 0; g < G; ++g) {
        const double e = props.emission[cell * G + g];
        esum += e;
        cb += moments.boundary_factor[bi * G + g] * e;
      }
    }
    out.boundary_factor[bi] = cb / esum;
    out.incoming_flux[bi] = fin;
  }
  return out;
}

GreyResult solve_grey_meb(LowOrderSystem& system, const GreyClosures& closures,
                          const physics::MaterialEOS& eos,
                          const physics::PhysicalConstants& constants, const GreyInputs& in) {
  const mesh::MaterialGrid& grid = system.grid();
  const std::size_t N = grid.num_cells();
  const double c = constants.c;
  const double ar = constants.a_r;
  const double cv_dt = eos.cv * in.inv_dt;

  LowOrderCoefficients coef;
  coef.c = c;
  coef.inv_dt = in.inv_dt;
  coef.absorption.resize(N);
  coef.source.resize(N);
  coef.previous_energy.assign(in.previous_energy.begin(), in.previous_energy.end());
  coef.cell_tensor = closures.cell_tensor;
  coef.drag = closures.drag;
  coef.eta = closures.eta;
  coef.previous_flux.assign(in.previous_flux.begin(), in.previous_flux.end());
  coef.face_tensor = closures.face_tensor;
  coef.boundary_factor = closures.boundary_factor;
  coef.incoming_flux = closures.incoming_flux;

  std::vector<double> t(in.initial_temperature.begin(), in.initial_temperature.end());
  std::vector<double> emit(N);
  std::vector<double> denom(N);
  GreyResult result;

  for (int it = 1; it <= in.max_iterations; ++it) {
    for (std::size_t i = 0; i < N; ++i) {
      const double t3 = t[i] * t[i] * t[i];
      emit[i] = c * closures.kappa_b[i] * ar * t3 * t[i];
      const double k4 = 4.0 * c * closures.kappa_b[i] * ar * t3;
      const double d = cv_dt + k4;
      if (!(d > 0.0)) {
        throw std::runtime_error("grey Newton: degenerate material coupling in cell " +
                                 std::to_string(i));
      }
      denom[i] = d;
      const double nu = k4 / d;
      coef.absorption[i] = c * closures.kappa_e[i] * (1.0 - nu);
      coef.source[i] = (1.0 - nu) * emit[i] + nu * cv_dt * (in.previous_temperature[i] - t[i]);
    }
    LowOrderSolution sol = system.solve(coef);

    double change = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < N; ++i) {
      double dt = (cv_dt * (in.previous_temperature[i] - t[i]) +
                   c * closures.kappa_e[i] * sol.energy[i] - emit[i]) /
                  denom[i];
      while (t[i] + dt <= 0.0) dt *= 0.5;
      const double rel = std::abs(dt) / (t[i] + dt);
      if (rel > change) {
        change = rel;
        worst = i;
      }
      t[i] += dt;
    }
    result.newton_iterations = it;
    result.relative_residual = sol.relative_residual;
    if (change < in.tolerance) {
      result.state.energy = std::move(sol.energy);
      result.state.flux = std::move(sol.flux);
      result.state.boundary_energy = std::move(sol.boundary_energy);
      result.state.temperature = std::move(t);
      return result;
    }
    if (it == in.max_iterations) {
      std::ostringstream msg;
      msg << "grey Newton did not converge in " << in.max_iterations << " iterations; worst cell "
          << worst << " (ix=" << grid.cell_ix(worst) << ", iy=" << grid.cell_iy(worst)
          << ") T=" << t[worst] << " |dT|/T=" << change;
      throw std::runtime_error(msg.str());
    }
  }
  throw std::runtime_error("grey Newton: max_iterations must be >= 1");
}

}  // namespace mlqd::loqd
