#include "mlqd/driver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mlqd::driver {

namespace {

transport::BoundaryIntensity make_boundary(const Problem& p) {
  const std::size_t G = p.groups.size();
  transport::BoundaryIntensity b = transport::BoundaryIntensity::vacuum(G);
  for (std::size_t s = 0; s < mesh::kNumSides; ++s) {
    if (p.boundary[s].kind == BoundarySpec::Kind::planckian) {
      physics::group_emission_all(p.constants, p.groups, p.boundary[s].temperature, b.side[s]);
    }
  }
  return b;
}

double relative_l2(const std::vector<double>& total, const std::vector<double>& per_group,
                   std::size_t groups) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < total.size(); ++i) {
    double s = 0.0;
    for (std::size_t g = 0; g < groups; ++g) s += per_group[i * groups + g];
    num += (total[i] - s) * (total[i] - s);
    den += total[i] * total[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

std::string history(const std::vector<double>& r) {
  std::ostringstream out;
  out.precision(3);
  for (std::size_t k = 0; k < r.size(); ++k) out << (k ? ", " : "") << r[k];
  return out.str();
}

constexpr std::size_t kAndersonDepth = 10;
constexpr double kAndersonMaxStep = 2.0;  // in log T

// Anderson mixing for x = g(x) on log T. A step that moves any component
// by more than `max_step` is replaced by the plain update and the history reset.
class AndersonMixer {
 public:
  AndersonMixer(std::size_t depth, double max_step) : depth_(depth), max_step_(max_step) {}

  Eigen::VectorXd next(const Eigen::VectorXd& x, const Eigen::VectorXd& gx) {
    const Eigen::VectorXd f = gx - x;
    xs_.push_back(x);
    fs_.push_back(f);
    if (xs_.size() > depth_ + 1) {
      xs_.pop_front();
      fs_.pop_front();
    }
    const auto m = static_cast<Eigen::Index>(xs_.size()) - 1;
    if (m == 0) return gx;
    Eigen::MatrixXd df(x.size(), m);
    Eigen::MatrixXd dx(x.size(), m);
    for (Eigen::Index j = 0; j < m; ++j) {
      df.col(j) = fs_[j + 1] - fs_[j];
      dx.col(j) = xs_[j + 1] - xs_[j];
    }
    const Eigen::VectorXd gamma = df.colPivHouseholderQr().solve(f);
    Eigen::VectorXd out = gx - (dx + df) * gamma;
    if (!out.allFinite() || (out - x).cwiseAbs().maxCoeff() > max_step_) {
      xs_.clear();
      fs_.clear();
      return gx;
    }
    return out;
  }

 private:
  std::size_t depth_;
  double max_step_;
  std::deque<Eigen::VectorXd> xs_;
  std::deque<Eigen::VectorXd> fs_;
};

}  // namespace

void set_worker_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

double max_relative_change(const std::vector<double>& a, const std::vector<double>& b,
                           double floor) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), floor));
  }
  return m;
}

double total_energy(const mesh::MaterialGrid& grid, const physics::MaterialEOS& eos,
                    const std::vector<double>& energy, const std::vector<double>& temperature) {
  double s = 0.0;
  for (std::size_t i = 0; i < energy.size(); ++i) s += energy[i] + eos.cv * temperature[i];
  return s * grid.cell_area();
}

double boundary_inflow(const mesh::MaterialGrid& grid, const std::vector<double>& flux) {
  double s = 0.0;
  for (std::size_t b = 0; b < grid.num_boundary_faces(); ++b) {
    const std::size_t f = grid.boundary_face(b);
    s -= mesh::MaterialGrid::outward_sign(grid.boundary_side(b)) * grid.face_length(f) * flux[f];
  }
  return s;
}

Simulation::Simulation(Problem problem)
    : problem_(std::move(problem)),
      chars_(mesh::build_characteristic_grids(problem_.grid, problem_.quadrature, problem_.h_moc)),
      boundary_(make_boundary(problem_)),
      system_(problem_.grid, problem_.cross_terms) {
  problem_.constants.validate();
  if (!(problem_.initial_temperature > 0.0)) {
    throw std::invalid_argument("initial temperature must be positive");
  }
}

FieldState Simulation::initial_state() const {
  const mesh::MaterialGrid& grid = problem_.grid;
  const std::size_t N = grid.num_cells();
  const std::size_t G = problem_.groups.size();
  const std::size_t M = problem_.quadrature.size();
  const double c = problem_.constants.c;

  std::vector<double> b(G);
  physics::group_emission_all(problem_.constants, problem_.groups, problem_.initial_temperature, b);

  FieldState s;
  s.temperature.assign(N, problem_.initial_temperature);
  s.multigroup = loqd::MultigroupFields::zeros(grid, G);
  s.energy.assign(N, 0.0);
  s.flux.assign(grid.num_faces(), 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t g = 0; g < G; ++g) {
      const double e = physics::kFourPi * b[g] / c;
      s.multigroup.energy[i * G + g] = e;
      s.energy[i] += e;
    }
  }
  s.intensity.resize(M * N * G);
  for (std::size_t k = 0; k < M * N; ++k) std::copy(b.begin(), b.end(), s.intensity.begin() + k * G);
  return s;
}

IterationRecord Simulation::advance_step(FieldState& state, double dt,
                                         const IterationControls& controls) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const Problem& p = problem_;
  const mesh::MaterialGrid& grid = p.grid;
  const std::size_t N = grid.num_cells();
  const std::size_t M = p.quadrature.size();
  const std::size_t G = p.groups.size();
  const double c = p.constants.c;
  const double inv_dt = 1.0 / dt;

  IterationRecord rec;
  rec.step = state.step + 1;
  rec.time = state.time + dt;
  rec.energy_before = total_energy(grid, p.eos, state.energy, state.temperature);

  system_.clear_factorizations();
  std::vector<double> t = state.temperature;
  std::vector<double> e = state.energy;
  loqd::GreyState grey;
  loqd::MultigroupFields mg;
  transport::AngularTallies tallies;

  for (int outer = 1;; ++outer) {
    const std::vector<double> t_outer = t;
    const std::vector<double> e_outer = e;

    loqd::GroupProperties props = loqd::evaluate_properties(p.opacity, p.groups, p.constants, t);
    const transport::CellSource source = transport::make_cell_source(
        N, G, M, props.kappa, props.emission, state.intensity, inv_dt / c);
    tallies = transport::sweep(grid, p.quadrature, chars_, source, boundary_);
    const transport::MomentTallies moments =
        transport::compute_moments(tallies, grid, p.quadrature, boundary_, c);

    AndersonMixer mixer(kAndersonDepth, kAndersonMaxStep);
    Eigen::VectorXd x(static_cast<Eigen::Index>(N));
    for (std::size_t i = 0; i < N; ++i) x[static_cast<Eigen::Index>(i)] = std::log(t[i]);
    int inner = 0;
    for (;;) {
      ++inner;
      if (inner > 1) {
        for (std::size_t i = 0; i < N; ++i) t[i] = std::exp(x[static_cast<Eigen::Index>(i)]);
        props = loqd::evaluate_properties(p.opacity, p.groups, p.constants, t);
      }
      mg = loqd::solve_multigroup(system_, moments, props, state.multigroup, c, inv_dt);
      const loqd::GreyClosures closures = loqd::compute_grey_closures(grid, mg, props, moments);
      loqd::GreyInputs in;
      in.previous_energy = state.energy;
      in.previous_flux = state.flux;
      in.previous_temperature = state.temperature;
      in.initial_temperature = t;
      in.inv_dt = inv_dt;
      in.tolerance = 0.1 * controls.eps_inner;
      loqd::GreyResult gr = loqd::solve_grey_meb(system_, closures, p.eos, p.constants, in);
      rec.max_linear_residual =
          std::max({rec.max_linear_residual, mg.max_relative_residual, gr.relative_residual});
      grey = std::move(gr.state);
      const double change = std::max(max_relative_change(grey.temperature, t),
                                     max_relative_change(grey.energy, e));
      e = grey.energy;
      if (change < controls.eps_inner) {
        t = grey.temperature;
        break;
      }
      if (inner >= controls.max_inner) {
        std::ostringstream msg;
        msg << "step " << rec.step << ": inner iterations exceeded " << controls.max_inner
            << " in outer iterate " << outer << " (last change " << change << ")";
        throw std::runtime_error(msg.str());
      }
      Eigen::VectorXd gx(x.size());
      for (std::size_t i = 0; i < N; ++i) {
        gx[static_cast<Eigen::Index>(i)] = std::log(grey.temperature[i]);
      }
      x = mixer.next(x, gx);
    }
    rec.inner_iterations.push_back(inner);
    rec.total_inner += inner;

    rec.residual_t = max_relative_change(t, t_outer);
    rec.residual_e = max_relative_change(e, e_outer);
    const double res = std::max(rec.residual_t, rec.residual_e);
    if (rec.outer_residuals.size() >= 2 && res > rec.outer_residuals.back()) ++rec.nonmonotone_outer;
    rec.outer_residuals.push_back(res);
    rec.outer_iterations = outer;
    if (res < controls.eps_outer) break;
    if (outer >= controls.max_outer) {
      throw std::runtime_error("step " + std::to_string(rec.step) + ": no outer convergence in " +
                               std::to_string(controls.max_outer) +
                               " iterations; residuals: " + history(rec.outer_residuals));
    }
  }

  rec.consistency_energy = relative_l2(grey.energy, mg.energy, G);
  rec.consistency_flux = relative_l2(grey.flux, mg.flux, G);
  rec.boundary_inflow = boundary_inflow(grid, grey.flux);
  rec.energy_after = total_energy(grid, p.eos, grey.energy, grey.temperature);
  rec.energy_residual = std::abs(rec.energy_after - rec.energy_before - rec.boundary_inflow * dt) /
                        std::max(std::abs(rec.energy_after), std::abs(rec.energy_before));

  state.time = rec.time;
  state.step = rec.step;
  state.temperature = std::move(grey.temperature);
  state.energy = std::move(grey.energy);
  state.flux = std::move(grey.flux);
  state.multigroup = std::move(mg);
  state.intensity = std::move(tallies.cell_intensity);
  return rec;
}

RunResult run(Simulation& sim, FieldState state, const TimeControls& time,
              const IterationControls& controls, const StepObserver& observer) {
  RunResult out;
  if (observer) observer(state, nullptr);
  for (std::size_t n = 0; n < time.steps; ++n) {
    out.records.push_back(sim.advance_step(state, time.dt, controls));
    if (observer) observer(state, &out.records.back());
  }
  out.state = std::move(state);
  return out;
}

}  // namespace mlqd::driver
