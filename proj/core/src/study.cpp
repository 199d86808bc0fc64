#include "mlqd/study.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace mlqd::study {

void RefinementLadder::validate() const {
  if (values.size() < 2) throw std::invalid_argument("a ladder needs at least 2 values");
  if (!(fixed > 0.0)) throw std::invalid_argument("fixed mesh width must be positive");
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] > 0.0)) throw std::invalid_argument("ladder values must be positive");
    if (k > 0 && std::abs(values[k - 1] / values[k] - 2.0) > 1e-12) {
      throw std::invalid_argument("consecutive ladder values must differ by a factor of 2");
    }
  }
}

std::vector<double> restrict_to_coarse(const mesh::MaterialGrid& fine,
                                       std::span<const double> values,
                                       const mesh::MaterialGrid& coarse) {
  const auto same = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::abs(b); };
  if (fine.nx() != 2 * coarse.nx() || fine.ny() != 2 * coarse.ny() || !same(fine.lx(), coarse.lx()) ||
      !same(fine.ly(), coarse.ly())) {
    throw std::invalid_argument("restrict_to_coarse: grids are not nested 2x2");
  }
  if (values.size() != fine.num_cells()) throw std::invalid_argument("restrict_to_coarse: size mismatch");
  std::vector<double> out(coarse.num_cells());
  for (std::size_t iy = 0; iy < coarse.ny(); ++iy) {
    for (std::size_t ix = 0; ix < coarse.nx(); ++ix) {
      out[coarse.cell(ix, iy)] =
          0.25 * (values[fine.cell(2 * ix, 2 * iy)] + values[fine.cell(2 * ix + 1, 2 * iy)] +
                  values[fine.cell(2 * ix, 2 * iy + 1)] + values[fine.cell(2 * ix + 1, 2 * iy + 1)]);
    }
  }
  return out;
}

double l2_norm(const mesh::MaterialGrid& grid, std::span<const double> y) {
  if (y.size() != grid.num_cells()) throw std::invalid_argument("l2_norm: size mismatch");
  double s = 0.0;
  for (double v : y) s += v * v;
  return std::sqrt(s * grid.cell_area());
}

DiffNorms diff_norms(const mesh::MaterialGrid& grid, std::span<const double> y_h,
                     std::span<const double> y_2h) {
  if (y_h.size() != y_2h.size() || y_h.size() != grid.num_cells()) {
    throw std::invalid_argument("diff_norms: field shapes differ");
  }
  std::vector<double> d(y_h.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = y_h[i] - y_2h[i];
  DiffNorms n;
  n.absolute = l2_norm(grid, d);
  const double base = l2_norm(grid, y_h);
  n.relative = base > 0.0 ? n.absolute / base : 0.0;
  return n;
}

std::vector<StudyRow> tabulate(const RefinementLadder& ladder, const std::vector<LadderRun>& runs) {
  std::vector<StudyRow> rows;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 1; k < runs.size(); ++k) {
    const LadderRun& fine = runs[k];
    const LadderRun& coarse = runs[k - 1];
    StudyRow row;
    row.h = fine.h;
    row.ratio = ladder.varied == Varied::h_mat ? fine.h / ladder.fixed : ladder.fixed / fine.h;
    if (ladder.varied == Varied::h_mat) {
      const auto t = restrict_to_coarse(fine.grid, fine.temperature, coarse.grid);
      const auto e = restrict_to_coarse(fine.grid, fine.energy, coarse.grid);
      row.dt = diff_norms(coarse.grid, t, coarse.temperature);
      row.de = diff_norms(coarse.grid, e, coarse.energy);
    } else {
      row.dt = diff_norms(fine.grid, fine.temperature, coarse.temperature);
      row.de = diff_norms(fine.grid, fine.energy, coarse.energy);
    }
    row.rho_t = rows.empty() ? nan : rows.back().dt.absolute / row.dt.absolute;
    row.rho_e = rows.empty() ? nan : rows.back().de.absolute / row.de.absolute;
    rows.push_back(row);
  }
  return rows;
}

StudyResult run_ladder(const RefinementLadder& ladder, const ProblemFactory& factory,
                       const driver::TimeControls& time, const driver::IterationControls& controls,
                       const RunCallback& on_run) {
  ladder.validate();
  StudyResult result;
  for (double h : ladder.values) {
    const double h_mat = ladder.varied == Varied::h_mat ? h : ladder.fixed;
    const double h_moc = ladder.varied == Varied::h_mat ? ladder.fixed : h;
    try {
      driver::Simulation sim(factory(h_mat, h_moc));
      driver::RunResult r = driver::run(sim, sim.initial_state(), time, controls);
      LadderRun run;
      run.h = h;
      run.grid = sim.problem().grid;
      run.temperature = std::move(r.state.temperature);
      run.energy = std::move(r.state.energy);
      result.runs.push_back(std::move(run));
    } catch (const std::exception& ex) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "h = %g: ", h);
      result.failure = buf + std::string(ex.what());
      break;
    }
    if (on_run) on_run(result.runs.back());
  }
  result.rows = tabulate(ladder, result.runs);
  return result;
}

void write_study_csv(std::ostream& out, const RefinementLadder& ladder,
                     const std::vector<StudyRow>& rows) {
  out << "h_mat,h_moc,ratio,dT,rho_T,dE,rho_E,dT_rel,dE_rel\n";
  char buf[512];
  for (const StudyRow& r : rows) {
    const double h_mat = ladder.varied == Varied::h_mat ? r.h : ladder.fixed;
    const double h_moc = ladder.varied == Varied::h_mat ? ladder.fixed : r.h;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", h_mat,
                  h_moc, r.ratio, r.dt.absolute, r.rho_t, r.de.absolute, r.rho_e, r.dt.relative,
                  r.de.relative);
    out << buf;
  }
}

}  // namespace mlqd::study
