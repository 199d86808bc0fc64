// mlqd: run, refinement studies and characteristic-grid dumps from a config file.

#include "mlqd/config.hpp"
#include "mlqd/driver.hpp"
#include "mlqd/field_io.hpp"
#include "mlqd/mesh.hpp"
#include "mlqd/study.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace mlqd;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_snapshot(const fs::path& dir, const mesh::MaterialGrid& grid,
                    const driver::FieldState& s) {
  const std::string t = io::format_time(s.time);
  auto tf = open_out(dir / ("T_" + t + ".csv"));
  io::write_field_csv(tf, grid, s.temperature, "T", "keV", s.time);
  auto ef = open_out(dir / ("E_" + t + ".csv"));
  io::write_field_csv(ef, grid, s.energy, "E", "jerks/cm^3", s.time);
}

bool is_snapshot_step(std::size_t step, double dt, double interval) {
  if (interval <= 0.0 || step == 0) return false;
  const double t = static_cast<double>(step) * dt;
  const double k = std::round(t / interval);
  return k >= 1.0 && std::abs(t - k * interval) <= 1e-9 * dt;
}

int cmd_run(const config::RunConfig& cfg, const std::string& out_dir) {
  const fs::path dir = out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(out_dir);
  driver::Simulation sim(config::make_problem(cfg));
  const auto& grid = sim.problem().grid;
  std::cerr << "grid " << grid.nx() << "x" << grid.ny() << ", " << sim.problem().quadrature.size()
            << " directions, " << sim.problem().groups.size() << " groups, "
            << sim.characteristics().total_segments() << " segments\n";

  const auto observer = [&](const driver::FieldState& s, const driver::IterationRecord* rec) {
    if (!rec) return;
    std::fprintf(stderr, "step %zu t=%s outer=%d inner=%d energy_residual=%.2e\n", rec->step,
                 io::format_time(rec->time).c_str(), rec->outer_iterations, rec->total_inner,
                 rec->energy_residual);
    if (is_snapshot_step(s.step, cfg.time.dt, cfg.snapshot_interval) && s.step != cfg.time.steps) {
      write_snapshot(dir, grid, s);
    }
  };
  driver::RunResult r = driver::run(sim, sim.initial_state(), cfg.time, cfg.iteration, observer);
  write_snapshot(dir, grid, r.state);
  auto it = open_out(dir / "iterations.csv");
  io::write_iterations_csv(it, r.records);
  return 0;
}

int cmd_study(const config::RunConfig& cfg, study::Varied varied, double fixed,
              const std::vector<double>& values, const std::string& output) {
  study::RefinementLadder ladder{varied, fixed, values};
  const auto factory = [&](double h_mat, double h_moc) {
    return config::make_problem(cfg, h_mat, h_moc);
  };
  const auto progress = [](const study::LadderRun& run) {
    std::fprintf(stderr, "finished h = %g\n", run.h);
  };
  const study::StudyResult res = study::run_ladder(ladder, factory, cfg.time, cfg.iteration, progress);
  const fs::path path = output.empty() ? fs::path(cfg.output_dir) / "study.csv" : fs::path(output);
  auto out = open_out(path);
  study::write_study_csv(out, ladder, res.rows);
  if (!res.failure.empty()) {
    std::cerr << "error: ladder aborted at " << res.failure << " (partial table written)\n";
    return 1;
  }
  return 0;
}

int cmd_mesh_dump(const config::RunConfig& cfg, const std::string& output) {
  const driver::Problem p = config::make_problem(cfg);
  const auto chars = mesh::build_characteristic_grids(p.grid, p.quadrature, p.h_moc);
  const fs::path path = output.empty() ? fs::path(cfg.output_dir) / "mesh.csv" : fs::path(output);
  auto out = open_out(path);
  mesh::write_mesh_csv(out, chars);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multigroup quasidiffusion thermal radiative transfer on long characteristics"};
  app.require_subcommand(1);

  std::string cfg_path;
  std::string out_dir;
  std::string output;
  std::vector<double> values;
  double fixed = 0.0;

  auto* run = app.add_subcommand("run", "Run the configured simulation");
  run->add_option("config", cfg_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output-dir", out_dir, "Output directory (overrides output.dir)");

  auto* smat = app.add_subcommand("study-mat", "Refine h_mat at fixed h_moc");
  smat->add_option("config", cfg_path, "Config file")->required()->check(CLI::ExistingFile);
  smat->add_option("--values", values, "h_mat ladder, each half the previous")
      ->required()
      ->delimiter(',');
  smat->add_option("--hmoc", fixed, "Fixed h_moc (cm)")->required()->check(CLI::PositiveNumber);
  smat->add_option("-o,--output", output, "Study CSV path (default <output.dir>/study.csv)");

  auto* smoc = app.add_subcommand("study-moc", "Refine h_moc at fixed h_mat");
  smoc->add_option("config", cfg_path, "Config file")->required()->check(CLI::ExistingFile);
  smoc->add_option("--values", values, "h_moc ladder, each half the previous")
      ->required()
      ->delimiter(',');
  smoc->add_option("--hmat", fixed, "Fixed h_mat (cm)")->required()->check(CLI::PositiveNumber);
  smoc->add_option("-o,--output", output, "Study CSV path (default <output.dir>/study.csv)");

  auto* dump = app.add_subcommand("mesh-dump", "Write the characteristic grid as CSV");
  dump->add_option("config", cfg_path, "Config file")->required()->check(CLI::ExistingFile);
  dump->add_option("-o,--output", output, "Mesh CSV path (default <output.dir>/mesh.csv)");

  CLI11_PARSE(app, argc, argv);

  try {
    const config::RunConfig cfg = config::parse_config(cfg_path);
    if (cfg.h_moc > cfg.h_mat) {
      std::cerr << "warning: mesh.h_moc > mesh.h_mat\n";
    }
    driver::set_worker_count(cfg.threads);
    if (*run) return cmd_run(cfg, out_dir);
    if (*smat) return cmd_study(cfg, study::Varied::h_mat, fixed, values, output);
    if (*smoc) return cmd_study(cfg, study::Varied::h_moc, fixed, values, output);
    if (*dump) return cmd_mesh_dump(cfg, output);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
