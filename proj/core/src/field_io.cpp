#include "mlqd/field_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mlqd::io {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string format_time(double time) {
  char buf[40];
  for (int p = 1; p <= 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, time);
    if (std::strtod(buf, nullptr) == time) break;
  }
  return buf;
}

void write_field_csv(std::ostream& out, const mesh::MaterialGrid& grid,
                     std::span<const double> values, const std::string& field,
                     const std::string& units, double time) {
  if (values.size() != grid.num_cells()) throw std::invalid_argument("field size does not match grid");
  out << "# field=" << field << " units=" << units << " time=" << format_time(time)
      << " nx=" << grid.nx() << " ny=" << grid.ny() << " dx=" << g17(grid.dx())
      << " dy=" << g17(grid.dy()) << '\n';
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      if (ix) out << ',';
      out << g17(values[grid.cell(ix, iy)]);
    }
    out << '\n';
  }
}

FieldCsv read_field_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw std::runtime_error("field csv: missing '# ' header line");
  }
  std::map<std::string, std::string> kv;
  std::istringstream hs(line.substr(2));
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::runtime_error("field csv: bad header token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  for (const char* key : {"field", "units", "time", "nx", "ny", "dx", "dy"}) {
    if (!kv.count(key)) throw std::runtime_error(std::string("field csv: header lacks ") + key);
  }
  FieldCsv f;
  f.field = kv["field"];
  f.units = kv["units"];
  f.time = std::stod(kv["time"]);
  f.nx = std::stoul(kv["nx"]);
  f.ny = std::stoul(kv["ny"]);
  f.dx = std::stod(kv["dx"]);
  f.dy = std::stod(kv["dy"]);
  f.values.reserve(f.nx * f.ny);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(ls, cell, ',')) {
      f.values.push_back(std::stod(cell));
      ++cols;
    }
    if (cols != f.nx) throw std::runtime_error("field csv: row " + std::to_string(rows) + " has wrong width");
    ++rows;
  }
  if (rows != f.ny) throw std::runtime_error("field csv: expected " + std::to_string(f.ny) + " rows");
  return f;
}

void write_iterations_csv(std::ostream& out, const std::vector<driver::IterationRecord>& records) {
  out << "step,time,outer_iters,total_inner_iters,final_residual_T,final_residual_E,"
         "energy_residual,consistency_E,consistency_F\n";
  for (const auto& r : records) {
    out << r.step << ',' << format_time(r.time) << ',' << r.outer_iterations << ',' << r.total_inner
        << ',' << g17(r.residual_t) << ',' << g17(r.residual_e) << ',' << g17(r.energy_residual)
        << ',' << g17(r.consistency_energy) << ',' << g17(r.consistency_flux) << '\n';
  }
}

}  // namespace mlqd::io
