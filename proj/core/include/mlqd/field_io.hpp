#pragma once

// Grid-shaped CSV output: one header line, then ny rows of nx values,
// row iy = 0 (bottom) first.

#include "mlqd/driver.hpp"
#include "mlqd/mesh.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mlqd::io {

struct FieldCsv {
  std::string field;
  std::string units;
  double time = 0.0;
  std::size_t nx = 0;
  std::size_t ny = 0;
  double dx = 0.0;
  double dy = 0.0;
  std::vector<double> values;  ///< cell order, x fastest
};

/// Header: "# field=T units=keV time=0.5 nx=10 ny=10 dx=0.6 dy=0.6".
void write_field_csv(std::ostream& out, const mesh::MaterialGrid& grid,
                     std::span<const double> values, const std::string& field,
                     const std::string& units, double time);

/// Throws std::runtime_error on a malformed header or shape mismatch.
FieldCsv read_field_csv(std::istream& in);

/// Shortest decimal that reads back to the same time, e.g. "0.5".
std::string format_time(double time);

/// step,time,outer_iters,total_inner_iters,final_residual_T,final_residual_E,...
void write_iterations_csv(std::ostream& out, const std::vector<driver::IterationRecord>& records);

}  // namespace mlqd::io
