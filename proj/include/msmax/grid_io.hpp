#pragma once

// GridFunction files.
//
// Text form:
//   msmax-grid 1
//   dims <n>
//   levels <L_0> ... <L_{n-1}>
//   origin <o_0> ... <o_{n-1}>
//   side <s_0> ... <s_{n-1}>
//   values
//   <one value per line, row-major, last axis fastest>
//
// `origin` and `side` may be omitted (defaults 0 and 1). Lines starting with
// '#' are ignored in the header.
//
// Binary form (little-endian): the 8 magic bytes "MSMXGRD1", u32 dims,
// u32 levels[dims], f64 origin[dims], f64 side[dims], f64 values[size].

#include <iosfwd>
#include <string>

#include "msmax/grid.hpp"

namespace msmax::io {

void write_text(std::ostream& os, const GridFunction& f);
void write_binary(std::ostream& os, const GridFunction& f);

GridFunction read_text(std::istream& is);
GridFunction read_binary(std::istream& is);

/// Detects the form from the leading bytes.
GridFunction read_grid(std::istream& is);

GridFunction load_grid(const std::string& path);
void save_grid(const std::string& path, const GridFunction& f, bool binary);

}  // namespace msmax::io
