#pragma once

#include "parext/connection.hpp"
#include "parext/fundamental.hpp"
#include "parext/sets.hpp"

#include <iosfwd>
#include <string>

namespace parext {

/// Fixed 12-significant-digit decimal formatting; the stable output format.
std::string fmt12(double x);

/// One row per node: per-axis index, per-axis coordinate, defined flag, value
/// columns. Header row mandatory.
void write_section_csv(std::ostream& os, const SampledSection& s);

/// One row per cube: level, corner index per axis.
void write_cubes_csv(std::ostream& os, const CubeDecomposition& d);

/// One row per (time, parameter) node: time, parameter coordinates, row-major
/// matrix entries.
void write_fundamental_csv(std::ostream& os, const FundamentalSolution& fs);

}  // namespace parext
