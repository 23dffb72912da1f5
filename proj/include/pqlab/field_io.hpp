#pragma once

#include <iosfwd>
#include <string>

#include "pqlab/grid.hpp"

namespace pqlab {

/// Plain-text field format:
///
///   # pqlab-field 1
///   domain disc|square <origin_x> <origin_y> <size>
///   spacing <h>
///   nodes <count>
///   index,x1,x2,value
///   0,<x1>,<x2>,<value>
///   ...
///
/// Numbers are written with 17 significant digits so a round trip restores
/// every double exactly.
void write_field(std::ostream& out, const ScalarField& u);
void write_field(const std::string& path, const ScalarField& u);

/// Rebuilds the grid from the header and checks node count and positions.
/// Throws IoFailure on malformed input.
ScalarField read_field(std::istream& in);
ScalarField read_field(const std::string& path);

}  // namespace pqlab
