#include "pqlab/field_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pqlab/error.hpp"

namespace pqlab {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string next_line(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::IoFailure, "unexpected end of field file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

void write_field(std::ostream& out, const ScalarField& u) {
  const Grid& g = u.grid();
  const Domain& d = g.domain();
  out << "# pqlab-field 1\n";
  out << "domain " << (d.shape == Domain::Shape::Disc ? "disc" : "square") << ' '
      << fmt17(d.origin.x()) << ' ' << fmt17(d.origin.y()) << ' ' << fmt17(d.size) << '\n';
  out << "spacing " << fmt17(g.spacing()) << '\n';
  out << "nodes " << g.num_nodes() << '\n';
  out << "index,x1,x2,value\n";
  for (Index i = 0; i < g.num_nodes(); ++i) {
    const Vec2 x = g.node(i);
    out << i << ',' << fmt17(x.x()) << ',' << fmt17(x.y()) << ',' << fmt17(u(i)) << '\n';
  }
  if (!out) fail(ErrorKind::IoFailure, "failed to write field");
}

void write_field(const std::string& path, const ScalarField& u) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoFailure, "cannot open " + path + " for writing");
  write_field(out, u);
}

ScalarField read_field(std::istream& in) {
  if (next_line(in).rfind("# pqlab-field", 0) != 0) {
    fail(ErrorKind::IoFailure, "missing field header");
  }
  std::string key, shape;
  double ox = 0, oy = 0, size = 0, h = 0;
  long count = 0;
  {
    std::istringstream s(next_line(in));
    if (!(s >> key >> shape >> ox >> oy >> size) || key != "domain") {
      fail(ErrorKind::IoFailure, "malformed domain line");
    }
  }
  {
    std::istringstream s(next_line(in));
    if (!(s >> key >> h) || key != "spacing") fail(ErrorKind::IoFailure, "malformed spacing line");
  }
  {
    std::istringstream s(next_line(in));
    if (!(s >> key >> count) || key != "nodes") fail(ErrorKind::IoFailure, "malformed nodes line");
  }
  next_line(in);  // column header

  Domain domain;
  if (shape == "disc") {
    domain = Domain::disc(Vec2(ox, oy), size);
  } else if (shape == "square") {
    domain = Domain::square(Vec2(ox, oy), size);
  } else {
    fail(ErrorKind::IoFailure, "unknown domain shape '" + shape + "'");
  }
  GridPtr grid = build_grid_with_spacing(domain, h);
  if (grid->num_nodes() != count) fail(ErrorKind::IoFailure, "node count does not match grid");

  Eigen::VectorXd values(count);
  for (long k = 0; k < count; ++k) {
    std::string line = next_line(in);
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream s(line);
    long index = 0;
    double x1 = 0, x2 = 0, v = 0;
    if (!(s >> index >> x1 >> x2 >> v) || index != k) {
      fail(ErrorKind::IoFailure, "malformed node row " + std::to_string(k));
    }
    if ((grid->node(index) - Vec2(x1, x2)).norm() > 1e-9 * (1.0 + size)) {
      fail(ErrorKind::IoFailure, "node " + std::to_string(k) + " position mismatch");
    }
    values(index) = v;
  }
  return ScalarField(std::move(grid), std::move(values));
}

ScalarField read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoFailure, "cannot open " + path);
  return read_field(in);
}

}  // namespace pqlab
