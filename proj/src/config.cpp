#include "pqlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pqlab/error.hpp"

namespace pqlab {

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"prop2_scan",   "prop2_bound",      "theorem1_sweep",
                                              "caccioppoli",  "interpolation_1d", "hole_filling",
                                              "slice_pick"};
  return kinds;
}

std::vector<double> default_schedule() {
  std::vector<double> s;
  for (int k = 0; k <= 4; ++k) s.push_back(0.1 * std::ldexp(1.0, -k));
  return s;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Reader {
 public:
  explicit Reader(ExperimentConfig& c) : c_(c) {}

  void problem(const std::string& field, const std::string& message) {
    c_.parse_problems.emplace_back(field, message);
  }

  bool number(const std::string& field, const std::string& text, double& out) {
    const std::string t = trim(text);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(out)) {
      problem(field, "'" + text + "' is not a finite decimal number");
      return false;
    }
    return true;
  }

  bool integer(const std::string& field, const std::string& text, long long& out) {
    const std::string t = trim(text);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
      problem(field, "'" + text + "' is not an integer");
      return false;
    }
    return true;
  }

  std::vector<double> numbers(const std::string& field, const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) {
      double v;
      if (number(field, item, v)) out.push_back(v);
    }
    return out;
  }

  Vec2 pair(const std::string& field, const std::string& text, const Vec2& fallback) {
    const auto v = numbers(field, text);
    if (v.size() != 2) {
      problem(field, "expected two comma-separated numbers");
      return fallback;
    }
    return {v[0], v[1]};
  }

 private:
  ExperimentConfig& c_;
};

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorKind::ConfigInvalid, source + ": " + e.message() + " (line " +
                                       std::to_string(e.line()) + ")");
  }

  ExperimentConfig c;
  c.source = source;
  Reader r(c);
  std::string shape = "disc";
  Vec2 origin = Vec2::Zero();
  double size = 1.0;
  bool has_eps = false, has_delta = false;

  using Handler = std::function<void(const std::string& field, const std::string& value)>;
  auto real = [&](double& target) {
    return Handler([&r, &target](const std::string& f, const std::string& v) { r.number(f, v, target); });
  };
  auto whole = [&](int& target) {
    return Handler([&r, &target](const std::string& f, const std::string& v) {
      long long x;
      if (r.integer(f, v, x)) target = int(x);
    });
  };
  auto list = [&](std::vector<double>& target) {
    return Handler([&r, &target](const std::string& f, const std::string& v) { target = r.numbers(f, v); });
  };
  auto text = [](std::string& target) {
    return Handler([&target](const std::string&, const std::string& v) { target = trim(v); });
  };

  const std::map<std::string, Handler> handlers{
      {"experiment.name", text(c.name)},
      {"experiment.kind", text(c.kind)},
      {"experiment.seed",
       [&](const std::string& f, const std::string& v) {
         long long x;
         if (r.integer(f, v, x)) {
           if (x < 0) r.problem(f, "seed must be nonnegative");
           c.seed = std::uint64_t(x);
         }
       }},
      {"experiment.workers", whole(c.workers)},
      {"integrand.p", real(c.p)},
      {"integrand.q", real(c.q)},
      {"integrand.mu", real(c.mu)},
      {"integrand.nu", real(c.nu)},
      {"integrand.nu_tilde", real(c.nu_tilde)},
      {"domain.shape", text(shape)},
      {"domain.center", [&](const std::string& f, const std::string& v) { origin = r.pair(f, v, origin); }},
      {"domain.corner", [&](const std::string& f, const std::string& v) { origin = r.pair(f, v, origin); }},
      {"domain.radius", real(size)},
      {"domain.side", real(size)},
      {"resolution.n",
       [&](const std::string& f, const std::string& v) {
         c.resolutions.clear();
         for (double x : r.numbers(f, v)) {
           if (x != std::floor(x)) r.problem(f, "resolution must be an integer");
           c.resolutions.push_back(int(x));
         }
       }},
      {"regularization.eps",
       [&](const std::string& f, const std::string& v) {
         c.eps_schedule = r.numbers(f, v);
         has_eps = true;
       }},
      {"regularization.delta",
       [&](const std::string& f, const std::string& v) {
         c.delta_schedule = r.numbers(f, v);
         has_delta = true;
       }},
      {"boundary.family", text(c.boundary.family)},
      {"boundary.amplitude", real(c.boundary.amplitude)},
      {"boundary.xi",
       [&](const std::string& f, const std::string& v) { c.boundary.xi = r.pair(f, v, c.boundary.xi); }},
      {"boundary.lambda", real(c.boundary.lambda)},
      {"boundary.center",
       [&](const std::string& f, const std::string& v) {
         c.boundary.bump_center = r.pair(f, v, c.boundary.bump_center);
       }},
      {"boundary.width", real(c.boundary.bump_width)},
      {"boundary.modes", whole(c.boundary.modes)},
      {"boundary.offset", real(c.boundary.offset)},
      {"sweep.q", list(c.q_values)},
      {"sweep.amplitude", list(c.amplitudes)},
      {"sweep.lambda", list(c.lambdas)},
      {"sweep.trials", whole(c.trials)},
      {"sweep.rho", real(c.rho)},
      {"sweep.sigma", real(c.sigma)},
      {"tolerances.residual", real(c.solver.residual_tolerance)},
      {"tolerances.decrement", real(c.solver.decrement_tolerance)},
      {"tolerances.max_iterations", whole(c.solver.max_iterations)},
      {"tolerances.slope_min", real(c.slope_min)},
      {"tolerances.slope_max", real(c.slope_max)},
      {"tolerances.budget",
       [&](const std::string& f, const std::string& v) {
         double x;
         if (r.number(f, v, x)) c.budget = x;
       }},
      {"output.directory", text(c.output_dir)},
  };

  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      r.problem(section, "key outside of any section");
      continue;
    }
    std::vector<std::pair<std::string, std::string>> echoed;
    for (const auto& [key, value] : body) {
      const std::string field = section + "." + key;
      const std::string raw = value.get_value<std::string>();
      echoed.emplace_back(key, raw);
      const auto it = handlers.find(field);
      if (it == handlers.end()) {
        r.problem(field, "unknown key");
      } else {
        it->second(field, raw);
      }
    }
    c.echo.emplace_back(section, std::move(echoed));
  }

  if (shape == "disc") {
    c.domain = {Domain::Shape::Disc, origin, size};
  } else if (shape == "square") {
    c.domain = {Domain::Shape::Square, origin, size};
  } else {
    r.problem("domain.shape", "unknown shape '" + shape + "' (disc or square)");
  }
  if (!has_eps && !has_delta) {
    c.eps_schedule = c.delta_schedule = default_schedule();
  } else if (has_eps != has_delta) {
    (has_eps ? c.delta_schedule : c.eps_schedule) = has_eps ? c.eps_schedule : c.delta_schedule;
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoFailure, "cannot open config " + path);
  return parse_config(in, path);
}

namespace {

bool theorem_mode(const std::string& kind) {
  return kind == "theorem1_sweep" || kind == "caccioppoli";
}

void check_schedule(std::vector<Diagnostic>& d, const std::string& field,
                    const std::vector<double>& s) {
  if (s.empty()) {
    d.push_back({field, "schedule is empty"});
    return;
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0.0 && s[i] < 1.0)) {
      d.push_back({field, "entry " + std::to_string(i) + " must lie in (0, 1)"});
    }
    if (i > 0 && !(s[i] < s[i - 1])) {
      d.push_back({field, "not strictly decreasing at entry " + std::to_string(i)});
    }
  }
}

std::string num(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

std::vector<Diagnostic> validate(const ExperimentConfig& c) {
  std::vector<Diagnostic> d;
  for (const auto& [field, message] : c.parse_problems) d.push_back({field, message});

  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end()) {
    d.push_back({"experiment.kind", "unknown experiment kind '" + c.kind + "'"});
  }
  if (c.name.empty()) d.push_back({"experiment.name", "must not be empty"});
  if (c.workers < 1) d.push_back({"experiment.workers", "must be at least 1"});

  if (!(c.p > 1.0)) d.push_back({"integrand.p", "p must exceed 1"});
  for (double q : c.q_axis()) {
    const std::string field = c.q_values.empty() ? "integrand.q" : "sweep.q";
    if (!(q >= c.p)) d.push_back({field, "q = " + num(q) + " must be >= p = " + num(c.p)});
    if (theorem_mode(c.kind) && !(q < 3.0 * c.p)) {
      d.push_back({field, "q = " + num(q) + " violates the gap condition q < 3p (p = " + num(c.p) +
                              ")"});
    }
  }
  if (!(c.mu >= 0.0 && c.mu < 2.0)) d.push_back({"integrand.mu", "mu must lie in [0, 2)"});
  if (c.mu == 0.0 && c.p < 2.0 && c.kind == "caccioppoli") {
    d.push_back({"integrand.mu", "mu = 0 with p < 2 is degenerate at the origin"});
  }
  if (!(c.nu > 0.0)) d.push_back({"integrand.nu", "nu must be positive"});
  if (!(c.nu_tilde >= 0.0)) d.push_back({"integrand.nu_tilde", "nu_tilde must be nonnegative"});
  if (c.kind == "caccioppoli" && !(c.nu_tilde > 0.0)) {
    d.push_back({"integrand.nu_tilde", "direct minimization needs nu_tilde > 0"});
  }

  if (!(c.domain.size > 0.0)) d.push_back({"domain", "radius or side must be positive"});
  const bool disc_only = c.kind == "prop2_scan" || c.kind == "prop2_bound" ||
                         c.kind == "theorem1_sweep" || c.kind == "caccioppoli" ||
                         c.kind == "slice_pick";
  if (disc_only && c.domain.shape != Domain::Shape::Disc) {
    d.push_back({"domain.shape", "experiment kind '" + c.kind + "' needs a disc"});
  }
  if (c.resolutions.empty()) d.push_back({"resolution.n", "at least one resolution is required"});
  for (int n : c.resolutions) {
    if (n < 8) d.push_back({"resolution.n", "resolution " + std::to_string(n) + " is below 8"});
  }

  if (c.kind == "theorem1_sweep") {
    check_schedule(d, "regularization.eps", c.eps_schedule);
    check_schedule(d, "regularization.delta", c.delta_schedule);
    if (c.eps_schedule.size() != c.delta_schedule.size()) {
      d.push_back({"regularization", "eps and delta schedules differ in length"});
    }
  }

  if (!is_boundary_family(c.boundary.family)) {
    d.push_back({"boundary.family", "unknown boundary family '" + c.boundary.family + "'"});
  }
  if (c.boundary.modes < 1) d.push_back({"boundary.modes", "must be at least 1"});
  if (!(c.boundary.bump_width > 0.0)) d.push_back({"boundary.width", "must be positive"});
  for (double a : c.amplitude_axis()) {
    if (!(a > 0.0)) d.push_back({"sweep.amplitude", "amplitudes must be positive"});
  }
  for (double l : c.lambda_axis()) {
    if (!(l >= 1.0)) d.push_back({"sweep.lambda", "contrast values must be >= 1"});
  }
  if (c.kind == "prop2_scan" && c.lambda_axis().size() < 3) {
    d.push_back({"sweep.lambda", "the contrast scan needs at least 3 values"});
  }
  if (c.trials < 1) d.push_back({"sweep.trials", "must be at least 1"});
  if (c.kind == "slice_pick" &&
      !(c.rho > 0.0 && c.rho < c.sigma && c.sigma <= c.domain.radius())) {
    d.push_back({"sweep.rho", "need 0 < rho < sigma <= domain radius"});
  }

  if (!(c.solver.residual_tolerance > 0.0)) d.push_back({"tolerances.residual", "must be positive"});
  if (!(c.solver.decrement_tolerance > 0.0)) {
    d.push_back({"tolerances.decrement", "must be positive"});
  }
  if (c.solver.max_iterations < 1) d.push_back({"tolerances.max_iterations", "must be at least 1"});
  if (!(c.slope_min < c.slope_max)) d.push_back({"tolerances.slope_min", "must be below slope_max"});
  if (c.budget && !(*c.budget > 0.0)) d.push_back({"tolerances.budget", "must be positive"});
  if (c.output_dir.empty()) d.push_back({"output.directory", "must not be empty"});
  return d;
}

}  // namespace pqlab
