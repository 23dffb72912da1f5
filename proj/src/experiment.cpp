#include "pqlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "pqlab/error.hpp"
#include "pqlab/estimates.hpp"
#include "pqlab/solver.hpp"

namespace pqlab {

bool RunResult::ok() const {
  return std::all_of(instances.begin(), instances.end(),
                     [](const InstanceStatus& s) { return s.status == "ok"; }) &&
         std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string to_csv(const Table& table) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(table.columns);
  for (const auto& row : table.rows) line(row);
  return out;
}

namespace {

using Record = std::map<std::string, double>;

struct Output {
  std::vector<std::pair<std::string, Record>> records;
  std::vector<EstimateReport> reports;
};

struct Instance {
  std::string key;
  std::function<void(Output&)> work;
};

const std::map<std::string, std::vector<std::string>>& table_columns() {
  static const std::map<std::string, std::vector<std::string>> columns{
      {"prop2_ratios.csv",
       {"lambda", "ratio", "resolution", "sup", "mean_square", "residual",
        "max_principle_violation"}},
      {"prop2_fit.csv", {"resolution", "slope", "intercept", "residual", "half_width", "count"}},
      {"contrast_bound.csv",
       {"resolution", "lambda", "trial", "ratio", "normalized", "residual",
        "max_principle_violation"}},
      {"theorem1.csv",
       {"resolution", "q", "amplitude", "k", "eps", "delta", "sigma", "mu_delta", "iterations",
        "residual", "energy", "lhs", "rhs", "implied", "mean_F", "term_1_over_p", "term_gap",
        "implied_pth_power"}},
      {"theorem1_fit.csv",
       {"resolution", "q", "slope", "slope_bound", "variation", "tail_spread", "count"}},
      {"caccioppoli.csv",
       {"resolution", "lhs", "rhs", "implied", "grad_linf", "iterations", "residual", "energy",
        "del_residual_1", "del_residual_2"}},
      {"interpolation_1d.csv", {"trial", "degree", "length", "lhs", "rhs", "implied", "pass"}},
      {"hole_filling.csv",
       {"trial", "theta", "alpha", "A", "B", "c", "lambda", "hypothesis_ok", "conclusion_ok",
        "verified"}},
      {"slice_pick.csv", {"resolution", "trial", "lhs", "rhs", "implied", "r_star"}},
  };
  return columns;
}

std::mt19937_64 instance_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> salt) {
  std::vector<std::uint32_t> words{std::uint32_t(seed), std::uint32_t(seed >> 32)};
  for (auto s : salt) {
    words.push_back(std::uint32_t(s));
    words.push_back(std::uint32_t(s >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  const std::size_t threads = std::min<std::size_t>(std::size_t(std::max(1, workers)), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::string key_of(std::initializer_list<std::pair<const char*, double>> parts) {
  std::string key;
  for (const auto& [name, value] : parts) {
    if (!key.empty()) key += ' ';
    key += std::string(name) + '=' + format_number(value);
  }
  return key;
}

double budget_or(const ExperimentConfig& c, double fallback) { return c.budget.value_or(fallback); }

Domain domain_of(const ExperimentConfig& c) {
  return c.domain.shape == Domain::Shape::Disc ? Domain::disc(c.domain.origin, c.domain.size)
                                               : Domain::square(c.domain.origin, c.domain.size);
}

void add_report(Output& out, EstimateReport report) { out.reports.push_back(std::move(report)); }

// --- instance plans --------------------------------------------------------

std::vector<Instance> plan_prop2_scan(const ExperimentConfig& c) {
  std::vector<Instance> plan;
  for (int n : c.resolutions) {
    for (double lambda : c.lambda_axis()) {
      plan.push_back({key_of({{"n", n}, {"lambda", lambda}}), [c, n, lambda](Output& out) {
                        const GridPtr grid = build_grid(domain_of(c), n);
                        const Prop2Row row = prop2_instance(lambda, grid);
                        out.records.emplace_back(
                            "prop2_ratios.csv",
                            Record{{"lambda", lambda},
                                   {"ratio", row.ratio.ratio},
                                   {"resolution", n},
                                   {"sup", row.ratio.sup},
                                   {"mean_square", row.ratio.mean_square},
                                   {"residual", row.residual},
                                   {"max_principle_violation", row.max_principle_violation}});
                      }});
    }
  }
  return plan;
}

BoundarySpec coefficient_spec(std::uint64_t seed) {
  BoundarySpec s;
  s.family = "random";
  s.modes = 3;
  s.seed = seed;
  return s;
}

std::vector<Instance> plan_prop2_bound(const ExperimentConfig& c) {
  std::vector<Instance> plan;
  const auto lambdas = c.lambda_axis();
  for (int n : c.resolutions) {
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      for (int trial = 0; trial < c.trials; ++trial) {
        const double lambda = lambdas[li];
        plan.push_back(
            {key_of({{"n", n}, {"lambda", lambda}, {"trial", trial}}),
             [c, n, lambda, li, trial](Output& out) {
               // Seeds do not depend on n so every resolution sees the same continuum problem.
               auto rng = instance_rng(c.seed, {1, li, std::uint64_t(trial)});
               const auto a11 = boundary_function(coefficient_spec(rng()));
               const auto a22 = boundary_function(coefficient_spec(rng()));
               BoundarySpec data_spec = c.boundary;
               data_spec.seed = rng();
               const auto data_fn = boundary_function(data_spec);

               const GridPtr grid = build_grid(domain_of(c), n);
               Eigen::VectorXd d1(grid->num_nodes()), d2(grid->num_nodes());
               for (Index i = 0; i < grid->num_nodes(); ++i) {
                 const Vec2 x = grid->node(i);
                 d1(i) = std::clamp(1.0 + (lambda - 1.0) * 0.5 * (1.0 + a11(x)), 1.0, lambda);
                 d2(i) = std::clamp(1.0 + (lambda - 1.0) * 0.5 * (1.0 + a22(x)), 1.0, lambda);
               }
               const auto coeff = CoefficientField::diagonal(grid, d1, d2, 1.0, lambda);
               const auto data = ScalarField::from_function(grid, data_fn);
               const auto [v, report] = solve_linear({data, coeff});
               const ContrastRatio ratio = linfty_l2_parts(v);
               const double scale = std::max(1.0, v.values().cwiseAbs().maxCoeff());
               out.records.emplace_back(
                   "contrast_bound.csv",
                   Record{{"resolution", n},
                          {"lambda", lambda},
                          {"trial", trial},
                          {"ratio", ratio.ratio},
                          {"normalized", ratio.ratio / std::pow(lambda, 0.25)},
                          {"residual", report.residual},
                          {"max_principle_violation", report.max_principle_violation / scale}});
             }});
      }
    }
  }
  return plan;
}

std::vector<Instance> plan_theorem1(const ExperimentConfig& c) {
  std::vector<Instance> plan;
  for (int n : c.resolutions) {
    for (double q : c.q_axis()) {
      for (double amplitude : c.amplitude_axis()) {
        plan.push_back({key_of({{"n", n}, {"q", q}, {"A", amplitude}}), [c, n, q,
                                                                          amplitude](Output& out) {
          const Domain domain = domain_of(c);
          const GridPtr target = build_grid(domain, n);
          const double h = target->spacing();
          BoundarySpec spec = c.boundary;
          spec.amplitude = amplitude;
          const auto data_fn = boundary_function(spec);
          const Integrand F = make_model_pq(c.p, q, c.mu, c.nu, c.nu_tilde);
          const Ball ball{target->center(), target->radius()};

          std::optional<ScalarField> previous;
          EstimateReport last;
          for (std::size_t k = 0; k < c.eps_schedule.size(); ++k) {
            const double eps = c.eps_schedule[k], delta = c.delta_schedule[k];
            const GridPtr source =
                build_grid_with_spacing(Domain::disc(domain.center(), domain.radius() + eps + 2 * h), h);
            const ScalarField u_bar =
                mollify_field(ScalarField::from_function(source, data_fn), eps, target);
            const double sigma =
                sigma_eps(eps, std::pow(gradient_lp_norm(u_bar, q, Region::whole()), q));
            const Integrand F_delta = mollify_integrand(F, delta);
            const Integrand F_reg = regularize(F_delta, eps, delta, sigma, c.mu, q);
            const auto [u, report] = minimize({u_bar, F_reg}, c.solver, previous);
            previous = u;

            GrowthParams params = F.params();
            last = check_theorem1(u, F, params, ball, budget_or(c, budgets::theorem1));
            last.params["eps"] = eps;
            last.params["delta"] = delta;
            last.params["amplitude"] = amplitude;
            out.records.emplace_back(
                "theorem1.csv",
                Record{{"resolution", n},
                       {"q", q},
                       {"amplitude", amplitude},
                       {"k", double(k)},
                       {"eps", eps},
                       {"delta", delta},
                       {"sigma", sigma},
                       {"mu_delta", F_delta.params().mu},
                       {"iterations", report.iterations},
                       {"residual", report.residual},
                       {"energy", report.final_energy},
                       {"lhs", last.lhs},
                       {"rhs", last.rhs},
                       {"implied", last.implied_constant},
                       {"mean_F", last.terms["mean_F"]},
                       {"term_1_over_p", last.terms["term_1_over_p"]},
                       {"term_gap", last.terms["term_gap"]},
                       {"implied_pth_power", last.terms["implied_pth_power"]}});
          }
          add_report(out, last);
        }});
      }
    }
  }
  return plan;
}

std::vector<Instance> plan_caccioppoli(const ExperimentConfig& c) {
  std::vector<Instance> plan;
  for (int n : c.resolutions) {
    plan.push_back({key_of({{"n", n}}), [c, n](Output& out) {
                      const GridPtr grid = build_grid(domain_of(c), n);
                      const Integrand F = make_model_pq(c.p, c.q, c.mu, c.nu, c.nu_tilde);
                      const auto data = ScalarField::from_function(grid, boundary_function(c.boundary));
                      const auto [u, report] = minimize({data, F}, c.solver);
                      const Ball ball{grid->center(), 0.5 * grid->radius()};
                      EstimateReport r =
                          check_caccioppoli(u, F, ball, budget_or(c, budgets::caccioppoli));
                      out.records.emplace_back(
                          "caccioppoli.csv",
                          Record{{"resolution", n},
                                 {"lhs", r.lhs},
                                 {"rhs", r.rhs},
                                 {"implied", r.implied_constant},
                                 {"grad_linf", r.terms["grad_linf"]},
                                 {"iterations", report.iterations},
                                 {"residual", report.residual},
                                 {"energy", report.final_energy},
                                 {"del_residual_1", differentiated_el_check(u, F, 0)},
                                 {"del_residual_2", differentiated_el_check(u, F, 1)}});
                      add_report(out, std::move(r));
                    }});
  }
  return plan;
}

std::vector<Instance> plan_interpolation(const ExperimentConfig& c) {
  std::vector<Instance> plan;
  for (int trial = 0; trial < c.trials; ++trial) {
    plan.push_back({key_of({{"trial", trial}}), [c, trial](Output& out) {
                      auto rng = instance_rng(c.seed, {2, std::uint64_t(trial)});
                      std::uniform_int_distribution<int> degree_dist(0, 20);
                      std::uniform_real_distribution<double> coef(-1.0, 1.0), len(0.5, 2.0);
                      const int degree = degree_dist(rng);
                      const double length = len(rng);
                      Eigen::VectorXd a(degree + 1), b(degree + 1);
                      for (int k = 0; k <= degree; ++k) {
                        a(k) = coef(rng);
                        b(k) = coef(rng);
                      }
                      constexpr int samples = 2049;
                      const double h = length / (samples - 1);
                      Eigen::VectorXd u(samples);
                      for (int i = 0; i < samples; ++i) {
                        const double w = 2.0 * std::numbers::pi * i * h / length;
                        double sum = 0.0;
                        for (int k = 0; k <= degree; ++k) {
                          sum += a(k) * std::cos(k * w) + b(k) * std::sin(k * w);
                        }
                        u(i) = sum;
                      }
                      EstimateReport r = check_interpolation_1d(u, h);
                      out.records.emplace_back("interpolation_1d.csv",
                                               Record{{"trial", trial},
                                                      {"degree", degree},
                                                      {"length", length},
                                                      {"lhs", r.lhs},
                                                      {"rhs", r.rhs},
                                                      {"implied", r.implied_constant},
                                                      {"pass", r.pass ? 1.0 : 0.0}});
                      add_report(out, std::move(r));
                    }});
  }
  return plan;
}

std::vector<Instance> plan_hole_filling(const ExperimentConfig& c) {
  std::vector<Instance> plan;
  for (int trial = 0; trial < c.trials; ++trial) {
    plan.push_back({key_of({{"trial", trial}}), [c, trial](Output& out) {
                      auto rng = instance_rng(c.seed, {3, std::uint64_t(trial)});
                      auto U = [&rng](double lo, double hi) {
                        return std::uniform_real_distribution<double>(lo, hi)(rng);
                      };
                      const double theta = U(0.0, 0.95), alpha = U(0.25, 4.0);
                      const double A = U(0.0, 5.0), B = U(0.0, 5.0), kappa = U(0.0, 1.0);
                      const double rho = U(0.0, 1.0), L = U(0.1, 2.0), d = L * U(0.01, 0.5);
                      // Decreasing profile bounded by A·L^{−α} plus a constant below
                      // B/(1−θ): satisfies the hypothesis for every s < t.
                      auto Z = [=](double s) {
                        return A * std::pow(d / L, alpha) * std::pow(s - rho + d, -alpha) +
                               kappa * B / (1.0 - theta);
                      };
                      const HoleFilling hf = hole_filling(theta, alpha, A, B, Z, rho, rho + L);
                      out.records.emplace_back("hole_filling.csv",
                                               Record{{"trial", trial},
                                                      {"theta", theta},
                                                      {"alpha", alpha},
                                                      {"A", A},
                                                      {"B", B},
                                                      {"c", hf.c},
                                                      {"lambda", hf.lambda},
                                                      {"hypothesis_ok", hf.hypothesis_ok},
                                                      {"conclusion_ok", hf.conclusion_ok},
                                                      {"verified", hf.verified}});
                    }});
  }
  return plan;
}

std::vector<Instance> plan_slice_pick(const ExperimentConfig& c) {
  std::vector<Instance> plan;
  for (int n : c.resolutions) {
    for (int trial = 0; trial < c.trials; ++trial) {
      plan.push_back({key_of({{"n", n}, {"trial", trial}}), [c, n, trial](Output& out) {
                        auto rng = instance_rng(c.seed, {4, std::uint64_t(trial)});
                        BoundarySpec spec = c.boundary;
                        spec.seed = rng();
                        const GridPtr grid = build_grid(domain_of(c), n);
                        const auto u = ScalarField::from_function(grid, boundary_function(spec));
                        EstimateReport r =
                            check_slice_pick(u, c.rho, c.sigma, budget_or(c, budgets::slice_pick));
                        out.records.emplace_back("slice_pick.csv",
                                                 Record{{"resolution", n},
                                                        {"trial", trial},
                                                        {"lhs", r.lhs},
                                                        {"rhs", r.rhs},
                                                        {"implied", r.implied_constant},
                                                        {"r_star", r.terms["r_star"]}});
                        add_report(out, std::move(r));
                      }});
    }
  }
  return plan;
}

std::vector<Instance> plan(const ExperimentConfig& c) {
  if (c.kind == "prop2_scan") return plan_prop2_scan(c);
  if (c.kind == "prop2_bound") return plan_prop2_bound(c);
  if (c.kind == "theorem1_sweep") return plan_theorem1(c);
  if (c.kind == "caccioppoli") return plan_caccioppoli(c);
  if (c.kind == "interpolation_1d") return plan_interpolation(c);
  if (c.kind == "hole_filling") return plan_hole_filling(c);
  if (c.kind == "slice_pick") return plan_slice_pick(c);
  fail(ErrorKind::ConfigInvalid, "unknown experiment kind '" + c.kind + "'");
}

// --- merging and verdicts --------------------------------------------------

std::vector<Record> records_of(const std::vector<Output>& outputs, const std::string& table) {
  std::vector<Record> out;
  for (const auto& o : outputs) {
    for (const auto& [name, rec] : o.records) {
      if (name == table) out.push_back(rec);
    }
  }
  return out;
}

void add_row(RunResult& result, const std::string& table, const Record& rec) {
  Table& t = result.tables[table];
  if (t.columns.empty()) t.columns = table_columns().at(table);
  std::vector<std::string> row;
  for (const auto& col : t.columns) {
    const auto it = rec.find(col);
    row.push_back(it == rec.end() ? std::string() : format_number(it->second));
  }
  t.rows.push_back(std::move(row));
}

void verdict(RunResult& result, std::string name, bool pass, std::string detail) {
  result.verdicts.push_back({std::move(name), pass, std::move(detail)});
}

// Groups records by the value of `key`, preserving first-seen order.
std::vector<std::pair<double, std::vector<Record>>> group_by(const std::vector<Record>& recs,
                                                             const std::string& key) {
  std::vector<std::pair<double, std::vector<Record>>> groups;
  for (const auto& r : recs) {
    const double v = r.at(key);
    auto it = std::find_if(groups.begin(), groups.end(), [v](const auto& g) { return g.first == v; });
    if (it == groups.end()) {
      groups.push_back({v, {}});
      it = groups.end() - 1;
    }
    it->second.push_back(r);
  }
  return groups;
}

double max_of(const std::vector<Record>& recs, const std::string& key) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& r : recs) m = std::max(m, r.at(key));
  return m;
}

double min_of(const std::vector<Record>& recs, const std::string& key) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : recs) m = std::min(m, r.at(key));
  return m;
}

void stability_verdict(RunResult& result, const std::string& name,
                       const std::vector<std::pair<double, double>>& per_resolution,
                       double factor) {
  if (per_resolution.size() < 2) return;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::string detail;
  for (const auto& [n, v] : per_resolution) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    detail += "n=" + format_number(n) + ": " + format_number(v) + "; ";
  }
  const double ratio = hi / lo;
  verdict(result, name, std::isfinite(ratio) && ratio < factor,
          detail + "max/min " + format_number(ratio) + " (limit " + format_number(factor) + ")");
}

void conclude(const ExperimentConfig& c, const std::vector<Output>& outputs, RunResult& result) {
  std::vector<std::string>& S = result.summary;
  if (c.kind == "prop2_scan") {
    for (const auto& [n, recs] : group_by(records_of(outputs, "prop2_ratios.csv"), "resolution")) {
      std::vector<std::pair<double, double>> pairs;
      for (const auto& r : recs) pairs.emplace_back(r.at("lambda"), r.at("ratio"));
      const std::string name = "prop2 slope n=" + format_number(n);
      try {
        const ExponentFit fit = exponent_fit(pairs);
        add_row(result, "prop2_fit.csv",
                {{"resolution", n},
                 {"slope", fit.slope},
                 {"intercept", fit.intercept},
                 {"residual", fit.residual},
                 {"half_width", fit.half_width},
                 {"count", double(pairs.size())}});
        S.push_back("fitted slope (n=" + format_number(n) + "): " + format_number(fit.slope) +
                    " +/- " + format_number(fit.half_width));
        verdict(result, name, fit.slope >= c.slope_min && fit.slope <= c.slope_max,
                "slope " + format_number(fit.slope) + " window [" + format_number(c.slope_min) +
                    ", " + format_number(c.slope_max) + "]");
      } catch (const Error& e) {
        verdict(result, name, false, e.what());
      }
    }
  } else if (c.kind == "prop2_bound") {
    const auto recs = records_of(outputs, "contrast_bound.csv");
    std::vector<std::pair<double, double>> per_n;
    for (const auto& [n, group] : group_by(recs, "resolution")) {
      per_n.emplace_back(n, max_of(group, "normalized"));
      S.push_back("max ratio/lambda^(1/4) (n=" + format_number(n) + "): " +
                  format_number(per_n.back().second));
    }
    if (!recs.empty()) {
      const double worst = max_of(recs, "normalized");
      const double budget = budget_or(c, budgets::contrast);
      verdict(result, "contrast bound", worst <= budget,
              "max " + format_number(worst) + " budget " + format_number(budget));
      const double mp = max_of(recs, "max_principle_violation");
      verdict(result, "maximum principle", mp <= 1e-12, "max relative violation " + format_number(mp));
    }
    stability_verdict(result, "contrast bound stability", per_n, 2.0);
  } else if (c.kind == "theorem1_sweep") {
    const auto recs = records_of(outputs, "theorem1.csv");
    const double last_k = recs.empty() ? 0.0 : max_of(recs, "k");
    for (const auto& [n, by_n] : group_by(recs, "resolution")) {
      for (const auto& [q, by_q] : group_by(by_n, "q")) {
        std::vector<Record> finals, previous;
        for (const auto& r : by_q) {
          if (r.at("k") == last_k) finals.push_back(r);
          if (r.at("k") == last_k - 1) previous.push_back(r);
        }
        double tail = 0.0;
        for (const auto& f : finals) {
          for (const auto& p : previous) {
            if (p.at("amplitude") == f.at("amplitude")) {
              tail = std::max(tail, std::abs(f.at("lhs") - p.at("lhs")) / f.at("lhs"));
            }
          }
        }
        const double bound = std::max(1.0 / c.p, 2.0 / (3.0 * c.p - q)) + 0.05;
        const double variation = max_of(finals, "implied") / min_of(finals, "implied");
        Record fit_row{{"resolution", n},
                       {"q", q},
                       {"slope_bound", bound},
                       {"variation", variation},
                       {"tail_spread", tail},
                       {"count", double(finals.size())}};
        const std::string tag = " n=" + format_number(n) + " q=" + format_number(q);
        if (finals.size() >= 3) {
          std::vector<std::pair<double, double>> pairs;
          for (const auto& f : finals) pairs.emplace_back(f.at("mean_F"), f.at("lhs"));
          try {
            const ExponentFit fit = exponent_fit(pairs);
            fit_row["slope"] = fit.slope;
            verdict(result, "theorem1 exponent" + tag, fit.slope <= bound,
                    "slope " + format_number(fit.slope) + " bound " + format_number(bound));
          } catch (const Error& e) {
            verdict(result, "theorem1 exponent" + tag, false, e.what());
          }
        }
        if (finals.size() >= 2) {
          verdict(result, "theorem1 implied-constant variation" + tag, variation < 2.0,
                  "max/min " + format_number(variation) + " (limit 2)");
        }
        add_row(result, "theorem1_fit.csv", fit_row);
        S.push_back("theorem1" + tag + ": implied variation " + format_number(variation) +
                    ", schedule tail spread " + format_number(tail));
      }
    }
  } else if (c.kind == "caccioppoli") {
    std::vector<std::pair<double, double>> per_n;
    for (const auto& r : records_of(outputs, "caccioppoli.csv")) {
      per_n.emplace_back(r.at("resolution"), r.at("implied"));
    }
    stability_verdict(result, "caccioppoli stability", per_n, 2.0);
  } else if (c.kind == "interpolation_1d") {
    const auto recs = records_of(outputs, "interpolation_1d.csv");
    const auto violations = std::count_if(recs.begin(), recs.end(),
                                          [](const Record& r) { return r.at("pass") == 0.0; });
    verdict(result, "interpolation violations", violations == 0,
            std::to_string(violations) + " of " + std::to_string(recs.size()));
  } else if (c.kind == "hole_filling") {
    const auto recs = records_of(outputs, "hole_filling.csv");
    const auto failures = std::count_if(recs.begin(), recs.end(),
                                        [](const Record& r) { return r.at("verified") == 0.0; });
    verdict(result, "hole filling", failures == 0,
            std::to_string(failures) + " unverified of " + std::to_string(recs.size()));
  } else if (c.kind == "slice_pick") {
    std::vector<std::pair<double, double>> per_n;
    for (const auto& [n, group] : group_by(records_of(outputs, "slice_pick.csv"), "resolution")) {
      per_n.emplace_back(n, max_of(group, "implied"));
    }
    stability_verdict(result, "slice pick stability", per_n, 1.5);
  }

  // Budget verdicts of the individual estimate reports.
  std::map<std::string, std::pair<double, int>> worst;  // name -> (max implied, failures)
  for (const auto& r : result.reports) {
    auto& w = worst.try_emplace(r.name, 0.0, 0).first->second;
    w.first = std::max(w.first, r.implied_constant);
    if (!r.pass) ++w.second;
  }
  for (const auto& [name, w] : worst) {
    S.push_back("max implied constant [" + name + "]: " + format_number(w.first));
    if (name != "interpolation_1d") {
      verdict(result, name + " budget", w.second == 0,
              std::to_string(w.second) + " reports above budget");
    }
  }
}

}  // namespace

RunResult run(const ExperimentConfig& config) {
  const auto diagnostics = validate(config);
  if (!diagnostics.empty()) {
    std::string message;
    for (const auto& d : diagnostics) message += "\n  " + d.field + ": " + d.message;
    fail(ErrorKind::ConfigInvalid, "invalid config " + config.source + ":" + message);
  }
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Instance> instances = plan(config);

  RunResult result;
  result.config = config;
  std::vector<Output> outputs(instances.size());
  result.instances.resize(instances.size());
  parallel_for(instances.size(), config.workers, [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    InstanceStatus& status = result.instances[i];
    status.key = instances[i].key;
    try {
      instances[i].work(outputs[i]);
      status.status = "ok";
    } catch (const Error& e) {
      outputs[i] = {};
      status.status = "error:" + std::string(to_string(e.kind()));
      status.message = e.what();
    } catch (const std::exception& e) {
      outputs[i] = {};
      status.status = "error:Unexpected";
      status.message = e.what();
    }
    status.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });

  for (const auto& o : outputs) {
    for (const auto& [table, rec] : o.records) add_row(result, table, rec);
    result.reports.insert(result.reports.end(), o.reports.begin(), o.reports.end());
  }
  conclude(config, outputs, result);
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void emit(RunResult& result, const std::string& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) fail(ErrorKind::IoFailure, "cannot create " + directory + ": " + ec.message());

  auto write = [&](const std::string& name, const std::string& content) {
    const fs::path path = fs::path(directory) / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) fail(ErrorKind::IoFailure, "cannot write " + path.string());
    result.files.push_back(path.string());
  };

  result.files.clear();
  for (const auto& [name, table] : result.tables) write(name, to_csv(table));

  const ExperimentConfig& c = result.config;
  std::ostringstream summary;
  summary << "experiment: " << c.name << " (" << c.kind << ")\n";
  summary << "config: " << c.source << "\n";
  summary << "seed: " << c.seed << "\n";
  const auto ok_count = std::count_if(result.instances.begin(), result.instances.end(),
                                      [](const InstanceStatus& s) { return s.status == "ok"; });
  summary << "instances: " << ok_count << " ok of " << result.instances.size() << "\n";
  for (const auto& s : result.instances) {
    if (s.status != "ok") summary << "  " << s.key << ": " << s.status << " " << s.message << "\n";
  }
  for (const auto& line : result.summary) summary << line << "\n";
  for (const auto& v : result.verdicts) {
    summary << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << v.detail << "\n";
  }
  summary << "overall: " << (result.ok() ? "PASS" : "FAIL") << "\n";
  write("summary.txt", summary.str());

  nlohmann::ordered_json manifest;
  manifest["tool"] = "pqlab";
  manifest["version"] = kToolVersion;
  manifest["config_file"] = c.source;
  nlohmann::ordered_json echo = nlohmann::ordered_json::object();
  for (const auto& [section, entries] : c.echo) {
    for (const auto& [key, value] : entries) echo[section][key] = value;
  }
  manifest["config"] = echo;
  manifest["effective"] = {{"seed", c.seed},
                           {"workers", c.workers},
                           {"resolutions", c.resolutions},
                           {"output_directory", directory}};
  nlohmann::ordered_json instances = nlohmann::ordered_json::array();
  for (const auto& s : result.instances) {
    nlohmann::ordered_json item{{"key", s.key}, {"status", s.status}, {"wall_time", s.wall_time}};
    if (!s.message.empty()) item["message"] = s.message;
    instances.push_back(item);
  }
  manifest["instances"] = instances;
  nlohmann::ordered_json verdicts = nlohmann::ordered_json::array();
  for (const auto& v : result.verdicts) {
    verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  }
  manifest["verdicts"] = verdicts;
  std::vector<std::string> files = result.files;
  files.push_back((fs::path(directory) / "manifest.json").string());
  manifest["files"] = files;
  manifest["wall_time"] = result.wall_time;
  manifest["ok"] = result.ok();
  write("manifest.json", manifest.dump(2) + "\n");
}

}  // namespace pqlab
