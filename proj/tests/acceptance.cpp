#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <fmt/format.h>

#include "cornerfem/benchmark.hpp"
#include "cornerfem/errors.hpp"
#include "cornerfem/mesh_io.hpp"
#include "cornerfem/solver.hpp"

using namespace cornerfem;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double reference_h = 0.022097;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += ok ? what : "[x] " + what;
  }
};

struct Config {
  double omega;
  double mu;
  double table_error;
  double lo;
  double hi;
};

// Criteria 1-5, in order.
const Config configs[] = {
    {0.75 * pi, 0.6, 9.38e-05, 1.85, 2.05}, {0.75 * pi, 1.0, 1.09e-04, 1.20, 1.40},
    {1.5 * pi, 0.3, 1.44e-03, 1.80, 2.05},  {1.5 * pi, 0.6, 1.77e-03, 1.02, 1.22},
    {1.5 * pi, 1.0, 6.07e-03, 0.60, 0.74},
};
const double radii[] = {1.0, 0.5};

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

class Studies {
 public:
  const ConvergenceReport& get(double omega, double mu, double radius, ProblemKind problem) {
    const auto key = std::make_tuple(omega, mu, radius, problem);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      StudySettings s;
      s.omega = omega;
      s.mu = {mu};
      s.radius = {radius};
      s.problem = problem;
      s.workers = workers();
      it = cache_.emplace(key, run_convergence_study(s)).first;
    }
    return it->second;
  }

 private:
  std::map<std::tuple<double, double, double, ProblemKind>, ConvergenceReport> cache_;
};

std::string name(const Config& c) {
  return fmt::format("omega={}pi mu={}", c.omega / pi, c.mu);
}

double finest(const std::optional<double>& eoc) { return eoc.value_or(std::nan("")); }

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

Outcome eoc_band(Studies& studies, const Config& c) {
  Outcome o;
  for (double radius : radii) {
    const auto& report = studies.get(c.omega, c.mu, radius, ProblemKind::linear);
    const double e = finest(report.rows.back().eoc_linf);
    o.require(within(e, c.lo, c.hi),
              fmt::format("{} R={} eoc_linf={:.3f} in [{}, {}]", name(c), radius, e, c.lo, c.hi));
  }
  return o;
}

Outcome l2_rate(Studies& studies) {
  Outcome o;
  for (const auto* c : {&configs[0], &configs[2]}) {
    for (double radius : radii) {
      const auto& report = studies.get(c->omega, c->mu, radius, ProblemKind::linear);
      const double e = finest(report.rows.back().eoc_l2);
      o.require(within(e, 1.85, 2.10),
                fmt::format("{} R={} eoc_l2={:.3f} in [1.85, 2.10]", name(*c), radius, e));
    }
  }
  return o;
}

Outcome error_magnitude(Studies& studies) {
  Outcome o;
  for (const auto& c : configs) {
    const auto& rows = studies.get(c.omega, c.mu, 1.0, ProblemKind::linear).rows;
    const auto row = std::min_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      return std::abs(a.h - reference_h) < std::abs(b.h - reference_h);
    });
    const double ratio = row->err_linf / c.table_error;
    o.require(within(ratio, 0.25, 4.0),
              fmt::format("{} h={:.4g} err={:.3e} ref={:.2e} ratio={:.2f}", name(c), row->h,
                          row->err_linf, c.table_error, ratio));
  }
  return o;
}

Outcome semilinear(Studies& studies) {
  Outcome o;
  const auto& rows = studies.get(1.5 * pi, 0.3, 1.0, ProblemKind::semilinear_cubic).rows;
  const double e = finest(rows.back().eoc_linf);
  o.require(within(e, 1.80, 2.05), fmt::format("eoc_linf={:.3f} in [1.80, 2.05]", e));
  std::size_t newton = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& row : rows) {
    newton = std::max(newton, row.newton_iters);
    const double ratio = row.supercloseness_ratio.value_or(std::nan(""));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  o.require(newton >= 1 && newton <= 10, fmt::format("max newton iterations={} <= 10", newton));
  o.require(lo > 0.0 && hi / lo < 3.0,
            fmt::format("supercloseness in [{:.3f}, {:.3f}], spread {:.2f} < 3", lo, hi, hi / lo));
  return o;
}

TriangleMesh study_mesh(double omega, double mu, int level) {
  StudySettings s;
  s.omega = omega;
  s.mu = {mu};
  return build_study_mesh(build_sector_domain(omega), s, level);
}

bool patch_tests() {
  const BoundaryField no_flux = [](Point, Point) { return 0.0; };
  for (double omega : {0.75 * pi, 1.5 * pi}) {
    for (double mu : {0.3, 0.6, 1.0}) {
      const auto mesh = study_mesh(omega, mu, 4);
      const auto constant = solve_linear(mesh, {[](Point) { return 1.0; }, no_flux});
      for (double v : constant.y) {
        if (std::abs(v - 1.0) > 1e-10) return false;
      }
      const auto linear =
          solve_linear(mesh, {[](Point x) { return x.x; }, [](Point, Point n) { return n.x; }});
      for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        if (std::abs(linear.y[i] - mesh.nodes[i].x) > 1e-10) return false;
      }
    }
  }
  return true;
}

bool symmetric_positive_definite() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (const auto& c : configs) {
    const auto a = assemble_system(study_mesh(c.omega, c.mu, 5));
    double scale = 0.0;
    for (double v : a.values) scale = std::max(scale, std::abs(v));
    if (!structurally_symmetric(a) || max_asymmetry(a) > 1e-14 * scale) return false;
    for (double d : a.diagonal()) {
      if (!(d > 0.0)) return false;
    }
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> x(a.n);
      for (auto& v : x) v = dist(rng);
      if (!(dot(x, spmv(a, x)) > 0.0)) return false;
    }
  }
  return true;
}

bool grading_audits() {
  for (const auto& c : configs) {
    if (c.mu == 1.0) continue;
    for (double radius : radii) {
      StudySettings s;
      s.omega = c.omega;
      s.mu = {c.mu};
      s.radius = {radius};
      const auto domain = build_sector_domain(c.omega);
      const auto specs = grading_specs(domain, s);
      for (int level = s.first_level; level <= s.last_level; ++level) {
        const auto mesh = build_study_mesh(domain, s, level);
        if (!audit_grading(mesh, specs.front()).satisfied) return false;
      }
    }
  }
  return true;
}

bool quadrature_exactness() {
  const auto factorial = [](int n) { return std::tgamma(n + 1.0); };
  for (int degree = 0; degree <= 12; ++degree) {
    const auto rule = triangle_rule(degree);
    for (int a = 0; a <= degree; ++a) {
      for (int b = 0; a + b <= degree; ++b) {
        double sum = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
          sum += rule.weights[q] * std::pow(rule.points[q][1], a) * std::pow(rule.points[q][2], b);
        }
        const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        if (std::abs(sum - exact) > 1e-14) return false;
      }
    }
    const auto edge = edge_rule(degree);
    for (int k = 0; k <= degree; ++k) {
      double sum = 0.0;
      for (std::size_t q = 0; q < edge.size(); ++q) sum += edge.weights[q] * std::pow(edge.points[q], k);
      if (std::abs(sum - 1.0 / (k + 1)) > 1e-14) return false;
    }
  }
  return true;
}

bool eoc_properties() {
  const auto close = [](std::optional<double> a, std::optional<double> b) {
    return a && b && std::abs(*a - *b) <= 1e-12 * std::max(1.0, std::abs(*b));
  };
  return close(eoc(1.0, 0.25, 0.2, 0.1), 2.0) &&
         close(eoc(3.0, 2.0, 0.4, 0.1), eoc(2.0, 3.0, 0.1, 0.4)) &&
         close(eoc(2.0, 3.0, 0.4, 0.1), -*eoc(3.0, 2.0, 0.4, 0.1)) &&
         close(eoc(7.0 * 3.0, 7.0 * 2.0, 0.4, 0.1), eoc(3.0, 2.0, 0.4, 0.1)) &&
         std::abs(*eoc(1.09e-4, 4.50e-5, 0.022097, 0.011049) - 1.276) < 1e-3 &&
         !eoc(0.0, 1.0, 0.2, 0.1).has_value();
}

bool mesh_round_trip() {
  for (const auto& c : configs) {
    const auto mesh = study_mesh(c.omega, c.mu, 4);
    std::stringstream buffer;
    write_mesh(buffer, mesh);
    const auto back = read_mesh(buffer);
    if (back.triangles != mesh.triangles || back.num_nodes() != mesh.num_nodes()) return false;
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
      if (back.nodes[i].x != mesh.nodes[i].x || back.nodes[i].y != mesh.nodes[i].y) return false;
    }
    if (back.boundary_edges.size() != mesh.boundary_edges.size()) return false;
    for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
      if (back.boundary_edges[e].nodes != mesh.boundary_edges[e].nodes ||
          back.boundary_edges[e].tag != mesh.boundary_edges[e].tag) {
        return false;
      }
    }
  }
  return true;
}

Outcome invariant_suite() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const std::pair<const char*, std::function<bool()>> checks[] = {
      {"patch tests", patch_tests},
      {"symmetry/SPD", symmetric_positive_definite},
      {"grading audit", grading_audits},
      {"quadrature exactness", quadrature_exactness},
      {"EOC properties", eoc_properties},
      {"mesh round-trip", mesh_round_trip},
  };
  for (const auto& [label, check] : checks) {
    bool ok = false;
    try {
      ok = check();
    } catch (const std::exception& e) {
      std::fprintf(stderr, "%s: %s\n", label, e.what());
    }
    o.require(ok, label);
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(seconds <= 30.0, fmt::format("{:.1f} s <= 30 s", seconds));
  return o;
}

}  // namespace

int main() {
  Studies studies;
  std::vector<std::function<Outcome()>> criteria;
  for (const auto& c : configs) criteria.emplace_back([&studies, &c] { return eoc_band(studies, c); });
  criteria.emplace_back([&studies] { return l2_rate(studies); });
  criteria.emplace_back([&studies] { return error_magnitude(studies); });
  criteria.emplace_back([&studies] { return semilinear(studies); });
  criteria.emplace_back(invariant_suite);

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = fmt::format("error: {}", e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s criterion %zu: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, o.detail.c_str(),
                seconds);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
