#include "arom/problem.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace arom {

namespace {

void require(bool ok, const std::string& key, const std::string& rule) {
  if (!ok)
    throw std::invalid_argument(key + ": " + rule);
}

} // namespace

void AromConfig::validate() const {
  require(preset == "sod" || preset == "implosion", "problem.preset",
          "unknown preset '" + preset + "' (expected sod or implosion)");
  require(cells[0] >= 2, "problem.cells", "need at least 2 cells along x");
  require(preset == "sod" ? cells[1] == 1 : cells[1] >= 2, "problem.cells",
          preset == "sod" ? "sod is one-dimensional" : "need at least 2 cells along y");
  require(final_time > 0.0, "problem.final_time", "must be positive");
  require(steps >= 1, "problem.steps", "must be at least 1");
  require(entropy_fix >= 0.0, "problem.entropy_fix", "must be non-negative");
  require(bdf_order == 1 || bdf_order == 2, "arom.bdf_order", "must be 1 or 2");
  require(w >= bdf_order + 1, "arom.w", "w >= BDF order + 1 is required");
  require(m >= 1, "arom.m", "must be at least 1");
  require(m <= w, "arom.m", "m <= w is required");
  require(z >= 1, "arom.z", "must be at least 1 or inf");
  require(delta > 0.0 && delta <= 1.0, "arom.delta", "must lie in (0, 1]");
  require(n_p >= m, "arom.n_p", "n_p >= m is required");
  require(n_p <= cells[0] * cells[1], "arom.n_p", "cannot exceed the number of cells");
  require(steps >= w, "problem.steps", "steps >= w is required");
  require(pod_rel_tol >= 0.0, "arom.pod_rel_tol", "must be non-negative");
  require(pod_abs_tol >= 0.0, "arom.pod_abs_tol", "must be non-negative");
  require(newton.jacobian_reuse >= 1, "newton.jacobian_reuse", "must be at least 1");
  require(newton.linear_tolerance > 0.0, "newton.linear_tolerance", "must be positive");
  require(sub.eps_y > 0.0, "subiteration.eps_y", "must be positive");
  require(sub.j_max >= 1, "subiteration.j_max", "must be at least 1");
  require(newton.tolerance > 0.0, "newton.tolerance", "must be positive");
  require(newton.max_iterations >= 1, "newton.max_iterations", "must be at least 1");
  try {
    filter.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("filter.") + e.what());
  }
}

AromConfig preset_config(const std::string& name) {
  AromConfig c;
  c.preset = name;
  if (name == "sod") {
    c.cells = {499, 1};
    c.final_time = 0.2;
    c.steps = 999;
    c.w = 5;
    c.m = 4;
    c.z = kNeverPeriod;
    c.delta = 0.80;
    c.n_p = 2 * c.m;
    c.newton.tolerance = 1e-10;
  } else if (name == "implosion") {
    c.cells = {100, 100};
    c.final_time = 0.5;
    c.steps = 1650;
    c.w = 6;
    c.m = 4;
    c.z = 7;
    c.delta = 0.90;
    c.n_p = 23;
    c.newton.tolerance = 1e-8;
  } else {
    throw std::invalid_argument("problem.preset: unknown preset '" + name +
                                "' (expected sod or implosion)");
  }
  return c;
}

Problem make_problem(const AromConfig& config) {
  Problem p;
  p.name = config.preset;
  p.gas.gamma = 1.4;
  p.euler.limiting = config.limiting;
  p.euler.entropy_fix = config.entropy_fix;
  if (config.preset == "sod") {
    p.mesh = Mesh::line(0.0, 1.0, config.cells[0]);
    p.boundary = BoundarySpec::all(BoundaryKind::DirichletFromIC);
    RiemannData rd;
    rd.left.rho = 1.0;
    rd.left.p = 1.0;
    rd.right.rho = 0.125;
    rd.right.p = 0.1;
    rd.x0 = 0.5;
    PrimitiveState prim;
    for (Index i = 0; i < p.mesh.num_cells(); ++i)
      prim.cells.push_back(p.mesh.center(i)[0] < rd.x0 ? rd.left : rd.right);
    p.initial = primitive_to_conservative(p.mesh, prim, p.gas.gamma);
    p.riemann = rd;
  } else if (config.preset == "implosion") {
    p.mesh = Mesh::rectangle({0.0, 0.0}, {0.3, 0.3}, {config.cells[0], config.cells[1]});
    p.boundary = BoundarySpec::all(BoundaryKind::Wall);
    PrimitiveState prim;
    for (Index i = 0; i < p.mesh.num_cells(); ++i) {
      const auto x = p.mesh.center(i);
      Primitive w;
      const bool inside = x[0] + x[1] <= 0.15;
      w.rho = inside ? 0.125 : 1.0;
      w.p = inside ? 0.14 : 1.0;
      prim.cells.push_back(w);
    }
    p.initial = primitive_to_conservative(p.mesh, prim, p.gas.gamma);
  } else {
    throw std::invalid_argument("problem.preset: unknown preset '" + config.preset + "'");
  }
  return p;
}

std::string period_to_string(long z) { return z == kNeverPeriod ? "inf" : std::to_string(z); }

long parse_period(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (t == "inf" || t == "infinity")
    return kNeverPeriod;
  std::size_t used = 0;
  long z = 0;
  try {
    z = std::stol(t, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("arom.z: '" + text + "' is not an integer or inf");
  }
  if (used != t.size())
    throw std::invalid_argument("arom.z: '" + text + "' is not an integer or inf");
  return z;
}

} // namespace arom
