#include "arom/time_integration.hpp"

#include "arom/euler_fv.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

namespace arom {

BdfScheme BdfScheme::bdf1(double dt) { return {1, {-1.0, 1.0}, 1.0, dt}; }

BdfScheme BdfScheme::bdf2(double dt) { return {2, {1.0 / 3.0, -4.0 / 3.0, 1.0}, 2.0 / 3.0, dt}; }

BdfScheme BdfScheme::for_step(int order, long step, double dt) {
  if (order < 1 || order > 2)
    throw std::invalid_argument("BdfScheme: only orders 1 and 2 are supported");
  if (step < 1)
    throw std::invalid_argument("BdfScheme: steps are numbered from 1");
  return (order == 1 || step == 1) ? bdf1(dt) : bdf2(dt);
}

double BdfStep::history_term(Index dof) const {
  double sum = 0.0;
  for (int j = 0; j < scheme.order; ++j)
    sum -= scheme.a[static_cast<std::size_t>(j)] * (*history[static_cast<std::size_t>(j)])[dof];
  return sum;
}

namespace {

std::string format_residual(double r) {
  std::ostringstream out;
  out << std::scientific << std::setprecision(3) << r;
  return out.str();
}

void check_step(const BdfStep& step) {
  if (step.system == nullptr)
    throw std::invalid_argument("BdfStep: no system");
  if (static_cast<int>(step.history.size()) != step.scheme.order)
    throw std::invalid_argument("BdfStep: history length must equal the scheme order");
}

// R rows from precomputed right-hand-side rows. Every residual in the code
// goes through here so they agree bit for bit.
void residual_from_rhs(const BdfStep& step, const Eigen::VectorXd& q,
                       std::span<const Index> cells, const double* f, double* r) {
  const int c = step.system->vars_per_cell();
  const double dtb = step.scheme.dt * step.scheme.beta;
  for (std::size_t k = 0; k < cells.size(); ++k)
    for (int v = 0; v < c; ++v) {
      const Index dof = cells[k] * c + v;
      const double big_f = dtb * f[k * c + v] + step.history_term(dof);
      r[k * c + v] = q[dof] - big_f;
    }
}

double fd_step(double x) { return 1.4901161193847656e-8 * (1.0 + std::abs(x)); }

bool is_identity(std::span<const Index> cells, Index n) {
  if (static_cast<Index>(cells.size()) != n)
    return false;
  for (std::size_t k = 0; k < cells.size(); ++k)
    if (cells[k] != static_cast<Index>(k))
      return false;
  return true;
}

} // namespace

void bdf_function(const BdfStep& step, const Eigen::VectorXd& candidate,
                  std::span<const Index> cells, double* out) {
  check_step(step);
  const int c = step.system->vars_per_cell();
  const double dtb = step.scheme.dt * step.scheme.beta;
  step.system->rhs(candidate, step.time, cells, out);
  for (std::size_t k = 0; k < cells.size(); ++k)
    for (int v = 0; v < c; ++v)
      out[k * c + v] = dtb * out[k * c + v] + step.history_term(cells[k] * c + v);
}

void bdf_residual(const BdfStep& step, const Eigen::VectorXd& candidate,
                  std::span<const Index> cells, double* out) {
  check_step(step);
  const int c = step.system->vars_per_cell();
  std::vector<double> f(cells.size() * static_cast<std::size_t>(c));
  step.system->rhs(candidate, step.time, cells, f.data());
  residual_from_rhs(step, candidate, cells, f.data(), out);
}

Eigen::VectorXd bdf_residual(const BdfStep& step, const Eigen::VectorXd& candidate) {
  std::vector<Index> all(static_cast<std::size_t>(step.system->num_cells()));
  std::iota(all.begin(), all.end(), Index{0});
  Eigen::VectorXd r(step.system->num_dofs());
  bdf_residual(step, candidate, all, r.data());
  return r;
}

void cell_residual_norms(const BdfStep& step, const StencilGraph& graph,
                         const Eigen::VectorXd& candidate, std::span<const Index> cells,
                         double* out) {
  check_step(step);
  const DiscreteSystem& sys = *step.system;
  const int c = sys.vars_per_cell();
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<Index> good;
  std::vector<std::size_t> where;
  good.reserve(cells.size());
  where.reserve(cells.size());
  std::vector<signed char> ok_cell(static_cast<std::size_t>(sys.num_cells()), -1);
  auto cell_ok = [&](Index j) {
    signed char& f = ok_cell[static_cast<std::size_t>(j)];
    if (f < 0)
      f = sys.admissible(candidate.data() + j * c) ? 1 : 0;
    return f == 1;
  };
  for (std::size_t k = 0; k < cells.size(); ++k) {
    bool ok = true;
    for (Index j : graph.stencil(cells[k]))
      ok = ok && cell_ok(j);
    if (ok) {
      good.push_back(cells[k]);
      where.push_back(k);
    } else {
      out[k] = inf;
    }
  }

  std::vector<double> r(good.size() * static_cast<std::size_t>(c));
  auto reduce = [&](std::size_t k, const double* rk) {
    double m = 0.0;
    for (int v = 0; v < c; ++v)
      m = std::max(m, std::abs(rk[v]));
    out[where[k]] = std::isfinite(m) ? m : inf;
  };
  try {
    bdf_residual(step, candidate, good, r.data());
    for (std::size_t k = 0; k < good.size(); ++k)
      reduce(k, r.data() + k * c);
  } catch (const FluxError&) {
    // Redo cell by cell so only the offending cells are marked.
    for (std::size_t k = 0; k < good.size(); ++k) {
      try {
        bdf_residual(step, candidate, std::span<const Index>(&good[k], 1), r.data());
        reduce(k, r.data());
      } catch (const FluxError&) {
        out[where[k]] = inf;
      }
    }
  }
}

struct NewtonSolver::MatrixCache {
  bool valid = false;
  LinearSolverKind kind = LinearSolverKind::Automatic;
  double dtb = 0.0;
  std::vector<Index> active;
  int age = 0; // Newton iterations served so far
  NewtonMatrix matrix;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  Eigen::BiCGSTAB<NewtonMatrix, Eigen::DiagonalPreconditioner<double>> krylov;
};

NewtonSolver::~NewtonSolver() = default;

NewtonSolver::NewtonSolver(const StencilGraph& graph, NewtonSettings settings)
    : graph_(&graph), settings_(settings), cache_(std::make_unique<MatrixCache>()) {
  if (!(settings_.tolerance > 0.0) || settings_.max_iterations < 1)
    throw std::invalid_argument("NewtonSettings: need tolerance > 0 and max_iterations >= 1");
  if (settings_.jacobian_reuse < 1)
    throw std::invalid_argument("NewtonSettings: jacobian_reuse must be at least 1");
}

NewtonMatrix NewtonSolver::newton_matrix(const BdfStep& step, const Eigen::VectorXd& q,
                                         std::span<const Index> active,
                                         const double* f0) const {
  check_step(step);
  const DiscreteSystem& sys = *step.system;
  const int c = sys.vars_per_cell();
  const Index na = static_cast<Index>(active.size());
  const Index nu = na * c;
  const double dtb = step.scheme.dt * step.scheme.beta;

  std::vector<Index> local(static_cast<std::size_t>(sys.num_cells()), -1);
  for (Index k = 0; k < na; ++k)
    local[static_cast<std::size_t>(active[static_cast<std::size_t>(k)])] = k;
  const bool full = is_identity(active, sys.num_cells());

  // Active columns per color, and the active rows each color reaches.
  const int n_colors = graph_->num_colors();
  std::vector<std::vector<Index>> columns(static_cast<std::size_t>(n_colors));
  std::vector<std::vector<Index>> rows(static_cast<std::size_t>(n_colors));
  for (Index a : active)
    columns[static_cast<std::size_t>(graph_->color(a))].push_back(a);
  for (Index i : active)
    for (Index s : graph_->stencil(i))
      if (local[static_cast<std::size_t>(s)] >= 0)
        rows[static_cast<std::size_t>(graph_->color(s))].push_back(i);

  std::vector<double> f0_own;
  if (f0 == nullptr) {
    f0_own.resize(static_cast<std::size_t>(nu));
    sys.rhs(q, step.time, active, f0_own.data());
    f0 = f0_own.data();
  }
  Eigen::VectorXd qp = q;
  Eigen::VectorXd fp(full ? sys.num_dofs() : nu);

  // Row i of dR/dq has one c-block per active cell in the stencil of i's
  // cell (stencils are symmetric, so the same count holds for columns).
  NewtonMatrix jac(nu, nu);
  Eigen::VectorXi per_column(nu);
  for (Index k = 0; k < na; ++k) {
    int count = 0;
    for (Index s : graph_->stencil(active[static_cast<std::size_t>(k)]))
      count += local[static_cast<std::size_t>(s)] >= 0 ? c : 0;
    per_column.segment(k * c, c).setConstant(count);
  }
  jac.reserve(per_column);

  // dR/dq = I - dt*beta*df/dq, columns of one color differenced together.
  for (int g = 0; g < n_colors; ++g) {
    const auto& cols = columns[static_cast<std::size_t>(g)];
    const auto& rws = rows[static_cast<std::size_t>(g)];
    if (cols.empty())
      continue;
    for (int v = 0; v < c; ++v) {
      for (Index s : cols) {
        const Index dof = s * c + v;
        qp[dof] = q[dof] + fd_step(q[dof]);
      }
      if (full)
        sys.rhs(qp, step.time, active, fp.data());
      else
        sys.rhs(qp, step.time, rws, fp.data());
      for (std::size_t k = 0; k < rws.size(); ++k) {
        const Index i = rws[k];
        const Index li = local[static_cast<std::size_t>(i)];
        const double* fi = fp.data() + (full ? i : static_cast<Index>(k)) * c;
        const double* f0i = f0 + li * c;
        Index col = -1;
        for (Index s : graph_->stencil(i))
          if (graph_->color(s) == g && local[static_cast<std::size_t>(s)] >= 0) {
            col = s;
            break;
          }
        const Index cdof = col * c + v;
        const double h = qp[cdof] - q[cdof];
        const Index lcol = local[static_cast<std::size_t>(col)] * c + v;
        for (int rv = 0; rv < c; ++rv) {
          double value = -dtb * (fi[rv] - f0i[rv]) / h;
          if (li * c + rv == lcol)
            value += 1.0;
          jac.insert(li * c + rv, lcol) = value;
        }
      }
      for (Index s : cols)
        qp[s * c + v] = q[s * c + v];
    }
  }
  jac.makeCompressed();
  return jac;
}

NewtonReport NewtonSolver::solve(const BdfStep& step, Eigen::VectorXd& q,
                                 std::span<const Index> active) const {
  check_step(step);
  const DiscreteSystem& sys = *step.system;
  const int c = sys.vars_per_cell();
  const Index na = static_cast<Index>(active.size());
  const Index nu = na * c;
  NewtonReport report;
  if (na == 0)
    return report;

  Eigen::VectorXd f0(nu), r(nu);
  sys.rhs(q, step.time, active, f0.data());
  residual_from_rhs(step, q, active, f0.data(), r.data());
  report.residual_norm = r.lpNorm<Eigen::Infinity>();

  Eigen::VectorXd delta(nu), trial, f_trial(nu), r_trial(nu);

  const LinearSolverKind kind =
      settings_.linear_solver != LinearSolverKind::Automatic ? settings_.linear_solver
      : nu <= settings_.direct_dof_limit                      ? LinearSolverKind::SparseLU
                                                              : LinearSolverKind::BiCGSTAB;
  const double dtb = step.scheme.dt * step.scheme.beta;
  MatrixCache& cache = *cache_;
  if (!cache.valid || cache.kind != kind || cache.dtb != dtb ||
      !std::equal(active.begin(), active.end(), cache.active.begin(), cache.active.end()))
    cache.valid = false;

  int stale = 0; // iterations of this solve on the current matrix
  while (report.residual_norm > settings_.tolerance) {
    if (report.iterations >= settings_.max_iterations)
      throw SolverError("Newton did not converge in " + std::to_string(report.iterations) +
                            " iterations, ||R||_inf = " + format_residual(report.residual_norm),
                        report.residual_norm);
    ++report.iterations;

    bool fresh = false;
    // Half the iteration budget spent on one stored matrix: rebuild it.
    if (cache.valid && 2 * stale >= settings_.max_iterations)
      cache.valid = false;
    if (!cache.valid || cache.age >= settings_.jacobian_reuse) {
      cache.valid = false;
      cache.matrix = newton_matrix(step, q, active, f0.data());
      if (kind == LinearSolverKind::SparseLU) {
        cache.lu.compute(Eigen::SparseMatrix<double>(cache.matrix));
        if (cache.lu.info() != Eigen::Success)
          throw SolverError("sparse LU factorization of the Newton matrix failed",
                            report.residual_norm);
      } else {
        cache.krylov.setTolerance(settings_.linear_tolerance);
        cache.krylov.setMaxIterations(1000);
        cache.krylov.compute(cache.matrix);
      }
      cache.kind = kind;
      cache.dtb = dtb;
      cache.active.assign(active.begin(), active.end());
      cache.age = 0;
      cache.valid = true;
      fresh = true;
      stale = 0;
    }
    ++cache.age;
    ++stale;
    if (kind == LinearSolverKind::SparseLU) {
      delta = cache.lu.solve(-r);
    } else {
      delta = cache.krylov.solve(-r);
      report.linear_iterations += cache.krylov.iterations();
    }

    // Backtracking on ||R||_2; inadmissible trial states count as failures.
    const double norm2 = r.norm();
    double lambda = 1.0;
    bool accepted = false;
    for (int b = 0; b <= settings_.max_backtracks && !accepted; ++b, lambda *= 0.5) {
      trial = q;
      bool ok = true;
      for (Index k = 0; k < na && ok; ++k) {
        const Index cell = active[static_cast<std::size_t>(k)];
        for (int v = 0; v < c; ++v)
          trial[cell * c + v] += lambda * delta[k * c + v];
        ok = sys.admissible(trial.data() + cell * c);
      }
      if (!ok)
        continue;
      try {
        sys.rhs(trial, step.time, active, f_trial.data());
      } catch (const PositivityError&) {
        continue;
      } catch (const FluxError&) {
        continue;
      }
      residual_from_rhs(step, trial, active, f_trial.data(), r_trial.data());
      if (r_trial.allFinite() && r_trial.norm() < norm2)
        accepted = true;
    }
    if (!accepted && !fresh) {
      cache.valid = false; // retry this iteration with a fresh matrix
      --report.iterations;
      continue;
    }
    if (!accepted)
      throw SolverError("Newton line search failed, ||R||_inf = " +
                            format_residual(report.residual_norm),
                        report.residual_norm);
    for (Index a : active)
      for (int v = 0; v < c; ++v)
        q[a * c + v] = trial[a * c + v];
    f0.swap(f_trial);
    r.swap(r_trial);
    const double previous = report.residual_norm;
    report.residual_norm = r.lpNorm<Eigen::Infinity>();
    if (report.residual_norm > settings_.jacobian_refresh_ratio * previous)
      cache.valid = false; // slow contraction: the stored matrix is too old
  }
  return report;
}

Eigen::VectorXd full_solve(const BdfStep& step, const NewtonSolver& newton,
                           const Eigen::VectorXd& guess, NewtonReport* report) {
  std::vector<Index> all(static_cast<std::size_t>(step.system->num_cells()));
  std::iota(all.begin(), all.end(), Index{0});
  Eigen::VectorXd q = guess;
  NewtonReport rep = newton.solve(step, q, all);
  if (report)
    *report = rep;
  return q;
}

PartialSolveResult partial_solve(const SamplingSets& sets, Eigen::VectorXd& v,
                                 const BdfStep& step, const NewtonSolver& newton,
                                 const ReducedModel& model, const SubiterationSettings& sub) {
  if (!(sub.eps_y > 0.0) || sub.j_max < 1)
    throw std::invalid_argument("SubiterationSettings: need eps_y > 0 and j_max >= 1");
  const int c = step.system->vars_per_cell();
  PartialSolveResult out;
  auto solve_and_fit = [&] {
    out.newton_iterations += newton.solve(step, v, sets.s_hat).iterations;
    ++out.solves;
    return model.coordinates(v);
  };
  // Subiteration j compares y^(j+1) with y^(j), so J counts corrections of
  // the neighbor values and one more solve than J is performed.
  out.y = solve_and_fit();
  out.subiterations = 1;
  if (sets.s_tilde.empty())
    return out; // nothing feeds back: y^(2) = y^(1)
  for (int j = 1; j <= sub.j_max; ++j) {
    out.subiterations = j;
    model.reconstruct_cells(sets.s_tilde, c, out.y, v);
    const Eigen::VectorXd next = solve_and_fit();
    const double change = (next - out.y).norm();
    out.y = next;
    out.y_changes.push_back(change);
    if (change < sub.eps_y)
      break;
  }
  model.reconstruct_cells(sets.s_tilde, c, out.y, v);
  return out;
}

} // namespace arom
