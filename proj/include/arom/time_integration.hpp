#ifndef AROM_TIME_INTEGRATION_HPP
#define AROM_TIME_INTEGRATION_HPP

#include "arom/adaptive_sampling.hpp"
#include "arom/reduced_basis.hpp"
#include "arom/system.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace arom {

/// sum_j a_j q_{n+j} = dt * beta * f(q_{n+s}), normalized so a_s = 1.
struct BdfScheme {
  int order = 2;
  std::vector<double> a{1.0 / 3.0, -4.0 / 3.0, 1.0};
  double beta = 2.0 / 3.0;
  double dt = 0.0;

  static BdfScheme bdf1(double dt);
  static BdfScheme bdf2(double dt);
  /// Scheme used at step k (1-based) of a run with the given order: the
  /// order drops to k while fewer than `order` past states exist.
  static BdfScheme for_step(int order, long step, double dt);
};

enum class LinearSolverKind {
  Automatic, // SparseLU up to NewtonSettings::direct_dof_limit unknowns, else BiCGSTAB
  // BiCGSTAB is Jacobi-preconditioned: at moderate implicit CFL numbers the
  // Newton matrix is strongly diagonally dominant.
  SparseLU,
  BiCGSTAB,
};

struct NewtonSettings {
  double tolerance = 1e-10; // on ||R||_inf
  int max_iterations = 20;
  LinearSolverKind linear_solver = LinearSolverKind::Automatic;
  Index direct_dof_limit = 12000;
  double linear_tolerance = 1e-6; // relative, iterative solver only
  int max_backtracks = 12;
  // Newton iterations, possibly spread over several time steps, that share
  // one assembled matrix (1: plain Newton). A stored matrix is also dropped
  // when the active set or dt*beta changes, when an iteration reduces
  // ||R||_inf by less than jacobian_refresh_ratio, and when the line search
  // fails with it.
  int jacobian_reuse = 20;
  double jacobian_refresh_ratio = 0.5;
};

struct SubiterationSettings {
  double eps_y = 1e-4;
  int j_max = 10;
};

class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

/// Data of one implicit step k: the scheme, t_k and the s previous states,
/// oldest first.
struct BdfStep {
  const DiscreteSystem* system = nullptr;
  BdfScheme scheme;
  double time = 0.0;
  std::vector<const Eigen::VectorXd*> history;

  /// -sum_{j<s} a_j q_{k-s+j} at one flat index.
  double history_term(Index dof) const;
};

/// F_k rows for `cells`: dt*beta*f(q) - sum_{j<s} a_j q_{k-s+j}.
void bdf_function(const BdfStep& step, const Eigen::VectorXd& candidate,
                  std::span<const Index> cells, double* out);
/// R_k rows for `cells`: q - F_k(q).
void bdf_residual(const BdfStep& step, const Eigen::VectorXd& candidate,
                  std::span<const Index> cells, double* out);
Eigen::VectorXd bdf_residual(const BdfStep& step, const Eigen::VectorXd& candidate);

/// max_v |R_k| of each listed cell. Cells whose residual cannot be evaluated
/// (an inadmissible state in the stencil, a failed Roe average) get +inf.
void cell_residual_norms(const BdfStep& step, const StencilGraph& graph,
                         const Eigen::VectorXd& candidate, std::span<const Index> cells,
                         double* out);

using NewtonMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct NewtonReport {
  int iterations = 0;
  double residual_norm = 0.0;
  long linear_iterations = 0;
};

/// Newton's method on R_k restricted to a set of active cells; every other
/// entry of the state is frozen data. The Jacobian is assembled from
/// finite differences of the right-hand side, one evaluation per
/// (color, variable) pair of the stencil graph.
class NewtonSolver {
public:
  NewtonSolver(const StencilGraph& graph, NewtonSettings settings);
  ~NewtonSolver();
  NewtonSolver(const NewtonSolver&) = delete;
  NewtonSolver& operator=(const NewtonSolver&) = delete;

  const NewtonSettings& settings() const { return settings_; }

  /// Solves in place. Throws SolverError when the tolerance is not met within
  /// max_iterations or the line search cannot reduce the residual.
  NewtonReport solve(const BdfStep& step, Eigen::VectorXd& q,
                     std::span<const Index> active) const;

  /// dR/dq on the active cells (rows and columns in active order). `f0` may
  /// pass the right-hand side rows of `active` at q if already known.
  NewtonMatrix newton_matrix(const BdfStep& step, const Eigen::VectorXd& q,
                             std::span<const Index> active, const double* f0 = nullptr) const;

private:
  struct MatrixCache;

  const StencilGraph* graph_;
  NewtonSettings settings_;
  std::unique_ptr<MatrixCache> cache_;
};

/// Solves R_k(q) = 0 on every cell starting from `guess`.
Eigen::VectorXd full_solve(const BdfStep& step, const NewtonSolver& newton,
                           const Eigen::VectorXd& guess, NewtonReport* report = nullptr);

struct PartialSolveResult {
  Eigen::VectorXd y;
  int subiterations = 0;         // J: the loop stops at the first j with ||y^(j+1) - y^(j)|| < eps_y
  int solves = 0;                // restricted Newton solves, J + 1 unless S_tilde is empty
  std::vector<double> y_changes; // ||y^(j+1) - y^(j)||_2 for j = 1..J
  long newton_iterations = 0;
};

/// Partial HDM solve with gappy subiterations. On entry `v` holds the initial
/// guess on s_hat and the initial neighbor values on s_tilde. On exit s_hat
/// holds the last restricted solution, y is fitted to it, and s_tilde holds
/// psi + Phi y. Other entries are untouched.
PartialSolveResult partial_solve(const SamplingSets& sets, Eigen::VectorXd& v,
                                 const BdfStep& step, const NewtonSolver& newton,
                                 const ReducedModel& model, const SubiterationSettings& sub);

} // namespace arom

#endif // AROM_TIME_INTEGRATION_HPP
