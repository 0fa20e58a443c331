#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "arom/euler_fv.hpp"
#include "arom/time_integration.hpp"
#include "../support/generators.hpp"
#include "../support/ode_systems.hpp"

#include <cmath>
#include <deque>
#include <numeric>

using namespace arom;
using testing::Gen;

namespace {

struct EulerFixture {
  Gen gen{51};
  Mesh mesh = Mesh::rectangle({0, 0}, {0.3, 0.3}, {8, 7});
  State init = gen.state(mesh);
  EulerSystem sys{mesh, GasModel{}, BoundarySpec::all(BoundaryKind::Wall), init};
  StencilGraph graph{sys};
  Eigen::VectorXd prev = init.flat();
  BdfStep step{&sys, BdfScheme::bdf1(2e-3), 2e-3, {&prev}};
};

} // namespace

TEST_CASE("BDF coefficients") {
  const BdfScheme b2 = BdfScheme::bdf2(0.1);
  CHECK(b2.order == 2);
  CHECK(std::accumulate(b2.a.begin(), b2.a.end(), 0.0) == doctest::Approx(0.0));
  CHECK(b2.beta == doctest::Approx(2.0 / 3.0));
  CHECK(BdfScheme::for_step(2, 1, 0.1).order == 1);
  CHECK(BdfScheme::for_step(2, 2, 0.1).order == 2);
  CHECK(BdfScheme::for_step(1, 7, 0.1).order == 1);
  CHECK_THROWS_AS(BdfScheme::for_step(3, 1, 0.1), std::invalid_argument);
}

TEST_CASE("observed convergence orders") {
  const double e1 = testing::bdf_final_error(40, 2), e2 = testing::bdf_final_error(80, 2), e3 = testing::bdf_final_error(160, 2);
  const double p2 = std::log2(e2 / e3);
  CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(p2 == doctest::Approx(2.0).epsilon(0.05));
  const double f1 = testing::bdf_final_error(80, 1), f2 = testing::bdf_final_error(160, 1);
  CHECK(std::log2(f1 / f2) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("colored finite-difference Jacobian matches dense differences") {
  EulerFixture f;
  const NewtonSolver newton(f.graph, NewtonSettings{});
  Eigen::VectorXd q = f.gen.state(f.mesh).flat();
  std::vector<Index> active;
  for (Index i = 0; i < f.mesh.num_cells(); ++i)
    if (i % 3 != 1)
      active.push_back(i);
  const NewtonMatrix J = newton.newton_matrix(f.step, q, active);
  const int c = f.sys.vars_per_cell();
  const Index n = static_cast<Index>(active.size()) * c;
  REQUIRE(J.rows() == n);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> rp(static_cast<std::size_t>(n)), rm(static_cast<std::size_t>(n));
  for (Index col = 0; col < n; ++col) {
    const Index dof = active[static_cast<std::size_t>(col / c)] * c + col % c;
    const double h = 1e-6 * (1.0 + std::abs(q[dof]));
    Eigen::VectorXd qp = q, qm = q;
    qp[dof] += h;
    qm[dof] -= h;
    bdf_residual(f.step, qp, active, rp.data());
    bdf_residual(f.step, qm, active, rm.data());
    for (Index row = 0; row < n; ++row)
      dense(row, col) = (rp[static_cast<std::size_t>(row)] - rm[static_cast<std::size_t>(row)]) /
                        (2.0 * h);
  }
  const Eigen::MatrixXd diff = Eigen::MatrixXd(J) - dense;
  CHECK(diff.cwiseAbs().maxCoeff() <= 1e-5 * (1.0 + dense.cwiseAbs().maxCoeff()));
}

TEST_CASE("restricted Newton converges on the active cells only") {
  EulerFixture f;
  NewtonSettings ns;
  ns.tolerance = 1e-11;
  const NewtonSolver newton(f.graph, ns);
  std::vector<Index> active;
  for (Index i = 0; i < f.mesh.num_cells(); i += 2)
    active.push_back(i);
  Eigen::VectorXd q = f.prev;
  const Eigen::VectorXd before = q;
  const NewtonReport rep = newton.solve(f.step, q, active);
  CHECK(rep.residual_norm <= 1e-11);
  std::vector<double> r(active.size() * 4);
  bdf_residual(f.step, q, active, r.data());
  double rmax = 0.0;
  for (double x : r)
    rmax = std::max(rmax, std::abs(x));
  CHECK(rmax <= 1e-11);
  bool frozen = true;
  for (Index i = 1; i < f.mesh.num_cells(); i += 2)
    frozen = frozen && q.segment(i * 4, 4) == before.segment(i * 4, 4);
  CHECK(frozen);
}

TEST_CASE("matrix reuse does not change the converged answer beyond the tolerance") {
  EulerFixture f;
  NewtonSettings plain;
  plain.jacobian_reuse = 1;
  plain.tolerance = 1e-12;
  NewtonSettings reuse = plain;
  reuse.jacobian_reuse = 20;
  const NewtonSolver a(f.graph, plain), b(f.graph, reuse);
  const Eigen::VectorXd qa = full_solve(f.step, a, f.prev);
  const Eigen::VectorXd qb = full_solve(f.step, b, f.prev);
  CHECK((qa - qb).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("iterative and direct linear solvers agree") {
  EulerFixture f;
  NewtonSettings lu, it;
  lu.linear_solver = LinearSolverKind::SparseLU;
  it.linear_solver = LinearSolverKind::BiCGSTAB;
  it.linear_tolerance = 1e-10;
  const NewtonSolver a(f.graph, lu), b(f.graph, it);
  const Eigen::VectorXd qa = full_solve(f.step, a, f.prev);
  const Eigen::VectorXd qb = full_solve(f.step, b, f.prev);
  CHECK((qa - qb).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("Newton reports failure") {
  EulerFixture f;
  NewtonSettings ns;
  ns.max_iterations = 1;
  ns.tolerance = 1e-15;
  const NewtonSolver newton(f.graph, ns);
  CHECK_THROWS_AS(full_solve(f.step, newton, f.prev), SolverError);
}

TEST_CASE("cell residual norms mark cells next to inadmissible states") {
  EulerFixture f;
  Eigen::VectorXd q = f.prev;
  const Index bad = f.mesh.cell_index(4, 3);
  q[bad * 4] = -1.0;
  std::vector<Index> all(static_cast<std::size_t>(f.mesh.num_cells()));
  std::iota(all.begin(), all.end(), Index{0});
  std::vector<double> r(all.size());
  cell_residual_norms(f.step, f.graph, q, all, r.data());
  for (Index i = 0; i < f.mesh.num_cells(); ++i) {
    const auto st = f.graph.stencil(i);
    const bool touches = std::find(st.begin(), st.end(), bad) != st.end();
    CHECK(std::isinf(r[static_cast<std::size_t>(i)]) == touches);
  }
}

TEST_CASE("partial solve on every cell is a full solve") {
  EulerFixture f;
  const NewtonSolver a(f.graph, NewtonSettings{}), b(f.graph, NewtonSettings{});
  const Eigen::VectorXd full = full_solve(f.step, a, f.prev);

  const Index n = f.mesh.num_cells();
  Eigen::MatrixXd U = f.gen.orthonormal(n * 4, 2);
  const ReducedModel model(U, f.prev, odeim_select(U, 4, 4));
  std::vector<Index> g(static_cast<std::size_t>(n));
  std::iota(g.begin(), g.end(), Index{0});
  const SamplingSets sets = assemble_sampling(g, model.points().cells, f.mesh, StencilSpec{2});
  CHECK(sets.s_tilde.empty());
  Eigen::VectorXd v = f.prev;
  const PartialSolveResult res = partial_solve(sets, v, f.step, b, model, SubiterationSettings{});
  CHECK(res.subiterations == 1);
  CHECK(v == full);
}

TEST_CASE("partial solve freezes reconstructed cells and converges the subiterations") {
  EulerFixture f;
  const NewtonSolver newton(f.graph, NewtonSettings{});
  const Index n = f.mesh.num_cells();
  // A model built from the exact step solution: the reconstructed neighbors
  // are then consistent with the partial solve.
  const Eigen::VectorXd full = full_solve(f.step, newton, f.prev);
  Eigen::MatrixXd U(n * 4, 1);
  U.col(0) = (full - f.prev).normalized();
  const ReducedModel model(U, f.prev, odeim_select(U, 3, 4));
  std::vector<Index> g{0, 1, 9, 10};
  const SamplingSets sets = assemble_sampling(g, model.points().cells, f.mesh, StencilSpec{2});
  REQUIRE(!sets.s_tilde.empty());
  Eigen::VectorXd v = f.prev;
  const Eigen::VectorXd before = v;
  SubiterationSettings sub;
  sub.eps_y = 1e-10;
  sub.j_max = 30;
  const PartialSolveResult res = partial_solve(sets, v, f.step, newton, model, sub);
  CHECK(res.subiterations >= 1);
  CHECK(res.y_changes.back() < 1e-10);
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (auto list : {&sets.s_hat, &sets.s_tilde})
    for (Index c : *list) {
      seen[static_cast<std::size_t>(c)] = 1;
      CHECK((v.segment(c * 4, 4) - full.segment(c * 4, 4)).cwiseAbs().maxCoeff() <= 1e-7);
    }
  bool untouched = true;
  for (Index c = 0; c < n; ++c)
    if (!seen[static_cast<std::size_t>(c)])
      untouched = untouched && v.segment(c * 4, 4) == before.segment(c * 4, 4);
  CHECK(untouched);
}
