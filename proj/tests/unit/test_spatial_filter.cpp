#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "arom/euler_fv.hpp"
#include "arom/spatial_filter.hpp"
#include "arom/time_integration.hpp"
#include "../support/generators.hpp"

#include <cmath>
#include <numeric>

using namespace arom;
using testing::Gen;

TEST_CASE("constant lines pass unchanged") {
  const std::vector<double> line(9, 0.37);
  for (int order : {2, 4, 6})
    CHECK(shapiro_filter_1d(line, order) == line);
}

TEST_CASE("second-order filter on a small example") {
  const std::vector<double> line{0.0, 0.0, 4.0, 0.0, 0.0};
  const std::vector<double> out = shapiro_filter_1d(line, 2);
  CHECK(out == std::vector<double>{0.0, 1.0, 2.0, 1.0, 0.0});
}

TEST_CASE("the grid-scale mode is removed away from the ends") {
  std::vector<double> line(16);
  for (std::size_t i = 0; i < line.size(); ++i)
    line[i] = i % 2 ? -1.0 : 1.0;
  for (int order : {2, 4, 6}) {
    const std::vector<double> out = shapiro_filter_1d(line, order);
    const std::size_t n = static_cast<std::size_t>(order / 2);
    for (std::size_t i = n; i + n < line.size(); ++i)
      CHECK(out[i] == 0.0);
  }
}

TEST_CASE("linear profiles are preserved away from the ends") {
  std::vector<double> line(12);
  for (std::size_t i = 0; i < line.size(); ++i)
    line[i] = 0.5 + 0.25 * static_cast<double>(i);
  for (int order : {2, 4, 6}) {
    const std::vector<double> out = shapiro_filter_1d(line, order);
    const std::size_t n = static_cast<std::size_t>(order / 2);
    for (std::size_t i = n; i + n < line.size(); ++i)
      CHECK(out[i] == doctest::Approx(line[i]).epsilon(1e-15));
  }
}

TEST_CASE("two-dimensional filter acts along both axes") {
  const Mesh mesh = Mesh::rectangle({0, 0}, {1, 1}, {5, 5});
  Eigen::VectorXd v = Eigen::VectorXd::Zero(25 * 2);
  v[mesh.cell_index(2, 2) * 2 + 1] = 16.0;
  const Eigen::VectorXd out = shapiro_filter(mesh, 2, v, 2);
  CHECK(out[mesh.cell_index(2, 2) * 2 + 1] == 4.0);
  CHECK(out[mesh.cell_index(1, 2) * 2 + 1] == 2.0);
  CHECK(out[mesh.cell_index(1, 1) * 2 + 1] == 1.0);
  CHECK(out[mesh.cell_index(2, 2) * 2] == 0.0);
  CHECK(out.sum() == doctest::Approx(16.0));
}

TEST_CASE("settings validation") {
  FilterSettings s;
  CHECK_NOTHROW(s.validate());
  s.cascade = {2, 3};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.cascade = {};
  CHECK_NOTHROW(s.validate());
  s.j_max_f = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("the gate never increases any cell residual") {
  Gen gen(61);
  const Mesh mesh = Mesh::line(0.0, 1.0, 60);
  int ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const State prev = gen.state(mesh);
    const EulerSystem sys(mesh, GasModel{}, BoundarySpec::all(BoundaryKind::Wall), prev);
    const StencilGraph graph(sys);
    const Eigen::VectorXd hist = prev.flat();
    const BdfStep step{&sys, BdfScheme::bdf1(1e-3), 1e-3, {&hist}};
    // A noisy guess of the next state.
    Eigen::VectorXd v = hist;
    for (Index i = 0; i < v.size(); ++i)
      v[i] *= 1.0 + 0.05 * gen.normal();
    const auto residual = [&](const Eigen::VectorXd& s, std::span<const Index> cells, double* out) {
      cell_residual_norms(step, graph, s, cells, out);
    };
    FilterSettings fs;
    fs.j_max_f = static_cast<int>(gen.integer(1, 10));
    FilterReport rep;
    const Eigen::VectorXd out = residual_gated_filter(
        v, mesh, graph, residual, [&](const double* c) { return sys.admissible(c); }, fs, &rep);

    std::vector<Index> all(60);
    std::iota(all.begin(), all.end(), Index{0});
    std::vector<double> r0(60), r1(60);
    residual(v, all, r0.data());
    residual(out, all, r1.data());
    bool mono = true;
    for (std::size_t i = 0; i < 60; ++i)
      mono = mono && r1[i] <= r0[i] && r1[i] == rep.final_residual[i];
    bool sweeps = rep.sweeps.size() == fs.cascade.size();
    for (int s : rep.sweeps)
      sweeps = sweeps && s >= 1 && s <= fs.j_max_f;
    ok += mono && sweeps;
  }
  CHECK(ok == 100);
}

TEST_CASE("an empty cascade returns the input") {
  const Mesh mesh = Mesh::line(0.0, 1.0, 10);
  Gen gen(62);
  const State s = gen.state(mesh);
  const EulerSystem sys(mesh, GasModel{}, BoundarySpec::all(BoundaryKind::Wall), s);
  const StencilGraph graph(sys);
  FilterSettings fs;
  fs.cascade.clear();
  int calls = 0;
  const Eigen::VectorXd out = residual_gated_filter(
      s.flat(), mesh, graph, [&](const Eigen::VectorXd&, std::span<const Index>, double*) { ++calls; },
      [](const double*) { return true; }, fs);
  CHECK(out == s.flat());
  CHECK(calls == 0);
}
