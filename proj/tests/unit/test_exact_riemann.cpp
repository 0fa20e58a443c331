#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "arom/exact_riemann.hpp"

#include <cmath>

using namespace arom;

namespace {

Primitive prim(double rho, double u, double p) {
  Primitive w;
  w.rho = rho;
  w.u[0] = u;
  w.p = p;
  return w;
}

Primitive sample(const Primitive& L, const Primitive& R, double s) {
  return riemann_sample(L, R, 1.4, riemann_star(L, R, 1.4), s);
}

// Frozen from an independent bisection solve of the pressure function.
constexpr double kSodPressure = 0.3031301780506468;
constexpr double kSodVelocity = 0.9274526200489499;
constexpr double kSodDensityLeftStar = 0.42631942817849516;
constexpr double kSodDensityRightStar = 0.265573711705307;
constexpr double kSodShockSpeed = 1.752155732030178;

} // namespace

TEST_CASE("Sod star state") {
  const RiemannStar s = riemann_star(prim(1.0, 0.0, 1.0), prim(0.125, 0.0, 0.1), 1.4);
  CHECK(std::abs(s.p - kSodPressure) <= 1e-12);
  CHECK(std::abs(s.u - kSodVelocity) <= 1e-12);
  CHECK(s.iterations <= 20);
}

TEST_CASE("Sod wave structure") {
  const Primitive L = prim(1.0, 0.0, 1.0), R = prim(0.125, 0.0, 0.1);
  const double contact = kSodVelocity;
  const Primitive left_star = sample(L, R, 0.5 * contact);
  CHECK(left_star.rho == doctest::Approx(kSodDensityLeftStar).epsilon(1e-11));
  CHECK(left_star.p == doctest::Approx(kSodPressure).epsilon(1e-11));
  const Primitive right_star = sample(L, R, 0.5 * (contact + kSodShockSpeed));
  CHECK(right_star.rho == doctest::Approx(kSodDensityRightStar).epsilon(1e-11));
  CHECK(right_star.u[0] == doctest::Approx(kSodVelocity).epsilon(1e-11));
  const Primitive ahead = sample(L, R, kSodShockSpeed + 1e-9);
  CHECK(ahead.rho == 0.125);
  const Primitive behind = sample(L, R, -std::sqrt(1.4) - 1e-9);
  CHECK(behind.rho == 1.0);
}

TEST_CASE("rarefaction fan is isentropic") {
  const Primitive L = prim(1.0, 0.0, 1.0), R = prim(0.125, 0.0, 0.1);
  for (double s : {-1.1, -0.9, -0.5, -0.2}) {
    const Primitive w = sample(L, R, s);
    CHECK(w.p / std::pow(w.rho, 1.4) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("symmetric collision has zero contact velocity") {
  const RiemannStar s = riemann_star(prim(1.0, 1.0, 1.0), prim(1.0, -1.0, 1.0), 1.4);
  CHECK(std::abs(s.u) <= 1e-14);
  CHECK(s.p > 1.0);
}

TEST_CASE("strong expansion into vacuum is rejected") {
  CHECK_THROWS_AS(riemann_star(prim(1.0, -10.0, 1.0), prim(1.0, 10.0, 1.0), 1.4), VacuumError);
}

TEST_CASE("profile at t = 0 reproduces the initial condition") {
  const Mesh mesh = Mesh::line(0.0, 1.0, 8);
  const PrimitiveState p =
      exact_riemann_profile(mesh, 0.0, 0.5, prim(1.0, 0.0, 1.0), prim(0.125, 0.0, 0.1), 1.4);
  REQUIRE(p.cells.size() == 8);
  CHECK(p.cells[3].rho == 1.0);
  CHECK(p.cells[4].rho == 0.125);
  CHECK(p.cells[4].p == 0.1);
}
