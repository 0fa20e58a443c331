#include "arom/exact_riemann.hpp"

#include <algorithm>
#include <cmath>

namespace arom {

namespace {

double sound_speed(const Primitive& w, double gamma) { return std::sqrt(gamma * w.p / w.rho); }

// Velocity jump across the wave connecting state w to pressure p, and its
// derivative in p: shock branch for p > p_w, rarefaction branch otherwise.
void pressure_branch(double p, const Primitive& w, double gamma, double& f, double& df) {
  const double a = sound_speed(w, gamma);
  if (p > w.p) {
    const double A = 2.0 / ((gamma + 1.0) * w.rho);
    const double B = (gamma - 1.0) / (gamma + 1.0) * w.p;
    const double q = std::sqrt(A / (p + B));
    f = (p - w.p) * q;
    df = q * (1.0 - 0.5 * (p - w.p) / (p + B));
  } else {
    const double e = (gamma - 1.0) / (2.0 * gamma);
    f = 2.0 * a / (gamma - 1.0) * (std::pow(p / w.p, e) - 1.0);
    df = 1.0 / (w.rho * a) * std::pow(p / w.p, -(gamma + 1.0) / (2.0 * gamma));
  }
}

} // namespace

RiemannStar riemann_star(const Primitive& left, const Primitive& right, double gamma) {
  if (!(left.rho > 0.0 && left.p > 0.0 && right.rho > 0.0 && right.p > 0.0))
    throw std::invalid_argument("riemann_star: states must have positive density and pressure");
  const double aL = sound_speed(left, gamma);
  const double aR = sound_speed(right, gamma);
  const double du = right.u[0] - left.u[0];
  if (2.0 * (aL + aR) / (gamma - 1.0) <= du)
    throw VacuumError("riemann_star: the initial data generate a vacuum");

  // Primitive-variable linearization as the starting guess.
  const double pv = 0.5 * (left.p + right.p) - 0.125 * du * (left.rho + right.rho) * (aL + aR);
  double p = std::max(1e-12, pv);
  RiemannStar star;
  for (int it = 1; it <= 100; ++it) {
    double fL, dfL, fR, dfR;
    pressure_branch(p, left, gamma, fL, dfL);
    pressure_branch(p, right, gamma, fR, dfR);
    double next = p - (fL + fR + du) / (dfL + dfR);
    if (next <= 0.0)
      next = 0.5 * p;
    const double change = 2.0 * std::abs(next - p) / (next + p);
    p = next;
    star.iterations = it;
    if (change < 1e-15)
      break;
  }
  double fL, dfL, fR, dfR;
  pressure_branch(p, left, gamma, fL, dfL);
  pressure_branch(p, right, gamma, fR, dfR);
  star.p = p;
  star.u = 0.5 * (left.u[0] + right.u[0]) + 0.5 * (fR - fL);
  return star;
}

Primitive riemann_sample(const Primitive& left, const Primitive& right, double gamma,
                         const RiemannStar& star, double s) {
  const double g1 = (gamma - 1.0) / (gamma + 1.0);
  const double e = (gamma - 1.0) / (2.0 * gamma);
  Primitive out;
  if (s <= star.u) {
    const Primitive& w = left;
    const double a = sound_speed(w, gamma);
    if (star.p > w.p) {
      const double speed = w.u[0] - a * std::sqrt((gamma + 1.0) / (2.0 * gamma) * star.p / w.p +
                                                  e);
      if (s <= speed)
        return w;
      out.rho = w.rho * (star.p / w.p + g1) / (g1 * star.p / w.p + 1.0);
    } else {
      const double head = w.u[0] - a;
      const double a_star = a * std::pow(star.p / w.p, e);
      const double tail = star.u - a_star;
      if (s <= head)
        return w;
      if (s < tail) {
        const double c = 2.0 / (gamma + 1.0) + g1 / a * (w.u[0] - s);
        out.rho = w.rho * std::pow(c, 2.0 / (gamma - 1.0));
        out.u[0] = 2.0 / (gamma + 1.0) * (a + (gamma - 1.0) / 2.0 * w.u[0] + s);
        out.p = w.p * std::pow(c, 2.0 * gamma / (gamma - 1.0));
        return out;
      }
      out.rho = w.rho * std::pow(star.p / w.p, 1.0 / gamma);
    }
  } else {
    const Primitive& w = right;
    const double a = sound_speed(w, gamma);
    if (star.p > w.p) {
      const double speed = w.u[0] + a * std::sqrt((gamma + 1.0) / (2.0 * gamma) * star.p / w.p +
                                                  e);
      if (s >= speed)
        return w;
      out.rho = w.rho * (star.p / w.p + g1) / (g1 * star.p / w.p + 1.0);
    } else {
      const double head = w.u[0] + a;
      const double a_star = a * std::pow(star.p / w.p, e);
      const double tail = star.u + a_star;
      if (s >= head)
        return w;
      if (s > tail) {
        const double c = 2.0 / (gamma + 1.0) - g1 / a * (w.u[0] - s);
        out.rho = w.rho * std::pow(c, 2.0 / (gamma - 1.0));
        out.u[0] = 2.0 / (gamma + 1.0) * (-a + (gamma - 1.0) / 2.0 * w.u[0] + s);
        out.p = w.p * std::pow(c, 2.0 * gamma / (gamma - 1.0));
        return out;
      }
      out.rho = w.rho * std::pow(star.p / w.p, 1.0 / gamma);
    }
  }
  out.u[0] = star.u;
  out.p = star.p;
  return out;
}

Primitive exact_riemann(double x, double t, double x0, const Primitive& left,
                        const Primitive& right, double gamma) {
  if (t < 0.0)
    throw std::invalid_argument("exact_riemann: negative time");
  if (t == 0.0)
    return x < x0 ? left : right;
  return riemann_sample(left, right, gamma, riemann_star(left, right, gamma), (x - x0) / t);
}

PrimitiveState exact_riemann_profile(const Mesh& mesh, double t, double x0,
                                     const Primitive& left, const Primitive& right,
                                     double gamma) {
  if (mesh.dim() != 1)
    throw std::invalid_argument("exact_riemann_profile: mesh must be one-dimensional");
  PrimitiveState out;
  out.cells.resize(static_cast<std::size_t>(mesh.num_cells()));
  if (t == 0.0) {
    for (Index i = 0; i < mesh.num_cells(); ++i)
      out.cells[static_cast<std::size_t>(i)] = mesh.center(i)[0] < x0 ? left : right;
    return out;
  }
  const RiemannStar star = riemann_star(left, right, gamma);
  for (Index i = 0; i < mesh.num_cells(); ++i)
    out.cells[static_cast<std::size_t>(i)] =
        riemann_sample(left, right, gamma, star, (mesh.center(i)[0] - x0) / t);
  return out;
}

} // namespace arom
