#ifndef AROM_EXACT_RIEMANN_HPP
#define AROM_EXACT_RIEMANN_HPP

#include "arom/mesh_state.hpp"

#include <stdexcept>
#include <string>

namespace arom {

class VacuumError : public std::runtime_error {
public:
  explicit VacuumError(const std::string& what) : std::runtime_error(what) {}
};

struct RiemannStar {
  double p = 0.0;
  double u = 0.0;
  int iterations = 0;
};

/// Pressure and velocity between the nonlinear waves of the 1D Riemann
/// problem (left, right), by Newton iteration on the pressure function.
/// Throws VacuumError when the data generate a vacuum.
RiemannStar riemann_star(const Primitive& left, const Primitive& right, double gamma);

/// Exact solution on the ray x/t = s through the initial discontinuity.
Primitive riemann_sample(const Primitive& left, const Primitive& right, double gamma,
                         const RiemannStar& star, double s);

/// Exact solution at position x and time t for a discontinuity at x0.
/// At t = 0 the initial data are returned (the right state at x = x0).
Primitive exact_riemann(double x, double t, double x0, const Primitive& left,
                        const Primitive& right, double gamma);

/// Exact solution sampled at the cell centers of a 1D mesh.
PrimitiveState exact_riemann_profile(const Mesh& mesh, double t, double x0,
                                     const Primitive& left, const Primitive& right,
                                     double gamma);

} // namespace arom

#endif // AROM_EXACT_RIEMANN_HPP
