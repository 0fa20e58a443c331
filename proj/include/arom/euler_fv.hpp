#ifndef AROM_EULER_FV_HPP
#define AROM_EULER_FV_HPP

#include "arom/mesh_state.hpp"
#include "arom/system.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <utility>

namespace arom {

struct GasModel {
  double gamma = 1.4;
};

enum class BoundaryKind {
  DirichletFromIC, // ghosts frozen at the initial value of the boundary cell
  Wall,            // mirrored state with the normal momentum negated
};

// One condition per mesh side, ordered x-lo, x-hi, y-lo, y-hi.
struct BoundarySpec {
  std::array<BoundaryKind, 4> sides{BoundaryKind::DirichletFromIC, BoundaryKind::DirichletFromIC,
                                    BoundaryKind::DirichletFromIC, BoundaryKind::DirichletFromIC};

  static BoundarySpec all(BoundaryKind kind) { return {{kind, kind, kind, kind}}; }
};

struct StencilSpec {
  int radius = 2;
};

enum class LimitedVariables { Conservative, Primitive };

struct EulerOptions {
  LimitedVariables limiting = LimitedVariables::Conservative;
  // Harten entropy fix width as a fraction of the Roe sound speed; 0 disables it.
  double entropy_fix = 0.0;
};

/// Raised when the Roe average is not physical.
class FluxError : public std::runtime_error {
public:
  explicit FluxError(const std::string& what) : std::runtime_error(what) {}
};

double minmod(double a, double b);

/// Limited linear reconstruction of the middle value of (qm, q, qp).
/// Returns the values at the cell's (left, right) faces.
std::pair<double, double> muscl_faces(double qm, double q, double qp);

/// Exact Euler flux through a face normal to `axis`.
void physical_flux(const Primitive& w, int axis, int dim, double gamma, double* flux);

/// Roe approximate Riemann flux F = (F(L)+F(R))/2 - |A_roe|(U_R - U_L)/2.
/// Throws FluxError if the averaged sound speed is not real.
void roe_flux(const Primitive& left, const Primitive& right, int axis, int dim,
              const GasModel& gas, double* flux, double entropy_fix = 0.0);

/// Second-order MUSCL/Roe/minmod finite-volume discretization of the Euler
/// equations on a uniform Cartesian mesh. Two ghost layers per side are
/// generated on the fly from the boundary specification, so any cell subset
/// can be evaluated without touching cells outside its stencil closure.
class EulerSystem : public DiscreteSystem {
public:
  EulerSystem(Mesh mesh, GasModel gas, BoundarySpec boundary, const State& initial,
              EulerOptions options = {});

  Index num_cells() const override { return mesh_.num_cells(); }
  int vars_per_cell() const override { return vars_; }
  void stencil(Index cell, std::vector<Index>& out) const override;
  void rhs(const Eigen::VectorXd& q, double t, std::span<const Index> cells,
           double* out) const override;
  void rhs(const Eigen::VectorXd& q, double t, Eigen::VectorXd& out) const override;
  bool admissible(const double* cell_values) const override;

  const Mesh& mesh() const { return mesh_; }
  const GasModel& gas() const { return gas_; }
  const BoundarySpec& boundary() const { return boundary_; }
  const EulerOptions& options() const { return options_; }
  StencilSpec stencil_spec() const { return {2}; }

private:
  template <int Dim> friend struct EulerKernel;

  Mesh mesh_;
  GasModel gas_;
  BoundarySpec boundary_;
  EulerOptions options_;
  int vars_;
  Eigen::VectorXd initial_;
};

} // namespace arom

#endif // AROM_EULER_FV_HPP
