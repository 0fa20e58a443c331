#ifndef AROM_MESH_STATE_HPP
#define AROM_MESH_STATE_HPP

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace arom {

using Index = Eigen::Index;

/// Thrown when a cell holds non-positive density or pressure.
class PositivityError : public std::runtime_error {
public:
  PositivityError(Index cell, const std::string& what)
      : std::runtime_error(what + " (cell " + std::to_string(cell) + ")"),
        cell_(cell) {}
  Index cell() const { return cell_; }

private:
  Index cell_;
};

/// Uniform Cartesian mesh in one or two dimensions. Cells are numbered
/// x-fastest: cell = ix + nx * iy.
class Mesh {
public:
  Mesh() = default;

  static Mesh line(double lo, double hi, Index cells);
  static Mesh rectangle(std::array<double, 2> lo, std::array<double, 2> hi,
                        std::array<Index, 2> cells);

  int dim() const { return dim_; }
  double lo(int axis) const { return lo_[axis]; }
  double hi(int axis) const { return hi_[axis]; }
  Index cells(int axis) const { return cells_[axis]; }
  double width(int axis) const { return width_[axis]; }
  Index num_cells() const { return cells_[0] * cells_[1]; }
  double cell_volume() const;

  Index cell_index(Index ix, Index iy = 0) const { return ix + cells_[0] * iy; }
  std::array<Index, 2> cell_coords(Index cell) const {
    return {cell % cells_[0], cell / cells_[0]};
  }
  std::array<double, 2> center(Index cell) const;

  bool operator==(const Mesh& other) const;

private:
  int dim_ = 1;
  std::array<double, 2> lo_{0.0, 0.0};
  std::array<double, 2> hi_{1.0, 1.0};
  std::array<Index, 2> cells_{1, 1};
  std::array<double, 2> width_{1.0, 1.0};
};

/// Number of conservative variables (rho, rho*u_1..rho*u_d, rho*E).
constexpr int num_vars(int dim) { return dim + 2; }

/// Conservative variables of every cell, stored cell-major in one flat
/// vector so a cell's variables are contiguous.
class State {
public:
  State() = default;
  explicit State(Mesh mesh, double time = 0.0);
  State(Mesh mesh, Eigen::VectorXd values, double time);

  const Mesh& mesh() const { return mesh_; }
  int vars() const { return vars_; }
  Index num_dofs() const { return values_.size(); }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  Index flat_index(Index cell, int var) const;
  std::pair<Index, int> cell_var(Index flat) const;

  double& operator()(Index cell, int var) { return values_[cell * vars_ + var]; }
  double operator()(Index cell, int var) const { return values_[cell * vars_ + var]; }

  Eigen::VectorXd& flat() { return values_; }
  const Eigen::VectorXd& flat() const { return values_; }

  double* cell_data(Index cell) { return values_.data() + cell * vars_; }
  const double* cell_data(Index cell) const { return values_.data() + cell * vars_; }

private:
  Mesh mesh_;
  int vars_ = 3;
  Eigen::VectorXd values_;
  double time_ = 0.0;
};

/// Primitive variables of a single cell. Unused velocity components are 0.
struct Primitive {
  double rho = 0.0;
  std::array<double, 2> u{0.0, 0.0};
  double p = 0.0;
};

/// Primitive variables of a whole mesh.
struct PrimitiveState {
  std::vector<Primitive> cells;
};

// Single-cell conversions. `cons` points to num_vars(dim) values.
inline Primitive to_primitive(const double* cons, int dim, double gamma) {
  Primitive p;
  p.rho = cons[0];
  double kinetic = 0.0;
  for (int d = 0; d < dim; ++d) {
    p.u[d] = cons[1 + d] / cons[0];
    kinetic += cons[1 + d] * p.u[d];
  }
  p.p = (gamma - 1.0) * (cons[dim + 1] - 0.5 * kinetic);
  return p;
}
void to_conservative(const Primitive& prim, int dim, double gamma, double* cons);

/// True if density and pressure are strictly positive (and finite).
bool admissible(const double* cons, int dim, double gamma);

/// Throws PositivityError naming the first offending cell.
PrimitiveState conservative_to_primitive(const State& state, double gamma);
State primitive_to_conservative(const Mesh& mesh, const PrimitiveState& prim,
                                double gamma, double time = 0.0);

} // namespace arom

#endif // AROM_MESH_STATE_HPP
