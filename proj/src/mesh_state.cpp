#include "arom/mesh_state.hpp"

#include <cmath>

namespace arom {

Mesh Mesh::line(double lo, double hi, Index cells) {
  if (cells <= 0 || !(hi > lo))
    throw std::invalid_argument("Mesh::line: need cells > 0 and hi > lo");
  Mesh m;
  m.dim_ = 1;
  m.lo_ = {lo, 0.0};
  m.hi_ = {hi, 1.0};
  m.cells_ = {cells, 1};
  m.width_ = {(hi - lo) / static_cast<double>(cells), 1.0};
  return m;
}

Mesh Mesh::rectangle(std::array<double, 2> lo, std::array<double, 2> hi,
                     std::array<Index, 2> cells) {
  for (int a = 0; a < 2; ++a)
    if (cells[a] <= 0 || !(hi[a] > lo[a]))
      throw std::invalid_argument("Mesh::rectangle: need cells > 0 and hi > lo");
  Mesh m;
  m.dim_ = 2;
  m.lo_ = lo;
  m.hi_ = hi;
  m.cells_ = cells;
  for (int a = 0; a < 2; ++a)
    m.width_[a] = (hi[a] - lo[a]) / static_cast<double>(cells[a]);
  return m;
}

double Mesh::cell_volume() const {
  return dim_ == 1 ? width_[0] : width_[0] * width_[1];
}

std::array<double, 2> Mesh::center(Index cell) const {
  const auto ij = cell_coords(cell);
  return {lo_[0] + (static_cast<double>(ij[0]) + 0.5) * width_[0],
          dim_ == 1 ? 0.0 : lo_[1] + (static_cast<double>(ij[1]) + 0.5) * width_[1]};
}

bool Mesh::operator==(const Mesh& o) const {
  return dim_ == o.dim_ && lo_ == o.lo_ && hi_ == o.hi_ && cells_ == o.cells_;
}

State::State(Mesh mesh, double time)
    : mesh_(std::move(mesh)), vars_(num_vars(mesh_.dim())),
      values_(Eigen::VectorXd::Zero(mesh_.num_cells() * vars_)), time_(time) {}

State::State(Mesh mesh, Eigen::VectorXd values, double time)
    : mesh_(std::move(mesh)), vars_(num_vars(mesh_.dim())),
      values_(std::move(values)), time_(time) {
  if (values_.size() != mesh_.num_cells() * vars_)
    throw std::invalid_argument("State: value vector has wrong length");
}

Index State::flat_index(Index cell, int var) const {
  if (cell < 0 || cell >= mesh_.num_cells() || var < 0 || var >= vars_)
    throw std::out_of_range("State::flat_index: (cell " + std::to_string(cell) +
                            ", var " + std::to_string(var) + ") out of range");
  return cell * vars_ + var;
}

std::pair<Index, int> State::cell_var(Index flat) const {
  if (flat < 0 || flat >= values_.size())
    throw std::out_of_range("State::cell_var: index " + std::to_string(flat) +
                            " out of range");
  return {flat / vars_, static_cast<int>(flat % vars_)};
}

void to_conservative(const Primitive& prim, int dim, double gamma, double* cons) {
  cons[0] = prim.rho;
  double kinetic = 0.0;
  for (int d = 0; d < dim; ++d) {
    cons[1 + d] = prim.rho * prim.u[d];
    kinetic += prim.u[d] * prim.u[d];
  }
  cons[dim + 1] = prim.p / (gamma - 1.0) + 0.5 * prim.rho * kinetic;
}

bool admissible(const double* cons, int dim, double gamma) {
  const double rho = cons[0];
  if (!(rho > 0.0) || !std::isfinite(rho))
    return false;
  double momentum2 = 0.0;
  for (int d = 0; d < dim; ++d)
    momentum2 += cons[1 + d] * cons[1 + d];
  const double p = (gamma - 1.0) * (cons[dim + 1] - 0.5 * momentum2 / rho);
  return p > 0.0 && std::isfinite(p);
}

PrimitiveState conservative_to_primitive(const State& state, double gamma) {
  const int dim = state.mesh().dim();
  PrimitiveState out;
  out.cells.resize(static_cast<std::size_t>(state.mesh().num_cells()));
  for (Index i = 0; i < state.mesh().num_cells(); ++i) {
    const Primitive p = to_primitive(state.cell_data(i), dim, gamma);
    if (!(p.rho > 0.0))
      throw PositivityError(i, "non-positive density");
    if (!(p.p > 0.0))
      throw PositivityError(i, "non-positive pressure");
    out.cells[static_cast<std::size_t>(i)] = p;
  }
  return out;
}

State primitive_to_conservative(const Mesh& mesh, const PrimitiveState& prim,
                                double gamma, double time) {
  if (static_cast<Index>(prim.cells.size()) != mesh.num_cells())
    throw std::invalid_argument("primitive_to_conservative: cell count mismatch");
  State s(mesh, time);
  for (Index i = 0; i < mesh.num_cells(); ++i) {
    const Primitive& p = prim.cells[static_cast<std::size_t>(i)];
    if (!(p.rho > 0.0))
      throw PositivityError(i, "non-positive density");
    if (!(p.p > 0.0))
      throw PositivityError(i, "non-positive pressure");
    to_conservative(p, mesh.dim(), gamma, s.cell_data(i));
  }
  return s;
}

} // namespace arom
