#ifndef AROM_SYSTEM_HPP
#define AROM_SYSTEM_HPP

#include "arom/mesh_state.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace arom {

// Semi-discrete ODE system dq/dt = f(q, t) whose right-hand side is local:
// the rows of a cell depend only on the cells in its stencil. Values are
// stored cell-major with vars_per_cell() entries per cell.
class DiscreteSystem {
public:
  virtual ~DiscreteSystem() = default;

  virtual Index num_cells() const = 0;
  virtual int vars_per_cell() const = 0;
  Index num_dofs() const { return num_cells() * vars_per_cell(); }

  // Cells (including `cell` itself) read by the right-hand side of `cell`,
  // ascending. Stencils must be symmetric: j in stencil(i) <=> i in stencil(j).
  virtual void stencil(Index cell, std::vector<Index>& out) const = 0;

  // Right-hand side rows of the listed cells, written contiguously to `out`
  // in the order given. Only the stencil closure of `cells` is read from q.
  // Rows must be bit-identical to the same rows of a full evaluation.
  virtual void rhs(const Eigen::VectorXd& q, double t, std::span<const Index> cells,
                   double* out) const = 0;

  virtual void rhs(const Eigen::VectorXd& q, double t, Eigen::VectorXd& out) const;

  virtual bool admissible(const double* /*cell_values*/) const { return true; }
};

// Stencil adjacency of a DiscreteSystem plus a distance-2 coloring of its
// cells: two cells share a color only if no cell's stencil contains both,
// so columns of one color can be differenced together.
class StencilGraph {
public:
  explicit StencilGraph(const DiscreteSystem& system);

  Index num_cells() const { return static_cast<Index>(offsets_.size()) - 1; }
  std::span<const Index> stencil(Index cell) const {
    return {cells_.data() + offsets_[cell],
            static_cast<std::size_t>(offsets_[cell + 1] - offsets_[cell])};
  }
  int num_colors() const { return num_colors_; }
  int color(Index cell) const { return colors_[static_cast<std::size_t>(cell)]; }

  // Union of the stencils of `cells`, ascending.
  std::vector<Index> dilate(std::span<const Index> cells) const;

private:
  std::vector<Index> offsets_;
  std::vector<Index> cells_;
  std::vector<int> colors_;
  int num_colors_ = 0;
};

} // namespace arom

#endif // AROM_SYSTEM_HPP
