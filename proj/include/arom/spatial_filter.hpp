#ifndef AROM_SPATIAL_FILTER_HPP
#define AROM_SPATIAL_FILTER_HPP

#include "arom/mesh_state.hpp"
#include "arom/system.hpp"

#include <Eigen/Core>

#include <functional>
#include <span>
#include <vector>

namespace arom {

struct FilterSettings {
  std::vector<int> cascade{2, 4, 6}; // applied in this order
  double eps_f = 1e-2;
  int j_max_f = 10;
  // Compare eps_f with the largest relative per-cell decrease (true) or with
  // the largest absolute decrease (false).
  bool relative = true;

  void validate() const;
};

/// Shapiro filter of order 2n: u - (-1)^n 4^-n D^{2n} u, where D^2 is the
/// centered second difference. The line is padded with n copies of each end
/// value before differencing.
std::vector<double> shapiro_filter_1d(std::span<const double> line, int order);

/// One pass of the line filter along every mesh axis in turn (x, then y),
/// applied to each of the `vars` interleaved variables.
Eigen::VectorXd shapiro_filter(const Mesh& mesh, int vars, const Eigen::VectorXd& values,
                               int order);

/// Writes per-cell residual magnitudes of `state` for the listed cells.
using CellResidualFn =
    std::function<void(const Eigen::VectorXd& state, std::span<const Index> cells, double* out)>;

struct FilterReport {
  std::vector<int> sweeps;                  // per cascade entry
  std::vector<std::vector<Index>> kept;     // kept-cell count of every sweep
  std::vector<double> initial_residual;     // per cell, on input
  std::vector<double> final_residual;       // per cell, on output
};

/// Repeated Shapiro filtering that keeps filtered values only where the
/// residual goes down. After every sweep no cell has a larger residual than
/// before it. A sweep loop ends when no cell improves, when the best
/// improvement falls below eps_f, or after j_max_f sweeps.
Eigen::VectorXd residual_gated_filter(const Eigen::VectorXd& v, const Mesh& mesh,
                                      const StencilGraph& graph, const CellResidualFn& residual,
                                      const std::function<bool(const double*)>& admissible,
                                      const FilterSettings& settings,
                                      FilterReport* report = nullptr);

} // namespace arom

#endif // AROM_SPATIAL_FILTER_HPP
