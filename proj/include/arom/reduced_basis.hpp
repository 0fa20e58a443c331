#ifndef AROM_REDUCED_BASIS_HPP
#define AROM_REDUCED_BASIS_HPP

#include "arom/mesh_state.hpp"

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace arom {

class RankDeficientError : public std::runtime_error {
public:
  explicit RankDeficientError(const std::string& what) : std::runtime_error(what) {}
};

struct PodResult {
  Eigen::MatrixXd basis;           // N x r, orthonormal columns
  Eigen::VectorXd singular_values; // all min(N, w) values, descending
  bool rank_deficient = false;     // true when r < requested m
};

/// Dominant m left singular vectors of `deviations` (N x w) from a thin SVD.
/// Directions with sigma <= max(rel_tol * sigma_1, abs_floor) are dropped, so
/// fewer than m columns may come back. Each column's largest-magnitude entry
/// is made positive (lowest index wins ties).
PodResult pod(const Eigen::MatrixXd& deviations, int m, double rel_tol = 1e-10,
              double abs_floor = 0.0);

/// Arithmetic mean of the snapshots. Entries equal across all snapshots are
/// reproduced exactly.
Eigen::VectorXd reference_state(std::span<const Eigen::VectorXd* const> snapshots);

/// Interpolation points. Each point is a cell; `rows[i]` is the flat DOF row
/// of that cell used in the least-squares fit.
struct OdeimPoints {
  std::vector<Index> cells;
  std::vector<Index> rows;

  Index size() const { return static_cast<Index>(cells.size()); }
};

/// Greedy DEIM for the first m points, then oversampling up to n_p points by
/// maximizing the lower bound on the growth of sigma_min(P^T Phi). Only one
/// row per cell is ever chosen. Ties go to the lowest row index.
OdeimPoints odeim_select(const Eigen::MatrixXd& basis, Index n_p, int vars_per_cell);

/// Affine subspace psi + span(Phi) with a cached least-squares factorization
/// of the sampled basis rows.
class ReducedModel {
public:
  ReducedModel() = default;
  ReducedModel(Eigen::MatrixXd basis, Eigen::VectorXd reference, OdeimPoints points);

  int dim() const { return static_cast<int>(basis_.cols()); }
  const Eigen::MatrixXd& basis() const { return basis_; }
  const Eigen::VectorXd& reference() const { return reference_; }
  const OdeimPoints& points() const { return points_; }

  /// Least-squares coordinates from (v - psi) sampled at the point rows.
  Eigen::VectorXd coordinates_from_samples(const Eigen::VectorXd& sampled_deviation) const;
  /// Same, reading the point rows of a full-length vector.
  Eigen::VectorXd coordinates(const Eigen::VectorXd& v) const;

  Eigen::VectorXd reconstruct(const Eigen::VectorXd& y) const;
  /// Overwrites the listed cells of `out` with psi + Phi y.
  void reconstruct_cells(std::span<const Index> cells, int vars_per_cell,
                         const Eigen::VectorXd& y, Eigen::VectorXd& out) const;

private:
  Eigen::MatrixXd basis_;
  Eigen::VectorXd reference_;
  OdeimPoints points_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> sampled_qr_;
};

/// y = argmin || P^T Phi y - sampled_values ||_2 for the model's basis.
Eigen::VectorXd gappy_coordinates(const ReducedModel& model, const OdeimPoints& points,
                                  const Eigen::VectorXd& sampled_values);

} // namespace arom

#endif // AROM_REDUCED_BASIS_HPP
