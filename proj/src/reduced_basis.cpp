#include "arom/reduced_basis.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace arom {

PodResult pod(const Eigen::MatrixXd& deviations, int m, double rel_tol, double abs_floor) {
  if (m < 0 || m > deviations.cols())
    throw std::invalid_argument("pod: need 0 <= m <= number of snapshots");
  if (!deviations.allFinite())
    throw std::invalid_argument("pod: snapshot matrix has non-finite entries");

  PodResult out;
  if (deviations.cols() == 0 || deviations.rows() == 0) {
    out.basis.resize(deviations.rows(), 0);
    out.rank_deficient = m > 0;
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(
      deviations, Eigen::ComputeThinU);
  out.singular_values = svd.singularValues();

  const double sigma1 = out.singular_values.size() > 0 ? out.singular_values[0] : 0.0;
  const double cut = std::max(rel_tol * sigma1, abs_floor);
  int r = 0;
  while (r < m && r < out.singular_values.size() && out.singular_values[r] > cut &&
         out.singular_values[r] > 0.0)
    ++r;
  out.rank_deficient = r < m;
  out.basis = svd.matrixU().leftCols(r);

  for (int j = 0; j < r; ++j) {
    Eigen::Index imax = 0;
    out.basis.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.basis(imax, j) < 0.0)
      out.basis.col(j) *= -1.0;
  }
  return out;
}

Eigen::VectorXd reference_state(std::span<const Eigen::VectorXd* const> snapshots) {
  if (snapshots.empty())
    throw std::invalid_argument("reference_state: empty window");
  const Eigen::VectorXd& base = *snapshots.front();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(base.size());
  for (const Eigen::VectorXd* s : snapshots) {
    if (s->size() != base.size())
      throw std::invalid_argument("reference_state: snapshot length mismatch");
    acc += *s - base;
  }
  return base + acc / static_cast<double>(snapshots.size());
}

namespace {

// Row with the largest score among rows whose cell is not taken yet.
Index best_row(const Eigen::VectorXd& score, const std::vector<char>& taken, int vars) {
  Index best = -1;
  double best_val = -1.0;
  for (Index i = 0; i < score.size(); ++i) {
    if (taken[static_cast<std::size_t>(i / vars)])
      continue;
    if (score[i] > best_val) {
      best_val = score[i];
      best = i;
    }
  }
  return best;
}

} // namespace

OdeimPoints odeim_select(const Eigen::MatrixXd& basis, Index n_p, int vars_per_cell) {
  const Index rows = basis.rows();
  const Index m = basis.cols();
  if (vars_per_cell <= 0 || rows % vars_per_cell != 0)
    throw std::invalid_argument("odeim_select: row count is not a multiple of vars_per_cell");
  const Index n_cells = rows / vars_per_cell;
  if (n_p > n_cells)
    throw std::invalid_argument("odeim_select: n_p = " + std::to_string(n_p) +
                                " exceeds the number of cells " + std::to_string(n_cells));
  if (n_p < m)
    throw std::invalid_argument("odeim_select: n_p must be at least the basis dimension");

  OdeimPoints pts;
  if (m == 0)
    return pts;
  std::vector<char> taken(static_cast<std::size_t>(n_cells), 0);
  auto take = [&](Index row) {
    pts.rows.push_back(row);
    pts.cells.push_back(row / vars_per_cell);
    taken[static_cast<std::size_t>(row / vars_per_cell)] = 1;
  };

  // DEIM: interpolate mode j on the points chosen so far, pick the largest residual.
  take(best_row(basis.col(0).cwiseAbs(), taken, vars_per_cell));
  for (Index j = 1; j < m; ++j) {
    Eigen::MatrixXd pphi(j, j);
    Eigen::VectorXd rhs(j);
    for (Index i = 0; i < j; ++i) {
      pphi.row(i) = basis.row(pts.rows[static_cast<std::size_t>(i)]).head(j);
      rhs[i] = basis(pts.rows[static_cast<std::size_t>(i)], j);
    }
    const Eigen::VectorXd coef = pphi.partialPivLu().solve(rhs);
    const Eigen::VectorXd residual = basis.col(j) - basis.leftCols(j) * coef;
    take(best_row(residual.cwiseAbs(), taken, vars_per_cell));
  }

  // Oversampling: maximize the lower bound on the new smallest singular value.
  Eigen::VectorXd score(rows);
  const Eigen::VectorXd row_norms = basis.rowwise().squaredNorm();
  while (pts.size() < n_p) {
    Eigen::MatrixXd pphi(pts.size(), m);
    for (Index i = 0; i < pts.size(); ++i)
      pphi.row(i) = basis.row(pts.rows[static_cast<std::size_t>(i)]);
    if (m == 1) {
      score = basis.col(0).cwiseAbs2();
    } else {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(pphi, Eigen::ComputeThinV);
      const Eigen::VectorXd& s = svd.singularValues();
      const double gap = s[m - 2] * s[m - 2] - s[m - 1] * s[m - 1];
      // V is square and orthogonal, so |V^T u_i| = |u_i|.
      const Eigen::VectorXd along = basis * svd.matrixV().col(m - 1);
      for (Index i = 0; i < rows; ++i) {
        const double b = gap + row_norms[i];
        const double last = along[i];
        score[i] = b - std::sqrt(std::max(0.0, b * b - 4.0 * gap * last * last));
      }
    }
    const Index row = best_row(score, taken, vars_per_cell);
    if (row < 0)
      break;
    take(row);
  }
  return pts;
}

ReducedModel::ReducedModel(Eigen::MatrixXd basis, Eigen::VectorXd reference,
                           OdeimPoints points)
    : basis_(std::move(basis)), reference_(std::move(reference)), points_(std::move(points)) {
  if (basis_.rows() != reference_.size())
    throw std::invalid_argument("ReducedModel: basis and reference lengths differ");
  if (points_.size() < basis_.cols())
    throw RankDeficientError("ReducedModel: fewer sample points than basis vectors");
  Eigen::MatrixXd sampled(points_.size(), basis_.cols());
  for (Index i = 0; i < points_.size(); ++i)
    sampled.row(i) = basis_.row(points_.rows[static_cast<std::size_t>(i)]);
  if (basis_.cols() > 0) {
    sampled_qr_.compute(sampled);
    if (sampled_qr_.rank() < basis_.cols())
      throw RankDeficientError("ReducedModel: sampled basis rows have rank " +
                               std::to_string(sampled_qr_.rank()) + " < " +
                               std::to_string(basis_.cols()));
  }
}

Eigen::VectorXd
ReducedModel::coordinates_from_samples(const Eigen::VectorXd& sampled_deviation) const {
  if (sampled_deviation.size() != points_.size())
    throw std::invalid_argument("ReducedModel: sample count mismatch");
  if (basis_.cols() == 0)
    return Eigen::VectorXd(0);
  return sampled_qr_.solve(sampled_deviation);
}

Eigen::VectorXd ReducedModel::coordinates(const Eigen::VectorXd& v) const {
  Eigen::VectorXd d(points_.size());
  for (Index i = 0; i < points_.size(); ++i) {
    const Index r = points_.rows[static_cast<std::size_t>(i)];
    d[i] = v[r] - reference_[r];
  }
  return coordinates_from_samples(d);
}

Eigen::VectorXd ReducedModel::reconstruct(const Eigen::VectorXd& y) const {
  Eigen::VectorXd out(reference_.size());
  for (Index r = 0; r < out.size(); ++r)
    out[r] = basis_.cols() == 0 ? reference_[r] : reference_[r] + basis_.row(r).dot(y);
  return out;
}

void ReducedModel::reconstruct_cells(std::span<const Index> cells, int vars,
                                     const Eigen::VectorXd& y, Eigen::VectorXd& out) const {
  for (Index cell : cells)
    for (int v = 0; v < vars; ++v) {
      const Index r = cell * vars + v;
      out[r] = basis_.cols() == 0 ? reference_[r] : reference_[r] + basis_.row(r).dot(y);
    }
}

Eigen::VectorXd gappy_coordinates(const ReducedModel& model, const OdeimPoints& points,
                                  const Eigen::VectorXd& sampled_values) {
  if (points.rows == model.points().rows)
    return model.coordinates_from_samples(sampled_values);
  ReducedModel other(model.basis(), model.reference(), points);
  return other.coordinates_from_samples(sampled_values);
}

} // namespace arom
