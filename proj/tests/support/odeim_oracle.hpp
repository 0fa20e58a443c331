#ifndef AROM_TESTS_ODEIM_ORACLE_HPP
#define AROM_TESTS_ODEIM_ORACLE_HPP

#include "arom/mesh_state.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

namespace arom::testing {

// Point selection written from the rule, with different linear algebra:
// DEIM coefficients from a full-pivot LU, singular values of the sampled
// basis from the eigenvalues of its Gram matrix.
inline std::vector<Index> odeim_oracle(const Eigen::MatrixXd& U, Index n_p, int c) {
  const Index rows = U.rows(), m = U.cols();
  std::vector<Index> picked;
  std::vector<bool> used(static_cast<std::size_t>(rows / c), false);
  auto argmax = [&](const Eigen::VectorXd& score) {
    Index best = -1;
    for (Index i = 0; i < rows; ++i) {
      if (used[static_cast<std::size_t>(i / c)])
        continue;
      if (best < 0 || score[i] > score[best])
        best = i;
    }
    used[static_cast<std::size_t>(best / c)] = true;
    picked.push_back(best);
  };
  argmax(U.col(0).cwiseAbs());
  for (Index j = 1; j < m; ++j) {
    Eigen::MatrixXd PU(j, j);
    Eigen::VectorXd b(j);
    for (Index i = 0; i < j; ++i) {
      PU.row(i) = U.row(picked[static_cast<std::size_t>(i)]).head(j);
      b[i] = U(picked[static_cast<std::size_t>(i)], j);
    }
    argmax((U.col(j) - U.leftCols(j) * PU.fullPivLu().solve(b)).cwiseAbs());
  }
  while (static_cast<Index>(picked.size()) < n_p) {
    Eigen::MatrixXd PU(static_cast<Index>(picked.size()), m);
    for (std::size_t i = 0; i < picked.size(); ++i)
      PU.row(static_cast<Index>(i)) = U.row(picked[i]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(PU.transpose() * PU);
    // Eigenvalues ascending: index 0 is sigma_min^2, index 1 the next one.
    const Eigen::VectorXd lam = es.eigenvalues();
    const Eigen::MatrixXd V = es.eigenvectors();
    Eigen::VectorXd score(rows);
    for (Index i = 0; i < rows; ++i) {
      const Eigen::RowVectorXd r = U.row(i);
      if (m == 1) {
        score[i] = r.squaredNorm();
        continue;
      }
      const double g = lam[1] - lam[0];
      const double proj = r.dot(V.col(0));
      const double b = g + r.squaredNorm();
      score[i] = b - std::sqrt(b * b - 4.0 * g * proj * proj);
    }
    argmax(score);
  }
  return picked;
}

} // namespace arom::testing

#endif // AROM_TESTS_ODEIM_ORACLE_HPP
