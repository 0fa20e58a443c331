#include "arom/adaptive_sampling.hpp"

#include <algorithm>
#include <numeric>

namespace arom {

std::vector<double> pointwise_error(const Eigen::VectorXd& snapshot, const ReducedModel& model,
                                    const Eigen::VectorXd& y, int vars) {
  const Eigen::VectorXd approx = model.reconstruct(y);
  if (approx.size() != snapshot.size())
    throw std::invalid_argument("pointwise_error: snapshot length mismatch");
  const Index n_cells = snapshot.size() / vars;
  std::vector<double> err(static_cast<std::size_t>(n_cells), 0.0);
  for (Index c = 0; c < n_cells; ++c) {
    double sum = 0.0;
    for (int v = 0; v < vars; ++v) {
      const double d = snapshot[c * vars + v] - approx[c * vars + v];
      sum += d * d;
    }
    err[static_cast<std::size_t>(c)] = sum;
  }
  return err;
}

namespace {

std::vector<Index> ranking(std::span<const double> e) {
  std::vector<Index> order(e.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return e[static_cast<std::size_t>(a)] > e[static_cast<std::size_t>(b)];
  });
  return order;
}

} // namespace

double relative_reconstruction_error(std::span<const double> cell_errors, Index n) {
  const std::vector<Index> order = ranking(cell_errors);
  double total = 0.0;
  double head = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    total += cell_errors[static_cast<std::size_t>(order[k])];
    if (static_cast<Index>(k) + 1 == n)
      head = total;
  }
  if (n <= 0)
    head = 0.0;
  if (n >= static_cast<Index>(order.size()))
    head = total;
  return total > 0.0 ? head / total : 0.0;
}

RreSelection select_rre_points(std::span<const double> cell_errors, const RreSettings& settings) {
  if (!(settings.delta > 0.0 && settings.delta <= 1.0))
    throw std::invalid_argument("select_rre_points: delta must lie in (0, 1]");
  RreSelection sel;
  const std::vector<Index> order = ranking(cell_errors);
  // Summing in rank order makes the last cumulative value equal the total.
  double total = 0.0;
  for (Index i : order)
    total += cell_errors[static_cast<std::size_t>(i)];
  if (!(total > 0.0))
    return sel;
  double head = 0.0;
  for (Index i : order) {
    head += cell_errors[static_cast<std::size_t>(i)];
    sel.cells.push_back(i);
    if (head / total >= settings.delta)
      break;
  }
  sel.n_g = static_cast<Index>(sel.cells.size());
  return sel;
}

std::vector<Index> stencil_neighbors(std::span<const Index> cells, const Mesh& mesh,
                                     const StencilSpec& stencil) {
  std::vector<char> inside(static_cast<std::size_t>(mesh.num_cells()), 0);
  for (Index c : cells)
    inside[static_cast<std::size_t>(c)] = 1;
  std::vector<Index> out;
  const Index r = stencil.radius;
  for (Index c : cells) {
    const auto ij = mesh.cell_coords(c);
    for (int axis = 0; axis < mesh.dim(); ++axis) {
      for (Index d = -r; d <= r; ++d) {
        if (d == 0)
          continue;
        Index x = ij[0], y = ij[1];
        (axis == 0 ? x : y) += d;
        if (x < 0 || x >= mesh.cells(0) || y < 0 || y >= mesh.cells(1))
          continue;
        const Index n = mesh.cell_index(x, y);
        if (!inside[static_cast<std::size_t>(n)])
          out.push_back(n);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SamplingSets assemble_sampling(std::span<const Index> g, std::span<const Index> p,
                               const Mesh& mesh, const StencilSpec& stencil) {
  const Index n = mesh.num_cells();
  SamplingSets s;
  s.g.assign(g.begin(), g.end());
  s.p.assign(p.begin(), p.end());
  std::vector<char> hat(static_cast<std::size_t>(n), 0);
  for (auto list : {g, p})
    for (Index c : list) {
      if (c < 0 || c >= n)
        throw std::out_of_range("assemble_sampling: cell " + std::to_string(c) +
                                " outside the mesh");
      hat[static_cast<std::size_t>(c)] = 1;
    }
  for (Index c = 0; c < n; ++c)
    (hat[static_cast<std::size_t>(c)] ? s.s_hat : s.s_breve).push_back(c);
  s.s_tilde = stencil_neighbors(s.s_hat, mesh, stencil);
  return s;
}

std::vector<std::uint8_t> sampling_mask(const SamplingSets& sets, Index num_cells) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(num_cells),
                                 static_cast<std::uint8_t>(MaskValue::Reconstructed));
  for (Index c : sets.s_tilde)
    mask[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(MaskValue::Neighbor);
  for (Index c : sets.s_hat)
    mask[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(MaskValue::Sampled);
  return mask;
}

} // namespace arom
