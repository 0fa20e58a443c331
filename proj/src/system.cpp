#include "arom/system.hpp"

#include <algorithm>
#include <numeric>

namespace arom {

void DiscreteSystem::rhs(const Eigen::VectorXd& q, double t, Eigen::VectorXd& out) const {
  std::vector<Index> all(static_cast<std::size_t>(num_cells()));
  std::iota(all.begin(), all.end(), Index{0});
  out.resize(num_dofs());
  rhs(q, t, all, out.data());
}

StencilGraph::StencilGraph(const DiscreteSystem& system) {
  const Index n = system.num_cells();
  offsets_.reserve(static_cast<std::size_t>(n) + 1);
  offsets_.push_back(0);
  std::vector<Index> buf;
  for (Index i = 0; i < n; ++i) {
    system.stencil(i, buf);
    cells_.insert(cells_.end(), buf.begin(), buf.end());
    offsets_.push_back(static_cast<Index>(cells_.size()));
  }

  // Greedy coloring in index order. Cell j conflicts with every cell that
  // appears together with it in some stencil, i.e. stencil(stencil(j)).
  colors_.assign(static_cast<std::size_t>(n), -1);
  std::vector<Index> stamp;
  for (Index j = 0; j < n; ++j) {
    stamp.clear();
    for (Index row : stencil(j))
      for (Index k : stencil(row))
        if (colors_[static_cast<std::size_t>(k)] >= 0)
          stamp.push_back(colors_[static_cast<std::size_t>(k)]);
    std::sort(stamp.begin(), stamp.end());
    int c = 0;
    for (Index used : stamp) {
      if (used == c)
        ++c;
      else if (used > c)
        break;
    }
    colors_[static_cast<std::size_t>(j)] = c;
    num_colors_ = std::max(num_colors_, c + 1);
  }
}

std::vector<Index> StencilGraph::dilate(std::span<const Index> cells) const {
  std::vector<Index> out;
  for (Index c : cells) {
    auto s = stencil(c);
    out.insert(out.end(), s.begin(), s.end());
  }
  if (8 * static_cast<Index>(out.size()) < num_cells()) {
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  // Dense: a marker scan beats sorting.
  std::vector<char> mark(static_cast<std::size_t>(num_cells()), 0);
  for (Index c : out)
    mark[static_cast<std::size_t>(c)] = 1;
  out.clear();
  for (Index c = 0; c < num_cells(); ++c)
    if (mark[static_cast<std::size_t>(c)])
      out.push_back(c);
  return out;
}

} // namespace arom
