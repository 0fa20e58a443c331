#include "arom/spatial_filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace arom {

void FilterSettings::validate() const {
  for (int order : cascade)
    if (order != 2 && order != 4 && order != 6)
      throw std::invalid_argument("cascade: filter order " + std::to_string(order) +
                                  " is not one of 2, 4, 6");
  if (!(eps_f > 0.0))
    throw std::invalid_argument("eps_f: must be positive");
  if (j_max_f < 1)
    throw std::invalid_argument("j_max_f: must be at least 1");
}

std::vector<double> shapiro_filter_1d(std::span<const double> line, int order) {
  if (order != 2 && order != 4 && order != 6)
    throw std::invalid_argument("shapiro_filter_1d: order must be 2, 4 or 6");
  const std::size_t len = line.size();
  if (len == 0)
    return {};
  const int n = order / 2;

  std::vector<double> d(len + 2 * static_cast<std::size_t>(n));
  for (int g = 0; g < n; ++g) {
    d[static_cast<std::size_t>(g)] = line.front();
    d[len + static_cast<std::size_t>(n + g)] = line.back();
  }
  std::copy(line.begin(), line.end(), d.begin() + n);

  // Each second difference shortens the padded line by one entry per side.
  std::vector<double> next;
  for (int k = 0; k < n; ++k) {
    next.resize(d.size() - 2);
    for (std::size_t i = 0; i < next.size(); ++i)
      next[i] = d[i] - 2.0 * d[i + 1] + d[i + 2];
    d.swap(next);
  }

  const double scale = std::ldexp(n % 2 == 0 ? 1.0 : -1.0, -2 * n); // (-1)^n 4^-n
  std::vector<double> out(len);
  for (std::size_t i = 0; i < len; ++i)
    out[i] = line[i] - scale * d[i];
  return out;
}

Eigen::VectorXd shapiro_filter(const Mesh& mesh, int vars, const Eigen::VectorXd& values,
                               int order) {
  if (values.size() != mesh.num_cells() * vars)
    throw std::invalid_argument("shapiro_filter: value count does not match the mesh");
  Eigen::VectorXd out = values;
  std::vector<double> line;
  for (int axis = 0; axis < mesh.dim(); ++axis) {
    const Index len = mesh.cells(axis);
    const Index lines = mesh.num_cells() / len;
    const Index stride = axis == 0 ? 1 : mesh.cells(0);
    line.resize(static_cast<std::size_t>(len));
    for (Index l = 0; l < lines; ++l) {
      const Index first = axis == 0 ? l * mesh.cells(0) : l;
      for (int v = 0; v < vars; ++v) {
        for (Index i = 0; i < len; ++i)
          line[static_cast<std::size_t>(i)] = out[(first + i * stride) * vars + v];
        const std::vector<double> f = shapiro_filter_1d(line, order);
        for (Index i = 0; i < len; ++i)
          out[(first + i * stride) * vars + v] = f[static_cast<std::size_t>(i)];
      }
    }
  }
  return out;
}

Eigen::VectorXd residual_gated_filter(const Eigen::VectorXd& v, const Mesh& mesh,
                                      const StencilGraph& graph, const CellResidualFn& residual,
                                      const std::function<bool(const double*)>& admissible,
                                      const FilterSettings& settings, FilterReport* report) {
  settings.validate();
  const Index n = mesh.num_cells();
  const int vars = static_cast<int>(v.size() / n);
  if (v.size() != n * vars || graph.num_cells() != n)
    throw std::invalid_argument("residual_gated_filter: state does not match the mesh");

  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});

  Eigen::VectorXd cur = v;
  std::vector<double> r_cur(static_cast<std::size_t>(n));
  if (!settings.cascade.empty())
    residual(cur, all, r_cur.data());
  if (report) {
    *report = FilterReport{};
    report->initial_residual = r_cur;
  }

  // Residuals are local, so a cell whose stencil values did not change keeps
  // its residual bit for bit. Only cells next to a change are re-evaluated.
  enum Source : char { Same, Filtered, Original };
  std::vector<char> src(static_cast<std::size_t>(n));
  std::vector<double> r_cand(static_cast<std::size_t>(n));
  std::vector<double> r_mix(static_cast<std::size_t>(n));
  std::vector<char> kept(static_cast<std::size_t>(n), 0);
  std::vector<Index> changed, keep, eval, touched, reverted;
  std::vector<double> buf;

  auto evaluate = [&](const Eigen::VectorXd& state, const std::vector<Index>& cells,
                      std::vector<double>& into) {
    buf.resize(cells.size());
    if (!cells.empty())
      residual(state, cells, buf.data());
    for (std::size_t t = 0; t < cells.size(); ++t)
      into[static_cast<std::size_t>(cells[t])] = buf[t];
  };
  // Residual of the mixed state on `cells`: reuse the candidate or current
  // residual when the whole stencil comes from one of them.
  auto mix_residual = [&](const Eigen::VectorXd& mix, const std::vector<Index>& cells) {
    eval.clear();
    for (Index i : cells) {
      bool any_filtered = false, any_original = false;
      for (Index j : graph.stencil(i)) {
        any_filtered = any_filtered || src[static_cast<std::size_t>(j)] == Filtered;
        any_original = any_original || src[static_cast<std::size_t>(j)] == Original;
      }
      const auto ui = static_cast<std::size_t>(i);
      if (!any_original)
        r_mix[ui] = r_cand[ui];
      else if (!any_filtered)
        r_mix[ui] = r_cur[ui];
      else
        eval.push_back(i);
    }
    evaluate(mix, eval, r_mix);
  };

  for (int order : settings.cascade) {
    int sweeps = 0;
    std::vector<Index> kept_counts;
    while (sweeps < settings.j_max_f) {
      ++sweeps;
      Eigen::VectorXd cand = shapiro_filter(mesh, vars, cur, order);
      changed.clear();
      for (Index i = 0; i < n; ++i) {
        if (!admissible(cand.data() + i * vars))
          cand.segment(i * vars, vars) = cur.segment(i * vars, vars);
        else if (cand.segment(i * vars, vars) != cur.segment(i * vars, vars))
          changed.push_back(i);
      }
      const std::vector<Index> affected = graph.dilate(changed);
      r_cand = r_cur;
      evaluate(cand, affected, r_cand);

      keep.clear();
      for (Index i : affected)
        if (r_cand[static_cast<std::size_t>(i)] < r_cur[static_cast<std::size_t>(i)])
          keep.push_back(i);

      // Mixing changes the residual of neighbors too: revert kept cells next
      // to any cell whose residual went up until none does.
      std::fill(src.begin(), src.end(), Same);
      for (Index i : changed)
        src[static_cast<std::size_t>(i)] = Original;
      Eigen::VectorXd mix = cur;
      for (Index i : keep) {
        mix.segment(i * vars, vars) = cand.segment(i * vars, vars);
        if (src[static_cast<std::size_t>(i)] == Original)
          src[static_cast<std::size_t>(i)] = Filtered;
      }
      std::fill(kept.begin(), kept.end(), 0);
      for (Index i : keep)
        kept[static_cast<std::size_t>(i)] = 1;
      touched = graph.dilate(keep);
      mix_residual(mix, touched);
      std::vector<Index> check = touched;
      while (!keep.empty()) {
        reverted.clear();
        for (Index i : check) {
          if (!(r_mix[static_cast<std::size_t>(i)] > r_cur[static_cast<std::size_t>(i)]))
            continue;
          for (Index j : graph.stencil(i))
            if (kept[static_cast<std::size_t>(j)]) {
              kept[static_cast<std::size_t>(j)] = 0;
              mix.segment(j * vars, vars) = cur.segment(j * vars, vars);
              if (src[static_cast<std::size_t>(j)] == Filtered)
                src[static_cast<std::size_t>(j)] = Original;
              reverted.push_back(j);
            }
        }
        if (reverted.empty())
          break;
        std::erase_if(keep, [&](Index i) { return !kept[static_cast<std::size_t>(i)]; });
        check = graph.dilate(reverted);
        mix_residual(mix, check);
      }
      kept_counts.push_back(static_cast<Index>(keep.size()));
      if (keep.empty())
        break;

      double best = 0.0;
      for (Index i : keep) {
        const double before = r_cur[static_cast<std::size_t>(i)];
        const double drop = before - r_mix[static_cast<std::size_t>(i)];
        best = std::max(best, settings.relative ? (std::isinf(before) ? 1.0 : drop / before)
                                                : drop);
      }
      cur.swap(mix);
      for (Index i : touched)
        r_cur[static_cast<std::size_t>(i)] = r_mix[static_cast<std::size_t>(i)];
      if (best < settings.eps_f)
        break;
    }
    if (report) {
      report->sweeps.push_back(sweeps);
      report->kept.push_back(std::move(kept_counts));
    }
  }
  if (report)
    report->final_residual = r_cur;
  return cur;
}

} // namespace arom
