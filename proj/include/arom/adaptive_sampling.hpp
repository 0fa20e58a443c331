#ifndef AROM_ADAPTIVE_SAMPLING_HPP
#define AROM_ADAPTIVE_SAMPLING_HPP

#include "arom/euler_fv.hpp"
#include "arom/mesh_state.hpp"
#include "arom/reduced_basis.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace arom {

struct RreSettings {
  double delta = 0.8;
};

/// Cell sets of one hybrid step. s_hat is solved by the partial HDM, s_breve
/// (its complement) is reconstructed, and s_tilde (inside s_breve) feeds the
/// stencils of s_hat. All sets are ascending.
struct SamplingSets {
  std::vector<Index> s_hat;
  std::vector<Index> s_tilde;
  std::vector<Index> s_breve;
  std::vector<Index> g;
  std::vector<Index> p;
};

enum class MaskValue : std::uint8_t { Reconstructed = 0, Sampled = 1, Neighbor = 2 };

/// Squared reconstruction error of every DOF, summed over each cell's variables.
std::vector<double> pointwise_error(const Eigen::VectorXd& snapshot, const ReducedModel& model,
                                    const Eigen::VectorXd& y, int vars_per_cell);

struct RreSelection {
  std::vector<Index> cells; // in descending error order
  Index n_g = 0;
};

/// Fewest cells whose share of the total error reaches delta. Ties are
/// ranked by ascending cell index; all-zero errors select nothing.
RreSelection select_rre_points(std::span<const double> cell_errors, const RreSettings& settings);

/// RRE(n): share of total error held by the n largest entries.
double relative_reconstruction_error(std::span<const double> cell_errors, Index n);

/// Axis-aligned neighbors within `stencil.radius` of any cell in `cells`,
/// clipped at the mesh boundary, excluding `cells` themselves.
std::vector<Index> stencil_neighbors(std::span<const Index> cells, const Mesh& mesh,
                                     const StencilSpec& stencil);

SamplingSets assemble_sampling(std::span<const Index> g, std::span<const Index> p,
                               const Mesh& mesh, const StencilSpec& stencil);

std::vector<std::uint8_t> sampling_mask(const SamplingSets& sets, Index num_cells);

} // namespace arom

#endif // AROM_ADAPTIVE_SAMPLING_HPP
