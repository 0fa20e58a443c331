#ifndef AROM_PROBLEM_HPP
#define AROM_PROBLEM_HPP

#include "arom/euler_fv.hpp"
#include "arom/mesh_state.hpp"
#include "arom/spatial_filter.hpp"
#include "arom/time_integration.hpp"

#include <array>
#include <limits>
#include <optional>
#include <string>

namespace arom {

/// Period value meaning "no full solves after the first w steps".
inline constexpr long kNeverPeriod = std::numeric_limits<long>::max();

/// Everything needed to run one experiment: problem selection and
/// resolution, time grid, and the reduced-model parameters.
struct AromConfig {
  // problem
  std::string preset = "sod";
  std::array<Index, 2> cells{499, 1};
  double final_time = 0.2;
  long steps = 999;
  LimitedVariables limiting = LimitedVariables::Conservative;
  double entropy_fix = 0.0;

  // reduced model
  int w = 5;
  int m = 4;
  long z = kNeverPeriod;
  double delta = 0.80;
  Index n_p = 8;
  int bdf_order = 2;
  double pod_rel_tol = 1e-10;
  double pod_abs_tol = 1e-12; // relative to ||psi||_2
  bool density_error = false; // e_k from density only instead of all variables

  SubiterationSettings sub;
  FilterSettings filter;
  NewtonSettings newton;

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
  double dt() const { return final_time / static_cast<double>(steps); }
};

/// Left/right data of a 1D Riemann problem set up by a preset.
struct RiemannData {
  Primitive left;
  Primitive right;
  double x0 = 0.5;
};

struct Problem {
  std::string name;
  Mesh mesh;
  GasModel gas;
  BoundarySpec boundary;
  EulerOptions euler;
  State initial;
  std::optional<RiemannData> riemann;
};

/// Parameters of the named preset ("sod" or "implosion").
AromConfig preset_config(const std::string& name);

/// Mesh, gas, boundary conditions and initial state for config.preset at
/// config.cells resolution.
Problem make_problem(const AromConfig& config);

std::string period_to_string(long z);
long parse_period(const std::string& text); // accepts "inf"

} // namespace arom

#endif // AROM_PROBLEM_HPP
