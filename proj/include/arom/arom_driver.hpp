#ifndef AROM_AROM_DRIVER_HPP
#define AROM_AROM_DRIVER_HPP

#include "arom/adaptive_sampling.hpp"
#include "arom/problem.hpp"

#include <Eigen/Core>

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace arom {

enum class SolveKind { Full, Hybrid };

struct StepRecord {
  long k = 0;
  SolveKind kind = SolveKind::Full;
  bool escalated = false; // hybrid step that fell back to a full solve
  Index n_gamma = 0;      // cells solved by the HDM: all for full steps, |S_hat| otherwise
  Index n_p = 0;          // ODEIM points (hybrid steps)
  Index n_g = 0;          // RRE points (hybrid steps)
  int subiterations = 0;  // J (hybrid steps)
  int newton_iterations = 0;
  int filter_sweeps = 0;
  double error = std::numeric_limits<double>::quiet_NaN(); // e_k, if a reference was given
  double wall_ms = 0.0;
};

/// Called once per time level with the state just computed. `record` is null
/// for k = 0; `sets` is non-null for hybrid steps. Time spent here is not
/// counted in the run's wall time.
using StepObserver = std::function<void(long k, const Eigen::VectorXd& state,
                                        const StepRecord* record, const SamplingSets* sets)>;

/// States q_0..q_N_t of a run kept in memory.
struct Trajectory {
  std::vector<Eigen::VectorXd> states;
};

struct RunMetrics {
  double mean_error = std::numeric_limits<double>::quiet_NaN(); // mean of e_1..e_N_t
  double sampling = 0.0;        // s-bar, fraction of cells, all steps
  double hybrid_sampling = 0.0; // s-bar*, hybrid steps only (0 if none)
  bool no_hybrid_steps = true;
  double odeim_sampling = 0.0;  // p-bar over hybrid steps
  double mean_subiterations = 0.0; // J-bar over hybrid steps
  double max_hybrid_sampling = 0.0;
  long hybrid_steps = 0;
  long escalations = 0;
  double hdm_seconds = std::numeric_limits<double>::quiet_NaN();
  double rom_seconds = std::numeric_limits<double>::quiet_NaN();
  double speedup = std::numeric_limits<double>::quiet_NaN();
};

struct RunResult {
  std::vector<StepRecord> steps; // k = 1..N_t
  double wall_seconds = 0.0;
};

/// Runs the full-order model for config.steps steps.
RunResult run_hdm(const AromConfig& config, const StepObserver& observer = {});

/// Hybrid-snapshot adaptive ROM. If `reference` is given, e_k is filled in
/// each record (and is visible to the observer).
RunResult run_arom(const AromConfig& config, const StepObserver& observer = {},
                   const Trajectory* reference = nullptr);

/// Cell-volume-weighted relative L1 distance of `state` from `reference`,
/// over all conservative variables or density only.
double relative_l1_error(const Eigen::VectorXd& state, const Eigen::VectorXd& reference,
                         int vars_per_cell, bool density_only);

/// Averages of the per-step records. Wall times are optional (<= 0: unknown).
RunMetrics compute_metrics(const std::vector<StepRecord>& steps, Index num_cells,
                           double hdm_seconds = 0.0, double rom_seconds = 0.0);

/// Observer that stores every state in `out`.
StepObserver record_into(Trajectory& out);

} // namespace arom

#endif // AROM_AROM_DRIVER_HPP
