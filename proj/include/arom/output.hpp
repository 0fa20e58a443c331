#ifndef AROM_OUTPUT_HPP
#define AROM_OUTPUT_HPP

#include "arom/arom_driver.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace arom {

/// Snapshot file layout (little-endian):
///   char[8]  "AROMSNP1"
///   uint32   dimension
///   uint64   cells along x, cells along y (1 in 1D)
///   uint32   variables per cell
///   float64  time
///   float64  values, cell-major (all variables of cell 0, then cell 1, ...)
void write_snapshot(const std::filesystem::path& path, const Mesh& mesh, int vars,
                    const Eigen::VectorXd& values, double time);

struct Snapshot {
  int dim = 1;
  std::array<Index, 2> cells{1, 1};
  int vars = 0;
  double time = 0.0;
  Eigen::VectorXd values;
};
Snapshot read_snapshot(const std::filesystem::path& path);

/// Writes snapshots, masks and the per-step metrics table of one run into a
/// directory. Snapshots and masks are written every `stride` steps (0: only
/// the initial and final states).
class RunWriter {
public:
  RunWriter(std::filesystem::path dir, const Mesh& mesh, int vars, double dt, long steps,
            long stride, bool write_states);

  /// Observer to pass to run_hdm / run_arom.
  StepObserver observer();

  /// Metrics table: one header row, then one row per step.
  void write_metrics(const std::vector<StepRecord>& steps) const;

  const std::filesystem::path& dir() const { return dir_; }

private:
  bool due(long k) const;

  std::filesystem::path dir_;
  Mesh mesh_;
  int vars_;
  long steps_;
  double dt_;
  long stride_;
  bool write_states_;
  std::shared_ptr<std::ofstream> index_;
};

void write_metrics_csv(std::ostream& out, const std::vector<StepRecord>& steps);

/// Sampling mask as a text grid: one line per mesh row (y ascending), one
/// digit per cell: 1 solved by the HDM, 2 stencil neighbor, 0 reconstructed.
void write_mask(const std::filesystem::path& path, const Mesh& mesh,
                const std::vector<std::uint8_t>& mask);

/// Summary of a run as a flat JSON object; NaN values become null.
std::string summary_json(const AromConfig& config, const RunMetrics& metrics,
                         const std::vector<std::pair<std::string, double>>& extra = {});

/// Columnar density profile: "x rho_1 rho_2 ..." (1D) or "x y rho_1 ..." (2D).
void write_profile(const std::filesystem::path& path, const Mesh& mesh, int vars,
                   const std::vector<std::string>& names,
                   const std::vector<const Eigen::VectorXd*>& states);

} // namespace arom

#endif // AROM_OUTPUT_HPP
