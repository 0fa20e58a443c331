#include "arom/arom_driver.hpp"

#include "arom/spatial_filter.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <memory>
#include <numeric>
#include <optional>

namespace arom {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::runtime_error step_failure(long k, const std::string& what) {
  return std::runtime_error("full solve failed at step " + std::to_string(k) + ": " + what);
}

// Shared by the HDM runner and the full steps of the ROM so both produce
// identical bits.
Eigen::VectorXd full_step(const BdfStep& step, const NewtonSolver& newton,
                          const Eigen::VectorXd& guess, long k, StepRecord& rec) {
  NewtonReport rep;
  Eigen::VectorXd q;
  try {
    q = full_solve(step, newton, guess, &rep);
  } catch (const SolverError& e) {
    throw step_failure(k, e.what());
  } catch (const PositivityError& e) {
    throw step_failure(k, e.what());
  } catch (const FluxError& e) {
    throw step_failure(k, e.what());
  }
  rec.kind = SolveKind::Full;
  rec.newton_iterations = rep.iterations;
  return q;
}

struct Model {
  ReducedModel rom;
  SamplingSets sets;
};

} // namespace

double relative_l1_error(const Eigen::VectorXd& state, const Eigen::VectorXd& reference,
                         int vars, bool density_only) {
  if (state.size() != reference.size() || vars <= 0 || state.size() % vars != 0)
    throw std::invalid_argument("relative_l1_error: states live on different grids");
  // Uniform meshes: the cell volume cancels in the ratio.
  double num = 0.0, den = 0.0;
  const Index n = state.size() / vars;
  const int used = density_only ? 1 : vars;
  for (Index i = 0; i < n; ++i)
    for (int v = 0; v < used; ++v) {
      num += std::abs(state[i * vars + v] - reference[i * vars + v]);
      den += std::abs(reference[i * vars + v]);
    }
  return den > 0.0 ? num / den : (num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
}

StepObserver record_into(Trajectory& out) {
  return [&out](long k, const Eigen::VectorXd& state, const StepRecord*, const SamplingSets*) {
    if (static_cast<long>(out.states.size()) != k)
      out.states.resize(static_cast<std::size_t>(k));
    out.states.push_back(state);
  };
}

RunResult run_hdm(const AromConfig& config, const StepObserver& observer) {
  config.validate();
  const Problem problem = make_problem(config);
  const EulerSystem system(problem.mesh, problem.gas, problem.boundary, problem.initial,
                           problem.euler);
  const StencilGraph graph(system);
  const NewtonSolver newton(graph, config.newton);
  const double dt = config.dt();

  RunResult result;
  result.steps.reserve(static_cast<std::size_t>(config.steps));
  std::deque<Eigen::VectorXd> history{problem.initial.flat()};
  if (observer)
    observer(0, history.back(), nullptr, nullptr);

  double busy = 0.0;
  for (long k = 1; k <= config.steps; ++k) {
    const auto t0 = Clock::now();
    BdfStep step{&system, BdfScheme::for_step(config.bdf_order, k, dt),
                 static_cast<double>(k) * dt, {}};
    for (std::size_t j = history.size() - static_cast<std::size_t>(step.scheme.order);
         j < history.size(); ++j)
      step.history.push_back(&history[j]);
    StepRecord rec;
    rec.k = k;
    rec.n_gamma = system.num_cells();
    Eigen::VectorXd q = full_step(step, newton, history.back(), k, rec);
    history.push_back(std::move(q));
    if (history.size() > 2)
      history.pop_front();
    rec.wall_ms = 1e3 * seconds_since(t0);
    busy += rec.wall_ms;
    result.steps.push_back(rec);
    if (observer)
      observer(k, history.back(), &result.steps.back(), nullptr);
  }
  result.wall_seconds = busy / 1e3;
  return result;
}

RunResult run_arom(const AromConfig& config, const StepObserver& observer,
                   const Trajectory* reference) {
  config.validate();
  const Problem problem = make_problem(config);
  const EulerSystem system(problem.mesh, problem.gas, problem.boundary, problem.initial,
                           problem.euler);
  const StencilGraph graph(system);
  // Separate solvers so partial solves do not evict the stored full-mesh matrix.
  const NewtonSolver newton(graph, config.newton);
  const NewtonSolver partial_newton(graph, config.newton);
  const Mesh& mesh = problem.mesh;
  const int c = system.vars_per_cell();
  const Index n_cells = system.num_cells();
  const double dt = config.dt();
  const std::size_t w = static_cast<std::size_t>(config.w);
  if (reference && static_cast<long>(reference->states.size()) < config.steps + 1)
    throw std::invalid_argument("run_arom: reference trajectory is shorter than the run");

  auto admissible = [&system](const double* cell) { return system.admissible(cell); };

  RunResult result;
  result.steps.reserve(static_cast<std::size_t>(config.steps));
  std::deque<Eigen::VectorXd> window{problem.initial.flat()}; // last w states
  if (observer)
    observer(0, window.back(), nullptr, nullptr);

  Eigen::VectorXd psi;
  std::optional<Model> model;
  double busy = 0.0;

  for (long k = 1; k <= config.steps; ++k) {
    const auto t0 = Clock::now();
    const double t = static_cast<double>(k) * dt;
    BdfStep step{&system, BdfScheme::for_step(config.bdf_order, k, dt), t, {}};
    for (std::size_t j = window.size() - static_cast<std::size_t>(step.scheme.order);
         j < window.size(); ++j)
      step.history.push_back(&window[j]);
    const Eigen::VectorXd& previous = window.back();

    StepRecord rec;
    rec.k = k;
    const bool full = k + 1 <= config.w || k % config.z == 0 || !model;
    Eigen::VectorXd gamma;
    SamplingSets used_sets;
    if (!full) {
      rec.kind = SolveKind::Hybrid;
      try {
        Eigen::VectorXd v = previous;
        const PartialSolveResult ps =
            partial_solve(model->sets, v, step, partial_newton, model->rom, config.sub);
        model->rom.reconstruct_cells(model->sets.s_breve, c, ps.y, v);
        FilterReport frep;
        const CellResidualFn residual = [&](const Eigen::VectorXd& s,
                                            std::span<const Index> cells, double* out) {
          cell_residual_norms(step, graph, s, cells, out);
        };
        gamma = residual_gated_filter(v, mesh, graph, residual, admissible, config.filter, &frep);
        for (Index i = 0; i < n_cells; ++i)
          if (!system.admissible(gamma.data() + i * c))
            throw PositivityError(i, "hybrid snapshot is not admissible");
        rec.n_gamma = static_cast<Index>(model->sets.s_hat.size());
        rec.n_p = static_cast<Index>(model->sets.p.size());
        rec.n_g = static_cast<Index>(model->sets.g.size());
        rec.subiterations = ps.subiterations;
        rec.newton_iterations = static_cast<int>(ps.newton_iterations);
        rec.filter_sweeps = std::accumulate(frep.sweeps.begin(), frep.sweeps.end(), 0);
        if (observer)
          used_sets = model->sets;
      } catch (const SolverError&) {
        rec.escalated = true;
      } catch (const PositivityError&) {
        rec.escalated = true;
      } catch (const FluxError&) {
        rec.escalated = true;
      }
    }
    if (full || rec.escalated) {
      rec.n_gamma = n_cells;
      rec.n_p = rec.n_g = 0;
      rec.subiterations = 0;
      rec.filter_sweeps = 0;
      gamma = full_step(step, newton, previous, k, rec);
    }
    const SolveKind kind = rec.kind;

    window.push_back(std::move(gamma));
    if (window.size() > w)
      window.pop_front();
    const Eigen::VectorXd& current = window.back();

    // Model refresh for step k + 1.
    if (k == config.w - 1) {
      std::vector<const Eigen::VectorXd*> ptrs;
      for (const auto& s : window)
        ptrs.push_back(&s);
      psi = reference_state(ptrs);
    }
    if (k >= config.w - 1 && (k + 1) % config.z != 0) {
      std::vector<Index> g;
      if (k >= config.w && model) {
        const Eigen::VectorXd y = model->rom.coordinates(current);
        const std::vector<double> err = pointwise_error(current, model->rom, y, c);
        g = select_rre_points(err, RreSettings{config.delta}).cells;
      }
      // Deviations from the reference of the previous refresh, as written.
      Eigen::MatrixXd dev(system.num_dofs(), static_cast<Index>(window.size()));
      for (std::size_t j = 0; j < window.size(); ++j)
        dev.col(static_cast<Index>(j)) = window[j] - psi;
      const PodResult basis =
          pod(dev, config.m, config.pod_rel_tol, config.pod_abs_tol * psi.norm());
      OdeimPoints points = odeim_select(basis.basis, config.n_p, c);
      std::vector<const Eigen::VectorXd*> ptrs;
      for (const auto& s : window)
        ptrs.push_back(&s);
      psi = reference_state(ptrs);
      SamplingSets sets = assemble_sampling(g, points.cells, mesh, system.stencil_spec());
      try {
        model = Model{ReducedModel(basis.basis, psi, std::move(points)), std::move(sets)};
      } catch (const RankDeficientError&) {
        model.reset(); // next step falls back to a full solve
      }
    }

    rec.wall_ms = 1e3 * seconds_since(t0);
    busy += rec.wall_ms;
    if (reference)
      rec.error = relative_l1_error(current, reference->states[static_cast<std::size_t>(k)], c,
                                    config.density_error);
    rec.kind = kind;
    result.steps.push_back(rec);
    if (observer)
      observer(k, current, &result.steps.back(),
               kind == SolveKind::Hybrid ? &used_sets : nullptr);
  }
  result.wall_seconds = busy / 1e3;
  return result;
}

RunMetrics compute_metrics(const std::vector<StepRecord>& steps, Index num_cells,
                           double hdm_seconds, double rom_seconds) {
  if (num_cells <= 0)
    throw std::invalid_argument("compute_metrics: no cells");
  RunMetrics m;
  if (steps.empty())
    return m;
  const double n = static_cast<double>(num_cells);
  double s_all = 0.0, s_hyb = 0.0, p_hyb = 0.0, j_hyb = 0.0, err = 0.0;
  bool have_error = true;
  for (const StepRecord& r : steps) {
    const double frac = static_cast<double>(r.n_gamma) / n;
    s_all += frac;
    if (std::isnan(r.error))
      have_error = false;
    else
      err += r.error;
    if (r.kind == SolveKind::Hybrid) {
      ++m.hybrid_steps;
      s_hyb += frac;
      p_hyb += static_cast<double>(r.n_p) / n;
      j_hyb += r.subiterations;
      m.max_hybrid_sampling = std::max(m.max_hybrid_sampling, frac);
    }
    if (r.escalated)
      ++m.escalations;
  }
  const double count = static_cast<double>(steps.size());
  m.sampling = s_all / count;
  m.no_hybrid_steps = m.hybrid_steps == 0;
  if (!m.no_hybrid_steps) {
    const double h = static_cast<double>(m.hybrid_steps);
    m.hybrid_sampling = s_hyb / h;
    m.odeim_sampling = p_hyb / h;
    m.mean_subiterations = j_hyb / h;
  }
  if (have_error)
    m.mean_error = err / count;
  if (hdm_seconds > 0.0)
    m.hdm_seconds = hdm_seconds;
  if (rom_seconds > 0.0)
    m.rom_seconds = rom_seconds;
  if (hdm_seconds > 0.0 && rom_seconds > 0.0)
    m.speedup = hdm_seconds / rom_seconds;
  return m;
}

} // namespace arom
