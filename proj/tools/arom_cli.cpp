// Command-line driver: full-order runs, adaptive ROM runs, parameter sweeps
// and HDM/ROM comparisons on the built-in presets.

#include "arom/arom_driver.hpp"
#include "arom/config.hpp"
#include "arom/exact_riemann.hpp"
#include "arom/output.hpp"

#include <CLI11.hpp>

#ifdef AROM_HAVE_OPENMP
#include <omp.h>
#endif

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace arom;

namespace {

struct Overrides {
  std::optional<std::string> preset;
  std::optional<std::string> config_path;
  std::optional<std::string> z;
  std::optional<double> delta;
  std::optional<int> w;
  std::optional<int> m;
  std::optional<long> n_p;
  std::optional<std::string> filters;
  std::optional<double> eps_y;
  std::optional<double> eps_f;
  std::optional<long> steps;
  std::optional<std::string> cells;
  bool density_error = false;
};

struct Common {
  Overrides o;
  std::string out;
  long dump_stride = 0;
  bool no_states = false;
  int threads = 0;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--preset", c.o.preset, "Experiment preset: sod or implosion");
  app->add_option("--config", c.o.config_path, "Config file (see README for the format)");
  app->add_option("--out", c.out, "Output directory (default: $AROM_OUT_DIR or ./arom_out)");
  app->add_option("--dump-stride", c.dump_stride,
                  "Write a snapshot every n steps (0: initial and final only)")
      ->check(CLI::NonNegativeNumber);
  app->add_flag("--no-snapshots", c.no_states, "Do not write snapshots or masks");
  app->add_option("--z", c.o.z, "Full-solve period, integer or inf");
  app->add_option("--delta", c.o.delta, "RRE threshold in (0, 1]");
  app->add_option("--w", c.o.w, "Snapshot window size");
  app->add_option("--m", c.o.m, "POD dimension");
  app->add_option("--np", c.o.n_p, "ODEIM point count");
  app->add_option("--filters", c.o.filters, "Filter cascade, e.g. 2,4,6 (empty: no filtering)");
  app->add_option("--eps-y", c.o.eps_y, "Subiteration tolerance on the reduced coordinates");
  app->add_option("--eps-f", c.o.eps_f, "Minimum filter improvement to keep sweeping");
  app->add_option("--steps", c.o.steps, "Number of time steps (keeps the final time)");
  app->add_option("--cells", c.o.cells, "Resolution: nx (1D) or nx,ny (2D)");
  app->add_flag("--density-error", c.o.density_error, "Measure e_k on density only");
  app->add_option("--threads", c.threads, "Worker threads (default: all cores)");
}

AromConfig resolve_config(const Overrides& o) {
  AromConfig cfg;
  std::optional<ConfigFile> file;
  if (o.config_path) {
    file = read_config_file(*o.config_path);
    std::string preset;
    if (o.preset)
      preset = *o.preset;
    else if (auto it = file->entries.find("problem.preset"); it != file->entries.end())
      preset = it->second.value;
    else
      throw ConfigError(*o.config_path + ": missing required key problem.preset (or pass --preset)");
    cfg = preset_config(preset);
    apply_config(*file, cfg);
    cfg.preset = preset;
  } else {
    cfg = preset_config(o.preset.value_or("sod"));
  }

  // Command-line flags win over the file. Overriding a field clears the file's
  // line reference for it so errors name the flag.
  auto flag_text = [](const auto& v) {
    std::ostringstream s;
    s << v;
    return s.str();
  };
  ConfigFile flags;
  flags.source = "<command line>";
  auto set = [&](const std::string& key, const std::string& value) {
    flags.entries[key] = ConfigEntry{value, 0};
    if (file)
      file->entries.erase(key);
  };
  if (o.z)
    set("arom.z", *o.z);
  if (o.delta)
    set("arom.delta", format_double(*o.delta));
  if (o.w)
    set("arom.w", flag_text(*o.w));
  if (o.m)
    set("arom.m", flag_text(*o.m));
  if (o.n_p)
    set("arom.n_p", flag_text(*o.n_p));
  if (o.filters)
    set("filter.cascade", *o.filters);
  if (o.eps_y)
    set("subiteration.eps_y", format_double(*o.eps_y));
  if (o.eps_f)
    set("filter.eps_f", format_double(*o.eps_f));
  if (o.cells)
    set("problem.cells", *o.cells);
  if (o.density_error)
    set("arom.density_error", "true");
  try {
    apply_config(flags, cfg);
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    const std::string prefix = "<command line>:0: ";
    if (msg.rfind(prefix, 0) == 0)
      msg = "<command line>: " + msg.substr(prefix.size());
    throw ConfigError(msg);
  }
  if (o.steps) {
    // Same final time, different step count.
    cfg.steps = *o.steps;
  }
  validate_config(cfg, file ? &*file : nullptr);
  return cfg;
}

fs::path out_dir(const Common& c, const std::string& fallback_leaf) {
  if (!c.out.empty())
    return c.out;
  const char* env = std::getenv("AROM_OUT_DIR");
  return fs::path(env && *env ? env : "arom_out") / fallback_leaf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void print_summary(const RunMetrics& m) {
  auto pct = [](double x) { return 100.0 * x; };
  std::cout << "  mean error       " << m.mean_error << "\n"
            << "  sampling         " << pct(m.sampling) << " %\n"
            << "  hybrid sampling  " << pct(m.hybrid_sampling) << " %"
            << (m.no_hybrid_steps ? " (no hybrid steps)" : "") << "\n"
            << "  ODEIM sampling   " << pct(m.odeim_sampling) << " %\n"
            << "  subiterations    " << m.mean_subiterations << "\n"
            << "  max hybrid       " << pct(m.max_hybrid_sampling) << " %\n"
            << "  escalations      " << m.escalations << "\n"
            << "  t_H / t_R        " << m.hdm_seconds << " s / " << m.rom_seconds << " s\n"
            << "  speedup          " << m.speedup << "\n";
}

// Density L1 error of a 1D state against the exact Riemann solution.
double exact_density_error(const AromConfig& cfg, const Eigen::VectorXd& state) {
  const Problem p = make_problem(cfg);
  if (!p.riemann)
    return std::numeric_limits<double>::quiet_NaN();
  const PrimitiveState ex = exact_riemann_profile(p.mesh, cfg.final_time, p.riemann->x0,
                                                  p.riemann->left, p.riemann->right, p.gas.gamma);
  const int c = p.initial.vars();
  double num = 0.0, den = 0.0;
  for (Index i = 0; i < p.mesh.num_cells(); ++i) {
    num += std::abs(state[i * c] - ex.cells[static_cast<std::size_t>(i)].rho);
    den += std::abs(ex.cells[static_cast<std::size_t>(i)].rho);
  }
  return num / den;
}

Eigen::VectorXd exact_density_state(const AromConfig& cfg, double t) {
  const Problem p = make_problem(cfg);
  const PrimitiveState ex = exact_riemann_profile(p.mesh, t, p.riemann->x0, p.riemann->left,
                                                  p.riemann->right, p.gas.gamma);
  State s = primitive_to_conservative(p.mesh, ex, p.gas.gamma, t);
  return s.flat();
}

int cmd_hdm(const Common& c) {
  const AromConfig cfg = resolve_config(c.o);
  const Problem p = make_problem(cfg);
  const fs::path dir = out_dir(c, cfg.preset + "_hdm");
  RunWriter writer(dir, p.mesh, p.initial.vars(), cfg.dt(), cfg.steps, c.dump_stride,
                   !c.no_states);
  Eigen::VectorXd last;
  StepObserver obs = writer.observer();
  const RunResult r = run_hdm(cfg, [&](long k, const Eigen::VectorXd& s, const StepRecord* rec,
                                       const SamplingSets* sets) {
    obs(k, s, rec, sets);
    if (k == cfg.steps)
      last = s;
  });
  writer.write_metrics(r.steps);
  write_text(dir / "config.ini", dump_config(cfg));
  RunMetrics m = compute_metrics(r.steps, p.mesh.num_cells(), r.wall_seconds, 0.0);
  std::vector<std::pair<std::string, double>> extra;
  if (p.riemann) {
    const double err = exact_density_error(cfg, last);
    extra.emplace_back("exact_density_l1_error", err);
    std::cout << "density L1 error vs exact solution: " << err << "\n";
  }
  write_text(dir / "summary.json", summary_json(cfg, m, extra) + "\n");
  std::cout << "HDM " << cfg.preset << ": " << cfg.steps << " steps in " << r.wall_seconds
            << " s, output in " << dir.string() << "\n";
  return 0;
}

int cmd_arom(const Common& c) {
  const AromConfig cfg = resolve_config(c.o);
  const Problem p = make_problem(cfg);
  const fs::path dir = out_dir(c, cfg.preset + "_arom");
  RunWriter writer(dir, p.mesh, p.initial.vars(), cfg.dt(), cfg.steps, c.dump_stride,
                   !c.no_states);
  const RunResult r = run_arom(cfg, writer.observer());
  writer.write_metrics(r.steps);
  write_text(dir / "config.ini", dump_config(cfg));
  const RunMetrics m = compute_metrics(r.steps, p.mesh.num_cells(), 0.0, r.wall_seconds);
  write_text(dir / "summary.json", summary_json(cfg, m) + "\n");
  std::cout << "AROM " << cfg.preset << " (z = " << period_to_string(cfg.z) << "), output in "
            << dir.string() << "\n";
  print_summary(m);
  return 0;
}

std::vector<double> parse_times(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty())
      out.push_back(std::stod(item));
  return out;
}

struct CompareOptions {
  std::string times;
  std::string coarse;
};

int cmd_compare(const Common& c, const CompareOptions& co) {
  const AromConfig cfg = resolve_config(c.o);
  const Problem p = make_problem(cfg);
  const int vars = p.initial.vars();
  const fs::path dir = out_dir(c, cfg.preset + "_compare");
  fs::create_directories(dir);

  std::cout << "running HDM reference..." << std::endl;
  Trajectory ref;
  const RunResult h = run_hdm(cfg, record_into(ref));
  std::cout << "running AROM..." << std::endl;
  RunWriter writer(dir / "arom", p.mesh, vars, cfg.dt(), cfg.steps, c.dump_stride, !c.no_states);
  Trajectory rom;
  StepObserver obs = writer.observer();
  std::vector<double> times = co.times.empty() ? std::vector<double>{cfg.final_time}
                                               : parse_times(co.times);
  std::vector<long> wanted;
  for (double t : times)
    wanted.push_back(std::lround(t / cfg.dt()));
  std::map<long, Eigen::VectorXd> rom_states;
  const RunResult r = run_arom(
      cfg,
      [&](long k, const Eigen::VectorXd& s, const StepRecord* rec, const SamplingSets* sets) {
        obs(k, s, rec, sets);
        if (std::find(wanted.begin(), wanted.end(), k) != wanted.end())
          rom_states[k] = s;
      },
      &ref);
  writer.write_metrics(r.steps);
  write_text(dir / "config.ini", dump_config(cfg));

  std::vector<std::pair<std::string, double>> extra;
  for (long k : wanted) {
    if (k < 0 || k > cfg.steps)
      throw std::invalid_argument("--times: " + std::to_string(k * cfg.dt()) +
                                  " lies outside the run");
    std::vector<std::string> names{"rho_hdm", "rho_arom"};
    std::vector<const Eigen::VectorXd*> states{&ref.states[static_cast<std::size_t>(k)],
                                               &rom_states[k]};
    Eigen::VectorXd exact;
    if (p.riemann) {
      exact = exact_density_state(cfg, static_cast<double>(k) * cfg.dt());
      names.push_back("rho_exact");
      states.push_back(&exact);
    }
    char name[64];
    std::snprintf(name, sizeof name, "profile_%06ld.dat", k);
    write_profile(dir / name, p.mesh, vars, names, states);
  }

  if (!co.coarse.empty()) {
    AromConfig coarse = cfg;
    ConfigFile f;
    f.source = "--coarse";
    f.entries["problem.cells"] = ConfigEntry{co.coarse, 0};
    apply_config(f, coarse);
    coarse.n_p = std::min<Index>(coarse.n_p, coarse.cells[0] * coarse.cells[1]);
    validate_config(coarse);
    const Problem cp = make_problem(coarse);
    std::cout << "running coarse HDM (" << co.coarse << ")..." << std::endl;
    Eigen::VectorXd last;
    const RunResult ch = run_hdm(coarse, [&](long k, const Eigen::VectorXd& s, const StepRecord*,
                                             const SamplingSets*) {
      if (k == coarse.steps)
        last = s;
    });
    Eigen::VectorXd final_state = last;
    write_profile(dir / "profile_coarse_final.dat", cp.mesh, vars, {"rho_coarse_hdm"},
                  {&final_state});
    extra.emplace_back("coarse_hdm_seconds", ch.wall_seconds);
    if (cp.riemann)
      extra.emplace_back("coarse_exact_density_l1_error", exact_density_error(coarse, last));
  }
  if (p.riemann) {
    extra.emplace_back("hdm_exact_density_l1_error",
                       exact_density_error(cfg, ref.states.back()));
    extra.emplace_back("arom_exact_density_l1_error",
                       exact_density_error(cfg, rom_states.count(cfg.steps)
                                                    ? rom_states[cfg.steps]
                                                    : ref.states.back()));
  }

  const RunMetrics m = compute_metrics(r.steps, p.mesh.num_cells(), h.wall_seconds, r.wall_seconds);
  write_text(dir / "summary.json", summary_json(cfg, m, extra) + "\n");
  std::cout << "compare " << cfg.preset << ", output in " << dir.string() << "\n";
  print_summary(m);
  return 0;
}

struct SweepOptions {
  std::string axis;
  std::string values;
};

int cmd_sweep(const Common& c, const SweepOptions& so) {
  const AromConfig base = resolve_config(c.o);
  const Problem p = make_problem(base);
  const fs::path dir = out_dir(c, base.preset + "_sweep_" + so.axis);
  fs::create_directories(dir);
  std::vector<std::string> values;
  {
    std::stringstream ss(so.values);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty())
        values.push_back(item);
  }
  if (values.empty())
    throw std::invalid_argument("--values: need at least one value");

  // Validate every point before the expensive reference run.
  std::vector<AromConfig> points;
  for (const std::string& v : values) {
    AromConfig cfg = base;
    ConfigFile f;
    f.source = "--values";
    if (so.axis == "z")
      f.entries["arom.z"] = {v, 0};
    else if (so.axis == "delta")
      f.entries["arom.delta"] = {v, 0};
    else if (so.axis == "w")
      f.entries["arom.w"] = {v, 0};
    else if (so.axis == "m")
      f.entries["arom.m"] = {v, 0};
    else if (so.axis == "filter-order") {
      // Order o means the cascade 2, 4, ..., o; 0 or "none" disables filtering.
      std::string cascade;
      if (v != "none" && v != "0") {
        const int order = std::stoi(v);
        for (int q = 2; q <= order; q += 2)
          cascade += (cascade.empty() ? "" : ",") + std::to_string(q);
        if (order % 2 != 0 || order < 2)
          throw std::invalid_argument("--values: filter order " + v + " is not 2, 4 or 6");
      }
      f.entries["filter.cascade"] = {cascade, 0};
    } else {
      throw std::invalid_argument("--axis: expected z, delta, w, m or filter-order");
    }
    apply_config(f, cfg);
    validate_config(cfg);
    points.push_back(cfg);
  }

  std::cout << "running HDM reference..." << std::endl;
  Trajectory ref;
  const RunResult h = run_hdm(base, record_into(ref));

  std::ofstream table(dir / "sweep.csv");
  table << "axis,value,mean_error,sampling,hybrid_sampling,odeim_sampling,mean_subiterations,"
           "max_hybrid_sampling,escalations,hdm_seconds,rom_seconds,speedup\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::cout << so.axis << " = " << values[i] << std::endl;
    const RunResult r = run_arom(points[i], {}, &ref);
    const RunMetrics m =
        compute_metrics(r.steps, p.mesh.num_cells(), h.wall_seconds, r.wall_seconds);
    table << so.axis << "," << values[i] << "," << format_double(m.mean_error) << ","
          << format_double(m.sampling) << "," << format_double(m.hybrid_sampling) << ","
          << format_double(m.odeim_sampling) << "," << format_double(m.mean_subiterations) << ","
          << format_double(m.max_hybrid_sampling) << "," << m.escalations << ","
          << format_double(m.hdm_seconds) << "," << format_double(m.rom_seconds) << ","
          << format_double(m.speedup) << "\n";
    table.flush();
    print_summary(m);
  }
  std::cout << "sweep table in " << (dir / "sweep.csv").string() << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive reduced-order model for the Euler equations"};
  app.require_subcommand(1);

  Common hdm_c, arom_c, sweep_c, compare_c;
  CompareOptions compare_o;
  SweepOptions sweep_o;
  bool dump_only = false;

  auto* hdm = app.add_subcommand("hdm", "Full-order run");
  add_common(hdm, hdm_c);
  auto* arom = app.add_subcommand("arom", "Adaptive ROM run");
  add_common(arom, arom_c);
  arom->add_flag("--dump-config", dump_only, "Print the effective config and exit");
  auto* sweep = app.add_subcommand("sweep", "Adaptive ROM runs over one parameter");
  add_common(sweep, sweep_c);
  sweep->add_option("--axis", sweep_o.axis, "z, delta, w, m or filter-order")->required();
  sweep->add_option("--values", sweep_o.values, "Comma-separated values")->required();
  auto* compare = app.add_subcommand("compare", "HDM and adaptive ROM side by side");
  add_common(compare, compare_c);
  compare->add_option("--times", compare_o.times, "Profile output times, comma-separated");
  compare->add_option("--coarse", compare_o.coarse,
                      "Also run the HDM at this coarser resolution (nx or nx,ny)");

  CLI11_PARSE(app, argc, argv);

  auto threads = [](int n) {
#ifdef AROM_HAVE_OPENMP
    if (n > 0)
      omp_set_num_threads(n);
#else
    (void)n;
#endif
  };

  try {
    if (*hdm) {
      threads(hdm_c.threads);
      return cmd_hdm(hdm_c);
    }
    if (*arom) {
      threads(arom_c.threads);
      if (dump_only) {
        std::cout << dump_config(resolve_config(arom_c.o));
        return 0;
      }
      return cmd_arom(arom_c);
    }
    if (*sweep) {
      threads(sweep_c.threads);
      return cmd_sweep(sweep_c, sweep_o);
    }
    if (*compare) {
      threads(compare_c.threads);
      return cmd_compare(compare_c, compare_o);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
