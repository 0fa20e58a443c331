#include "arom/output.hpp"

#include "arom/config.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace arom {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'A', 'R', 'O', 'M', 'S', 'N', 'P', '1'};

template <class T> void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T> T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

std::string numbered(const char* prefix, long k, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%06ld%s", prefix, k, ext);
  return buf;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  return out;
}

} // namespace

void write_snapshot(const fs::path& path, const Mesh& mesh, int vars, const Eigen::VectorXd& values,
                    double time) {
  if (values.size() != mesh.num_cells() * vars)
    throw std::invalid_argument("write_snapshot: value count does not match the mesh");
  std::ofstream out = open_out(path, std::ios::binary);
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(mesh.dim()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(mesh.cells(0)));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(mesh.cells(1)));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(vars));
  put<double>(out, time);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out)
    throw std::runtime_error("write_snapshot: failed writing " + path.string());
}

Snapshot read_snapshot(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot read " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error(path.string() + " is not a snapshot file");
  Snapshot s;
  s.dim = static_cast<int>(get<std::uint32_t>(in));
  s.cells[0] = static_cast<Index>(get<std::uint64_t>(in));
  s.cells[1] = static_cast<Index>(get<std::uint64_t>(in));
  s.vars = static_cast<int>(get<std::uint32_t>(in));
  s.time = get<double>(in);
  s.values.resize(s.cells[0] * s.cells[1] * s.vars);
  in.read(reinterpret_cast<char*>(s.values.data()),
          static_cast<std::streamsize>(s.values.size() * sizeof(double)));
  if (!in)
    throw std::runtime_error(path.string() + " is truncated");
  return s;
}

RunWriter::RunWriter(fs::path dir, const Mesh& mesh, int vars, double dt, long steps, long stride,
                     bool write_states)
    : dir_(std::move(dir)), mesh_(mesh), vars_(vars), steps_(steps), dt_(dt), stride_(stride),
      write_states_(write_states) {
  fs::create_directories(dir_);
  if (write_states_) {
    fs::create_directories(dir_ / "snapshots");
    fs::create_directories(dir_ / "masks");
    index_ = std::make_shared<std::ofstream>(open_out(dir_ / "snapshots" / "index.csv"));
    *index_ << "k,time,file\n";
  }
}

bool RunWriter::due(long k) const {
  return k == 0 || k == steps_ || (stride_ > 0 && k % stride_ == 0);
}

StepObserver RunWriter::observer() {
  return [this](long k, const Eigen::VectorXd& state, const StepRecord*, const SamplingSets* sets) {
    if (!write_states_ || !due(k))
      return;
    const double t = static_cast<double>(k) * dt_;
    const std::string name = numbered("snap_", k, ".bin");
    write_snapshot(dir_ / "snapshots" / name, mesh_, vars_, state, t);
    *index_ << k << "," << format_double(t) << "," << name << "\n";
    index_->flush();
    if (sets)
      write_mask(dir_ / "masks" / numbered("mask_", k, ".txt"), mesh_,
                 sampling_mask(*sets, mesh_.num_cells()));
  };
}

void write_metrics_csv(std::ostream& out, const std::vector<StepRecord>& steps) {
  out << "k,kind,n_gamma,n_p,J,e_k,wall_ms,n_g,newton_iterations,filter_sweeps,escalated\n";
  for (const StepRecord& r : steps) {
    out << r.k << "," << (r.kind == SolveKind::Full ? "full" : "hybrid") << "," << r.n_gamma
        << "," << r.n_p << "," << r.subiterations << ","
        << (std::isnan(r.error) ? std::string("nan") : format_double(r.error)) << ","
        << format_double(r.wall_ms) << "," << r.n_g << "," << r.newton_iterations << ","
        << r.filter_sweeps << "," << (r.escalated ? 1 : 0) << "\n";
  }
}

void RunWriter::write_metrics(const std::vector<StepRecord>& steps) const {
  std::ofstream out = open_out(dir_ / "metrics.csv");
  write_metrics_csv(out, steps);
}

void write_mask(const fs::path& path, const Mesh& mesh, const std::vector<std::uint8_t>& mask) {
  if (static_cast<Index>(mask.size()) != mesh.num_cells())
    throw std::invalid_argument("write_mask: mask size does not match the mesh");
  std::ofstream out = open_out(path);
  for (Index iy = 0; iy < mesh.cells(1); ++iy) {
    for (Index ix = 0; ix < mesh.cells(0); ++ix)
      out << static_cast<int>(mask[static_cast<std::size_t>(mesh.cell_index(ix, iy))]);
    out << "\n";
  }
}

std::string summary_json(const AromConfig& config, const RunMetrics& m,
                         const std::vector<std::pair<std::string, double>>& extra) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); };
  nlohmann::ordered_json j;
  j["preset"] = config.preset;
  j["z"] = period_to_string(config.z);
  j["w"] = config.w;
  j["m"] = config.m;
  j["delta"] = config.delta;
  j["n_p"] = config.n_p;
  j["filters"] = config.filter.cascade;
  j["mean_error"] = num(m.mean_error);
  j["sampling"] = m.sampling;
  j["hybrid_sampling"] = m.hybrid_sampling;
  j["hybrid_set_empty"] = m.no_hybrid_steps;
  j["odeim_sampling"] = m.odeim_sampling;
  j["mean_subiterations"] = m.mean_subiterations;
  j["max_hybrid_sampling"] = m.max_hybrid_sampling;
  j["hybrid_steps"] = m.hybrid_steps;
  j["escalations"] = m.escalations;
  j["hdm_seconds"] = num(m.hdm_seconds);
  j["rom_seconds"] = num(m.rom_seconds);
  j["speedup"] = num(m.speedup);
  for (const auto& [key, value] : extra)
    j[key] = num(value);
  return j.dump(2);
}

void write_profile(const fs::path& path, const Mesh& mesh, int vars,
                   const std::vector<std::string>& names,
                   const std::vector<const Eigen::VectorXd*>& states) {
  if (names.size() != states.size())
    throw std::invalid_argument("write_profile: one name per state is required");
  std::ofstream out = open_out(path);
  out << (mesh.dim() == 1 ? "# x" : "# x y");
  for (const auto& n : names)
    out << " " << n;
  out << "\n";
  for (Index i = 0; i < mesh.num_cells(); ++i) {
    const auto x = mesh.center(i);
    out << format_double(x[0]);
    if (mesh.dim() == 2)
      out << " " << format_double(x[1]);
    for (const Eigen::VectorXd* s : states)
      out << " " << format_double((*s)[i * vars]);
    out << "\n";
    if (mesh.dim() == 2 && mesh.cell_coords(i)[0] == mesh.cells(0) - 1)
      out << "\n"; // blank line between rows for gnuplot's splot
  }
}

} // namespace arom
