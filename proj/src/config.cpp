#include "arom/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

namespace arom {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return s;
}

const std::set<std::string> kSections{"problem", "arom", "subiteration", "filter", "newton"};

// Converters throw std::invalid_argument with a message about the value only;
// the caller adds file, line and key.
long to_long(const std::string& v) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw std::invalid_argument("'" + v + "' is not an integer");
  return out;
}

int to_int(const std::string& v) {
  const long x = to_long(v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    throw std::invalid_argument("'" + v + "' is out of range");
  return static_cast<int>(x);
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw std::invalid_argument("'" + v + "' is not a number");
  return out;
}

bool to_bool(const std::string& v) {
  const std::string l = lower(v);
  if (l == "true" || l == "yes" || l == "on" || l == "1")
    return true;
  if (l == "false" || l == "no" || l == "off" || l == "0")
    return false;
  throw std::invalid_argument("'" + v + "' is not a boolean");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(trim(item));
  if (out.size() == 1 && out[0].empty())
    out.clear();
  return out;
}

std::string join_ints(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i)
    out += (i ? "," : "") + std::to_string(xs[i]);
  return out;
}

struct Field {
  const char* section;
  const char* key;
  std::function<void(AromConfig&, const std::string&)> set;
  std::function<std::string(const AromConfig&)> get;
};

#define DOUBLE_FIELD(sec, name, member)                                                            \
  Field {                                                                                          \
    sec, name, [](AromConfig& c, const std::string& v) { c.member = to_double(v); },              \
        [](const AromConfig& c) { return format_double(c.member); }                                \
  }
#define INT_FIELD(sec, name, member, conv)                                                         \
  Field {                                                                                          \
    sec, name, [](AromConfig& c, const std::string& v) { c.member = conv(v); },                   \
        [](const AromConfig& c) { return std::to_string(c.member); }                               \
  }
#define BOOL_FIELD(sec, name, member)                                                              \
  Field {                                                                                          \
    sec, name, [](AromConfig& c, const std::string& v) { c.member = to_bool(v); },                \
        [](const AromConfig& c) { return std::string(c.member ? "true" : "false"); }               \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      {"problem", "preset", [](AromConfig& c, const std::string& v) { c.preset = lower(v); },
       [](const AromConfig& c) { return c.preset; }},
      {"problem", "cells",
       [](AromConfig& c, const std::string& v) {
         const auto parts = split_list(v);
         if (parts.empty() || parts.size() > 2)
           throw std::invalid_argument("expected 'nx' or 'nx,ny'");
         c.cells = {to_long(parts[0]), parts.size() == 2 ? to_long(parts[1]) : 1};
       },
       [](const AromConfig& c) {
         return c.cells[1] == 1 ? std::to_string(c.cells[0])
                                : std::to_string(c.cells[0]) + "," + std::to_string(c.cells[1]);
       }},
      DOUBLE_FIELD("problem", "final_time", final_time),
      INT_FIELD("problem", "steps", steps, to_long),
      {"problem", "limiting",
       [](AromConfig& c, const std::string& v) {
         const std::string l = lower(v);
         if (l == "conservative")
           c.limiting = LimitedVariables::Conservative;
         else if (l == "primitive")
           c.limiting = LimitedVariables::Primitive;
         else
           throw std::invalid_argument("expected conservative or primitive");
       },
       [](const AromConfig& c) {
         return std::string(c.limiting == LimitedVariables::Primitive ? "primitive"
                                                                       : "conservative");
       }},
      DOUBLE_FIELD("problem", "entropy_fix", entropy_fix),

      INT_FIELD("arom", "w", w, to_int),
      INT_FIELD("arom", "m", m, to_int),
      {"arom", "z", [](AromConfig& c, const std::string& v) { c.z = parse_period(v); },
       [](const AromConfig& c) { return period_to_string(c.z); }},
      DOUBLE_FIELD("arom", "delta", delta),
      INT_FIELD("arom", "n_p", n_p, to_long),
      INT_FIELD("arom", "bdf_order", bdf_order, to_int),
      DOUBLE_FIELD("arom", "pod_rel_tol", pod_rel_tol),
      DOUBLE_FIELD("arom", "pod_abs_tol", pod_abs_tol),
      BOOL_FIELD("arom", "density_error", density_error),

      DOUBLE_FIELD("subiteration", "eps_y", sub.eps_y),
      INT_FIELD("subiteration", "j_max", sub.j_max, to_int),

      {"filter", "cascade",
       [](AromConfig& c, const std::string& v) {
         c.filter.cascade.clear();
         for (const auto& item : split_list(v))
           c.filter.cascade.push_back(to_int(item));
       },
       [](const AromConfig& c) { return join_ints(c.filter.cascade); }},
      DOUBLE_FIELD("filter", "eps_f", filter.eps_f),
      INT_FIELD("filter", "j_max_f", filter.j_max_f, to_int),
      BOOL_FIELD("filter", "relative", filter.relative),

      DOUBLE_FIELD("newton", "tolerance", newton.tolerance),
      INT_FIELD("newton", "max_iterations", newton.max_iterations, to_int),
      {"newton", "linear_solver",
       [](AromConfig& c, const std::string& v) {
         const std::string l = lower(v);
         if (l == "auto")
           c.newton.linear_solver = LinearSolverKind::Automatic;
         else if (l == "sparse_lu")
           c.newton.linear_solver = LinearSolverKind::SparseLU;
         else if (l == "bicgstab")
           c.newton.linear_solver = LinearSolverKind::BiCGSTAB;
         else
           throw std::invalid_argument("expected auto, sparse_lu or bicgstab");
       },
       [](const AromConfig& c) {
         switch (c.newton.linear_solver) {
         case LinearSolverKind::SparseLU:
           return std::string("sparse_lu");
         case LinearSolverKind::BiCGSTAB:
           return std::string("bicgstab");
         default:
           return std::string("auto");
         }
       }},
      INT_FIELD("newton", "direct_dof_limit", newton.direct_dof_limit, to_long),
      DOUBLE_FIELD("newton", "linear_tolerance", newton.linear_tolerance),
      INT_FIELD("newton", "max_backtracks", newton.max_backtracks, to_int),
      INT_FIELD("newton", "jacobian_reuse", newton.jacobian_reuse, to_int),
      DOUBLE_FIELD("newton", "jacobian_refresh_ratio", newton.jacobian_refresh_ratio),
  };
  return table;
}

#undef DOUBLE_FIELD
#undef INT_FIELD
#undef BOOL_FIELD

std::string where(const ConfigFile& file, int line) {
  return file.source + ":" + std::to_string(line) + ": ";
}

} // namespace

std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

ConfigFile parse_config(std::istream& in, const std::string& source) {
  ConfigFile file;
  file.source = source;
  std::string section = "problem";
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos)
      line.erase(comment);
    line = trim(line);
    if (line.empty())
      continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(where(file, line_no) + "unterminated section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (!kSections.count(section))
        throw ConfigError(where(file, line_no) + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where(file, line_no) + "expected 'key = value'");
    const std::string key = lower(trim(line.substr(0, eq)));
    if (key.empty())
      throw ConfigError(where(file, line_no) + "missing key before '='");
    const std::string full = section + "." + key;
    if (file.entries.count(full))
      throw ConfigError(where(file, line_no) + full + " is already set on line " +
                        std::to_string(file.entries[full].line));
    file.entries[full] = ConfigEntry{trim(line.substr(eq + 1)), line_no};
  }
  return file;
}

ConfigFile read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError(path + ": cannot open config file");
  return parse_config(in, path);
}

void apply_config(const ConfigFile& file, AromConfig& config) {
  for (const auto& [name, entry] : file.entries) {
    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) {
      return name == std::string(f.section) + "." + f.key;
    });
    if (it == table.end())
      throw ConfigError(where(file, entry.line) + "unknown key " + name);
    try {
      it->set(config, entry.value);
    } catch (const std::invalid_argument& e) {
      std::string msg = e.what();
      // parse_period reports its own key prefix
      if (msg.rfind(name + ": ", 0) == 0)
        msg = msg.substr(name.size() + 2);
      throw ConfigError(where(file, entry.line) + name + ": " + msg);
    }
  }
}

void validate_config(const AromConfig& config, const ConfigFile* file) {
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const std::string key = msg.substr(0, msg.find(':'));
    if (file) {
      const auto it = file->entries.find(key);
      if (it != file->entries.end())
        throw ConfigError(where(*file, it->second.line) + msg);
    }
    throw ConfigError(msg);
  }
}

AromConfig load_config(const std::string& path, const std::optional<std::string>& preset_override) {
  const ConfigFile file = read_config_file(path);
  std::string preset;
  if (preset_override) {
    preset = *preset_override;
  } else {
    const auto it = file.entries.find("problem.preset");
    if (it == file.entries.end())
      throw ConfigError(path + ": missing required key problem.preset (or pass --preset)");
    preset = lower(it->second.value);
  }
  AromConfig config;
  try {
    config = preset_config(preset);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  apply_config(file, config);
  if (preset_override)
    config.preset = *preset_override;
  validate_config(config, &file);
  return config;
}

std::string dump_config(const AromConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const Field& f : fields()) {
    if (section != f.section) {
      if (!section.empty())
        out << "\n";
      section = f.section;
      out << "[" << section << "]\n";
    }
    out << f.key << " = " << f.get(config) << "\n";
  }
  return out.str();
}

} // namespace arom
