#ifndef AROM_CONFIG_HPP
#define AROM_CONFIG_HPP

#include "arom/problem.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace arom {

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigEntry {
  std::string value;
  int line = 0;
};

/// Parsed key/value pairs keyed by "section.key".
struct ConfigFile {
  std::string source;
  std::map<std::string, ConfigEntry> entries;
};

/// Grammar, one item per line:
///   # comment            (also ; comment; both may follow a value)
///   [section]
///   key = value
/// Keys before the first section header belong to section "problem".
/// Repeated keys and unknown sections are errors.
ConfigFile parse_config(std::istream& in, const std::string& source = "<config>");
ConfigFile read_config_file(const std::string& path);

/// Overwrites the fields named in `file`. Unknown keys and malformed values
/// raise ConfigError with the file name and line.
void apply_config(const ConfigFile& file, AromConfig& config);

/// Preset defaults (from `preset_override`, else the file's problem.preset)
/// overlaid with the file, then validated.
AromConfig load_config(const std::string& path,
                       const std::optional<std::string>& preset_override = std::nullopt);

/// Validates `config`; an invalid field is reported with the file line that
/// set it when `file` has one.
void validate_config(const AromConfig& config, const ConfigFile* file = nullptr);

/// Every field in the file format; parse_config + apply_config on the output
/// reproduces `config` exactly.
std::string dump_config(const AromConfig& config);

std::string format_double(double x); // shortest form that reads back exactly

} // namespace arom

#endif // AROM_CONFIG_HPP
