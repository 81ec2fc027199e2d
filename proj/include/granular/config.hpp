#pragma once

#include "granular/sim_config.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace granular {

/// Every problem found in a config, not just the first.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct ParseOptions {
  /// Run the condition checkers on the declared potential constants.
  bool check_conditions = true;
};

/// Parses the sectioned key-value format:
///
///   # comment
///   [system]
///   N = 16
///   mode = projected
///
/// Sections: system, potential.V, potential.W, dynamics, observe, initial,
/// initial.b, check, output, experiment. Lists are comma separated. Absent
/// keys take their defaults. Throws ConfigError listing every error.
SimConfig parse_config(std::string_view text, const ParseOptions& options = {});

SimConfig load_config(const std::string& path, const ParseOptions& options = {});

/// Canonical text: every key of every section in a fixed order, numbers in
/// shortest round-trip form. parse_config(serialize_config(c)) == c.
std::string serialize_config(const SimConfig& config);

/// Structural invariants (ranges, projected => V = zero, observation times).
std::vector<std::string> validate_config(const SimConfig& config);

/// Runs the condition checkers on the constants each potential declares.
std::vector<std::string> check_declared_conditions(const SimConfig& config);

Mode mode_from_string(std::string_view name);
OutputFormat output_format_from_string(std::string_view name);
Coupling coupling_from_string(std::string_view name);
TestFunction test_function_from_string(std::string_view name);

/// Edit distance, used to suggest the nearest valid key.
std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace granular
