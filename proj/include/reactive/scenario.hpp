#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reactive/simulator.hpp"

namespace reactive {

/// Malformed or invalid scenario. Syntax errors carry a 1-based position.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& message, std::optional<int> line = std::nullopt,
                         std::optional<int> column = std::nullopt);

  [[nodiscard]] std::optional<int> line() const { return line_; }
  [[nodiscard]] std::optional<int> column() const { return column_; }

 private:
  std::optional<int> line_;
  std::optional<int> column_;
};

/// Parses the JSON scenario format. Absent keys keep their defaults;
/// unknown keys are rejected.
Scenario parseScenario(const std::string& text);
Scenario loadScenario(const std::filesystem::path& path);

/// Canonical form: every key, fixed order, two-space indent.
std::string serializeScenario(const Scenario& scenario);

/// Applies `key=value` assignments. A key is either a dotted path such as
/// `balancing.omega_reinf` or a leaf name that is unique in the tree. Values
/// are read as JSON, falling back to a plain string.
Scenario applyOverrides(const Scenario& scenario, const std::vector<std::string>& assignments);

/// Every invariant the scenario breaks; empty when it can be run.
std::vector<std::string> validateScenario(const Scenario& scenario);

/// Directory holding the bundled scenario files.
std::filesystem::path bundledScenarioDir();
/// Resolves a bundled name such as `showcase8` or returns `nameOrPath`.
std::filesystem::path resolveScenario(const std::string& nameOrPath);

}  // namespace reactive
