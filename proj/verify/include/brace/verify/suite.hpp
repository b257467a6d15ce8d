#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "brace/harness.hpp"

namespace brace::verify {

struct CheckResult {
  std::string id;
  std::string title;
  bool passed = false;
  std::string detail;
  nlohmann::json data = nlohmann::json::object();
  double seconds = 0.0;  // wall time; kept out of the report file
};

CheckResult check_rar_equivalence(std::uint64_t seed, std::size_t rounds = 1000);
CheckResult check_brace_equivalence(std::uint64_t seed, std::size_t rounds = 1000);
CheckResult check_bit_accounting();
CheckResult check_flip_resistance();
CheckResult check_convergence_monitor();
CheckResult check_aggregator_oracles(std::uint64_t seed, std::size_t instances = 10000);
CheckResult check_gradients(std::uint64_t seed, std::size_t points = 100);
CheckResult check_architecture_equivalence(std::uint64_t seed);

// The two convergence-monitor runs, exposed for tests and the acceptance binary.
ExperimentConfig monitor_config_scalar();
ExperimentConfig monitor_config_attacked();

struct VerifyReport {
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;

  bool passed() const;
  // Deterministic: no timings, stable key order.
  nlohmann::json to_json() const;
};

VerifyReport run_verify(std::uint64_t seed);

// Writes verify_report.json into `directory` and returns the file path.
std::string write_report(const VerifyReport& report, const std::string& directory);

}  // namespace brace::verify
