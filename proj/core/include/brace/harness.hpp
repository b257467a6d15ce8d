#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "brace/adversary.hpp"
#include "brace/aggregators.hpp"
#include "brace/core.hpp"
#include "brace/ring.hpp"
#include "brace/tasks.hpp"

namespace brace {

enum class TaskKind : std::uint8_t { Quadratic, Classification };

struct TaskConfig {
  TaskKind kind = TaskKind::Quadratic;
  QuadraticParams quadratic;
  ClassificationParams classification;
};

// One aggregation pipeline. Optional fields override the experiment's.
struct Defense {
  Architecture arch = Architecture::BRACE;
  GarSpec gar;
  std::optional<double> eta;
  std::optional<int> lambda;
  std::optional<std::size_t> krum_f;  // default: the Byzantine count f
  std::optional<std::size_t> trim_k;  // default: f

  std::string label() const;
};

struct MonitorConfig {
  bool enabled = false;
  std::size_t resamples = 32;
  bool assert_bound = false;
};

struct ExperimentConfig {
  std::string name = "experiment";
  HyperParams hp;
  std::optional<double> malicious_fraction;  // when set, f = round(fraction * n)
  Defense defense;
  AttackSpec attack;
  TaskConfig task;
  std::size_t batch_size = 32;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "out";
  std::size_t eval_every = 1;
  MonitorConfig monitor;
  std::vector<Defense> sweep_defenses;

  // Fills the derived fields (d, f, malicious ids, task sizes) and runs every
  // cross-field check. Throws ConfigError naming the offending field.
  ExperimentConfig resolved() const;
};

ExperimentConfig parse_config(std::string_view yaml_text);
ExperimentConfig load_config(const std::string& path);

// BRACE_OUTPUT_DIR overrides the configured directory.
inline constexpr const char* kOutputDirEnv = "BRACE_OUTPUT_DIR";
std::string output_directory(const ExperimentConfig& config);

std::unique_ptr<Task> build_task(const TaskConfig& task, std::uint64_t seed);

struct RoundRecord {
  std::size_t round = 0;
  // Metrics at w^t, before the round's update. NaN when not evaluated.
  double loss = 0.0;
  double grad_norm = 0.0;
  double test_error = 0.0;
  std::uint64_t bits_total = 0;
  std::uint64_t checksum = 0;
  // Largest fraction of monitor resamples whose consensus opposes
  // sign(grad f(w^t)[k]) over k. NaN when the monitor is off.
  double opposition = 0.0;
};

struct BoundReport {
  std::size_t rounds = 0;
  std::size_t dim = 0;
  double lhs = 0.0;
  double rhs_stated = 0.0;
  double rhs_dscaled = 0.0;
  double max_opposition = 0.0;
  bool hypothesis_holds = false;
  bool stated_holds = false;
  bool dscaled_holds = false;
  // True unless the hypothesis holds and the d-scaled bound fails.
  bool sound = true;
  std::string note;
};

BoundReport convergence_monitor(std::span<const RoundRecord> records, double smoothness, double eta, double f_star,
                             double f_initial, std::size_t d);

struct RunSummary {
  std::uint64_t seed = 0;
  std::string defense;
  std::string attack;
  MetricKind metric = MetricKind::TestError;
  double final_metric = 0.0;
  double final_loss = 0.0;
  std::uint64_t bits_per_round = 0;
  std::uint64_t model_checksum = 0;
  std::size_t degenerate_attack_rounds = 0;
  std::optional<BoundReport> bound;
};

struct RunResult {
  std::vector<RoundRecord> records;
  RunSummary summary;
  GradVec final_model;
};

// `trace` receives every ring message of the first round.
RunResult run_experiment(const ExperimentConfig& config, std::uint64_t seed, const MessageSink& trace = {});

enum class SweepAxis : std::uint8_t { MaliciousFraction, NonIid, Clients, Lambda };
std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view name);

struct SweepRow {
  SweepAxis axis = SweepAxis::MaliciousFraction;
  double value = 0.0;
  std::string defense;
  std::string attack;
  MetricKind metric = MetricKind::TestError;
  double median = 0.0;
  std::vector<double> per_seed;
};

// The config for one sweep cell; throws ConfigError mentioning the cell.
ExperimentConfig sweep_cell(const ExperimentConfig& base, SweepAxis axis, double value, const Defense& defense);

std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepAxis axis, std::span<const double> values);

struct CommCostRow {
  std::size_t n = 0;
  std::size_t d = 0;
  unsigned m = 0;
  Architecture arch = Architecture::SC;
  CostCheck check;
};

std::vector<CommCostRow> commcost_report(std::span<const std::size_t> clients, std::size_t d, unsigned m,
                                         std::uint64_t seed = 1);

double median(std::vector<double> values);
std::uint64_t checksum(std::span<const double> values);

void write_rounds_csv(std::ostream& os, std::span<const RoundRecord> records);
void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);
void write_commcost_csv(std::ostream& os, std::span<const CommCostRow> rows);

nlohmann::json to_json(const BoundReport& report);
nlohmann::json to_json(const RunSummary& summary);

}  // namespace brace
