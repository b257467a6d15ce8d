#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "brace/harness.hpp"
#include "brace/verify/suite.hpp"

namespace fs = std::filesystem;
using namespace brace;

namespace {

std::string env_or(const std::string& fallback) {
  const char* env = std::getenv(kOutputDirEnv);
  return env != nullptr && *env != '\0' ? std::string(env) : fallback;
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) throw ConfigError(fmt::format("{}: cannot parse '{}'", what, item));
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(fmt::format("{}: empty list", what));
  return out;
}

int cmd_run(const std::string& path, const std::vector<std::uint64_t>& seeds_override, const std::string& trace_path,
            bool export_shards) {
  ExperimentConfig cfg = load_config(path).resolved();
  if (!seeds_override.empty()) cfg.seeds = seeds_override;
  const fs::path dir = output_directory(cfg);

  nlohmann::json runs = nlohmann::json::array();
  bool ok = true;
  for (auto seed : cfg.seeds) {
    std::ofstream trace;
    MessageSink sink;
    if (!trace_path.empty() && seed == cfg.seeds.front()) {
      trace = open_out(dir / trace_path);
      sink = [&trace](const Message& m) { write_trace_line(trace, m); };
    }
    const RunResult res = run_experiment(cfg, seed, sink);
    auto csv = open_out(dir / fmt::format("{}_seed{}_rounds.csv", cfg.name, seed));
    write_rounds_csv(csv, res.records);
    runs.push_back(to_json(res.summary));
    if (cfg.monitor.assert_bound && res.summary.bound && !res.summary.bound->sound) ok = false;
    fmt::print("seed {}: {} under {} -> {} {:.6g}\n", seed, res.summary.defense, res.summary.attack,
               to_string(res.summary.metric), res.summary.final_metric);
    if (res.summary.bound) fmt::print("  monitor: {}\n", res.summary.bound->note);

    if (export_shards && cfg.task.kind == TaskKind::Classification) {
      const auto task = build_task(cfg.task, seed);
      const auto& cls = dynamic_cast<const ClassificationTask&>(*task);
      for (ClientId i = 0; i < cls.clients(); ++i) {
        auto out = open_out(dir / fmt::format("{}_seed{}_shard{}.csv", cfg.name, seed, i));
        write_shard(out, cls.shard(i));
      }
    }
  }
  std::vector<double> finals;
  for (const auto& r : runs) finals.push_back(r["final_metric"].get<double>());
  const nlohmann::json summary = {{"name", cfg.name},
                                  {"median_final_metric", median(finals)},
                                  {"assertions_passed", ok},
                                  {"runs", runs}};
  auto out = open_out(dir / fmt::format("{}_summary.json", cfg.name));
  out << summary.dump(2) << '\n';
  return ok ? 0 : 1;
}

int cmd_sweep(const std::string& path, const std::string& axis_name, const std::string& values_text) {
  const ExperimentConfig cfg = load_config(path);
  const SweepAxis axis = parse_sweep_axis(axis_name);
  const auto values = parse_list<double>(values_text, "--values");
  const auto rows = sweep(cfg, axis, values);
  for (const auto& r : rows) {
    fmt::print("{}={:<8g} {:<18} {:<12} median {} {:.6g}\n", to_string(axis), r.value, r.defense, r.attack,
               to_string(r.metric), r.median);
  }
  auto out = open_out(fs::path(output_directory(cfg)) / fmt::format("{}_sweep_{}.csv", cfg.name, axis_name));
  write_sweep_csv(out, rows);
  return 0;
}

int cmd_commcost(const std::string& n_text, std::size_t d, unsigned m, const std::string& out_dir) {
  const auto ns = parse_list<std::size_t>(n_text, "--n");
  const auto rows = commcost_report(ns, d, m);
  bool ok = true;
  for (const auto& r : rows) {
    fmt::print("{}\n", r.check.report);
    ok = ok && r.check.matches;
  }
  auto out = open_out(fs::path(env_or(out_dir)) / "commcost.csv");
  write_commcost_csv(out, rows);
  if (!ok) fmt::print(stderr, "commcost: measured ledger disagrees with the chunk-exact cost\n");
  return ok ? 0 : 1;
}

int cmd_verify(std::uint64_t seed, const std::string& out_dir) {
  const auto report = verify::run_verify(seed);
  for (const auto& c : report.checks) {
    fmt::print("[{}] {}: {} ({:.2f} s)\n", c.passed ? "PASS" : "FAIL", c.id, c.detail, c.seconds);
  }
  const auto path = verify::write_report(report, env_or(out_dir));
  fmt::print("report: {}\n", path);
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Byzantine-robust ring aggregation simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::uint64_t> seeds;
  std::string trace_path;
  bool export_shards = false;
  auto* run = app.add_subcommand("run", "Run one experiment for every configured seed");
  run->add_option("config", config_path, "YAML config file")->required();
  run->add_option("--seed", seeds, "Override the configured seeds");
  run->add_option("--trace", trace_path, "Write first-round ring messages to this file (inside the output dir)");
  run->add_flag("--export-shards", export_shards, "Write each client's training shard");

  std::string axis;
  std::string values;
  auto* sw = app.add_subcommand("sweep", "Sweep one axis; median over seeds per cell");
  sw->add_option("config", config_path, "YAML config file")->required();
  sw->add_option("--axis", axis, "malicious_fraction | noniid | clients | lambda")->required();
  sw->add_option("--values", values, "Comma-separated values")->required();

  std::string n_list;
  std::size_t d = 0;
  unsigned m = 32;
  std::string out_dir = "out";
  auto* cc = app.add_subcommand("commcost", "Predicted and measured per-round communication cost");
  cc->add_option("--n", n_list, "Comma-separated client counts")->required();
  cc->add_option("--d", d, "Model dimension")->required();
  cc->add_option("--m", m, "Bits per gradient entry")->required();
  cc->add_option("--out", out_dir, "Output directory");

  std::uint64_t verify_seed = 1;
  auto* vf = app.add_subcommand("verify", "Run the invariant and oracle suite");
  vf->add_option("--seed", verify_seed, "Suite seed");
  vf->add_option("--out", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, seeds, trace_path, export_shards);
    if (*sw) return cmd_sweep(config_path, axis, values);
    if (*cc) return cmd_commcost(n_list, d, m, out_dir);
    if (*vf) return cmd_verify(verify_seed, out_dir);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 2;
}
