#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "brace/harness.hpp"

namespace brace {

namespace {

void reject_unknown(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) throw ConfigError(fmt::format("{}: expected a mapping", where.empty() ? "config" : where));
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!keys.contains(key)) {
      throw ConfigError(fmt::format("unknown key '{}{}'", where.empty() ? "" : where + ".", key));
    }
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, const std::string& where, T& out) {
  const auto child = node[key];
  if (!child) return;
  try {
    out = child.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("{}{}: invalid value", where.empty() ? "" : where + ".", key));
  }
}

Architecture parse_architecture(const std::string& name) {
  if (name == "brace") return Architecture::BRACE;
  if (name == "rar") return Architecture::RAR;
  if (name == "sc") return Architecture::SC;
  throw ConfigError(fmt::format("architecture: unknown value '{}' (expected brace, rar or sc)", name));
}

void parse_gar(const YAML::Node& node, const std::string& where, Defense& def) {
  reject_unknown(node, where, {"kind", "krum_f", "trim_k", "rlr_theta", "fold"});
  std::string kind = std::string(to_string(def.gar.kind));
  read(node, "kind", where, kind);
  def.gar.kind = parse_gar_kind(kind);
  if (node["krum_f"]) {
    std::size_t v = 0;
    read(node, "krum_f", where, v);
    def.krum_f = v;
  }
  if (node["trim_k"]) {
    std::size_t v = 0;
    read(node, "trim_k", where, v);
    def.trim_k = v;
  }
  read(node, "rlr_theta", where, def.gar.rlr_theta);
  if (node["fold"]) {
    std::string fold;
    read(node, "fold", where, fold);
    if (fold == "index") def.gar.fold = FoldOrder::Index;
    else if (fold == "ring") def.gar.fold = FoldOrder::Ring;
    else throw ConfigError(fmt::format("{}.fold: expected index or ring", where));
  }
}

void parse_defense(const YAML::Node& node, const std::string& where, Defense& def) {
  reject_unknown(node, where, {"architecture", "gar", "learning_rate", "lambda"});
  std::string arch;
  read(node, "architecture", where, arch);
  if (!arch.empty()) def.arch = parse_architecture(arch);
  if (node["gar"]) parse_gar(node["gar"], where + ".gar", def);
  if (node["learning_rate"]) {
    double v = 0;
    read(node, "learning_rate", where, v);
    def.eta = v;
  }
  if (node["lambda"]) {
    int v = 0;
    read(node, "lambda", where, v);
    def.lambda = v;
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("config: {}", e.what()));
  }
  ExperimentConfig cfg;
  if (root.IsNull()) return cfg;
  reject_unknown(root, "",
                 {"name", "clients", "byzantine", "malicious_fraction", "bits_per_entry", "lambda", "learning_rate",
                  "rounds", "noniid", "batch_size", "seeds", "output_dir", "eval_every", "architecture", "gar",
                  "attack", "task", "monitor", "defenses"});
  read(root, "name", "", cfg.name);
  read(root, "clients", "", cfg.hp.n);
  read(root, "byzantine", "", cfg.hp.f);
  if (root["malicious_fraction"]) {
    if (root["byzantine"]) throw ConfigError("byzantine and malicious_fraction are mutually exclusive");
    double v = 0;
    read(root, "malicious_fraction", "", v);
    cfg.malicious_fraction = v;
  }
  read(root, "bits_per_entry", "", cfg.hp.m);
  read(root, "lambda", "", cfg.hp.lambda);
  read(root, "learning_rate", "", cfg.hp.eta);
  read(root, "rounds", "", cfg.hp.rounds);
  read(root, "noniid", "", cfg.hp.q);
  read(root, "batch_size", "", cfg.batch_size);
  read(root, "seeds", "", cfg.seeds);
  read(root, "output_dir", "", cfg.output_dir);
  read(root, "eval_every", "", cfg.eval_every);

  std::string arch;
  read(root, "architecture", "", arch);
  if (!arch.empty()) cfg.defense.arch = parse_architecture(arch);
  if (root["gar"]) parse_gar(root["gar"], "gar", cfg.defense);

  if (const auto a = root["attack"]) {
    reject_unknown(a, "attack", {"kind", "sigma", "trim_b", "search_iters", "search_tol", "knowledge"});
    std::string kind = "none";
    read(a, "kind", "attack", kind);
    cfg.attack.kind = parse_attack_kind(kind);
    read(a, "sigma", "attack", cfg.attack.sigma);
    read(a, "trim_b", "attack", cfg.attack.trim_b);
    read(a, "search_iters", "attack", cfg.attack.search_iters);
    read(a, "search_tol", "attack", cfg.attack.search_tol);
    std::string knowledge = "full";
    read(a, "knowledge", "attack", knowledge);
    if (knowledge == "full") cfg.attack.knowledge = Knowledge::Full;
    else if (knowledge == "benign_only") cfg.attack.knowledge = Knowledge::BenignOnly;
    else throw ConfigError("attack.knowledge: expected full or benign_only");
  }

  if (const auto t = root["task"]) {
    std::string kind = "quadratic";
    read(t, "kind", "task", kind);
    if (kind == "quadratic") {
      reject_unknown(t, "task", {"kind", "dim", "center", "radius", "curvature_min", "curvature_max", "noise", "init"});
      cfg.task.kind = TaskKind::Quadratic;
      auto& q = cfg.task.quadratic;
      read(t, "dim", "task", q.d);
      read(t, "center", "task", q.center);
      read(t, "radius", "task", q.radius);
      read(t, "curvature_min", "task", q.curvature_min);
      read(t, "curvature_max", "task", q.curvature_max);
      read(t, "noise", "task", q.noise_std);
      read(t, "init", "task", q.init);
    } else if (kind == "classification") {
      reject_unknown(t, "task",
                     {"kind", "classes", "features", "train_samples", "test_samples", "separation", "noise"});
      cfg.task.kind = TaskKind::Classification;
      auto& c = cfg.task.classification;
      read(t, "classes", "task", c.classes);
      read(t, "features", "task", c.features);
      read(t, "train_samples", "task", c.train_samples);
      read(t, "test_samples", "task", c.test_samples);
      read(t, "separation", "task", c.separation);
      read(t, "noise", "task", c.noise);
    } else {
      throw ConfigError(fmt::format("task.kind: unknown value '{}'", kind));
    }
  }

  if (const auto m = root["monitor"]) {
    reject_unknown(m, "monitor", {"enabled", "resamples", "assert_bound"});
    read(m, "enabled", "monitor", cfg.monitor.enabled);
    read(m, "resamples", "monitor", cfg.monitor.resamples);
    read(m, "assert_bound", "monitor", cfg.monitor.assert_bound);
  }

  if (const auto list = root["defenses"]) {
    if (!list.IsSequence()) throw ConfigError("defenses: expected a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      Defense def;
      parse_defense(list[i], fmt::format("defenses[{}]", i), def);
      cfg.sweep_defenses.push_back(def);
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string output_directory(const ExperimentConfig& config) {
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return config.output_dir;
}

ExperimentConfig ExperimentConfig::resolved() const {
  ExperimentConfig c = *this;
  const std::size_t n = c.hp.n;
  if (n < 1) throw ConfigError("clients: at least one client required");

  if (c.malicious_fraction) {
    const double frac = *c.malicious_fraction;
    if (!(frac >= 0.0 && frac < 0.5)) throw ConfigError("malicious_fraction: must lie in [0, 0.5)");
    c.hp.f = static_cast<std::size_t>(std::floor(frac * static_cast<double>(n) + 0.5));
  }

  c.task.quadratic.n = n;
  c.task.classification.n = n;
  c.task.classification.q = c.hp.q;
  c.hp.d = c.task.kind == TaskKind::Quadratic
               ? c.task.quadratic.d
               : static_cast<std::size_t>(std::max(c.task.classification.classes, 0)) * c.task.classification.features;

  if (c.defense.eta) c.hp.eta = *c.defense.eta;
  if (c.defense.lambda) c.hp.lambda = *c.defense.lambda;
  c.defense.gar.lambda = c.hp.lambda;
  c.defense.gar.krum_f = c.defense.krum_f.value_or(c.hp.f);
  c.defense.gar.trim_k = c.defense.trim_k.value_or(c.hp.f);

  c.hp.validate();

  c.attack.malicious.clear();
  if (c.attack.kind != AttackKind::None) c.attack.malicious = spread_malicious(n, c.hp.f);
  c.attack.validate(n);

  if (c.defense.arch == Architecture::SC) c.defense.gar.validate(n);
  if (c.defense.arch != Architecture::SC && n > c.hp.d) {
    throw ConfigError(fmt::format("clients: ring needs n <= d (n={}, d={})", n, c.hp.d));
  }
  if (c.defense.arch == Architecture::BRACE && c.hp.m < min_sum_width(n)) {
    throw ConfigError(fmt::format("bits_per_entry: BRACE with n={} needs at least {} bits", n, min_sum_width(n)));
  }
  if (c.attack.kind == AttackKind::KrumAttack && !c.attack.malicious.empty() && n < c.hp.f + 3) {
    throw ConfigError("attack.kind: Krum attack needs n >= f + 3");
  }
  if (c.attack.kind == AttackKind::LabelFlip && c.task.kind != TaskKind::Classification) {
    throw ConfigError("attack.kind: label_flip needs a classification task");
  }
  if (c.task.kind == TaskKind::Classification) {
    if (c.task.classification.classes < 2) throw ConfigError("task.classes: need at least two classes");
    if (n < static_cast<std::size_t>(c.task.classification.classes)) {
      throw ConfigError("clients: non-IID partition needs at least one client per class group");
    }
  }
  if (c.eval_every < 1) throw ConfigError("eval_every: must be positive");
  if (c.seeds.empty()) throw ConfigError("seeds: at least one seed required");
  if (c.monitor.enabled) {
    if (c.task.kind != TaskKind::Quadratic) throw ConfigError("monitor.enabled: needs a quadratic task (exact f* and L)");
    const bool sign_consensus = c.defense.arch == Architecture::BRACE ||
                                (c.defense.arch == Architecture::SC && c.defense.gar.kind == GarKind::BraceOracle);
    if (!sign_consensus) throw ConfigError("monitor.enabled: needs the BRACE consensus update");
    if (c.eval_every != 1) throw ConfigError("monitor.enabled: needs eval_every = 1");
    if (c.monitor.resamples < 1) throw ConfigError("monitor.resamples: must be positive");
  }
  return c;
}

}  // namespace brace
