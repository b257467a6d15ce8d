#include "brace/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

namespace brace {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const MessageSink kNoSink;

std::uint64_t round_seed(std::uint64_t seed, std::uint64_t round, std::uint64_t salt) {
  // splitmix64 finalizer over the combined key
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + round * 0xBF58476D1CE4E5B9ull + salt;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::string fmt_double(double v) { return std::isnan(v) ? std::string() : fmt::format("{}", v); }

}  // namespace

std::string Defense::label() const {
  switch (arch) {
    case Architecture::BRACE: return "BRACE";
    case Architecture::RAR: return "RAR";
    case Architecture::SC: return fmt::format("SC-{}", to_string(gar.kind));
  }
  return "?";
}

std::unique_ptr<Task> build_task(const TaskConfig& task, std::uint64_t seed) {
  if (task.kind == TaskKind::Quadratic) {
    QuadraticParams p = task.quadratic;
    p.seed = seed;
    return std::make_unique<QuadraticTask>(p);
  }
  ClassificationParams p = task.classification;
  p.seed = seed;
  return std::make_unique<ClassificationTask>(p);
}

std::uint64_t checksum(std::span<const double> values) {
  // FNV-1a over the IEEE-754 bit patterns.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= bits & 0xffu;
      h *= 0x100000001b3ull;
      bits >>= 8;
    }
  }
  return h;
}

double median(std::vector<double> values) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

// ---------------------------------------------------------------------------
// Convergence monitor

BoundReport convergence_monitor(std::span<const RoundRecord> records, double smoothness, double eta, double f_star,
                             double f_initial, std::size_t d) {
  if (records.empty()) throw ConfigError("convergence monitor: no rounds recorded");
  if (!std::isfinite(smoothness) || !(smoothness > 0.0)) throw ConfigError("convergence monitor: smoothness L missing");
  if (!std::isfinite(f_star) || !std::isfinite(f_initial)) throw ConfigError("convergence monitor: f* or f(w1) missing");
  if (!(eta > 0.0)) throw ConfigError("convergence monitor: learning rate must be positive");

  BoundReport r;
  r.rounds = records.size();
  r.dim = d;
  const auto T = static_cast<double>(records.size());
  double sum = 0.0;
  for (const auto& rec : records) {
    if (!std::isfinite(rec.grad_norm)) throw ConfigError("convergence monitor: every round needs a gradient norm");
    sum += rec.grad_norm;
    if (std::isfinite(rec.opposition)) r.max_opposition = std::max(r.max_opposition, rec.opposition);
  }
  r.lhs = sum / T;
  const double head = (f_initial - f_star) / (eta * T);
  r.rhs_stated = head + smoothness * eta * eta / 2.0;
  r.rhs_dscaled = head + smoothness * eta * eta * static_cast<double>(d) / 2.0;
  r.hypothesis_holds = r.max_opposition < 0.5;
  r.stated_holds = r.lhs <= r.rhs_stated;
  r.dscaled_holds = r.lhs <= r.rhs_dscaled;
  r.sound = !r.hypothesis_holds || r.dscaled_holds;

  if (!r.hypothesis_holds) {
    r.note = fmt::format("hypothesis violated: max opposition probability {} >= 0.5; bound not asserted",
                         r.max_opposition);
  } else if (!r.dscaled_holds) {
    r.note = "hypothesis holds but the d-scaled bound FAILS";
  } else {
    r.note = "hypothesis holds; d-scaled bound holds";
  }
  if (d > 1) {
    r.note += fmt::format(
        "; each sign step has Euclidean length eta*sqrt(d)={}, so the quadratic term is L*eta^2*d/2 (asserted), "
        "the unit-step form L*eta^2/2 is reported only (stated bound {})",
        eta * std::sqrt(static_cast<double>(d)), r.stated_holds ? "holds" : "fails");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Experiment runner

RunResult run_experiment(const ExperimentConfig& raw, std::uint64_t seed, const MessageSink& trace) {
  const ExperimentConfig cfg = raw.resolved();
  const std::size_t n = cfg.hp.n;
  const double eta = cfg.hp.eta;
  const int lambda = cfg.hp.lambda;

  const auto clean = build_task(cfg.task, seed);
  std::unique_ptr<Task> poisoned;
  if (cfg.attack.kind == AttackKind::LabelFlip && !cfg.attack.malicious.empty()) {
    const auto& cls = dynamic_cast<const ClassificationTask&>(*clean);
    poisoned = std::make_unique<ClassificationTask>(cls.with_flipped_labels(cfg.attack.malicious));
  }
  const Task& train = poisoned ? *poisoned : *clean;
  if (train.dim() != cfg.hp.d || train.clients() != n) throw std::logic_error("task does not match the config");

  std::vector<Rng> client_rng;
  client_rng.reserve(n);
  for (ClientId i = 0; i < n; ++i) client_rng.push_back(make_rng(seed, 1000 + i));
  Rng monitor_rng = make_rng(seed, 7);

  const std::optional<ChunkPlan> plan =
      cfg.defense.arch == Architecture::SC ? std::nullopt : std::optional<ChunkPlan>(ChunkPlan(cfg.hp.d, n));
  GarSpec gar = cfg.defense.gar;

  RunResult result;
  result.records.reserve(cfg.hp.rounds);
  GradVec w = clean->initial_model();
  std::vector<GradVec> honest(n);

  for (std::size_t t = 1; t <= cfg.hp.rounds; ++t) {
    RoundRecord rec;
    rec.round = t;
    rec.opposition = kNaN;
    const bool eval = (t - 1) % cfg.eval_every == 0;
    GradVec full;
    if (eval) {
      full = clean->full_gradient(w);
      rec.loss = clean->loss(w);
      rec.grad_norm = l2_norm(full);
      rec.test_error = clean->evaluate(w).value;
    } else {
      rec.loss = rec.grad_norm = rec.test_error = kNaN;
    }

    for (ClientId i = 0; i < n; ++i) honest[i] = train.stochastic_gradient(i, w, cfg.batch_size, client_rng[i]);
    const Submission sub = craft_submissions(cfg.attack, honest, w, lambda, round_seed(seed, t, 1));
    if (sub.report.degenerate) ++result.summary.degenerate_attack_rounds;

    if (cfg.monitor.enabled) {
      std::vector<std::size_t> opposed(cfg.hp.d, 0);
      std::vector<GradVec> draw(n);
      for (std::size_t r = 0; r < cfg.monitor.resamples; ++r) {
        for (ClientId i = 0; i < n; ++i) draw[i] = train.stochastic_gradient(i, w, cfg.batch_size, monitor_rng);
        const Submission alt = craft_submissions(cfg.attack, draw, w, lambda, round_seed(seed, t, 1000 + r));
        const SignVec out = gar_brace_oracle(alt.gradients, lambda);
        for (std::size_t k = 0; k < cfg.hp.d; ++k)
          if (full[k] != 0.0 && out[k] != sign_of(full[k])) ++opposed[k];
      }
      const auto worst = *std::max_element(opposed.begin(), opposed.end());
      rec.opposition = static_cast<double>(worst) / static_cast<double>(cfg.monitor.resamples);
    }

    Aggregate agg;
    CommLedger ledger;
    const MessageSink& sink = t == 1 ? trace : kNoSink;
    switch (cfg.defense.arch) {
      case Architecture::SC:
        agg = aggregate(gar, sub.gradients, eta);
        ledger = sc_upload_ledger(n, cfg.hp.d, cfg.hp.m);
        break;
      case Architecture::RAR: {
        RarOutcome out = run_rar_round(sub.gradients, *plan, cfg.hp.m, sink);
        agg.kind = UpdateKind::Value;
        agg.values = std::move(out.aggregate);
        for (auto& v : agg.values) v /= static_cast<double>(n);
        ledger = std::move(out.ledger);
        break;
      }
      case Architecture::BRACE: {
        BraceOutcome out = run_brace_round(sub.gradients, *plan, lambda, cfg.hp.m, sink);
        agg.kind = UpdateKind::Sign;
        agg.values = to_grad(out.aggregate);
        ledger = std::move(out.ledger);
        break;
      }
    }
    rec.bits_total = ledger.total_bits();
    rec.checksum = checksum(agg.values);
    w = apply_update(w, agg, eta);
    result.records.push_back(rec);
  }

  auto& s = result.summary;
  s.seed = seed;
  s.defense = cfg.defense.label();
  s.attack = std::string(to_string(cfg.attack.malicious.empty() ? AttackKind::None : cfg.attack.kind));
  const Evaluation final_eval = clean->evaluate(w);
  s.metric = final_eval.kind;
  s.final_metric = final_eval.value;
  s.final_loss = clean->loss(w);
  s.bits_per_round = result.records.empty() ? 0 : result.records.front().bits_total;
  s.model_checksum = checksum(w);
  if (cfg.monitor.enabled) {
    const auto& quad = dynamic_cast<const QuadraticTask&>(*clean);
    s.bound = convergence_monitor(result.records, quad.smoothness(), eta, quad.optimum(),
                               quad.loss(quad.initial_model()), cfg.hp.d);
  }
  result.final_model = std::move(w);
  return result;
}

// ---------------------------------------------------------------------------
// Sweeps

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::MaliciousFraction: return "malicious_fraction";
    case SweepAxis::NonIid: return "noniid";
    case SweepAxis::Clients: return "clients";
    case SweepAxis::Lambda: return "lambda";
  }
  return "?";
}

SweepAxis parse_sweep_axis(std::string_view name) {
  for (auto a : {SweepAxis::MaliciousFraction, SweepAxis::NonIid, SweepAxis::Clients, SweepAxis::Lambda})
    if (to_string(a) == name) return a;
  throw ConfigError(fmt::format("unknown sweep axis '{}'", name));
}

ExperimentConfig sweep_cell(const ExperimentConfig& base, SweepAxis axis, double value, const Defense& defense) {
  ExperimentConfig c = base;
  c.defense = defense;
  const auto cell = fmt::format("sweep cell {}={} defense={}", to_string(axis), value, defense.label());
  try {
    switch (axis) {
      case SweepAxis::MaliciousFraction:
        c.malicious_fraction = value;
        break;
      case SweepAxis::NonIid:
        if (c.task.kind != TaskKind::Classification) throw ConfigError("noniid axis needs a classification task");
        c.hp.q = value;
        break;
      case SweepAxis::Clients:
        if (!(value >= 1.0) || value != std::floor(value)) throw ConfigError("clients axis needs positive integers");
        if (!c.malicious_fraction && base.hp.n > 0) {
          c.malicious_fraction = static_cast<double>(base.hp.f) / static_cast<double>(base.hp.n);
        }
        c.hp.n = static_cast<std::size_t>(value);
        break;
      case SweepAxis::Lambda:
        if (value != std::floor(value)) throw ConfigError("lambda axis needs integers");
        c.defense.lambda = static_cast<int>(value);
        break;
    }
    return c.resolved();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", cell, e.what()));
  }
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepAxis axis, std::span<const double> values) {
  std::vector<Defense> defenses = base.sweep_defenses;
  if (defenses.empty()) defenses.push_back(base.defense);

  std::vector<std::pair<ExperimentConfig, SweepRow>> cells;
  for (const auto& def : defenses) {
    for (double v : values) {
      ExperimentConfig c = sweep_cell(base, axis, v, def);
      SweepRow row;
      row.axis = axis;
      row.value = v;
      row.defense = def.label();
      row.attack = std::string(to_string(c.attack.malicious.empty() ? AttackKind::None : c.attack.kind));
      cells.emplace_back(std::move(c), std::move(row));
    }
  }

  std::vector<SweepRow> rows;
  for (auto& [cfg, row] : cells) {
    for (auto s : cfg.seeds) {
      const RunResult res = run_experiment(cfg, s);
      row.metric = res.summary.metric;
      row.per_seed.push_back(res.summary.final_metric);
    }
    row.median = median(row.per_seed);
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Communication cost

std::vector<CommCostRow> commcost_report(std::span<const std::size_t> clients, std::size_t d, unsigned m,
                                         std::uint64_t seed) {
  std::vector<CommCostRow> rows;
  for (std::size_t n : clients) {
    if (n < 1) throw ConfigError("commcost: client counts must be positive");
    if (n > d) throw ConfigError(fmt::format("commcost: n={} exceeds d={}", n, d));
    Rng rng = make_rng(seed, n);
    std::normal_distribution<double> gauss;
    std::vector<GradVec> grads(n, GradVec(d));
    for (auto& g : grads)
      for (auto& v : g) v = gauss(rng);
    const ChunkPlan plan(d, n);

    rows.push_back({n, d, m, Architecture::SC,
                    ledger_matches_prediction(sc_upload_ledger(n, d, m), Architecture::SC, n, d, m)});
    const auto rar = run_rar_round(grads, plan, m);
    rows.push_back({n, d, m, Architecture::RAR, ledger_matches_prediction(rar.ledger, Architecture::RAR, n, d, m)});
    const auto width = m >= min_sum_width(n) ? WidthCheck::Enforce : WidthCheck::AccountingOnly;
    const auto br = run_brace_round(grads, plan, 0, m, {}, width);
    CostCheck check = ledger_matches_prediction(br.ledger, Architecture::BRACE, n, d, m);
    if (width == WidthCheck::AccountingOnly) {
      check.report += fmt::format(" [accounting only: {} bits cannot carry sums in [-{}, {}]]", m, n, n);
    }
    rows.push_back({n, d, m, Architecture::BRACE, std::move(check)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Writers

void write_rounds_csv(std::ostream& os, std::span<const RoundRecord> records) {
  os << "round,loss,grad_norm,test_error,bits_total\n";
  for (const auto& r : records) {
    os << r.round << ',' << fmt_double(r.loss) << ',' << fmt_double(r.grad_norm) << ',' << fmt_double(r.test_error)
       << ',' << r.bits_total << '\n';
  }
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << "axis,value,defense,attack,metric,median,per_seed\n";
  for (const auto& r : rows) {
    os << to_string(r.axis) << ',' << fmt::format("{}", r.value) << ',' << r.defense << ',' << r.attack << ','
       << to_string(r.metric) << ',' << fmt::format("{}", r.median) << ',';
    for (std::size_t i = 0; i < r.per_seed.size(); ++i) os << (i ? ";" : "") << fmt::format("{}", r.per_seed[i]);
    os << '\n';
  }
}

void write_commcost_csv(std::ostream& os, std::span<const CommCostRow> rows) {
  os << "n,d,m,architecture,predicted,measured,chunk_exact,gap,matches\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.d << ',' << r.m << ',' << to_string(r.arch) << ',' << fmt::format("{}", r.check.predicted)
       << ',' << r.check.measured << ',' << r.check.chunk_exact << ',' << fmt::format("{}", r.check.gap) << ','
       << (r.check.matches ? "true" : "false") << '\n';
  }
}

nlohmann::json to_json(const BoundReport& r) {
  return {{"rounds", r.rounds},
          {"dim", r.dim},
          {"lhs", r.lhs},
          {"rhs_stated", r.rhs_stated},
          {"rhs_dscaled", r.rhs_dscaled},
          {"max_opposition", r.max_opposition},
          {"hypothesis_holds", r.hypothesis_holds},
          {"stated_holds", r.stated_holds},
          {"dscaled_holds", r.dscaled_holds},
          {"sound", r.sound},
          {"note", r.note}};
}

nlohmann::json to_json(const RunSummary& s) {
  nlohmann::json j = {{"seed", s.seed},
                      {"defense", s.defense},
                      {"attack", s.attack},
                      {"metric", std::string(to_string(s.metric))},
                      {"final_metric", s.final_metric},
                      {"final_loss", s.final_loss},
                      {"bits_per_round", s.bits_per_round},
                      {"model_checksum", fmt::format("{:016x}", s.model_checksum)},
                      {"degenerate_attack_rounds", s.degenerate_attack_rounds}};
  if (s.bound) j["bound"] = to_json(*s.bound);
  return j;
}

}  // namespace brace
