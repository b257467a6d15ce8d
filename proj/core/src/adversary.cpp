#include "brace/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "brace/aggregators.hpp"

namespace brace {

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::None: return "none";
    case AttackKind::Gaussian: return "gaussian";
    case AttackKind::LabelFlip: return "label_flip";
    case AttackKind::KrumAttack: return "krum";
    case AttackKind::TrimAttack: return "trim";
    case AttackKind::MinMax: return "minmax";
    case AttackKind::MinSum: return "minsum";
    case AttackKind::AdaptiveBrace: return "adaptive";
  }
  return "?";
}

AttackKind parse_attack_kind(std::string_view name) {
  for (auto k : {AttackKind::None, AttackKind::Gaussian, AttackKind::LabelFlip, AttackKind::KrumAttack,
                 AttackKind::TrimAttack, AttackKind::MinMax, AttackKind::MinSum, AttackKind::AdaptiveBrace}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError(fmt::format("unknown attack '{}'", name));
}

void AttackSpec::validate(std::size_t n) const {
  if (2 * malicious.size() >= n && !malicious.empty()) {
    throw ConfigError(fmt::format("attack: {} malicious clients out of {} violates f < n/2", malicious.size(), n));
  }
  for (std::size_t i = 0; i < malicious.size(); ++i) {
    if (malicious[i] >= n) throw ConfigError(fmt::format("attack: malicious id {} out of range", malicious[i]));
    if (i > 0 && malicious[i] <= malicious[i - 1]) throw ConfigError("attack: malicious ids must be sorted and unique");
  }
  if (!(sigma > 0.0)) throw ConfigError("attack.sigma: must be positive");
  if (!(trim_b > 1.0)) throw ConfigError("attack.trim_b: must exceed 1");
  if (search_iters < 1) throw ConfigError("attack.search_iters: must be positive");
  if (!(search_tol > 0.0)) throw ConfigError("attack.search_tol: must be positive");
}

namespace {

std::mt19937_64 attack_rng(std::uint64_t seed, AttackKind kind) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(kind), 0x5eedu};
  return std::mt19937_64(seq);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) { return std::sqrt(squared_distance(a, b)); }

std::vector<GradVec> copies(const GradVec& v, std::size_t count) { return std::vector<GradVec>(count, v); }

GradVec perturbed(const GradVec& mu, const GradVec& direction, double scale) {
  GradVec m(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) m[k] = mu[k] + scale * direction[k];
  return m;
}

// Largest scale in [0, inf) with feasible(scale) true, by doubling then
// bisection. Feasibility is expected to be monotone decreasing in the scale.
template <class Feasible>
AttackReport search_scale(const Feasible& feasible, double initial_hi, const AttackSpec& spec) {
  AttackReport rep;
  double best_feasible = -1.0;
  double least_infeasible = std::numeric_limits<double>::infinity();
  auto probe = [&](double x) {
    ++rep.evaluations;
    const bool ok = feasible(x);
    if (ok) {
      if (x >= least_infeasible) rep.monotone = false;
      best_feasible = std::max(best_feasible, x);
    } else {
      if (x <= best_feasible) rep.monotone = false;
      least_infeasible = std::min(least_infeasible, x);
    }
    return ok;
  };

  double hi = std::max(initial_hi, 1e-12);
  for (int doubling = 0; doubling < 64 && probe(hi); ++doubling) hi *= 2.0;
  if (!std::isfinite(least_infeasible)) {
    rep.scale = best_feasible;
    return rep;
  }
  hi = least_infeasible;
  double lo = std::max(best_feasible, 0.0);
  for (std::size_t it = 0; it < spec.search_iters && hi - lo > spec.search_tol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid)) lo = mid; else hi = mid;
  }
  if (best_feasible < 0.0) probe(0.0);
  rep.scale = best_feasible < 0.0 ? 0.0 : best_feasible;
  rep.degenerate = best_feasible < 0.0;
  return rep;
}

}  // namespace

AttackResult attack_gaussian(const AttackContext& ctx, const AttackSpec& spec) {
  const std::size_t d = common_dimension(ctx.observed);
  auto rng = attack_rng(ctx.seed, AttackKind::Gaussian);
  std::normal_distribution<double> noise(0.0, spec.sigma);
  AttackResult res;
  res.malicious.resize(spec.malicious.size(), GradVec(d));
  for (auto& g : res.malicious)
    for (auto& v : g) v = noise(rng);
  return res;
}

AttackResult attack_trim(const AttackContext& ctx, const AttackSpec& spec) {
  const std::size_t d = common_dimension(ctx.observed);
  const GradVec mu = gar_mean(ctx.observed);
  auto rng = attack_rng(ctx.seed, AttackKind::TrimAttack);
  AttackResult res;
  res.malicious.resize(spec.malicious.size(), GradVec(d));
  const double b = spec.trim_b;
  for (std::size_t k = 0; k < d; ++k) {
    const double s = -static_cast<double>(sign_of(mu[k]));
    double lo_v = ctx.observed.front()[k];
    double hi_v = lo_v;
    for (const auto& g : ctx.observed) {
      lo_v = std::min(lo_v, g[k]);
      hi_v = std::max(hi_v, g[k]);
    }
    const double e = s > 0 ? hi_v : lo_v;
    const double a = e;
    double z = 0.0;
    if (e * s > 0) z = b * e;
    else if (e * s < 0) z = e / b;
    else z = e + s;
    std::uniform_real_distribution<double> draw(std::min(a, z), std::max(a, z));
    for (auto& g : res.malicious) g[k] = draw(rng);
  }
  return res;
}

AttackResult attack_krum(const AttackContext& ctx, const AttackSpec& spec) {
  const std::size_t f = spec.malicious.size();
  AttackResult res;
  if (f == 0) return res;
  const std::size_t d = common_dimension(ctx.observed);
  const std::size_t n = ctx.observed.size() + f;
  if (n < f + 3) throw ConfigError("attack_krum: Krum needs n >= f + 3");
  const GradVec mu = gar_mean(ctx.observed);
  GradVec direction(d);
  for (std::size_t k = 0; k < d; ++k) direction[k] = -static_cast<double>(sign_of(mu[k]));

  std::vector<GradVec> pool(ctx.observed.begin(), ctx.observed.end());
  pool.resize(n);
  auto selected = [&](double scale) {
    const GradVec m = perturbed(mu, direction, scale);
    for (std::size_t j = ctx.observed.size(); j < n; ++j) pool[j] = m;
    return krum_select(pool, f) >= ctx.observed.size();
  };

  double spread = 0.0;
  for (const auto& g : ctx.observed) spread = std::max(spread, distance(g, mu));
  res.report = search_scale(selected, std::max(spread, 1.0) / std::sqrt(static_cast<double>(d)), spec);
  const GradVec m = res.report.degenerate ? mu : perturbed(mu, direction, res.report.scale);
  res.malicious = copies(m, f);
  return res;
}

bool minmax_feasible(std::span<const GradVec> observed, std::span<const double> candidate) {
  double bound = 0.0;
  for (std::size_t j = 0; j < observed.size(); ++j)
    for (std::size_t l = j + 1; l < observed.size(); ++l) bound = std::max(bound, distance(observed[j], observed[l]));
  double worst = 0.0;
  for (const auto& g : observed) worst = std::max(worst, distance(candidate, g));
  return worst <= bound;
}

bool minsum_feasible(std::span<const GradVec> observed, std::span<const double> candidate) {
  double bound = 0.0;
  for (const auto& gl : observed) {
    double s = 0.0;
    for (const auto& gj : observed) s += squared_distance(gl, gj);
    bound = std::max(bound, s);
  }
  double total = 0.0;
  for (const auto& g : observed) total += squared_distance(candidate, g);
  return total <= bound;
}

namespace {

template <class Feasible>
AttackResult inverse_sign_attack(const AttackContext& ctx, const AttackSpec& spec, const Feasible& feasible) {
  const std::size_t d = common_dimension(ctx.observed);
  const GradVec mu = gar_mean(ctx.observed);
  AttackResult res;
  if (ctx.observed.size() < 2) {
    res.report.degenerate = true;
    res.malicious = copies(mu, spec.malicious.size());
    return res;
  }
  GradVec p(d);
  const double unit = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t k = 0; k < d; ++k) p[k] = -static_cast<double>(sign_of(mu[k])) * unit;

  auto ok = [&](double gamma) { return feasible(ctx.observed, perturbed(mu, p, gamma)); };
  double spread = 0.0;
  for (const auto& g : ctx.observed) spread = std::max(spread, distance(g, mu));
  if (spread == 0.0) {
    res.malicious = copies(mu, spec.malicious.size());
    return res;
  }
  res.report = search_scale(ok, spread, spec);
  res.malicious = copies(perturbed(mu, p, res.report.scale), spec.malicious.size());
  return res;
}

}  // namespace

AttackResult attack_minmax(const AttackContext& ctx, const AttackSpec& spec) {
  return inverse_sign_attack(ctx, spec, [](std::span<const GradVec> o, const GradVec& m) { return minmax_feasible(o, m); });
}

AttackResult attack_minsum(const AttackContext& ctx, const AttackSpec& spec) {
  return inverse_sign_attack(ctx, spec, [](std::span<const GradVec> o, const GradVec& m) { return minsum_feasible(o, m); });
}

AttackResult attack_adaptive_brace(const AttackContext& ctx, const AttackSpec& spec, int lambda) {
  const SumVec benign = sum_signs(ctx.observed);
  GradVec m(benign.size());
  for (std::size_t k = 0; k < benign.size(); ++k) m[k] = benign[k] > lambda ? -1.0 : 1.0;
  AttackResult res;
  res.malicious = copies(m, spec.malicious.size());
  return res;
}

std::vector<int> attack_label_flip(std::span<const int> labels, int classes) {
  if (classes < 2) throw ConfigError("label flip needs at least two classes");
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) throw ConfigError("label flip: label out of range");
    out[i] = classes - 1 - labels[i];
  }
  return out;
}

Submission craft_submissions(const AttackSpec& spec, std::span<const GradVec> honest, std::span<const double> model,
                             int lambda, std::uint64_t seed) {
  spec.validate(honest.size());
  Submission sub;
  sub.gradients.assign(honest.begin(), honest.end());
  if (spec.malicious.empty() || spec.kind == AttackKind::None || spec.kind == AttackKind::LabelFlip) return sub;

  std::vector<GradVec> observed;
  for (ClientId i = 0; i < honest.size(); ++i) {
    const bool is_malicious = std::binary_search(spec.malicious.begin(), spec.malicious.end(), i);
    if (is_malicious == (spec.knowledge == Knowledge::BenignOnly)) observed.push_back(honest[i]);
  }
  const AttackContext ctx{observed, model, seed};

  AttackResult res;
  switch (spec.kind) {
    case AttackKind::Gaussian: res = attack_gaussian(ctx, spec); break;
    case AttackKind::TrimAttack: res = attack_trim(ctx, spec); break;
    case AttackKind::KrumAttack: res = attack_krum(ctx, spec); break;
    case AttackKind::MinMax: res = attack_minmax(ctx, spec); break;
    case AttackKind::MinSum: res = attack_minsum(ctx, spec); break;
    case AttackKind::AdaptiveBrace: res = attack_adaptive_brace(ctx, spec, lambda); break;
    default: break;
  }
  for (std::size_t j = 0; j < spec.malicious.size(); ++j) sub.gradients[spec.malicious[j]] = std::move(res.malicious[j]);
  sub.report = res.report;
  return sub;
}

std::vector<ClientId> spread_malicious(std::size_t n, std::size_t f) {
  std::vector<ClientId> ids(f);
  for (std::size_t j = 0; j < f; ++j) ids[j] = j * n / f;
  return ids;
}

}  // namespace brace
