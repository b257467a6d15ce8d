#include "brace/verify/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <fmt/format.h>

#include "brace/verify/oracles.hpp"

namespace brace::verify {

namespace {

using Clock = std::chrono::steady_clock;

template <class F>
CheckResult timed(F&& body) {
  const auto start = Clock::now();
  CheckResult r = body();
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool all_equal_to(const std::vector<GradVec>& buffers, const GradVec& v) {
  return std::all_of(buffers.begin(), buffers.end(), [&](const GradVec& b) { return b == v; });
}

CheckResult named(std::string id, std::string title) {
  CheckResult r;
  r.id = std::move(id);
  r.title = std::move(title);
  return r;
}

const std::vector<GradVec> kFigureGradients = {{5, 2, -10}, {8, -4, 7}, {9, 3, 8}};

}  // namespace

CheckResult check_rar_equivalence(std::uint64_t seed, std::size_t rounds) {
  return timed([&] {
    CheckResult r = named("rar_equivalence", "ring-all-reduce equals the centralized sum");
    Rng rng = make_rng(seed, 101);
    std::uniform_int_distribution<int> value(-100, 100);
    std::size_t mismatches = 0;
    std::size_t nondivisible = 0;
    for (std::size_t t = 0; t < rounds; ++t) {
      const std::size_t n = uniform(rng, 1, 12);
      const std::size_t d = uniform(rng, n, 64);
      if (d % n != 0) ++nondivisible;
      std::vector<GradVec> g(n, GradVec(d));
      for (auto& row : g)
        for (auto& x : row) x = value(rng);
      const auto out = run_rar_round(g, ChunkPlan(d, n), 32);
      const GradVec expect = oracle::centralized_sum(g);
      if (out.aggregate != expect || !all_equal_to(out.client_buffers, expect) || !out.ledger.consistent()) {
        ++mismatches;
      }
    }

    const auto fig = run_rar_round(kFigureGradients, ChunkPlan(3, 3), 32);
    auto poisoned_in = kFigureGradients;
    poisoned_in[0][2] = -200;
    const auto poisoned = run_rar_round(poisoned_in, ChunkPlan(3, 3), 32);
    const bool fig_ok = fig.aggregate == GradVec{22, 1, 5} && fig.reduced[0] == GradVec{1};
    const bool poisoned_ok = poisoned.aggregate == GradVec{22, 1, -185};

    r.passed = mismatches == 0 && nondivisible > 0 && fig_ok && poisoned_ok;
    r.detail = fmt::format("{} rounds ({} with n not dividing d), {} mismatches; figure instance {}, poisoned {}",
                           rounds, nondivisible, mismatches, fig_ok ? "[22, 1, 5]" : "WRONG",
                           poisoned_ok ? "[22, 1, -185]" : "WRONG");
    r.data = {{"rounds", rounds},
              {"nondivisible", nondivisible},
              {"mismatches", mismatches},
              {"figure", fig.aggregate},
              {"poisoned", poisoned.aggregate}};
    return r;
  });
}

CheckResult check_brace_equivalence(std::uint64_t seed, std::size_t rounds) {
  return timed([&] {
    CheckResult r = named("brace_equivalence", "BRACE ring equals the centralized consensus");
    Rng rng = make_rng(seed, 102);
    std::normal_distribution<double> gauss;
    std::bernoulli_distribution zero(0.05);
    std::size_t mismatches = 0;
    std::size_t divergent = 0;
    std::size_t nondivisible = 0;
    for (std::size_t t = 0; t < rounds; ++t) {
      const std::size_t n = uniform(rng, 1, 12);
      const std::size_t d = uniform(rng, n, 64);
      const int lambda = std::uniform_int_distribution<int>(-static_cast<int>(n), static_cast<int>(n))(rng);
      if (d % n != 0) ++nondivisible;
      std::vector<GradVec> g(n, GradVec(d));
      for (auto& row : g)
        for (auto& x : row) x = zero(rng) ? 0.0 : gauss(rng);
      const auto out = run_brace_round(g, ChunkPlan(d, n), lambda, min_sum_width(n));
      if (out.aggregate != gar_brace_oracle(g, lambda) || out.aggregate != oracle::consensus(g, lambda)) ++mismatches;
      for (const auto& c : out.client_outputs)
        if (c != out.aggregate) {
          ++divergent;
          break;
        }
    }
    const auto fig = run_brace_round(kFigureGradients, ChunkPlan(3, 3), 2, 8);
    const bool fig_ok = fig.aggregate == SignVec{1, -1, -1} &&
                        std::all_of(fig.client_outputs.begin(), fig.client_outputs.end(),
                                    [](const SignVec& s) { return s == SignVec{1, -1, -1}; });
    r.passed = mismatches == 0 && divergent == 0 && nondivisible > 0 && fig_ok;
    r.detail = fmt::format("{} rounds ({} with n not dividing d), {} oracle mismatches, {} rounds with diverging "
                           "clients; figure instance at lambda=2 {}",
                           rounds, nondivisible, mismatches, divergent, fig_ok ? "[1, -1, -1]" : "WRONG");
    std::vector<int> fig_out(fig.aggregate.begin(), fig.aggregate.end());
    r.data = {{"rounds", rounds},
              {"nondivisible", nondivisible},
              {"mismatches", mismatches},
              {"divergent", divergent},
              {"figure", fig_out}};
    return r;
  });
}

CheckResult check_bit_accounting() {
  return timed([&] {
    CheckResult r = named("bit_accounting", "ledger totals match the closed-form costs");
    Rng rng = make_rng(0, 103);
    std::normal_distribution<double> gauss;
    auto gradients = [&](std::size_t n, std::size_t d) {
      std::vector<GradVec> g(n, GradVec(d));
      for (auto& row : g)
        for (auto& x : row) x = gauss(rng);
      return g;
    };

    std::size_t cases = 0;
    std::size_t failures = 0;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t n : {2, 4, 10, 100}) {
      for (unsigned m : {1u, 8u, 32u}) {
        for (std::size_t mult : {1, 3, 10}) {
          const std::size_t d = n * mult;
          const auto g = gradients(n, d);
          const ChunkPlan plan(d, n);
          const auto sc = sc_upload_ledger(n, d, m);
          const auto rar = run_rar_round(g, plan, m);
          const auto width = m >= min_sum_width(n) ? WidthCheck::Enforce : WidthCheck::AccountingOnly;
          const auto br = run_brace_round(g, plan, 0, m, {}, width);

          const std::uint64_t want_rar = oracle::rar_bits_numerator(n, d, m) / n;
          const std::uint64_t want_brace = oracle::brace_bits_numerator(n, d, m) / n;
          bool ok = sc.total_bits() == oracle::sc_bits(n, d, m);
          for (auto b : rar.ledger.per_client_bits()) ok = ok && b == want_rar;
          for (auto b : br.ledger.per_client_bits()) ok = ok && b == want_brace;
          ok = ok && ledger_matches_prediction(sc, Architecture::SC, n, d, m).matches &&
               ledger_matches_prediction(rar.ledger, Architecture::RAR, n, d, m).matches &&
               ledger_matches_prediction(br.ledger, Architecture::BRACE, n, d, m).matches;
          ok = ok && rar.ledger.consistent() && br.ledger.consistent();
          ++cases;
          if (!ok) ++failures;
          if (mult == 10 && m == 32 && (n == 2 || n == 10 || n == 100)) {
            rows.push_back({{"n", n}, {"d", d}, {"m", m}, {"sc", sc.total_bits()},
                            {"rar", rar.ledger.max_client_bits()}, {"brace", br.ledger.max_client_bits()}});
          }
        }
      }
    }

    std::size_t uneven = 0;
    std::size_t uneven_failures = 0;
    nlohmann::json gaps = nlohmann::json::array();
    for (std::size_t n : {3, 4, 7, 10}) {
      for (std::size_t d : {n + 1, 2 * n + 1, 5 * n + 3}) {
        if (d % n == 0) continue;
        for (unsigned m : {8u, 32u}) {
          const auto g = gradients(n, d);
          const ChunkPlan plan(d, n);
          const auto rar = run_rar_round(g, plan, m);
          const auto br = run_brace_round(g, plan, 0, m);
          bool ok = true;
          for (ClientId i = 0; i < n; ++i) {
            ok = ok && rar.ledger.per_client_bits()[i] == oracle::ring_client_bits(Architecture::RAR, d, n, i, m);
            ok = ok && br.ledger.per_client_bits()[i] == oracle::ring_client_bits(Architecture::BRACE, d, n, i, m);
          }
          const auto cr = ledger_matches_prediction(rar.ledger, Architecture::RAR, n, d, m);
          const auto cb = ledger_matches_prediction(br.ledger, Architecture::BRACE, n, d, m);
          ok = ok && cr.matches && cb.matches && !cr.report.empty() && !cb.report.empty();
          ++uneven;
          if (!ok) ++uneven_failures;
          if (m == 8 && d == n + 1) {
            gaps.push_back({{"n", n}, {"d", d}, {"m", m}, {"brace_bottleneck", cb.measured},
                            {"brace_idealized", cb.predicted}, {"gap", cb.gap}, {"report", cb.report}});
          }
        }
      }
    }

    const auto small = run_brace_round(gradients(4, 8), ChunkPlan(8, 4), 0, 16);
    const bool example_ok = small.ledger.max_client_bits() == 102 && small.ledger.min_client_bits() == 102;

    r.passed = failures == 0 && uneven_failures == 0 && example_ok;
    r.detail = fmt::format("{} divisible cases ({} failures), {} uneven cases ({} failures); n=4 d=8 m=16 BRACE {}",
                           cases, failures, uneven, uneven_failures, example_ok ? "102 bits" : "WRONG");
    r.data = {{"divisible_cases", cases}, {"divisible_failures", failures}, {"uneven_cases", uneven},
              {"uneven_failures", uneven_failures}, {"table", rows}, {"uneven_gaps", gaps}};
    return r;
  });
}

CheckResult check_flip_resistance() {
  return timed([&] {
    CheckResult r = named("flip_resistance", "Byzantine flip-resistance and adaptive-attack threshold");
    std::size_t guaranteed = 0;
    std::size_t violations = 0;
    std::size_t adaptive_cases = 0;
    std::size_t adaptive_wrong = 0;
    std::size_t settings = 0;
    for (std::size_t n = 1; n <= 12; ++n) {
      for (std::size_t f = 0; f <= std::min<std::size_t>(5, (n - 1) / 2); ++f) {
        const std::size_t nb = n - f;
        const auto mal = spread_malicious(n, f);
        std::vector<ClientId> benign;
        for (ClientId i = 0; i < n; ++i)
          if (!std::binary_search(mal.begin(), mal.end(), i)) benign.push_back(i);
        const std::size_t patterns = std::size_t{1} << f;
        const std::size_t levels = nb + 1;  // S_b = nb - 2 * neg for neg in [0, nb]
        const std::size_t d = levels * patterns;

        // Dimension k = level * patterns + pattern; magnitudes vary so only signs matter.
        std::vector<GradVec> g(n, GradVec(d));
        for (std::size_t k = 0; k < d; ++k) {
          const std::size_t neg = k / patterns;
          const std::size_t pattern = k % patterns;
          for (std::size_t b = 0; b < nb; ++b) g[benign[b]][k] = (b < neg ? -1.0 : 1.0) * (1.0 + 0.25 * b);
          for (std::size_t j = 0; j < f; ++j) g[mal[j]][k] = (pattern >> j) & 1u ? 3.5 : -0.5;
        }
        // Benign-only view with one dimension per S_b level, for the adaptive attack.
        std::vector<GradVec> honest(n, GradVec(std::max(levels, n), 1.0));
        for (std::size_t k = 0; k < honest.front().size(); ++k) {
          const std::size_t neg = std::min(k, nb);
          for (std::size_t b = 0; b < nb; ++b) honest[benign[b]][k] = b < neg ? -2.0 : 2.0;
        }
        const ChunkPlan plan(d, n);
        const ChunkPlan honest_plan(honest.front().size(), n);

        for (int lambda = -static_cast<int>(n); lambda <= static_cast<int>(n); ++lambda) {
          ++settings;
          const auto out = run_brace_round(g, plan, lambda, min_sum_width(n));
          for (std::size_t k = 0; k < d; ++k) {
            const int sb = static_cast<int>(nb) - 2 * static_cast<int>(k / patterns);
            const int fi = static_cast<int>(f);
            if (sb - fi > lambda) {
              ++guaranteed;
              if (out.aggregate[k] != 1) ++violations;
            } else if (sb + fi <= lambda) {
              ++guaranteed;
              if (out.aggregate[k] != -1) ++violations;
            }
          }

          AttackSpec spec;
          spec.kind = AttackKind::AdaptiveBrace;
          spec.malicious = mal;
          const auto sub = craft_submissions(spec, honest, GradVec(honest.front().size(), 0.0), lambda, 0);
          const auto attacked = run_brace_round(sub.gradients, honest_plan, lambda, min_sum_width(n));
          for (std::size_t k = 0; k < honest.front().size(); ++k) {
            const int sb = static_cast<int>(nb) - 2 * static_cast<int>(std::min(k, nb));
            const int fi = static_cast<int>(f);
            ++adaptive_cases;
            if (sb > lambda) {
              const bool flipped = attacked.aggregate[k] == -1;
              if (flipped != (fi >= sb - lambda)) ++adaptive_wrong;
            } else {
              const bool flipped = attacked.aggregate[k] == 1;
              if (flipped != (sb + fi > lambda)) ++adaptive_wrong;
            }
          }
        }
      }
    }
    r.passed = violations == 0 && adaptive_wrong == 0 && guaranteed > 0;
    r.detail = fmt::format("{} (n, f, lambda) settings; {} guaranteed dimensions, {} violations; adaptive attack "
                           "threshold wrong in {} of {} cases",
                           settings, guaranteed, violations, adaptive_wrong, adaptive_cases);
    r.data = {{"settings", settings}, {"guaranteed", guaranteed}, {"violations", violations},
              {"adaptive_cases", adaptive_cases}, {"adaptive_wrong", adaptive_wrong}};
    return r;
  });
}

ExperimentConfig monitor_config_scalar() {
  ExperimentConfig c;
  c.name = "monitor_scalar";
  c.hp.n = 10;
  c.hp.f = 0;
  c.hp.eta = 0.01;
  c.hp.rounds = 1000;
  c.hp.lambda = 0;
  c.hp.m = 32;
  // A one-dimensional model cannot be split over a ring of ten clients; the
  // server-side consensus is the same update.
  c.defense.arch = Architecture::SC;
  c.defense.gar.kind = GarKind::BraceOracle;
  c.task.kind = TaskKind::Quadratic;
  c.task.quadratic.d = 1;
  c.task.quadratic.center = 20.0;
  c.task.quadratic.radius = 1.0;
  c.task.quadratic.noise_std = 1.0;
  c.task.quadratic.init = 0.0;
  c.batch_size = 8;
  c.monitor.enabled = true;
  c.monitor.resamples = 16;
  c.monitor.assert_bound = true;
  return c;
}

ExperimentConfig monitor_config_attacked() {
  ExperimentConfig c;
  c.name = "monitor_attacked";
  c.hp.n = 10;
  c.malicious_fraction = 0.2;
  c.hp.eta = 0.01;
  c.hp.rounds = 100;
  c.hp.lambda = 0;
  c.hp.m = 32;
  c.defense.arch = Architecture::BRACE;
  c.attack.kind = AttackKind::AdaptiveBrace;
  c.task.kind = TaskKind::Quadratic;
  c.task.quadratic.d = 50;
  c.task.quadratic.center = 1.5;
  c.task.quadratic.radius = 0.5;
  c.task.quadratic.curvature_min = 1.0;
  c.task.quadratic.curvature_max = 2.0;
  c.task.quadratic.noise_std = 0.5;
  c.task.quadratic.init = 0.0;
  c.batch_size = 8;
  c.monitor.enabled = true;
  c.monitor.resamples = 32;
  c.monitor.assert_bound = true;
  return c;
}

CheckResult check_convergence_monitor() {
  return timed([&] {
    CheckResult r = named("convergence_monitor", "convergence bound monitor");
    const auto scalar = run_experiment(monitor_config_scalar(), 1).summary.bound.value();
    const auto attacked = run_experiment(monitor_config_attacked(), 1).summary.bound.value();
    const bool scalar_ok = scalar.stated_holds && scalar.lhs <= scalar.rhs_stated;
    const bool attacked_ok = attacked.hypothesis_holds && attacked.dscaled_holds &&
                             attacked.lhs <= attacked.rhs_dscaled;
    r.passed = scalar_ok && attacked_ok;
    r.detail = fmt::format("d=1: LHS {:.6g} <= stated RHS {:.6g} {}; d=50 adaptive 20%: max opposition {:.3g}, "
                           "LHS {:.6g} <= d-scaled RHS {:.6g} {}",
                           scalar.lhs, scalar.rhs_stated, scalar_ok ? "ok" : "FAIL", attacked.max_opposition,
                           attacked.lhs, attacked.rhs_dscaled, attacked_ok ? "ok" : "FAIL");
    r.data = {{"scalar", to_json(scalar)}, {"attacked", to_json(attacked)}};
    return r;
  });
}

CheckResult check_aggregator_oracles(std::uint64_t seed, std::size_t instances) {
  return timed([&] {
    CheckResult r = named("aggregator_oracles", "Krum, Median and Trimmed-mean match brute force");
    Rng rng = make_rng(seed, 108);
    // Multiples of 1/8 keep every sum exact, so brute force and the library
    // must agree bit for bit; the narrow range forces frequent ties.
    std::uniform_int_distribution<int> grid(-16, 16);
    std::size_t krum_checked = 0, krum_bad = 0, median_bad = 0, trimmed_bad = 0;
    for (std::size_t t = 0; t < instances; ++t) {
      const std::size_t n = uniform(rng, 1, 6);
      const std::size_t d = uniform(rng, 1, 3);
      std::vector<GradVec> g(n, GradVec(d));
      for (auto& row : g)
        for (auto& x : row) x = grid(rng) / 8.0;
      if (gar_median(g) != oracle::median(g)) ++median_bad;
      const std::size_t k = uniform(rng, 0, (n - 1) / 2);
      if (gar_trimmed_mean(g, k) != oracle::trimmed_mean(g, k)) ++trimmed_bad;
      if (n >= 3) {
        const std::size_t f = uniform(rng, 0, n - 3);
        ++krum_checked;
        if (gar_krum(g, f) != oracle::krum(g, f)) ++krum_bad;
      }
    }
    r.passed = krum_bad == 0 && median_bad == 0 && trimmed_bad == 0;
    r.detail = fmt::format("{} instances: median {} / trimmed mean {} mismatches, Krum {} mismatches in {} instances",
                           instances, median_bad, trimmed_bad, krum_bad, krum_checked);
    r.data = {{"instances", instances}, {"krum_checked", krum_checked}, {"krum_mismatches", krum_bad},
              {"median_mismatches", median_bad}, {"trimmed_mismatches", trimmed_bad}};
    return r;
  });
}

CheckResult check_gradients(std::uint64_t seed, std::size_t points) {
  return timed([&] {
    CheckResult r = named("gradient_check", "analytic gradients match central finite differences");
    Rng rng = make_rng(seed, 109);
    std::normal_distribution<double> gauss;
    constexpr double kTol = 1e-5;

    QuadraticParams qp;
    qp.d = 8;
    qp.n = 4;
    qp.curvature_min = 0.5;
    qp.curvature_max = 3.0;
    qp.radius = 2.0;
    qp.seed = seed;
    const QuadraticTask quad(qp);

    ClassificationParams cp;
    cp.classes = 4;
    cp.features = 6;
    cp.n = 4;
    cp.train_samples = 200;
    cp.test_samples = 40;
    cp.seed = seed;
    const ClassificationTask cls(cp);

    auto worst_on = [&](const Task& task, double scale) {
      double worst = 0.0;
      for (std::size_t p = 0; p < points; ++p) {
        GradVec w(task.dim());
        for (auto& x : w) x = scale * gauss(rng);
        const ClientId c = p % task.clients();
        const auto local = oracle::finite_difference([&](std::span<const double> v) { return task.local_loss(c, v); }, w);
        worst = std::max(worst, oracle::relative_error(task.local_gradient(c, w), local));
        const auto global = oracle::finite_difference([&](std::span<const double> v) { return task.loss(v); }, w);
        worst = std::max(worst, oracle::relative_error(task.full_gradient(w), global));
      }
      return worst;
    };
    const double quad_err = worst_on(quad, 2.0);
    const double cls_err = worst_on(cls, 0.5);
    r.passed = quad_err <= kTol && cls_err <= kTol;
    r.detail = fmt::format("{} points per task; worst relative error quadratic {:.3g}, classification {:.3g} "
                           "(tolerance {:g})",
                           points, quad_err, cls_err, kTol);
    r.data = {{"points", points}, {"quadratic_max_rel_error", quad_err}, {"classification_max_rel_error", cls_err}};
    return r;
  });
}

CheckResult check_architecture_equivalence(std::uint64_t seed) {
  return timed([&] {
    CheckResult r = named("architecture_equivalence", "SC and ring pipelines produce identical iterates");
    ExperimentConfig base;
    base.hp.n = 6;
    base.hp.eta = 0.05;
    base.hp.rounds = 40;
    base.hp.lambda = 1;
    base.task.kind = TaskKind::Quadratic;
    base.task.quadratic.d = 13;
    base.task.quadratic.radius = 3.0;
    base.task.quadratic.curvature_max = 4.0;
    base.task.quadratic.noise_std = 0.3;
    base.task.quadratic.init = 1.0;
    base.batch_size = 0;

    auto run = [&](Architecture arch, GarKind kind, FoldOrder fold, std::size_t batch) {
      ExperimentConfig c = base;
      c.batch_size = batch;
      c.defense.arch = arch;
      c.defense.gar.kind = kind;
      c.defense.gar.fold = fold;
      return run_experiment(c, seed);
    };
    auto same_path = [](const RunResult& a, const RunResult& b) {
      if (a.final_model != b.final_model || a.records.size() != b.records.size()) return false;
      for (std::size_t t = 0; t < a.records.size(); ++t)
        if (a.records[t].checksum != b.records[t].checksum) return false;
      return true;
    };
    const bool mean_ok = same_path(run(Architecture::SC, GarKind::Mean, FoldOrder::Ring, 0),
                                   run(Architecture::RAR, GarKind::Mean, FoldOrder::Index, 0));
    const bool brace_ok = same_path(run(Architecture::SC, GarKind::BraceOracle, FoldOrder::Index, 4),
                                    run(Architecture::BRACE, GarKind::Mean, FoldOrder::Index, 4));
    r.passed = mean_ok && brace_ok;
    r.detail = fmt::format("SC mean (ring fold) vs RAR: {}; SC consensus oracle vs BRACE ring: {}",
                           mean_ok ? "identical" : "DIFFERENT", brace_ok ? "identical" : "DIFFERENT");
    r.data = {{"mean_identical", mean_ok}, {"brace_identical", brace_ok}};
    return r;
  });
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

nlohmann::json VerifyReport::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : checks) {
    list.push_back({{"id", c.id}, {"title", c.title}, {"passed", c.passed}, {"detail", c.detail}, {"data", c.data}});
  }
  return {{"seed", seed}, {"passed", passed()}, {"checks", list}};
}

VerifyReport run_verify(std::uint64_t seed) {
  VerifyReport rep;
  rep.seed = seed;
  rep.checks.push_back(check_rar_equivalence(seed));
  rep.checks.push_back(check_brace_equivalence(seed));
  rep.checks.push_back(check_bit_accounting());
  rep.checks.push_back(check_flip_resistance());
  rep.checks.push_back(check_convergence_monitor());
  rep.checks.push_back(check_aggregator_oracles(seed));
  rep.checks.push_back(check_gradients(seed));
  rep.checks.push_back(check_architecture_equivalence(seed));
  return rep;
}

std::string write_report(const VerifyReport& report, const std::string& directory) {
  std::filesystem::create_directories(directory);
  const auto path = (std::filesystem::path(directory) / "verify_report.json").string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
  out << report.to_json().dump(2) << '\n';
  return path;
}

}  // namespace brace::verify
