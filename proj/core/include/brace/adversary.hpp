#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "brace/core.hpp"

namespace brace {

enum class AttackKind : std::uint8_t { None, Gaussian, LabelFlip, KrumAttack, TrimAttack, MinMax, MinSum, AdaptiveBrace };

std::string_view to_string(AttackKind kind);
AttackKind parse_attack_kind(std::string_view name);

// Full: the adversary sees every benign gradient. BenignOnly: it only sees
// the honest gradients its own clients would have sent.
enum class Knowledge : std::uint8_t { Full, BenignOnly };

struct AttackSpec {
  AttackKind kind = AttackKind::None;
  std::vector<ClientId> malicious;  // sorted, unique
  double sigma = 200.0;             // Gaussian
  double trim_b = 2.0;              // Trim attack
  std::size_t search_iters = 50;    // Krum / MinMax / MinSum
  double search_tol = 1e-5;         // relative bisection tolerance
  Knowledge knowledge = Knowledge::Full;

  void validate(std::size_t n) const;
};

struct AttackContext {
  // Gradients the adversary reasons about: the benign set under full
  // knowledge, the malicious clients' own honest gradients otherwise.
  std::span<const GradVec> observed;
  std::span<const double> model;
  std::uint64_t seed = 0;
};

struct AttackReport {
  double scale = 0.0;         // lambda_a (Krum) or gamma (MinMax/MinSum)
  std::size_t evaluations = 0;
  bool degenerate = false;    // no feasible perturbation; benign mean submitted
  bool monotone = true;       // feasibility never increased with the scale on the search path
};

struct AttackResult {
  std::vector<GradVec> malicious;  // one per malicious client, in id order
  AttackReport report;
};

AttackResult attack_gaussian(const AttackContext& ctx, const AttackSpec& spec);
AttackResult attack_trim(const AttackContext& ctx, const AttackSpec& spec);
AttackResult attack_krum(const AttackContext& ctx, const AttackSpec& spec);
AttackResult attack_minmax(const AttackContext& ctx, const AttackSpec& spec);
AttackResult attack_minsum(const AttackContext& ctx, const AttackSpec& spec);
AttackResult attack_adaptive_brace(const AttackContext& ctx, const AttackSpec& spec, int lambda);

// Label l becomes C - 1 - l.
std::vector<int> attack_label_flip(std::span<const int> labels, int classes);

// MinMax / MinSum feasibility of a candidate against the observed set.
bool minmax_feasible(std::span<const GradVec> observed, std::span<const double> candidate);
bool minsum_feasible(std::span<const GradVec> observed, std::span<const double> candidate);

struct Submission {
  std::vector<GradVec> gradients;  // all n clients, benign entries untouched
  AttackReport report;
};

// Replaces the malicious entries of `honest` according to `spec`. LabelFlip
// acts on data, so it leaves gradients unchanged here.
Submission craft_submissions(const AttackSpec& spec, std::span<const GradVec> honest, std::span<const double> model,
                             int lambda, std::uint64_t seed);

// f ids spread evenly over [0, n): floor(j * n / f).
std::vector<ClientId> spread_malicious(std::size_t n, std::size_t f);

}  // namespace brace
