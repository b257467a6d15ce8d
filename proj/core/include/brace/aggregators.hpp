#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "brace/core.hpp"

namespace brace {

enum class GarKind : std::uint8_t { Mean, Krum, Median, TrimmedMean, SignSGD, RLR, BraceOracle };

std::string_view to_string(GarKind kind);
GarKind parse_gar_kind(std::string_view name);

// Mean summation order: client-index order, or the ring's Share-Reduce fold
// (bitwise identical to what a RAR round produces).
enum class FoldOrder : std::uint8_t { Index, Ring };

struct GarSpec {
  GarKind kind = GarKind::Mean;
  std::size_t krum_f = 0;
  std::size_t trim_k = 0;
  int rlr_theta = 5;
  int lambda = 5;
  FoldOrder fold = FoldOrder::Index;

  void validate(std::size_t n) const;
};

// How the model consumes an aggregate:
//   Value: w - eta * values      Sign: w - eta * values (entries +-1)
//   Step:  w - values            (RLR: the learning rate is already applied)
enum class UpdateKind : std::uint8_t { Value, Sign, Step };

struct Aggregate {
  UpdateKind kind = UpdateKind::Value;
  GradVec values;
};

GradVec gar_mean(std::span<const GradVec> gradients);
GradVec gar_mean(std::span<const GradVec> gradients, const ChunkPlan& fold_plan);

// Index of the Krum winner; ties go to the lowest index.
std::size_t krum_select(std::span<const GradVec> gradients, std::size_t f);
std::vector<double> krum_scores(std::span<const GradVec> gradients, std::size_t f);
GradVec gar_krum(std::span<const GradVec> gradients, std::size_t f);

GradVec gar_median(std::span<const GradVec> gradients);
GradVec gar_trimmed_mean(std::span<const GradVec> gradients, std::size_t k);
SignVec gar_signsgd(std::span<const GradVec> gradients);

// Step vector eta_k * mean[k] with eta_k = +eta if |sum sign| >= theta else -eta.
GradVec gar_rlr(std::span<const GradVec> gradients, int theta, double eta);

SignVec gar_brace_oracle(std::span<const GradVec> gradients, int lambda);

Aggregate aggregate(const GarSpec& spec, std::span<const GradVec> gradients, double eta);

}  // namespace brace
