#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace brace {

// Dense real gradient / model vector.
using GradVec = std::vector<double>;
// Entries in {-1, +1}.
using SignVec = std::vector<std::int8_t>;
// Partial or full sign sums, entries in [-n, n].
using SumVec = std::vector<std::int32_t>;

using ClientId = std::size_t;

#ifdef BRACE_SIGN_OF_ZERO_NEGATIVE
inline constexpr std::int8_t kSignOfZero = -1;
#else
inline constexpr std::int8_t kSignOfZero = 1;
#endif

// Raised for invalid configurations and violated preconditions.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Partition of [0, d) into n contiguous chunks. The first (d mod n) chunks
// hold ceil(d/n) entries, the rest floor(d/n). Chunk i starts at client i.
class ChunkPlan {
 public:
  ChunkPlan(std::size_t d, std::size_t n);

  std::size_t dim() const noexcept { return boundaries_.back(); }
  std::size_t clients() const noexcept { return boundaries_.size() - 1; }

  std::size_t begin(std::size_t chunk) const { return boundaries_.at(chunk); }
  std::size_t end(std::size_t chunk) const { return boundaries_.at(chunk + 1); }
  std::size_t size(std::size_t chunk) const { return end(chunk) - begin(chunk); }

  std::span<const std::size_t> boundaries() const noexcept { return boundaries_; }

  friend bool operator==(const ChunkPlan&, const ChunkPlan&) = default;

 private:
  std::vector<std::size_t> boundaries_;
};

ChunkPlan chunk_plan(std::size_t d, std::size_t n);

struct HyperParams {
  std::size_t n = 1;        // clients
  std::size_t f = 0;        // assumed Byzantine count
  std::size_t d = 1;        // model dimension
  unsigned m = 32;          // bits per raw gradient entry
  int lambda = 0;           // consensus threshold
  double eta = 0.01;        // learning rate
  std::size_t rounds = 1;   // T
  double q = 0.5;           // non-IID degree

  // Throws ConfigError naming the first offending field.
  void validate() const;
};

inline std::int8_t sign_of(double x) noexcept {
  if (x > 0.0) return 1;
  if (x < 0.0) return -1;
  return kSignOfZero;
}

// Throws DimensionError if any entry is NaN or infinite.
void require_finite(std::span<const double> g, const char* what = "gradient");

SignVec sign_quantize(std::span<const double> g);

// Entrywise sum of sign_quantize(g_i) over all clients.
SumVec sum_signs(std::span<const GradVec> gradients);

// out[k] = +1 iff s[k] > lambda, else -1.
SignVec consensus_map(std::span<const std::int32_t> s, int lambda);

GradVec to_grad(std::span<const std::int8_t> s);

// Every gradient must have the same, nonzero dimension. Returns it.
std::size_t common_dimension(std::span<const GradVec> gradients);

// Centralized replay of the ring Share-Reduce fold: for chunk c the sum is
// (((g_c + g_{c+1}) + g_{c+2}) + ...) with client indices taken mod n.
GradVec ring_fold_sum(std::span<const GradVec> gradients, const ChunkPlan& plan);

}  // namespace brace
