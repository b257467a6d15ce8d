#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "brace/core.hpp"

namespace brace {

enum class Phase : std::uint8_t { ShareReduce = 0, ShareOnly = 1 };

std::string_view to_string(Phase phase);

// Server-client, classic ring-all-reduce, and the sign-consensus ring.
enum class Architecture : std::uint8_t { SC, RAR, BRACE };

std::string_view to_string(Architecture arch);

struct Message {
  ClientId from = 0;
  ClientId to = 0;
  Phase phase = Phase::ShareReduce;
  std::size_t step = 0;
  std::size_t chunk_id = 0;
  std::vector<double> payload;  // filled only when a sink is attached
  std::uint64_t bits = 0;
};

class CommLedger {
 public:
  CommLedger() = default;
  explicit CommLedger(std::size_t n) : per_client_(n, 0) {}

  void record(ClientId from, Phase phase, std::uint64_t bits);

  std::span<const std::uint64_t> per_client_bits() const noexcept { return per_client_; }
  std::uint64_t phase_bits(Phase phase) const noexcept { return per_phase_[static_cast<std::size_t>(phase)]; }
  std::uint64_t total_bits() const noexcept { return total_; }
  std::uint64_t max_client_bits() const noexcept;
  std::uint64_t min_client_bits() const noexcept;

  // total == sum(per client) == sum(per phase).
  bool consistent() const noexcept;

 private:
  std::vector<std::uint64_t> per_client_;
  std::array<std::uint64_t, 2> per_phase_{0, 0};
  std::uint64_t total_ = 0;
};

using MessageSink = std::function<void(const Message&)>;

// Chunk sent by `client` at `step` (1-based) of `phase` on an n-client ring.
//   ShareReduce: (client - step + 1) mod n
//   ShareOnly:   (client - step + 2) mod n
// After Share-Reduce, client i owns the fully reduced chunk (i + 1) mod n.
std::size_t schedule_chunk(std::size_t n, ClientId client, std::size_t step, Phase phase);

inline std::size_t owned_chunk(std::size_t n, ClientId client) { return (client + 1) % n; }

struct RarOutcome {
  GradVec aggregate;
  std::vector<GradVec> client_buffers;
  // reduced[i]: client i's owned chunk right after Share-Reduce.
  std::vector<GradVec> reduced;
  CommLedger ledger;
};

RarOutcome run_rar_round(std::span<const GradVec> gradients, const ChunkPlan& plan, unsigned m,
                         const MessageSink& sink = {});

enum class WidthCheck : std::uint8_t { Enforce, AccountingOnly };

// Smallest per-entry width that holds any partial sign sum in [-n, n].
unsigned min_sum_width(std::size_t n);

struct BraceOutcome {
  SignVec aggregate;
  std::vector<SignVec> client_outputs;
  std::vector<SumVec> reduced;
  CommLedger ledger;
};

// Sign quantization, Share-Reduce of sign sums at m bits/entry, local
// consensus on each owned chunk, then 1-bit Share-Only.
BraceOutcome run_brace_round(std::span<const GradVec> gradients, const ChunkPlan& plan, int lambda,
                             unsigned m, const MessageSink& sink = {},
                             WidthCheck width_check = WidthCheck::Enforce);

// Every client uploads its full gradient to the server at m bits/entry.
CommLedger sc_upload_ledger(std::size_t n, std::size_t d, unsigned m);

// Per-round bottleneck cost: server ingress for SC, per-client egress for the
// ring architectures.
double predicted_cost(Architecture arch, std::size_t n, std::size_t d, unsigned m);

// Exact bits client `client` places on the ring in one round, from the plan.
std::uint64_t chunk_exact_bits(Architecture arch, const ChunkPlan& plan, ClientId client, unsigned m);

struct CostCheck {
  bool matches = false;
  bool uniform_chunks = false;
  std::uint64_t measured = 0;      // bottleneck bits actually recorded
  std::uint64_t chunk_exact = 0;   // bottleneck bits derived from the plan
  double predicted = 0.0;          // idealized closed form
  double gap = 0.0;                // measured - predicted
  std::string report;
};

CostCheck ledger_matches_prediction(const CommLedger& ledger, Architecture arch, std::size_t n,
                                    std::size_t d, unsigned m);

// One record per line: from,to,phase,step,chunk_id,bits
void write_trace_line(std::ostream& os, const Message& msg);

}  // namespace brace
