#include "brace/ring.hpp"

#include <algorithm>
#include <bit>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace brace {

std::string_view to_string(Phase phase) {
  return phase == Phase::ShareReduce ? "share_reduce" : "share_only";
}

std::string_view to_string(Architecture arch) {
  switch (arch) {
    case Architecture::SC: return "SC";
    case Architecture::RAR: return "RAR";
    case Architecture::BRACE: return "BRACE";
  }
  return "?";
}

void CommLedger::record(ClientId from, Phase phase, std::uint64_t bits) {
  per_client_.at(from) += bits;
  per_phase_[static_cast<std::size_t>(phase)] += bits;
  total_ += bits;
}

std::uint64_t CommLedger::max_client_bits() const noexcept {
  return per_client_.empty() ? 0 : *std::max_element(per_client_.begin(), per_client_.end());
}

std::uint64_t CommLedger::min_client_bits() const noexcept {
  return per_client_.empty() ? 0 : *std::min_element(per_client_.begin(), per_client_.end());
}

bool CommLedger::consistent() const noexcept {
  std::uint64_t by_client = 0;
  for (auto b : per_client_) by_client += b;
  return by_client == total_ && per_phase_[0] + per_phase_[1] == total_;
}

std::size_t schedule_chunk(std::size_t n, ClientId client, std::size_t step, Phase phase) {
  if (n < 2 || step < 1 || step > n - 1) {
    throw ConfigError(fmt::format("schedule_chunk: step {} outside [1, {}]", step, n < 1 ? 0 : n - 1));
  }
  if (client >= n) throw ConfigError("schedule_chunk: client id out of range");
  const std::size_t offset = phase == Phase::ShareReduce ? 1 : 2;
  return (client + n * 2 + offset - step) % n;
}

namespace {

// One lock-step pass of n-1 steps. With `reduce`, the receiver stores
// incoming + own; otherwise it overwrites its copy of the chunk.
template <class T>
void ring_pass(std::vector<std::vector<T>>& buffers, const ChunkPlan& plan, Phase phase,
               unsigned width, CommLedger& ledger, const MessageSink& sink) {
  const std::size_t n = plan.clients();
  std::vector<std::vector<T>> inflight(n);
  std::vector<std::size_t> chunk_of(n);
  for (std::size_t step = 1; step < n; ++step) {
    for (ClientId i = 0; i < n; ++i) {
      const std::size_t c = schedule_chunk(n, i, step, phase);
      chunk_of[i] = c;
      inflight[i].assign(buffers[i].begin() + static_cast<std::ptrdiff_t>(plan.begin(c)),
                         buffers[i].begin() + static_cast<std::ptrdiff_t>(plan.end(c)));
      const std::uint64_t bits = static_cast<std::uint64_t>(plan.size(c)) * width;
      ledger.record(i, phase, bits);
      if (sink) {
        Message msg{i, (i + 1) % n, phase, step, c, {}, bits};
        msg.payload.assign(inflight[i].begin(), inflight[i].end());
        sink(msg);
      }
    }
    for (ClientId i = 0; i < n; ++i) {
      auto& dst = buffers[(i + 1) % n];
      const std::size_t lo = plan.begin(chunk_of[i]);
      for (std::size_t k = 0; k < inflight[i].size(); ++k) {
        if (phase == Phase::ShareReduce) {
          dst[lo + k] = static_cast<T>(inflight[i][k] + dst[lo + k]);
        } else {
          dst[lo + k] = inflight[i][k];
        }
      }
    }
  }
}

void check_plan(std::span<const GradVec> gradients, const ChunkPlan& plan) {
  const std::size_t d = common_dimension(gradients);
  if (plan.clients() != gradients.size()) {
    throw DimensionError(fmt::format("plan is for {} clients, got {} gradients", plan.clients(), gradients.size()));
  }
  if (plan.dim() != d) {
    throw DimensionError(fmt::format("plan covers dimension {}, gradients have {}", plan.dim(), d));
  }
  for (const auto& g : gradients) require_finite(g);
}

}  // namespace

RarOutcome run_rar_round(std::span<const GradVec> gradients, const ChunkPlan& plan, unsigned m,
                         const MessageSink& sink) {
  check_plan(gradients, plan);
  if (m < 1) throw ConfigError("m: bits per entry must be >= 1");
  const std::size_t n = plan.clients();

  RarOutcome out;
  out.ledger = CommLedger(n);
  out.client_buffers.assign(gradients.begin(), gradients.end());

  ring_pass(out.client_buffers, plan, Phase::ShareReduce, m, out.ledger, sink);
  out.reduced.resize(n);
  for (ClientId i = 0; i < n; ++i) {
    const std::size_t c = owned_chunk(n, i);
    const auto& buf = out.client_buffers[i];
    out.reduced[i].assign(buf.begin() + static_cast<std::ptrdiff_t>(plan.begin(c)),
                          buf.begin() + static_cast<std::ptrdiff_t>(plan.end(c)));
  }
  ring_pass(out.client_buffers, plan, Phase::ShareOnly, m, out.ledger, sink);

  out.aggregate = out.client_buffers.front();
  return out;
}

unsigned min_sum_width(std::size_t n) {
  // ceil(log2(2n + 1))
  const std::uint64_t levels = 2 * static_cast<std::uint64_t>(n) + 1;
  return static_cast<unsigned>(std::bit_width(levels - 1));
}

BraceOutcome run_brace_round(std::span<const GradVec> gradients, const ChunkPlan& plan, int lambda,
                             unsigned m, const MessageSink& sink, WidthCheck width_check) {
  check_plan(gradients, plan);
  const std::size_t n = plan.clients();
  const std::size_t d = plan.dim();
  const auto ni = static_cast<long long>(n);
  if (lambda < -ni || lambda > ni) throw ConfigError(fmt::format("lambda {} outside [-{}, {}]", lambda, n, n));
  if (m < 1) throw ConfigError("m: bits per entry must be >= 1");
  if (width_check == WidthCheck::Enforce && m < min_sum_width(n)) {
    throw ConfigError(fmt::format("m = {} bits cannot carry sign sums in [-{}, {}]; need at least {}", m, n, n,
                                  min_sum_width(n)));
  }

  BraceOutcome out;
  out.ledger = CommLedger(n);

  // Phase I: local quantization.
  std::vector<SumVec> sums(n);
  for (ClientId i = 0; i < n; ++i) {
    const SignVec s = sign_quantize(gradients[i]);
    sums[i].assign(s.begin(), s.end());
  }

  // Phase II: Share-Reduce of sign sums.
  ring_pass(sums, plan, Phase::ShareReduce, m, out.ledger, sink);

  // Phase III: each client maps only the chunk it fully owns.
  std::vector<SignVec> signs(n, SignVec(d, 0));
  out.reduced.resize(n);
  for (ClientId i = 0; i < n; ++i) {
    const std::size_t c = owned_chunk(n, i);
    const auto lo = static_cast<std::ptrdiff_t>(plan.begin(c));
    const auto hi = static_cast<std::ptrdiff_t>(plan.end(c));
    out.reduced[i].assign(sums[i].begin() + lo, sums[i].begin() + hi);
    const SignVec mapped = consensus_map(out.reduced[i], lambda);
    std::copy(mapped.begin(), mapped.end(), signs[i].begin() + lo);
  }

  // Phase IV: 1-bit Share-Only.
  ring_pass(signs, plan, Phase::ShareOnly, 1, out.ledger, sink);

  for (const auto& s : signs) {
    if (std::find(s.begin(), s.end(), std::int8_t{0}) != s.end()) {
      throw std::logic_error("run_brace_round: Share-Only left an entry undelivered");
    }
  }
  out.client_outputs = std::move(signs);
  out.aggregate = out.client_outputs.front();
  return out;
}

CommLedger sc_upload_ledger(std::size_t n, std::size_t d, unsigned m) {
  CommLedger ledger(n);
  for (ClientId i = 0; i < n; ++i) ledger.record(i, Phase::ShareReduce, static_cast<std::uint64_t>(d) * m);
  return ledger;
}

double predicted_cost(Architecture arch, std::size_t n, std::size_t d, unsigned m) {
  const auto nn = static_cast<std::uint64_t>(n);
  const auto dd = static_cast<std::uint64_t>(d);
  const auto mm = static_cast<std::uint64_t>(m);
  switch (arch) {
    case Architecture::SC: return static_cast<double>(mm * nn * dd);
    case Architecture::RAR: return static_cast<double>(2 * mm * dd * (nn - 1)) / static_cast<double>(nn);
    case Architecture::BRACE: return static_cast<double>(dd * (nn - 1) * (mm + 1)) / static_cast<double>(nn);
  }
  return 0.0;
}

std::uint64_t chunk_exact_bits(Architecture arch, const ChunkPlan& plan, ClientId client, unsigned m) {
  const std::size_t n = plan.clients();
  if (arch == Architecture::SC) return static_cast<std::uint64_t>(plan.dim()) * m;
  std::uint64_t bits = 0;
  const unsigned second_width = arch == Architecture::BRACE ? 1u : m;
  for (std::size_t step = 1; step < n; ++step) {
    bits += static_cast<std::uint64_t>(plan.size(schedule_chunk(n, client, step, Phase::ShareReduce))) * m;
    bits += static_cast<std::uint64_t>(plan.size(schedule_chunk(n, client, step, Phase::ShareOnly))) * second_width;
  }
  return bits;
}

CostCheck ledger_matches_prediction(const CommLedger& ledger, Architecture arch, std::size_t n,
                                    std::size_t d, unsigned m) {
  CostCheck check;
  check.predicted = predicted_cost(arch, n, d, m);
  check.uniform_chunks = d % n == 0;
  std::ostringstream report;
  report << to_string(arch) << " n=" << n << " d=" << d << " m=" << m << ": ";

  if (ledger.per_client_bits().size() != n || !ledger.consistent()) {
    report << "ledger inconsistent or sized for the wrong ring";
    check.report = report.str();
    return check;
  }

  bool per_client_ok = true;
  if (arch == Architecture::SC) {
    check.measured = ledger.total_bits();
    check.chunk_exact = static_cast<std::uint64_t>(n) * d * m;
    per_client_ok = check.measured == check.chunk_exact;
  } else {
    const ChunkPlan plan(d, n);
    check.measured = ledger.max_client_bits();
    for (ClientId i = 0; i < n; ++i) {
      const std::uint64_t expected = chunk_exact_bits(arch, plan, i, m);
      check.chunk_exact = std::max(check.chunk_exact, expected);
      if (ledger.per_client_bits()[i] != expected) per_client_ok = false;
    }
  }
  check.gap = static_cast<double>(check.measured) - check.predicted;

  if (check.uniform_chunks) {
    check.matches = per_client_ok && static_cast<double>(check.measured) == check.predicted;
    report << fmt::format("measured {} bits, predicted {}; {}", check.measured, check.predicted,
                          check.matches ? "exact match" : "MISMATCH");
  } else {
    check.matches = per_client_ok;
    const double mean = static_cast<double>(ledger.total_bits()) / static_cast<double>(n);
    report << fmt::format(
        "unequal chunks (d mod n = {}): bottleneck client sends {} bits (chunk-exact {}, {}), idealized {}, gap {:+}; "
        "per-client range [{}, {}], ring mean {}",
        d % n, check.measured, check.chunk_exact, per_client_ok ? "exact match" : "MISMATCH", check.predicted,
        check.gap, ledger.min_client_bits(), ledger.max_client_bits(), mean);
  }
  check.report = report.str();
  return check;
}

void write_trace_line(std::ostream& os, const Message& msg) {
  os << msg.from << ',' << msg.to << ',' << to_string(msg.phase) << ',' << msg.step << ',' << msg.chunk_id << ','
     << msg.bits << '\n';
}

}  // namespace brace
