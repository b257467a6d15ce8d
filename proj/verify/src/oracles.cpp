#include "brace/verify/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace brace::oracle {

namespace {

std::size_t dim_of(std::span<const GradVec> g) {
  if (g.empty()) throw std::invalid_argument("oracle: no gradients");
  return g.front().size();
}

}  // namespace

GradVec centralized_sum(std::span<const GradVec> gradients) {
  GradVec s(dim_of(gradients), 0.0);
  for (const auto& g : gradients)
    for (std::size_t k = 0; k < s.size(); ++k) s[k] += g[k];
  return s;
}

SignVec consensus(std::span<const GradVec> gradients, int lambda) {
  SignVec out(dim_of(gradients));
  for (std::size_t k = 0; k < out.size(); ++k) {
    int plus = 0;
    int minus = 0;
    for (const auto& g : gradients) {
      const bool positive = g[k] > 0.0 || (g[k] == 0.0 && kSignOfZero > 0);
      (positive ? plus : minus) += 1;
    }
    out[k] = plus - minus > lambda ? 1 : -1;
  }
  return out;
}

GradVec krum(std::span<const GradVec> gradients, std::size_t f) {
  const std::size_t n = gradients.size();
  const std::size_t d = dim_of(gradients);
  const std::size_t want = n - f - 2;
  double best = std::numeric_limits<double>::infinity();
  std::size_t winner = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others.push_back(j);
    // Walk every subset of `others` with exactly `want` members.
    double score = std::numeric_limits<double>::infinity();
    const std::size_t m = others.size();
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) != want) continue;
      double s = 0.0;
      for (std::size_t b = 0; b < m; ++b) {
        if (!(mask & (1u << b))) continue;
        for (std::size_t k = 0; k < d; ++k) {
          const double diff = gradients[i][k] - gradients[others[b]][k];
          s += diff * diff;
        }
      }
      score = std::min(score, s);
    }
    if (score < best) {
      best = score;
      winner = i;
    }
  }
  return gradients[winner];
}

GradVec median(std::span<const GradVec> gradients) {
  const std::size_t n = gradients.size();
  GradVec out(dim_of(gradients));
  for (std::size_t k = 0; k < out.size(); ++k) {
    // The r-th order statistic is the smallest value with at least r+1
    // entries less than or equal to it.
    auto order_stat = [&](std::size_t r) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& a : gradients) {
        std::size_t le = 0;
        for (const auto& b : gradients) le += b[k] <= a[k] ? 1 : 0;
        if (le >= r + 1) best = std::min(best, a[k]);
      }
      return best;
    };
    out[k] = n % 2 == 1 ? order_stat(n / 2) : (order_stat(n / 2 - 1) + order_stat(n / 2)) / 2.0;
  }
  return out;
}

GradVec trimmed_mean(std::span<const GradVec> gradients, std::size_t k) {
  const std::size_t n = gradients.size();
  GradVec out(dim_of(gradients));
  for (std::size_t j = 0; j < out.size(); ++j) {
    std::vector<double> col;
    for (const auto& g : gradients) col.push_back(g[j]);
    for (std::size_t r = 0; r < k; ++r) {
      col.erase(std::max_element(col.begin(), col.end()));
      col.erase(std::min_element(col.begin(), col.end()));
    }
    double s = 0.0;
    for (double v : col) s += v;
    out[j] = s / static_cast<double>(n - 2 * k);
  }
  return out;
}

std::uint64_t ring_client_bits(Architecture arch, std::size_t d, std::size_t n, ClientId client, unsigned m) {
  if (arch == Architecture::SC) return static_cast<std::uint64_t>(d) * m;
  auto chunk_len = [&](std::size_t c) { return d / n + (c < d % n ? 1 : 0); };
  const unsigned second = arch == Architecture::RAR ? m : 1;
  std::uint64_t bits = 0;
  for (std::size_t s = 1; s < n; ++s) {
    bits += chunk_len((client + n - s + 1) % n) * m;
    bits += chunk_len((client + 2 * n - s + 2) % n) * second;
  }
  return bits;
}

std::uint64_t sc_bits(std::size_t n, std::size_t d, unsigned m) { return static_cast<std::uint64_t>(m) * n * d; }

std::uint64_t rar_bits_numerator(std::size_t n, std::size_t d, unsigned m) {
  return 2ull * m * d * (n - 1);
}

std::uint64_t brace_bits_numerator(std::size_t n, std::size_t d, unsigned m) {
  return static_cast<std::uint64_t>(d) * (n - 1) * (m + 1ull);
}

GradVec finite_difference(const std::function<double(std::span<const double>)>& f, std::span<const double> w,
                          double h) {
  GradVec x(w.begin(), w.end());
  GradVec g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double orig = x[k];
    x[k] = orig + h;
    const double up = f(x);
    x[k] = orig - h;
    const double down = f(x);
    x[k] = orig;
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_error(std::span<const double> a, std::span<const double> b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += (a[k] - b[k]) * (a[k] - b[k]);
    den += b[k] * b[k];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

}  // namespace brace::oracle
