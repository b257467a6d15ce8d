#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "brace/core.hpp"
#include "brace/ring.hpp"

// Deliberately naive reference implementations used to cross-check the
// library. None of them shares code with brace_core beyond the vector types.
namespace brace::oracle {

// Sum of all gradients in client-index order.
GradVec centralized_sum(std::span<const GradVec> gradients);

// +1 where the count of nonnegative (or positive, per the sign-of-zero
// convention) entries minus the rest strictly exceeds lambda.
SignVec consensus(std::span<const GradVec> gradients, int lambda);

// Krum by enumerating every neighbour subset of size n - f - 2.
GradVec krum(std::span<const GradVec> gradients, std::size_t f);

// Coordinate-wise median by rank counting.
GradVec median(std::span<const GradVec> gradients);

// Coordinate-wise trimmed mean by k rounds of removing one max and one min.
GradVec trimmed_mean(std::span<const GradVec> gradients, std::size_t k);

// Bits a client places on the ring in one round, walking the schedule.
std::uint64_t ring_client_bits(Architecture arch, std::size_t d, std::size_t n, ClientId client, unsigned m);

// Idealized Table-style costs in integer arithmetic; exact when n divides
// the numerator.
std::uint64_t sc_bits(std::size_t n, std::size_t d, unsigned m);
std::uint64_t rar_bits_numerator(std::size_t n, std::size_t d, unsigned m);   // divide by n
std::uint64_t brace_bits_numerator(std::size_t n, std::size_t d, unsigned m); // divide by n

// Central finite differences of `f` at `w` with step h.
GradVec finite_difference(const std::function<double(std::span<const double>)>& f, std::span<const double> w,
                          double h = 1e-5);

double relative_error(std::span<const double> a, std::span<const double> b);

}  // namespace brace::oracle
