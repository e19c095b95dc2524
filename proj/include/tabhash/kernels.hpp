#pragma once

// Batch kernels. Each has a serial reference and an OpenMP version; the two
// must agree exactly (tests compare them, bench/ times them).

#include <cstdint>
#include <exception>
#include <span>
#include <vector>

#include "tabhash/hashers.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tabhash::kernels {

template <Hasher H>
void hash_batch_serial(const H& h, std::span<const Key> keys, std::span<std::uint64_t> out) {
  if (out.size() < keys.size()) throw DomainError("output span shorter than key span");
  for (std::size_t i = 0; i < keys.size(); ++i) out[i] = h(keys[i]);
}

template <Hasher H>
void hash_batch_parallel(const H& h, std::span<const Key> keys, std::span<std::uint64_t> out) {
  if (out.size() < keys.size()) throw DomainError("output span shorter than key span");
  const auto n = static_cast<std::int64_t>(keys.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = h(keys[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(tabhash_kernel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

// counts[b] = #{x : h(x) mod 2^bins_log2 == b}
template <Hasher H>
std::vector<std::uint32_t> bin_counts_serial(const H& h, std::span<const Key> keys,
                                             unsigned bins_log2) {
  std::vector<std::uint32_t> counts(std::size_t{1} << bins_log2, 0);
  const std::uint64_t mask = low_mask(bins_log2);
  for (auto x : keys) ++counts[h(x) & mask];
  return counts;
}

template <Hasher H>
std::vector<std::uint32_t> bin_counts_parallel(const H& h, std::span<const Key> keys,
                                               unsigned bins_log2) {
  const std::size_t bins = std::size_t{1} << bins_log2;
  const std::uint64_t mask = low_mask(bins_log2);
  std::vector<std::uint32_t> counts(bins, 0);
  const auto n = static_cast<std::int64_t>(keys.size());
  std::exception_ptr error;
#pragma omp parallel
  {
    std::vector<std::uint32_t> local(bins, 0);
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        ++local[h(keys[static_cast<std::size_t>(i)]) & mask];
      } catch (...) {
#pragma omp critical(tabhash_kernel_error)
        if (!error) error = std::current_exception();
      }
    }
#pragma omp critical(tabhash_bin_reduce)
    for (std::size_t b = 0; b < bins; ++b) counts[b] += local[b];
  }
  if (error) std::rethrow_exception(error);
  return counts;
}

inline int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace tabhash::kernels
