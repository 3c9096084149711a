#pragma once

// Conditional permutation test of no spatial correlation, identical for
// every statistic: observed values are shuffled over locations and the
// observed statistic is compared with the permutation distribution,
// two-sided around the permutation mean.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "robspat/error.hpp"
#include "robspat/lattice.hpp"
#include "robspat/measures.hpp"
#include "robspat/parallel.hpp"
#include "robspat/rng.hpp"

namespace robspat {

struct PermutationOptions {
  std::size_t n_perm = 999;
  double alpha = 0.05;
  /// Reshuffles allowed when a permuted replicate hits ZeroScale.
  std::size_t max_retries = 10;
  std::size_t threads = 1;
};

struct TestResult {
  MeasureKind kind = MeasureKind::MC;
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_permutations = 0;
  double alpha = 0.05;
  bool reject = false;
  double null_mean = 0.0;
  /// Replicates that still raised ZeroScale after all retries; they count
  /// as non-extreme.
  std::size_t failed_permutations = 0;
  std::size_t retried_permutations = 0;
};

namespace detail {

/// Permutations are drawn in fixed-size blocks, each from its own substream,
/// so the outcome does not depend on how blocks are spread over threads.
inline constexpr std::size_t kPermBlock = 64;

}  // namespace detail

inline TestResult permutation_test(MeasureKind kind, const WeightMatrix& w, const Field& z,
                                   const PermutationOptions& opts, const RngStream& stream) {
  if (opts.n_perm < 19) throw UsageError("permutation test needs at least 19 permutations");
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw UsageError("alpha must lie in (0,1)");
  check_dims(w, z.size());

  TestResult res;
  res.kind = kind;
  res.alpha = opts.alpha;
  res.n_permutations = opts.n_perm;
  res.statistic = compute_measure(kind, w, z);

  constexpr double kFailed = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> stats(opts.n_perm, kFailed);
  std::vector<std::size_t> retries(opts.n_perm, 0);
  const std::size_t blocks = (opts.n_perm + detail::kPermBlock - 1) / detail::kPermBlock;

  parallel_for(blocks, opts.threads, [&](std::size_t b) {
    auto eng = stream.derive("perm-block", b).engine();
    std::vector<double> perm(z.values);
    const std::size_t end = std::min(opts.n_perm, (b + 1) * detail::kPermBlock);
    for (std::size_t k = b * detail::kPermBlock; k < end; ++k) {
      for (std::size_t attempt = 0; attempt <= opts.max_retries; ++attempt) {
        shuffle(std::span<double>(perm), eng);
        try {
          stats[k] = compute_measure(kind, w, perm);
          break;
        } catch (const ZeroScale&) {
          ++retries[k];
        }
      }
    }
  });

  double sum = 0.0;
  std::size_t ok = 0;
  for (double t : stats)
    if (!std::isnan(t)) {
      sum += t;
      ++ok;
    }
  for (auto r : retries) res.retried_permutations += r > 0 ? 1 : 0;
  res.failed_permutations = opts.n_perm - ok;
  if (ok == 0) throw ZeroScale("every permutation replicate had zero robust scale");

  res.null_mean = sum / static_cast<double>(ok);
  const double observed_dev = std::abs(res.statistic - res.null_mean);
  // Ties within rounding of the observed deviation count as extreme.
  const double threshold = observed_dev - 1e-12 * std::max(1.0, observed_dev);
  std::size_t extreme = 0;
  for (double t : stats)
    if (!std::isnan(t) && std::abs(t - res.null_mean) >= threshold) ++extreme;

  res.p_value = static_cast<double>(1 + extreme) / static_cast<double>(opts.n_perm + 1);
  res.reject = res.p_value <= opts.alpha;
  return res;
}

}  // namespace robspat
