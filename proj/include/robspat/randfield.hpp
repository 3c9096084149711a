#pragma once

// Innovation draws and simultaneous autoregressive (SAR) fields
// Z = rho W Z + eps, solved through a cached dense LU of (I - rho W).

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "robspat/error.hpp"
#include "robspat/lattice.hpp"
#include "robspat/measures.hpp"
#include "robspat/rng.hpp"

namespace robspat {

enum class DistributionKind { Normal, Cauchy, Laplace, Mixture };

inline constexpr std::array<DistributionKind, 4> kAllDistributions = {
    DistributionKind::Normal, DistributionKind::Cauchy, DistributionKind::Laplace, DistributionKind::Mixture};

inline std::string_view to_string(DistributionKind d) {
  switch (d) {
    case DistributionKind::Normal: return "normal";
    case DistributionKind::Cauchy: return "cauchy";
    case DistributionKind::Laplace: return "laplace";
    case DistributionKind::Mixture: return "mixture";
  }
  return "?";
}

inline DistributionKind parse_distribution(std::string_view text) {
  for (auto d : kAllDistributions)
    if (to_string(d) == text) return d;
  throw UsageError("unknown distribution '" + std::string(text) +
                   "' (expected normal|cauchy|laplace|mixture)");
}

/// Where the shifted N(3,1) component of the mixture lands.
///  - Scattered: each location independently with probability 1 - p.
///  - Blocked: exactly round((1 - p) n) locations, the trailing ones in
///    row-major order, i.e. a contiguous strip along the last lattice row.
enum class MixtureLayout { Scattered, Blocked };

inline std::string_view to_string(MixtureLayout m) { return m == MixtureLayout::Blocked ? "blocked" : "scattered"; }

inline MixtureLayout parse_mixture_layout(std::string_view text) {
  if (text == "blocked") return MixtureLayout::Blocked;
  if (text == "scattered") return MixtureLayout::Scattered;
  throw UsageError("unknown mixture layout '" + std::string(text) + "' (expected blocked|scattered)");
}

struct MixtureParams {
  double weight = 0.95;  // mass of the N(0,1) component
  double shift = 3.0;    // mean of the second unit-variance component
  MixtureLayout layout = MixtureLayout::Scattered;
};

inline std::vector<double> sample_noise(DistributionKind kind, std::size_t n, const RngStream& stream,
                                        const MixtureParams& mix = {}) {
  if (n == 0) throw UsageError("sample_noise needs n >= 1");
  if (!(mix.weight > 0.0 && mix.weight < 1.0)) throw UsageError("mixture weight must lie in (0,1)");
  auto eng = stream.engine();
  std::vector<double> out(n);
  switch (kind) {
    case DistributionKind::Normal:
      for (auto& v : out) v = standard_normal(eng);
      break;
    case DistributionKind::Cauchy:
      for (auto& v : out) v = std::tan(std::numbers::pi * (uniform01(eng) - 0.5));
      break;
    case DistributionKind::Laplace:
      for (auto& v : out) {
        const double u = uniform01(eng) - 0.5;
        v = (u < 0 ? 1.0 : -1.0) * std::log(1.0 - 2.0 * std::abs(u));
      }
      break;
    case DistributionKind::Mixture:
      if (mix.layout == MixtureLayout::Scattered) {
        for (auto& v : out) {
          const bool shifted = uniform01(eng) >= mix.weight;
          v = standard_normal(eng) + (shifted ? mix.shift : 0.0);
        }
      } else {
        const auto k = static_cast<std::size_t>(std::llround((1.0 - mix.weight) * static_cast<double>(n)));
        for (std::size_t i = 0; i < n; ++i) out[i] = standard_normal(eng) + (i >= n - k ? mix.shift : 0.0);
      }
      break;
  }
  return out;
}

/// Dense LU of (I - rho W) for one weight matrix and one rho.
class SarSystem {
 public:
  SarSystem(const WeightMatrix& w, double rho) : rho_(rho) {
    if (!(std::abs(rho) < 1.0) || !std::isfinite(rho))
      throw NumericalError("SAR parameter |rho| must be < 1 (got " + std::to_string(rho) + ")");
    const auto n = static_cast<Eigen::Index>(w.size());
    a_ = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t i = 0; i < w.size(); ++i)
      for (const auto& nb : w.row(i))
        a_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(nb.index)) -= rho * nb.weight;
    lu_.compute(a_);
  }

  double rho() const { return rho_; }

  /// Solves (I - rho W) z = eps and checks the residual.
  std::vector<double> solve(const std::vector<double>& eps) const {
    const auto n = static_cast<Eigen::Index>(eps.size());
    if (n != a_.rows()) throw DataError("SAR solve: noise length does not match the weight matrix");
    const Eigen::Map<const Eigen::VectorXd> e(eps.data(), n);
    Eigen::VectorXd z = lu_.solve(e);
    const double res = (a_ * z - e).lpNorm<Eigen::Infinity>();
    const double ref = e.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(res) || res > 1e-8 * std::max(ref, 1e-300))
      throw NumericalError("SAR solve residual " + std::to_string(res) + " exceeds tolerance");
    return {z.data(), z.data() + n};
  }

  /// ||(I - rho W) z - eps||_inf
  double residual(const std::vector<double>& z, const std::vector<double>& eps) const {
    const auto n = static_cast<Eigen::Index>(eps.size());
    const Eigen::Map<const Eigen::VectorXd> zz(z.data(), n), e(eps.data(), n);
    return (a_ * zz - e).lpNorm<Eigen::Infinity>();
  }

 private:
  double rho_;
  Eigen::MatrixXd a_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

/// Factorizations of (I - rho W) for one W, built once per rho and shared
/// between threads.
class SarCache {
 public:
  explicit SarCache(const WeightMatrix& w) : w_(&w) {}

  const WeightMatrix& weights() const { return *w_; }

  const SarSystem& get(double rho) {
    std::lock_guard lock(mutex_);
    auto& slot = systems_[std::bit_cast<std::uint64_t>(rho)];
    if (!slot) slot = std::make_unique<SarSystem>(*w_, rho);
    return *slot;
  }

 private:
  const WeightMatrix* w_;
  std::mutex mutex_;
  std::map<std::uint64_t, std::unique_ptr<SarSystem>> systems_;
};

struct SarDraw {
  std::vector<double> noise;
  std::vector<double> raw;  // uncentered solution of the SAR system
  Field field;              // mean-centered
};

inline SarDraw sar_draw(const SarSystem& sys, DistributionKind kind, const RngStream& stream,
                        std::size_t n, const MixtureParams& mix = {}) {
  SarDraw d;
  d.noise = sample_noise(kind, n, stream, mix);
  d.raw = sys.solve(d.noise);
  d.field = center(d.raw, Centering::Mean);
  return d;
}

inline Field sar_generate(double rho, const WeightMatrix& w, DistributionKind kind, const RngStream& stream,
                          const MixtureParams& mix = {}) {
  const SarSystem sys(w, rho);
  return sar_draw(sys, kind, stream, w.size(), mix).field;
}

inline Field sar_generate(SarCache& cache, double rho, DistributionKind kind, const RngStream& stream,
                          const MixtureParams& mix = {}) {
  return sar_draw(cache.get(rho), kind, stream, cache.weights().size(), mix).field;
}

/// Zero mean, unit sample variance.
inline Field standardize(const Field& z) {
  Field out = center(z.values, Centering::Mean);
  const double sd = stddev(out.values);
  if (!(sd > 0.0)) throw ZeroVariance();
  for (auto& v : out.values) v /= sd;
  return out;
}

}  // namespace robspat
