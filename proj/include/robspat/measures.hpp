#pragma once

// Spatial lags and the eight global spatial correlation statistics:
// classical MC / GC / APLE, their robust-lag counterparts RMC / RGC / RAPLE,
// and the Gnanadesikan-Kettenring style GK / GK2.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "robspat/error.hpp"
#include "robspat/lattice.hpp"

namespace robspat {

enum class Centering { None, Mean, Median };

inline std::string_view to_string(Centering c) {
  switch (c) {
    case Centering::Mean: return "mean";
    case Centering::Median: return "median";
    case Centering::None: break;
  }
  return "none";
}

inline Centering parse_centering(std::string_view text) {
  if (text == "mean") return Centering::Mean;
  if (text == "median") return Centering::Median;
  if (text == "none") return Centering::None;
  throw UsageError("unknown centering '" + std::string(text) + "' (expected mean|median|none)");
}

/// Observations on the n locations plus how they were centered.
struct Field {
  std::vector<double> values;
  Centering centering = Centering::None;

  std::size_t size() const { return values.size(); }
};

enum class MeasureKind { MC, GC, APLE, RMC, RGC, RAPLE, GK, GK2 };

inline constexpr std::array<MeasureKind, 8> kAllMeasures = {
    MeasureKind::MC,  MeasureKind::GC,    MeasureKind::APLE, MeasureKind::RMC,
    MeasureKind::RGC, MeasureKind::RAPLE, MeasureKind::GK,   MeasureKind::GK2};

inline std::string_view to_string(MeasureKind k) {
  switch (k) {
    case MeasureKind::MC: return "MC";
    case MeasureKind::GC: return "GC";
    case MeasureKind::APLE: return "APLE";
    case MeasureKind::RMC: return "RMC";
    case MeasureKind::RGC: return "RGC";
    case MeasureKind::RAPLE: return "RAPLE";
    case MeasureKind::GK: return "GK";
    case MeasureKind::GK2: return "GK2";
  }
  return "?";
}

inline MeasureKind parse_measure(std::string_view text) {
  std::string up(text);
  for (auto& ch : up) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  for (auto k : kAllMeasures)
    if (to_string(k) == up) return k;
  throw UsageError("unknown measure '" + std::string(text) + "'");
}

/// Robust counterpart of a classical measure (identity for GK/GK2).
inline MeasureKind robust_counterpart(MeasureKind k) {
  switch (k) {
    case MeasureKind::MC: return MeasureKind::RMC;
    case MeasureKind::GC: return MeasureKind::RGC;
    case MeasureKind::APLE: return MeasureKind::RAPLE;
    default: return k;
  }
}

// --- location / scale ---

/// Median with the midpoint convention for even counts. Takes a copy.
inline double median(std::vector<double> x) {
  if (x.empty()) throw DataError("median of an empty vector");
  const std::size_t mid = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid), x.end());
  const double upper = x[mid];
  if (x.size() % 2 == 1) return upper;
  const double lower = *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

inline double median(std::span<const double> x) { return median(std::vector<double>(x.begin(), x.end())); }

inline double mean(std::span<const double> x) {
  if (x.empty()) throw DataError("mean of an empty vector");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Median absolute deviation from the median, without the 1.4826 constant.
/// The constant cancels in every ratio it is used in.
inline double mad(std::span<const double> x) {
  const double m = median(x);
  std::vector<double> dev(x.size());
  std::transform(x.begin(), x.end(), dev.begin(), [m](double v) { return std::abs(v - m); });
  return median(std::move(dev));
}

/// Sample standard deviation (n - 1 denominator).
inline double stddev(std::span<const double> x) {
  if (x.size() < 2) throw DataError("standard deviation needs at least two values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

enum class ScaleEstimator { MAD, StdDev };

inline double scale(ScaleEstimator s, std::span<const double> x) {
  return s == ScaleEstimator::MAD ? mad(x) : stddev(x);
}

inline Field center(std::span<const double> z, Centering mode) {
  if (z.size() < 2) throw DataError("a field needs at least two locations");
  Field f{std::vector<double>(z.begin(), z.end()), mode};
  double loc = 0.0;
  if (mode == Centering::Mean) loc = mean(z);
  else if (mode == Centering::Median) loc = median(z);
  for (auto& v : f.values) v -= loc;
  return f;
}

// --- lags ---

inline void check_dims(const WeightMatrix& w, std::size_t n) {
  if (w.size() != n)
    throw DataError("dimension mismatch: weight matrix has " + std::to_string(w.size()) +
                    " locations, field has " + std::to_string(n));
}

/// L[z]_i = sum_j w_ij z_j.
inline std::vector<double> spatial_lag(const WeightMatrix& w, std::span<const double> z) {
  check_dims(w, z.size());
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    double s = 0.0;
    for (const auto& nb : w.row(i)) s += nb.weight * z[nb.index];
    out[i] = s;
  }
  return out;
}

inline std::vector<double> spatial_lag(const WeightMatrix& w, const Field& z) { return spatial_lag(w, z.values); }

/// W^T z, computed by scattering rows.
inline std::vector<double> transpose_lag(const WeightMatrix& w, std::span<const double> z) {
  check_dims(w, z.size());
  std::vector<double> out(z.size(), 0.0);
  for (std::size_t i = 0; i < z.size(); ++i)
    for (const auto& nb : w.row(i)) out[nb.index] += nb.weight * z[i];
  return out;
}

namespace detail {

/// Weighted median over (value, weight) pairs; reorders `items`.
/// Returns the smallest value whose cumulative weight reaches half the total.
/// If the cumulative weight lands exactly on one half, returns the midpoint
/// to the next distinct value.
inline double weighted_median_inplace(std::vector<std::pair<double, double>>& items) {
  if (items.empty()) throw DataError("weighted median of an empty set");
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double total = 0.0;
  for (const auto& it : items) total += it.second;
  const double half = 0.5 * total;
  const double tol = 1e-12 * total;
  double cum = 0.0;
  std::size_t k = 0;
  while (k < items.size()) {
    const double v = items[k].first;
    while (k < items.size() && items[k].first == v) cum += items[k++].second;
    if (std::abs(cum - half) <= tol) return k < items.size() ? 0.5 * (v + items[k].first) : v;
    if (cum > half) return v;
  }
  return items.back().first;
}

}  // namespace detail

inline double weighted_median(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw DataError("weighted median: values and weights differ in length");
  std::vector<std::pair<double, double>> items;
  items.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(weights[i] > 0.0)) throw DataError("weighted median: weights must be positive");
    items.emplace_back(values[i], weights[i]);
  }
  return detail::weighted_median_inplace(items);
}

/// RL[z]_i = weighted median of {z_j : j in N(i)} with weights w_ij.
inline std::vector<double> robust_spatial_lag(const WeightMatrix& w, std::span<const double> z) {
  check_dims(w, z.size());
  std::vector<double> out(z.size());
  std::vector<std::pair<double, double>> scratch;
  for (std::size_t i = 0; i < z.size(); ++i) {
    scratch.clear();
    for (const auto& nb : w.row(i)) scratch.emplace_back(z[nb.index], nb.weight);
    out[i] = detail::weighted_median_inplace(scratch);
  }
  return out;
}

inline std::vector<double> robust_spatial_lag(const WeightMatrix& w, const Field& z) {
  return robust_spatial_lag(w, z.values);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

/// gamma = n^-1 sum_i z_i L[z]_i.
inline double spatial_autocov(const WeightMatrix& w, std::span<const double> z) {
  const auto lag = spatial_lag(w, z);
  return dot(z, lag) / static_cast<double>(z.size());
}

inline double spatial_autocov(const WeightMatrix& w, const Field& z) { return spatial_autocov(w, z.values); }

// --- statistics ---

/// Gnanadesikan-Kettenring correlation of x and y under scale estimator s.
inline double gk_correlation(std::span<const double> x, std::span<const double> y,
                             ScaleEstimator s = ScaleEstimator::MAD) {
  const double sx = scale(s, x), sy = scale(s, y);
  if (!(sx > 0.0) || !(sy > 0.0)) throw ZeroScale();
  const double a = 1.0 / sx, b = 1.0 / sy;
  std::vector<double> plus(x.size()), minus(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    plus[i] = a * x[i] + b * y[i];
    minus[i] = a * x[i] - b * y[i];
  }
  const double sp = scale(s, plus), sm = scale(s, minus);
  if (!(sp > 0.0) || !(sm > 0.0)) throw ZeroScale();
  const double p2 = sp * sp, m2 = sm * sm;
  return (p2 - m2) / (p2 + m2);
}

namespace detail {

inline double moran_form(std::span<const double> z, std::span<const double> lag, double zz) {
  return dot(z, lag) / zz;
}

/// 1/2 [lag'z + z'lag] / [lag'lag + tr(W^2) z'z / n]
inline double aple_form(std::span<const double> z, std::span<const double> lag, std::span<const double> lag_t,
                        double zz, double tr_w2) {
  const double n = static_cast<double>(z.size());
  return 0.5 * (dot(lag_t, z) + dot(z, lag)) / (dot(lag, lag) + tr_w2 * zz / n);
}

}  // namespace detail

inline double compute_measure(MeasureKind kind, const WeightMatrix& w, std::span<const double> z) {
  check_dims(w, z.size());
  const double zz = dot(z, z);
  if (!(zz > 0.0)) throw ZeroVariance();
  const std::size_t n = z.size();
  const double dn = static_cast<double>(n);

  switch (kind) {
    case MeasureKind::MC:
      return detail::moran_form(z, spatial_lag(w, z), zz);
    case MeasureKind::RMC:
      return detail::moran_form(z, robust_spatial_lag(w, z), zz);
    case MeasureKind::APLE:
      // z'W^T z is taken through W^T z so the general asymmetric form is
      // evaluated as written.
      return detail::aple_form(z, spatial_lag(w, z), transpose_lag(w, z), zz, w.trace_w2());
    case MeasureKind::RAPLE: {
      const auto rl = robust_spatial_lag(w, z);
      return detail::aple_form(z, rl, rl, zz, w.trace_w2());
    }
    case MeasureKind::GC:
    case MeasureKind::RGC: {
      const bool robust = kind == MeasureKind::RGC;
      const double eta_bar = w.mean_connectivity();
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (const auto& nb : w.row(i)) {
          const double d = z[i] - z[nb.index];
          num += nb.weight * (robust ? std::abs(d) : d * d);
        }
        den += robust ? std::abs(z[i]) : z[i] * z[i];
      }
      return (num / (2.0 * dn * eta_bar)) / (den / (dn - 1.0));
    }
    case MeasureKind::GK:
      return gk_correlation(z, spatial_lag(w, z));
    case MeasureKind::GK2:
      return gk_correlation(z, robust_spatial_lag(w, z));
  }
  throw UsageError("unhandled measure kind");
}

inline double compute_measure(MeasureKind kind, const WeightMatrix& w, const Field& z) {
  return compute_measure(kind, w, std::span<const double>(z.values));
}

}  // namespace robspat
