#pragma once

// Empirical influence of contaminating one location,
// I_cont = n (theta_cont - theta), plus the closed-form influence of the
// spatial autocovariance on symmetric (torus) weight matrices.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "robspat/error.hpp"
#include "robspat/lattice.hpp"
#include "robspat/measures.hpp"
#include "robspat/parallel.hpp"
#include "robspat/randfield.hpp"
#include "robspat/rng.hpp"

namespace robspat {

/// Copy of z with z[unit] = value, re-centered the same way z was.
inline Field contaminate(const Field& z, std::size_t unit, double value) {
  if (unit >= z.size())
    throw DataError("contamination unit " + std::to_string(unit) + " out of range for n=" +
                    std::to_string(z.size()));
  if (z.values[unit] == value) return z;
  std::vector<double> v(z.values);
  v[unit] = value;
  return center(v, z.centering);
}

inline double empirical_influence(MeasureKind kind, const WeightMatrix& w, const Field& z, std::size_t unit,
                                  double value) {
  const double base = compute_measure(kind, w, z);
  const double cont = compute_measure(kind, w, contaminate(z, unit, value));
  return static_cast<double>(z.size()) * (cont - base);
}

/// Quadratic term of the autocovariance influence parabola.
inline double autocov_influence_curvature(std::size_t n) { return 1.0 / static_cast<double>(n); }

/// 2 v sum_i w_{i,unit} z_i - v^2 / n, valid for symmetric W and a
/// mean-centered z whose value at `unit` is zero before contamination.
inline double autocov_influence_analytic(const WeightMatrix& w, const Field& z, std::size_t unit, double value) {
  check_dims(w, z.size());
  if (unit >= z.size()) throw DataError("unit " + std::to_string(unit) + " out of range");
  if (!is_symmetric(w)) throw DataError("analytic autocovariance influence requires a symmetric weight matrix");
  double scale_ref = 0.0, sum = 0.0;
  for (double v : z.values) {
    scale_ref = std::max(scale_ref, std::abs(v));
    sum += v;
  }
  const double tol = 1e-9 * std::max(1.0, scale_ref) * static_cast<double>(z.size());
  if (std::abs(z.values[unit]) > 1e-12 * std::max(1.0, scale_ref) || std::abs(sum) > tol)
    throw DataError("analytic autocovariance influence needs a mean-centered field with z[unit] = 0");
  double neighbor_sum = 0.0;
  for (const auto& nb : w.row(unit)) neighbor_sum += w.weight(nb.index, unit) * z.values[nb.index];
  return 2.0 * value * neighbor_sum - value * value * autocov_influence_curvature(z.size());
}

enum class UnitPolicy { Random, Fixed };

/// Curves report GC and RGC on the 1 - GC scale by default, so that every
/// curve rises with positive spatial correlation and GC overlays MC.
enum class Orientation { Raw, Correlation };

inline double orientation_sign(MeasureKind k, Orientation o) {
  const bool geary = k == MeasureKind::GC || k == MeasureKind::RGC;
  return (o == Orientation::Correlation && geary) ? -1.0 : 1.0;
}

struct InfluenceConfig {
  LatticeSpec lattice{10, 10, Scheme::Rook, false};
  double rho = 0.5;
  DistributionKind distribution = DistributionKind::Normal;
  std::size_t runs = 1000;
  std::size_t points = 41;
  double z_min = -10.0;
  double z_max = 10.0;
  UnitPolicy unit_policy = UnitPolicy::Random;
  std::size_t fixed_unit = 0;
  /// Force the chosen unit to zero (keeping the mean at zero) before
  /// contaminating, so every curve passes through the origin.
  bool zero_unit = true;
  Orientation orientation = Orientation::Correlation;
  std::size_t threads = 1;

  std::vector<double> grid() const {
    if (points < 2) throw UsageError("influence grid needs at least two points");
    if (!(z_min < z_max)) throw UsageError("influence grid needs z_min < z_max");
    std::vector<double> g(points);
    for (std::size_t k = 0; k < points; ++k)
      g[k] = z_min + (z_max - z_min) * static_cast<double>(k) / static_cast<double>(points - 1);
    return g;
  }
};

struct InfluenceCurve {
  MeasureKind kind = MeasureKind::MC;
  std::vector<double> grid;
  std::vector<double> mean_influence;
  std::size_t runs = 0;
  std::size_t redraws = 0;
  Orientation orientation = Orientation::Correlation;

  double max_abs() const {
    double m = 0.0;
    for (double v : mean_influence) m = std::max(m, std::abs(v));
    return m;
  }
};

/// Sets z[unit] to zero and spreads the removed mass over the other units,
/// so the field stays mean-centered.
inline Field zero_unit_recentered(const Field& z, std::size_t unit) {
  Field out = z;
  const double shift = out.values[unit] / static_cast<double>(z.size() - 1);
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = i == unit ? 0.0 : out.values[i] + shift;
  return out;
}

/// Averaged influence curves for several measures; each run's field and
/// unit are shared by all measures.
inline std::vector<InfluenceCurve> influence_curves(const std::vector<MeasureKind>& kinds,
                                                    const InfluenceConfig& cfg, std::uint64_t seed) {
  if (kinds.empty()) throw UsageError("no measures requested");
  if (cfg.runs == 0) throw UsageError("influence study needs at least one run");
  const auto w = build_lattice_weights(cfg.lattice);
  if (cfg.unit_policy == UnitPolicy::Fixed && cfg.fixed_unit >= w.size())
    throw UsageError("fixed unit out of range");
  const SarSystem sys(w, cfg.rho);
  const auto grid = cfg.grid();
  const std::size_t nk = kinds.size(), np = grid.size(), n = w.size();

  // per run: nk * np influence values
  std::vector<std::vector<double>> per_run(cfg.runs);
  std::vector<std::size_t> redraws(cfg.runs, 0);
  constexpr std::size_t kMaxRedraws = 100;

  parallel_for(cfg.runs, cfg.threads, [&](std::size_t r) {
    const RngStream base(seed, "influence", r);
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt > kMaxRedraws) throw NumericalError("influence run " + std::to_string(r) + " kept failing");
      const RngStream s = attempt == 0 ? base : base.derive("redraw", attempt);
      try {
        Field z = standardize(sar_draw(sys, cfg.distribution, s, n).field);
        std::size_t unit = cfg.fixed_unit;
        if (cfg.unit_policy == UnitPolicy::Random) {
          auto eng = s.derive("unit").engine();
          unit = static_cast<std::size_t>(uniform_index(eng, n));
        }
        if (cfg.zero_unit) z = zero_unit_recentered(z, unit);
        std::vector<double> out(nk * np);
        for (std::size_t m = 0; m < nk; ++m) {
          const double base_value = compute_measure(kinds[m], w, z);
          const double sign = orientation_sign(kinds[m], cfg.orientation);
          for (std::size_t g = 0; g < np; ++g)
            out[m * np + g] = sign * static_cast<double>(n) *
                              (compute_measure(kinds[m], w, contaminate(z, unit, grid[g])) - base_value);
        }
        per_run[r] = std::move(out);
        redraws[r] = attempt;
        return;
      } catch (const ZeroScale&) {
      } catch (const ZeroVariance&) {
      }
    }
  });

  std::vector<InfluenceCurve> curves(nk);
  std::size_t total_redraws = 0;
  for (auto c : redraws) total_redraws += c;
  for (std::size_t m = 0; m < nk; ++m) {
    auto& c = curves[m];
    c.kind = kinds[m];
    c.grid = grid;
    c.runs = cfg.runs;
    c.redraws = total_redraws;
    c.orientation = cfg.orientation;
    c.mean_influence.assign(np, 0.0);
    for (const auto& run : per_run)
      for (std::size_t g = 0; g < np; ++g) c.mean_influence[g] += run[m * np + g];
    for (auto& v : c.mean_influence) v /= static_cast<double>(cfg.runs);
  }
  return curves;
}

inline InfluenceCurve influence_curve(MeasureKind kind, const InfluenceConfig& cfg, std::uint64_t seed) {
  return influence_curves({kind}, cfg, seed).front();
}

}  // namespace robspat
