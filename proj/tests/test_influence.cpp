#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "robspat/influence.hpp"
#include "robspat/lattice.hpp"
#include "robspat/measures.hpp"
#include "robspat/randfield.hpp"

using namespace robspat;

namespace {

/// Seeded field on a torus lattice with `unit` zeroed and the mean kept at 0.
Field pre_zeroed(const WeightMatrix& w, std::size_t unit, std::uint64_t seed) {
  const auto z = standardize(sar_generate(0.4, w, DistributionKind::Normal, RngStream(seed, "oracle")));
  return zero_unit_recentered(z, unit);
}

/// n (gamma_cont - gamma) straight from the definition.
double autocov_oracle(const WeightMatrix& w, const Field& z, std::size_t unit, double value) {
  const double n = static_cast<double>(z.size());
  const auto cont = contaminate(z, unit, value);
  return n * (spatial_autocov(w, cont) - spatial_autocov(w, z));
}

}  // namespace

TEST(Contaminate, Examples) {
  const Field z{{0, 1, -1}, Centering::Mean};
  const auto same = contaminate(z, 0, 0.0);
  EXPECT_EQ(same.values, z.values);
  const auto nine = contaminate(z, 0, 9.0);
  EXPECT_EQ(nine.values, (std::vector<double>{6, -2, -4}));
  EXPECT_DOUBLE_EQ(std::accumulate(nine.values.begin(), nine.values.end(), 0.0), 0.0);
  EXPECT_THROW(contaminate(z, 3, 1.0), DataError);
}

TEST(Contaminate, KeepsCentering) {
  const Field z{{-1, 0, 4}, Centering::Median};
  const auto c = contaminate(z, 2, -7.0);
  EXPECT_EQ(c.centering, Centering::Median);
  EXPECT_DOUBLE_EQ(median(c.values), 0.0);
}

TEST(EmpiricalInfluence, ZeroWhenValueUnchanged) {
  const auto w = build_lattice_weights({10, 10, Scheme::Rook, false});
  const auto z = standardize(sar_generate(0.5, w, DistributionKind::Normal, RngStream(1, "infl")));
  for (auto k : kAllMeasures) EXPECT_EQ(empirical_influence(k, w, z, 17, z.values[17]), 0.0) << to_string(k);
  const auto zeroed = zero_unit_recentered(z, 17);
  for (auto k : kAllMeasures) EXPECT_EQ(empirical_influence(k, w, zeroed, 17, 0.0), 0.0) << to_string(k);
}

TEST(EmpiricalInfluence, MoranGrowsBeyondFieldRange) {
  const auto w = build_lattice_weights({10, 10, Scheme::Rook, false});
  const auto z = standardize(sar_generate(0.5, w, DistributionKind::Normal, RngStream(2, "infl")));
  double range = 0.0;
  for (double v : z.values) range = std::max(range, std::abs(v));
  double prev = 0.0;
  for (double v = std::ceil(range) + 1.0; v <= 40.0; v += 1.0) {
    const double i = empirical_influence(MeasureKind::MC, w, z, 0, v);
    ASSERT_TRUE(std::isfinite(i));
    EXPECT_GT(std::abs(i), prev) << "v=" << v;
    prev = std::abs(i);
  }
}

TEST(AnalyticInfluence, MatchesDirectAutocovOnTorus) {
  const auto w = build_lattice_weights({6, 6, Scheme::Rook, true});
  for (std::size_t unit : {0u, 7u, 35u}) {
    const auto z = pre_zeroed(w, unit, 10 + unit);
    for (int k = -10; k <= 10; ++k) {
      const double v = k;
      EXPECT_NEAR(autocov_influence_analytic(w, z, unit, v), autocov_oracle(w, z, unit, v), 1e-9)
          << "unit " << unit << " v " << v;
    }
  }
}

TEST(AnalyticInfluence, QueenTorusToo) {
  const auto w = build_lattice_weights({5, 7, Scheme::Queen, true});
  const auto z = pre_zeroed(w, 3, 99);
  for (double v : {-8.5, -1.0, 0.25, 6.0}) EXPECT_NEAR(autocov_influence_analytic(w, z, 3, v), autocov_oracle(w, z, 3, v), 1e-9);
}

TEST(AnalyticInfluence, ThroughOriginAndDownwardParabola) {
  const auto w = build_lattice_weights({6, 6, Scheme::Rook, true});
  const auto z = pre_zeroed(w, 4, 5);
  EXPECT_EQ(autocov_influence_analytic(w, z, 4, 0.0), 0.0);
  // Second difference is the constant -2/n.
  const double h = 1.0;
  for (double v : {-5.0, 0.0, 5.0}) {
    const double d2 = autocov_influence_analytic(w, z, 4, v + h) - 2 * autocov_influence_analytic(w, z, 4, v) +
                      autocov_influence_analytic(w, z, 4, v - h);
    EXPECT_NEAR(d2, -2.0 * autocov_influence_curvature(z.size()), 1e-12);
  }
}

TEST(AnalyticInfluence, LinearInNeighborSum) {
  const auto w = build_lattice_weights({6, 6, Scheme::Rook, true});
  const auto z = pre_zeroed(w, 9, 6);
  Field z2 = z;
  for (auto& v : z2.values) v *= 2.0;
  const double q = autocov_influence_curvature(z.size());
  for (double v : {-3.0, 1.5, 10.0}) {
    const double lin1 = autocov_influence_analytic(w, z, 9, v) + q * v * v;
    const double lin2 = autocov_influence_analytic(w, z2, 9, v) + q * v * v;
    EXPECT_NEAR(lin2, 2.0 * lin1, 1e-12);
  }
}

TEST(AnalyticInfluence, Preconditions) {
  const auto torus = build_lattice_weights({6, 6, Scheme::Rook, true});
  const auto plane = build_lattice_weights({6, 6, Scheme::Rook, false});
  const auto z = pre_zeroed(torus, 2, 7);
  EXPECT_THROW(autocov_influence_analytic(plane, z, 2, 1.0), DataError);
  EXPECT_THROW(autocov_influence_analytic(torus, z, 3, 1.0), DataError);  // unit not zero
  EXPECT_THROW(autocov_influence_analytic(torus, z, 36, 1.0), DataError);
}

TEST(InfluenceCurves, GridAndShape) {
  InfluenceConfig cfg;
  cfg.runs = 20;
  const auto c = influence_curve(MeasureKind::MC, cfg, 1);
  ASSERT_EQ(c.grid.size(), 41u);
  ASSERT_EQ(c.mean_influence.size(), 41u);
  EXPECT_DOUBLE_EQ(c.grid.front(), -10.0);
  EXPECT_DOUBLE_EQ(c.grid[20], 0.0);
  EXPECT_DOUBLE_EQ(c.grid.back(), 10.0);
  for (std::size_t i = 1; i < c.grid.size(); ++i) EXPECT_LT(c.grid[i - 1], c.grid[i]);
  EXPECT_EQ(c.runs, 20u);
}

TEST(InfluenceCurves, ZeroAtOriginWithZeroedUnit) {
  InfluenceConfig cfg;
  cfg.runs = 50;
  for (const auto& c : influence_curves({kAllMeasures.begin(), kAllMeasures.end()}, cfg, 3))
    EXPECT_EQ(c.mean_influence[20], 0.0) << to_string(c.kind);
}

TEST(InfluenceCurves, MoranNearZeroAtOriginWithoutZeroing) {
  // Without pre-zeroing, replacing a random unit by 0 moves MC by about -MC/n
  // per location, so n * that shift averages to minus the mean MC.
  InfluenceConfig cfg;
  cfg.zero_unit = false;
  cfg.runs = 1000;
  cfg.rho = 0.0;
  const auto c = influence_curve(MeasureKind::MC, cfg, 4);
  EXPECT_NEAR(c.mean_influence[20], 0.0, 0.05);
}

TEST(InfluenceCurves, ReproducibleAndThreadIndependent) {
  InfluenceConfig cfg;
  cfg.runs = 40;
  cfg.points = 11;
  const std::vector<MeasureKind> kinds{MeasureKind::MC, MeasureKind::RGC, MeasureKind::GK2};
  const auto a = influence_curves(kinds, cfg, 42);
  cfg.threads = 7;
  const auto b = influence_curves(kinds, cfg, 42);
  for (std::size_t k = 0; k < kinds.size(); ++k) EXPECT_EQ(a[k].mean_influence, b[k].mean_influence);
  const auto c = influence_curves(kinds, cfg, 43);
  EXPECT_NE(a[0].mean_influence, c[0].mean_influence);
}

TEST(InfluenceCurves, GearyOrientation) {
  InfluenceConfig cfg;
  cfg.runs = 30;
  cfg.points = 5;
  const auto corr = influence_curve(MeasureKind::GC, cfg, 8);
  cfg.orientation = Orientation::Raw;
  const auto raw = influence_curve(MeasureKind::GC, cfg, 8);
  for (std::size_t g = 0; g < corr.grid.size(); ++g) EXPECT_EQ(corr.mean_influence[g], -raw.mean_influence[g]);
  EXPECT_EQ(orientation_sign(MeasureKind::MC, Orientation::Correlation), 1.0);
  EXPECT_EQ(orientation_sign(MeasureKind::RGC, Orientation::Correlation), -1.0);
}

TEST(InfluenceCurves, FixedUnitAndErrors) {
  InfluenceConfig cfg;
  cfg.runs = 5;
  cfg.unit_policy = UnitPolicy::Fixed;
  cfg.fixed_unit = 100;
  EXPECT_THROW(influence_curve(MeasureKind::MC, cfg, 1), UsageError);
  cfg.fixed_unit = 44;
  EXPECT_NO_THROW(influence_curve(MeasureKind::MC, cfg, 1));
  cfg.points = 1;
  EXPECT_THROW(influence_curve(MeasureKind::MC, cfg, 1), UsageError);
  cfg.points = 5;
  cfg.z_min = 3;
  cfg.z_max = 3;
  EXPECT_THROW(influence_curve(MeasureKind::MC, cfg, 1), UsageError);
  EXPECT_THROW(influence_curves({}, InfluenceConfig{}, 1), UsageError);
}

TEST(InfluenceCurves, RobustVariantsBelowClassicalCounterparts) {
  InfluenceConfig cfg;
  cfg.runs = 300;
  const std::vector<MeasureKind> kinds{kAllMeasures.begin(), kAllMeasures.end()};
  const auto curves = influence_curves(kinds, cfg, 11);
  auto max_of = [&](MeasureKind k) { return curves[static_cast<std::size_t>(k)].max_abs(); };
  EXPECT_LT(max_of(MeasureKind::RMC), max_of(MeasureKind::MC));
  EXPECT_LT(max_of(MeasureKind::RGC), max_of(MeasureKind::GC));
  EXPECT_LT(max_of(MeasureKind::RAPLE), max_of(MeasureKind::APLE));
  EXPECT_LE(max_of(MeasureKind::GK2), max_of(MeasureKind::GK));
  EXPECT_LT(max_of(MeasureKind::GK), max_of(MeasureKind::RGC));
  EXPECT_LT(max_of(MeasureKind::GK), max_of(MeasureKind::RMC));
  EXPECT_GT(max_of(MeasureKind::APLE), max_of(MeasureKind::MC));
}
