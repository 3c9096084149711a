#include <gtest/gtest.h>

#include <set>

#include "robspat/mcstudy.hpp"

using namespace robspat;

namespace {

PowerStudyConfig small_study() {
  PowerStudyConfig cfg;
  cfg.grids = {{6, 6, {Scheme::Rook, Scheme::Queen}, false}};
  cfg.rhos = {-0.5, 0.0, 0.5};
  cfg.replications = 12;
  cfg.n_perm = 39;
  return cfg;
}

PowerTable synthetic_table(const std::vector<DistributionKind>& dists, const std::vector<Scheme>& schemes,
                           const std::vector<double>& rhos) {
  PowerTable t;
  for (auto m : kAllMeasures)
    for (auto d : dists)
      for (auto s : schemes)
        for (double r : rhos) {
          PowerCell c;
          c.key = {m, d, r, s, 10, 10};
          c.replications = 100;
          c.rejections = static_cast<std::size_t>(m) * 10 + static_cast<std::size_t>(d);
          t.add(c);
        }
  return t;
}

}  // namespace

TEST(PowerConfig, Validation) {
  PowerStudyConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  auto bad = cfg;
  bad.rhos = {1.0};
  EXPECT_THROW(bad.validate(), UsageError);
  bad = cfg;
  bad.replications = 0;
  EXPECT_THROW(bad.validate(), UsageError);
  bad = cfg;
  bad.alpha = 0.0;
  EXPECT_THROW(bad.validate(), UsageError);
  bad = cfg;
  bad.measures.clear();
  EXPECT_THROW(bad.validate(), UsageError);
  bad = cfg;
  bad.grids = {{1, 5, {Scheme::Rook}, false}};
  EXPECT_THROW(bad.validate(), DataError);
}

TEST(PowerConfig, DefaultsMatchStudyDesign) {
  const PowerStudyConfig cfg;
  ASSERT_EQ(cfg.grids.size(), 2u);
  EXPECT_EQ(cfg.grids[0].schemes.size(), 2u);
  EXPECT_EQ(cfg.grids[1].size(), 400u);
  EXPECT_EQ(cfg.grids[1].schemes, std::vector<Scheme>{Scheme::Queen});
  EXPECT_EQ(cfg.rhos, (std::vector<double>{-0.7, -0.5, -0.3, 0.0, 0.3, 0.5, 0.7}));
  EXPECT_EQ(cfg.replications, 1000u);
  EXPECT_EQ(cfg.n_perm, 999u);
  EXPECT_EQ(cfg.distributions.size(), 4u);
  EXPECT_EQ(cfg.measures.size(), 8u);
}

TEST(PowerStudy, EveryCellOnceWithValidRates) {
  const auto cfg = small_study();
  const auto t = run_power_study(cfg);
  EXPECT_EQ(t.cells().size(), 8u * 4u * 2u * 3u);
  std::set<CellKey> seen;
  for (const auto& c : t.cells()) {
    EXPECT_TRUE(seen.insert(c.key).second);
    EXPECT_EQ(c.replications, 12u);
    EXPECT_GE(c.rate(), 0.0);
    EXPECT_LE(c.rate(), 1.0);
    EXPECT_GE(c.standard_error(), 0.0);
  }
}

TEST(PowerStudy, IndependentOfThreadCount) {
  auto cfg = small_study();
  cfg.distributions = {DistributionKind::Cauchy, DistributionKind::Mixture};
  cfg.threads = 1;
  const auto a = run_power_study(cfg);
  cfg.threads = 6;
  const auto b = run_power_study(cfg);
  ASSERT_EQ(a.cells().size(), b.cells().size());
  for (std::size_t i = 0; i < a.cells().size(); ++i) {
    EXPECT_EQ(a.cells()[i].key, b.cells()[i].key);
    EXPECT_EQ(a.cells()[i].rejections, b.cells()[i].rejections);
    EXPECT_EQ(a.cells()[i].redraws, b.cells()[i].redraws);
  }
}

TEST(PowerStudy, SeedChangesResults) {
  auto cfg = small_study();
  cfg.distributions = {DistributionKind::Normal};
  cfg.rhos = {0.0};
  cfg.replications = 60;
  const auto a = run_power_study(cfg);
  cfg.seed = 2;
  const auto b = run_power_study(cfg);
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.cells().size(); ++i) diff += a.cells()[i].rejections != b.cells()[i].rejections;
  EXPECT_GT(diff, 0u);
}

TEST(PowerStudy, ProgressReachesTotal) {
  auto cfg = small_study();
  cfg.distributions = {DistributionKind::Normal};
  std::size_t last = 0, total = 0;
  run_power_study(cfg, [&](std::size_t d, std::size_t t) {
    last = std::max(last, d);
    total = t;
  });
  EXPECT_EQ(total, 2u * 3u * 12u);
  EXPECT_EQ(last, total);
}

TEST(PowerStudy, StrongCorrelationHasHighPower) {
  PowerStudyConfig cfg;
  cfg.grids = {{10, 10, {Scheme::Rook}, false}};
  cfg.rhos = {0.5};
  cfg.distributions = {DistributionKind::Normal};
  cfg.measures = {MeasureKind::MC, MeasureKind::GC};
  cfg.replications = 100;
  cfg.n_perm = 99;
  const auto t = run_power_study(cfg);
  EXPECT_GE(t.at({MeasureKind::MC, DistributionKind::Normal, 0.5, Scheme::Rook, 10, 10}).rate(), 0.9);
  EXPECT_GE(t.at({MeasureKind::GC, DistributionKind::Normal, 0.5, Scheme::Rook, 10, 10}).rate(), 0.9);
}

TEST(PowerTable, DuplicateAndMissing) {
  PowerTable t;
  PowerCell c;
  t.add(c);
  EXPECT_THROW(t.add(c), DataError);
  CellKey other = c.key;
  other.rho = 0.3;
  EXPECT_EQ(t.find(other), nullptr);
  EXPECT_THROW(t.at(other), DataError);
}

TEST(PowerCell, RateAndStandardError) {
  PowerCell c;
  EXPECT_EQ(c.rate(), 0.0);
  c.replications = 400;
  c.rejections = 100;
  EXPECT_DOUBLE_EQ(c.rate(), 0.25);
  EXPECT_NEAR(c.standard_error(), std::sqrt(0.25 * 0.75 / 400), 1e-15);
}

TEST(EmitTable, Table1Shape) {
  const auto t = synthetic_table({kAllDistributions.begin(), kAllDistributions.end()}, {Scheme::Queen}, {0.0});
  const auto f = emit_table(t, TableLayout::Table1);
  EXPECT_EQ(f.rows.size(), 8u);
  EXPECT_EQ(f.key_columns, 1u);
  EXPECT_EQ(f.value_columns(), 4u);
  EXPECT_EQ(f.header, (std::vector<std::string>{"measure", "normal", "cauchy", "laplace", "mixture", "normal_2dp",
                                                "cauchy_2dp", "laplace_2dp", "mixture_2dp"}));
  EXPECT_EQ(f.rows[1][0], "GC");
  EXPECT_EQ(f.rows[1][4], "0.13");  // GC, mixture: 13 of 100
  EXPECT_EQ(f.rows[1][8], "0.13");
}

TEST(EmitTable, AppendixShape) {
  const auto t = synthetic_table({DistributionKind::Laplace}, {Scheme::Rook, Scheme::Queen},
                                 {-0.7, -0.5, -0.3, 0.0, 0.3, 0.5, 0.7});
  TableSelector sel;
  sel.distribution = DistributionKind::Laplace;
  const auto f = emit_table(t, TableLayout::AppendixLong, sel);
  EXPECT_EQ(f.rows.size(), 16u);
  EXPECT_EQ(f.value_columns(), 7u);
  EXPECT_EQ(f.header[3], "rho=-0.69999999999999996");
  EXPECT_EQ(f.rows[0][2], "Q");
  EXPECT_EQ(f.rows[1][2], "R");
  EXPECT_EQ(f.rows[0][1], "100");
}

TEST(EmitTable, Errors) {
  EXPECT_THROW(emit_table(PowerTable{}, TableLayout::Table1), DataError);
  auto t = synthetic_table({DistributionKind::Normal}, {Scheme::Queen}, {0.0});
  TableSelector sel;
  sel.rho = 0.5;
  try {
    emit_table(t, TableLayout::Table1, sel);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("missing 8 cell"), std::string::npos) << e.what();
  }
  sel = {};
  sel.rows = 20;
  sel.cols = 20;
  EXPECT_THROW(emit_table(t, TableLayout::AppendixLong, sel), DataError);
  EXPECT_EQ(parse_layout("appendix"), TableLayout::AppendixLong);
  EXPECT_THROW(parse_layout("wide"), UsageError);
}
