#pragma once

// Monte Carlo power study: measures x innovation distributions x rho x
// contiguity scheme x lattice size, with one SAR field per replication
// shared by every measure.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "robspat/error.hpp"
#include "robspat/inference.hpp"
#include "robspat/lattice.hpp"
#include "robspat/measures.hpp"
#include "robspat/parallel.hpp"
#include "robspat/randfield.hpp"
#include "robspat/rng.hpp"

namespace robspat {

/// One lattice size and the contiguity schemes studied on it.
struct GridDesign {
  std::size_t rows = 10;
  std::size_t cols = 10;
  std::vector<Scheme> schemes{Scheme::Rook, Scheme::Queen};
  bool torus = false;

  std::size_t size() const { return rows * cols; }
};

struct PowerStudyConfig {
  std::vector<GridDesign> grids{{10, 10, {Scheme::Rook, Scheme::Queen}, false},
                                {20, 20, {Scheme::Queen}, false}};
  std::vector<double> rhos{-0.7, -0.5, -0.3, 0.0, 0.3, 0.5, 0.7};
  std::vector<DistributionKind> distributions{kAllDistributions.begin(), kAllDistributions.end()};
  std::vector<MeasureKind> measures{kAllMeasures.begin(), kAllMeasures.end()};
  std::size_t replications = 1000;
  std::size_t n_perm = 999;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  Centering centering = Centering::Mean;
  MixtureParams mixture{0.95, 3.0, MixtureLayout::Blocked};
  std::size_t threads = 1;

  void validate() const {
    if (grids.empty() || rhos.empty() || distributions.empty() || measures.empty())
      throw UsageError("power study needs at least one grid, rho, distribution and measure");
    for (const auto& g : grids) {
      LatticeSpec{g.rows, g.cols, Scheme::Rook, g.torus}.validate();
      if (g.schemes.empty()) throw UsageError("grid without schemes");
    }
    for (double r : rhos)
      if (!(r > -1.0 && r < 1.0)) throw UsageError("every rho must lie in (-1, 1)");
    if (replications < 1) throw UsageError("replications must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
    if (n_perm < 19) throw UsageError("n_perm must be >= 19");
    if (centering == Centering::None) throw UsageError("power study fields must be centered");
  }
};

struct CellKey {
  MeasureKind measure = MeasureKind::MC;
  DistributionKind distribution = DistributionKind::Normal;
  double rho = 0.0;
  Scheme scheme = Scheme::Rook;
  std::size_t rows = 10;
  std::size_t cols = 10;

  auto tie() const { return std::tie(measure, distribution, rho, scheme, rows, cols); }
  friend bool operator<(const CellKey& a, const CellKey& b) { return a.tie() < b.tie(); }
  friend bool operator==(const CellKey& a, const CellKey& b) { return a.tie() == b.tie(); }
};

struct PowerCell {
  CellKey key;
  std::size_t replications = 0;
  std::size_t rejections = 0;
  /// Fields redrawn because some measure was undefined on them.
  std::size_t redraws = 0;
  /// Permutation replicates that stayed undefined after retries.
  std::size_t failed_permutations = 0;

  double rate() const { return replications ? static_cast<double>(rejections) / static_cast<double>(replications) : 0.0; }
  /// Monte Carlo standard error sqrt(p (1 - p) / R).
  double standard_error() const {
    const double p = rate();
    return replications ? std::sqrt(p * (1.0 - p) / static_cast<double>(replications)) : 0.0;
  }
};

class PowerTable {
 public:
  void add(const PowerCell& cell) {
    if (!index_.emplace(cell.key, cells_.size()).second) throw DataError("duplicate power-table cell");
    cells_.push_back(cell);
  }

  const std::vector<PowerCell>& cells() const { return cells_; }
  bool empty() const { return cells_.empty(); }

  const PowerCell* find(const CellKey& key) const {
    const auto it = index_.find(key);
    return it == index_.end() ? nullptr : &cells_[it->second];
  }

  const PowerCell& at(const CellKey& key) const {
    if (const auto* c = find(key)) return *c;
    throw DataError("power table has no cell for " + describe(key));
  }

  static std::string describe(const CellKey& k) {
    std::ostringstream os;
    os << to_string(k.measure) << '/' << to_string(k.distribution) << "/rho=" << k.rho << '/' << to_string(k.scheme)
       << '/' << k.rows << 'x' << k.cols;
    return os.str();
  }

 private:
  std::vector<PowerCell> cells_;
  std::map<CellKey, std::size_t> index_;
};

namespace detail {

inline std::string rho_label(double rho) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", rho);
  return buf;
}

}  // namespace detail

/// Progress callback: (finished work units, total work units).
using ProgressFn = std::function<void(std::size_t, std::size_t)>;

inline PowerTable run_power_study(const PowerStudyConfig& cfg, const ProgressFn& progress = {}) {
  cfg.validate();

  struct Setting {
    DistributionKind dist;
    std::size_t grid;
    Scheme scheme;
    double rho;
  };
  struct Topology {
    WeightMatrix w;
    std::unique_ptr<SarCache> cache;
  };

  // One weight matrix (and its factorization cache) per grid x scheme.
  std::map<std::pair<std::size_t, Scheme>, Topology> topo;
  std::vector<Setting> settings;
  for (auto d : cfg.distributions)
    for (std::size_t g = 0; g < cfg.grids.size(); ++g)
      for (auto s : cfg.grids[g].schemes)
        for (double rho : cfg.rhos) settings.push_back({d, g, s, rho});
  for (std::size_t g = 0; g < cfg.grids.size(); ++g)
    for (auto s : cfg.grids[g].schemes) {
      const auto& gd = cfg.grids[g];
      auto& t = topo[{g, s}];
      t.w = build_lattice_weights({gd.rows, gd.cols, s, gd.torus});
      t.cache = std::make_unique<SarCache>(t.w);
    }

  const std::size_t reps = cfg.replications, nm = cfg.measures.size();
  const std::size_t units = settings.size() * reps;
  struct UnitResult {
    std::vector<char> reject;
    std::vector<std::size_t> failed_perms;
    std::size_t redraws = 0;
  };
  std::vector<UnitResult> results(units);
  std::atomic<std::size_t> done{0};
  constexpr std::size_t kMaxRedraws = 100;

  PermutationOptions popts;
  popts.n_perm = cfg.n_perm;
  popts.alpha = cfg.alpha;

  parallel_for(units, cfg.threads, [&](std::size_t u) {
    const Setting& st = settings[u / reps];
    const std::size_t rep = u % reps;
    const auto& gd = cfg.grids[st.grid];
    auto& t = topo.at({st.grid, st.scheme});
    const auto& sys = t.cache->get(st.rho);

    // Innovations depend only on (distribution, grid, replication): the same
    // draws feed every rho and scheme.
    const std::string field_label =
        "power/" + std::string(to_string(st.dist)) + "/" + std::to_string(gd.rows) + "x" + std::to_string(gd.cols);
    const std::string test_label = field_label + "/" + std::string(to_string(st.scheme)) + "/rho=" +
                                   detail::rho_label(st.rho);
    const RngStream field_stream(cfg.seed, field_label, rep);
    const RngStream test_stream(cfg.seed, test_label, rep);

    UnitResult res;
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt > kMaxRedraws)
        throw NumericalError("replication " + std::to_string(rep) + " of " + test_label + " kept failing");
      const RngStream fs = attempt == 0 ? field_stream : field_stream.derive("redraw", attempt);
      try {
        auto draw = sar_draw(sys, st.dist, fs, t.w.size(), cfg.mixture);
        const Field z = cfg.centering == Centering::Mean ? std::move(draw.field) : center(draw.raw, cfg.centering);
        res.reject.assign(nm, 0);
        res.failed_perms.assign(nm, 0);
        for (std::size_t m = 0; m < nm; ++m) {
          const auto tr = permutation_test(cfg.measures[m], t.w, z, popts,
                                           test_stream.derive(to_string(cfg.measures[m]), attempt));
          res.reject[m] = tr.reject ? 1 : 0;
          res.failed_perms[m] = tr.failed_permutations;
        }
        res.redraws = attempt;
        break;
      } catch (const ZeroScale&) {
      } catch (const ZeroVariance&) {
      }
    }
    results[u] = std::move(res);
    const std::size_t finished = ++done;
    if (progress) progress(finished, units);
  });

  PowerTable table;
  for (std::size_t si = 0; si < settings.size(); ++si) {
    const auto& st = settings[si];
    const auto& gd = cfg.grids[st.grid];
    for (std::size_t m = 0; m < nm; ++m) {
      PowerCell cell;
      cell.key = {cfg.measures[m], st.dist, st.rho, st.scheme, gd.rows, gd.cols};
      cell.replications = reps;
      for (std::size_t r = 0; r < reps; ++r) {
        const auto& ur = results[si * reps + r];
        cell.rejections += static_cast<std::size_t>(ur.reject[m]);
        cell.failed_permutations += ur.failed_perms[m];
        cell.redraws += ur.redraws;
      }
      table.add(cell);
    }
  }
  return table;
}

// --- table layouts ---

enum class TableLayout { Table1, AppendixLong };

inline TableLayout parse_layout(std::string_view text) {
  if (text == "table1") return TableLayout::Table1;
  if (text == "appendix") return TableLayout::AppendixLong;
  throw UsageError("unknown table layout '" + std::string(text) + "' (expected table1|appendix)");
}

/// Rows ready to be written as CSV or JSON. The first `key_columns` columns
/// identify a row; each value column is followed by a 2-decimal copy.
struct FormattedTable {
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t key_columns = 0;

  std::size_t value_columns() const { return (header.size() - key_columns) / 2; }
};

inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_fixed2(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

/// Which slice of the study a layout shows.
struct TableSelector {
  std::size_t rows = 10;
  std::size_t cols = 10;
  Scheme scheme = Scheme::Queen;              // Table1
  double rho = 0.0;                           // Table1
  DistributionKind distribution = DistributionKind::Normal;  // AppendixLong
};

namespace detail {

template <typename T>
void push_unique(std::vector<T>& v, const T& x) {
  if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

}  // namespace detail

inline FormattedTable emit_table(const PowerTable& table, TableLayout layout, const TableSelector& sel = {}) {
  if (table.empty()) throw DataError("cannot lay out an empty power table");

  std::vector<MeasureKind> measures;
  std::vector<DistributionKind> dists;
  std::vector<Scheme> schemes;
  std::vector<double> rhos;
  for (const auto& c : table.cells()) {
    detail::push_unique(measures, c.key.measure);
    detail::push_unique(dists, c.key.distribution);
    if (c.key.rows == sel.rows && c.key.cols == sel.cols) detail::push_unique(schemes, c.key.scheme);
    detail::push_unique(rhos, c.key.rho);
  }
  std::sort(measures.begin(), measures.end());
  std::sort(dists.begin(), dists.end());
  std::sort(schemes.begin(), schemes.end(), [](Scheme a, Scheme b) { return a > b; });  // Q before R
  std::sort(rhos.begin(), rhos.end());

  FormattedTable out;
  std::vector<std::string> missing;
  const std::string n_text = std::to_string(sel.rows * sel.cols);

  auto lookup = [&](const CellKey& k) -> std::optional<double> {
    if (const auto* c = table.find(k)) return c->rate();
    missing.push_back(PowerTable::describe(k));
    return std::nullopt;
  };
  auto append_values = [](std::vector<std::string>& row, const std::vector<std::optional<double>>& vals) {
    for (const auto& v : vals) row.push_back(v ? format_full(*v) : "");
    for (const auto& v : vals) row.push_back(v ? format_fixed2(*v) : "");
  };

  if (layout == TableLayout::Table1) {
    out.title = "Rejection rates at rho=" + format_full(sel.rho) + ", n=" + n_text + ", " +
                std::string(to_string(sel.scheme));
    out.header = {"measure"};
    out.key_columns = 1;
    for (auto d : dists) out.header.emplace_back(to_string(d));
    for (auto d : dists) out.header.push_back(std::string(to_string(d)) + "_2dp");
    for (auto m : measures) {
      std::vector<std::string> row{std::string(to_string(m))};
      std::vector<std::optional<double>> vals;
      for (auto d : dists) vals.push_back(lookup({m, d, sel.rho, sel.scheme, sel.rows, sel.cols}));
      append_values(row, vals);
      out.rows.push_back(std::move(row));
    }
  } else {
    if (schemes.empty()) throw DataError("power table has no cells on a " + std::to_string(sel.rows) + "x" +
                                         std::to_string(sel.cols) + " grid");
    out.title = "Empirical power, " + std::string(to_string(sel.distribution)) + ", n=" + n_text;
    out.header = {"measure", "n", "W"};
    out.key_columns = 3;
    for (double r : rhos) out.header.push_back("rho=" + format_full(r));
    for (double r : rhos) out.header.push_back("rho=" + format_full(r) + "_2dp");
    for (auto m : measures)
      for (auto s : schemes) {
        std::vector<std::string> row{std::string(to_string(m)), n_text, s == Scheme::Queen ? "Q" : "R"};
        std::vector<std::optional<double>> vals;
        for (double r : rhos) vals.push_back(lookup({m, sel.distribution, r, s, sel.rows, sel.cols}));
        append_values(row, vals);
        out.rows.push_back(std::move(row));
      }
  }

  if (!missing.empty()) {
    std::string msg = "power table is missing " + std::to_string(missing.size()) + " cell(s):";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }
  return out;
}

}  // namespace robspat
