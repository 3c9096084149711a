// robspat: command-line front end for the spatial correlation library.
//
//   robspat gen       simulate a SAR field
//   robspat measure   compute statistics on a field
//   robspat test      permutation tests on a field
//   robspat influence simulated contamination influence curves
//   robspat power     Monte Carlo power study
//   robspat report    re-lay out a saved power study
//
// Every subcommand resolves its configuration as defaults <- --config file
// <- explicit flags, writes that resolved config into manifest.json next to
// its outputs, and accepts such a manifest back through --config.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "robspat/error.hpp"
#include "robspat/inference.hpp"
#include "robspat/influence.hpp"
#include "robspat/io.hpp"
#include "robspat/lattice.hpp"
#include "robspat/mcstudy.hpp"
#include "robspat/measures.hpp"
#include "robspat/parallel.hpp"
#include "robspat/randfield.hpp"
#include "robspat/svg.hpp"
#include "robspat/version.hpp"

namespace fs = std::filesystem;
using namespace robspat;

namespace {

/// Records which flags were given so they can be laid over the config JSON.
class FlagBinder {
 public:
  template <typename T>
  CLI::Option* option(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto holder = std::make_shared<T>();
    auto* opt = app->add_option(flag, *holder, help);
    appliers_.push_back([opt, holder, key](json& j) {
      if (opt->count()) j[key] = *holder;
    });
    return opt;
  }

  CLI::Option* list(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    return option<std::vector<std::string>>(app, flag, key, help)->delimiter(',');
  }

  CLI::Option* flag(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto holder = std::make_shared<bool>(false);
    auto* opt = app->add_flag(flag, *holder, help);
    appliers_.push_back([opt, holder, key](json& j) {
      if (opt->count()) j[key] = *holder;
    });
    return opt;
  }

  void apply(json& j) const {
    for (const auto& f : appliers_) f(j);
  }

 private:
  std::vector<std::function<void(json&)>> appliers_;
};

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  std::size_t threads = default_threads();
};

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  json j = parse_json(read_text_file(path), path);
  if (j.is_object() && j.contains("config") && j.contains("subcommand")) return j.at("config");  // a manifest
  if (!j.is_object()) throw UsageError("config file '" + path + "' must hold a JSON object");
  return j;
}

json resolve(json defaults, const Common& common, const FlagBinder& flags) {
  const json file = load_config_file(common.config_path);
  for (auto it = file.begin(); it != file.end(); ++it) {
    if (!defaults.contains(it.key())) throw UsageError("unknown config key '" + it.key() + "'");
    defaults[it.key()] = it.value();
  }
  flags.apply(defaults);
  return defaults;
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config key '") + key + "': " + e.what());
  }
}

fs::path prepare_out(const Common& c) {
  fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + c.out_dir + "': " + ec.message());
  return dir;
}

void write_manifest(const fs::path& dir, const std::string& sub, const json& config,
                    const std::vector<std::string>& outputs) {
  json m = {{"tool", "robspat"},
            {"version", kVersion},
            {"subcommand", sub},
            {"seed", config.contains("seed") ? config.at("seed") : json(nullptr)},
            {"config", config},
            {"outputs", outputs}};
  write_text_file((dir / "manifest.json").string(), m.dump(2) + "\n");
}

std::vector<MeasureKind> parse_kinds(const json& j) {
  std::vector<MeasureKind> out;
  for (const auto& k : j) {
    const auto s = k.get<std::string>();
    if (s == "all" || s == "ALL") {
      out.assign(kAllMeasures.begin(), kAllMeasures.end());
      continue;
    }
    out.push_back(parse_measure(s));
  }
  if (out.empty()) throw UsageError("no measures requested");
  return out;
}

/// Topology from grid/scheme/torus or from an adjacency CSV.
struct Topology {
  WeightMatrix w;
  std::string scheme_label;
};

Topology topology_from(const json& cfg) {
  const auto adjacency = get<std::string>(cfg, "adjacency");
  if (!adjacency.empty()) return {load_adjacency_csv(adjacency), "adjacency"};
  LatticeSpec spec;
  std::tie(spec.rows, spec.cols) = parse_grid(get<std::string>(cfg, "grid"));
  spec.scheme = parse_scheme(get<std::string>(cfg, "scheme"));
  spec.torus = get<bool>(cfg, "torus");
  return {build_lattice_weights(spec), std::string(to_string(spec.scheme))};
}

json topology_defaults() {
  return {{"grid", "10x10"}, {"scheme", "rook"}, {"torus", false}, {"adjacency", ""}};
}

void add_topology_flags(CLI::App* app, FlagBinder& b) {
  b.option<std::string>(app, "--grid", "grid", "lattice size RxC");
  b.option<std::string>(app, "--scheme", "scheme", "contiguity: rook|queen");
  b.flag(app, "--torus", "torus", "wrap the lattice onto a torus");
  b.option<std::string>(app, "--adjacency", "adjacency", "adjacency-list CSV (i,j,w) instead of a lattice");
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON config or manifest; flags override it");
  app->add_option("--out", c.out_dir, "output directory");
  app->add_option("--threads", c.threads, "worker threads (results do not depend on it)");
}

Field field_from(const json& cfg, const WeightMatrix& w) {
  const auto raw = load_field_csv(get<std::string>(cfg, "input"));
  check_dims(w, raw.size());
  return center(raw, parse_centering(get<std::string>(cfg, "center")));
}

// --- subcommands ---

int run_gen(const json& cfg, const Common& common) {
  const auto topo = topology_from(cfg);
  const auto dist = parse_distribution(get<std::string>(cfg, "dist"));
  MixtureParams mix;
  mix.layout = parse_mixture_layout(get<std::string>(cfg, "mixture_layout"));
  const auto seed = get<std::uint64_t>(cfg, "seed");
  const auto stream_id = get<std::uint64_t>(cfg, "stream");
  const auto rho = get<double>(cfg, "rho");
  const RngStream stream(seed, "gen", stream_id);
  const SarSystem sys(topo.w, rho);
  const auto draw = sar_draw(sys, dist, stream, topo.w.size(), mix);
  const auto centering = parse_centering(get<std::string>(cfg, "center"));
  const Field z = centering == Centering::Mean ? draw.field : center(draw.raw, centering);

  const auto dir = prepare_out(common);
  std::ostringstream csv;
  write_field_csv(csv, z.values);
  write_text_file((dir / "field.csv").string(), csv.str());
  json sidecar = {{"seed", seed},
                  {"stream", {{"experiment", "gen"}, {"replication", stream_id}}},
                  {"rho", rho},
                  {"kind", to_string(dist)},
                  {"mixture", to_json(mix)},
                  {"center", to_string(centering)},
                  {"n", z.size()},
                  {"spec", cfg}};
  write_text_file((dir / "field.json").string(), sidecar.dump(2) + "\n");
  write_manifest(dir, "gen", cfg, {"field.csv", "field.json"});
  return 0;
}

int run_measure(const json& cfg, const Common& common) {
  const auto topo = topology_from(cfg);
  const Field z = field_from(cfg, topo.w);
  json out = json::array();
  for (auto k : parse_kinds(cfg.at("kinds"))) {
    const double v = compute_measure(k, topo.w, z);
    json row = {{"kind", to_string(k)}, {"value", v}, {"n", z.size()}, {"scheme", topo.scheme_label}};
    if (k == MeasureKind::GC || k == MeasureKind::RGC) row["one_minus_value"] = 1.0 - v;
    out.push_back(std::move(row));
  }
  const auto dir = prepare_out(common);
  write_text_file((dir / "measures.json").string(), out.dump(2) + "\n");
  write_manifest(dir, "measure", cfg, {"measures.json"});
  std::cout << out.dump(2) << '\n';
  return 0;
}

int run_test(const json& cfg, const Common& common) {
  const auto topo = topology_from(cfg);
  const Field z = field_from(cfg, topo.w);
  PermutationOptions opts;
  opts.n_perm = get<std::size_t>(cfg, "n_perm");
  opts.alpha = get<double>(cfg, "alpha");
  opts.threads = common.threads;
  const auto seed = get<std::uint64_t>(cfg, "seed");
  json out = json::array();
  for (auto k : parse_kinds(cfg.at("kinds"))) {
    const auto r = permutation_test(k, topo.w, z, opts, RngStream(seed, "test").derive(to_string(k)));
    json row = to_json(r);
    row["n"] = z.size();
    row["scheme"] = topo.scheme_label;
    out.push_back(std::move(row));
  }
  const auto dir = prepare_out(common);
  write_text_file((dir / "test.json").string(), out.dump(2) + "\n");
  write_manifest(dir, "test", cfg, {"test.json"});
  std::cout << out.dump(2) << '\n';
  return 0;
}

int run_influence(const json& cfg, const Common& common) {
  InfluenceConfig ic;
  std::tie(ic.lattice.rows, ic.lattice.cols) = parse_grid(get<std::string>(cfg, "grid"));
  ic.lattice.scheme = parse_scheme(get<std::string>(cfg, "scheme"));
  ic.lattice.torus = get<bool>(cfg, "torus");
  ic.rho = get<double>(cfg, "rho");
  ic.distribution = parse_distribution(get<std::string>(cfg, "dist"));
  ic.runs = get<std::size_t>(cfg, "runs");
  ic.points = get<std::size_t>(cfg, "points");
  ic.z_min = get<double>(cfg, "zmin");
  ic.z_max = get<double>(cfg, "zmax");
  const auto unit = get<std::string>(cfg, "unit");
  if (unit == "random") {
    ic.unit_policy = UnitPolicy::Random;
  } else {
    ic.unit_policy = UnitPolicy::Fixed;
    try {
      ic.fixed_unit = std::stoul(unit);
    } catch (const std::logic_error&) {
      throw UsageError("--unit must be 'random' or a location index");
    }
  }
  ic.zero_unit = get<bool>(cfg, "zero_unit");
  const auto orient = get<std::string>(cfg, "orientation");
  if (orient != "correlation" && orient != "raw") throw UsageError("--orientation must be correlation|raw");
  ic.orientation = orient == "raw" ? Orientation::Raw : Orientation::Correlation;
  ic.threads = common.threads;

  const auto curves = influence_curves(parse_kinds(cfg.at("kinds")), ic, get<std::uint64_t>(cfg, "seed"));

  const auto dir = prepare_out(common);
  write_text_file((dir / "influence.csv").string(), influence_csv(curves));
  std::vector<svg::Series> series;
  json summary = json::array();
  for (const auto& c : curves) {
    series.push_back({std::string(to_string(c.kind)), c.grid, c.mean_influence});
    summary.push_back({{"kind", to_string(c.kind)}, {"max_abs_influence", c.max_abs()}, {"runs", c.runs},
                       {"redraws", c.redraws}});
  }
  write_text_file((dir / "influence.svg").string(),
                  svg::line_chart(series, "Simulated contamination influence", "contaminating value z1",
                                  "mean influence"));
  write_text_file((dir / "influence.json").string(), summary.dump(2) + "\n");
  write_manifest(dir, "influence", cfg, {"influence.csv", "influence.json", "influence.svg"});
  return 0;
}

/// Tables, cell CSV and rho=0 charts for a finished power study.
std::vector<std::string> write_power_outputs(const fs::path& dir, const PowerTable& table, const json& cfg_json,
                                             const std::string& layout) {
  std::vector<std::string> written;
  auto put = [&](const std::string& name, const std::string& text) {
    write_text_file((dir / name).string(), text);
    written.push_back(name);
  };
  put("power_cells.csv", power_cells_csv(table));
  put("power.json", json({{"config", cfg_json}, {"cells", to_json(table)}}).dump(2) + "\n");

  std::set<std::pair<std::size_t, std::size_t>> grids;
  std::vector<DistributionKind> dists;
  for (const auto& c : table.cells()) {
    grids.insert({c.key.rows, c.key.cols});
    if (std::find(dists.begin(), dists.end(), c.key.distribution) == dists.end()) dists.push_back(c.key.distribution);
  }
  std::sort(dists.begin(), dists.end());

  if (layout == "table1" || layout == "all") {
    for (const auto& [rows, cols] : grids)
      for (auto scheme : {Scheme::Queen, Scheme::Rook}) {
        TableSelector sel;
        sel.rows = rows;
        sel.cols = cols;
        sel.scheme = scheme;
        sel.rho = 0.0;
        if (!table.find({table.cells().front().key.measure, dists.front(), 0.0, scheme, rows, cols})) continue;
        const auto t = emit_table(table, TableLayout::Table1, sel);
        const std::string stem = "table1_n" + std::to_string(rows * cols) + "_" + std::string(to_string(scheme));
        put(stem + ".csv", to_csv(t));
        put(stem + ".json", to_json(t).dump(2) + "\n");
      }
  }
  if (layout == "appendix" || layout == "all") {
    for (const auto& [rows, cols] : grids)
      for (auto d : dists) {
        TableSelector sel;
        sel.rows = rows;
        sel.cols = cols;
        sel.distribution = d;
        const auto t = emit_table(table, TableLayout::AppendixLong, sel);
        const std::string stem = "appendix_" + std::string(to_string(d)) + "_n" + std::to_string(rows * cols);
        put(stem + ".csv", to_csv(t));
        put(stem + ".json", to_json(t).dump(2) + "\n");
      }
  }

  // rho = 0 bar charts, one per distribution.
  std::vector<MeasureKind> measures;
  for (const auto& c : table.cells())
    if (std::find(measures.begin(), measures.end(), c.key.measure) == measures.end()) measures.push_back(c.key.measure);
  std::sort(measures.begin(), measures.end());
  for (auto d : dists) {
    std::vector<std::string> series;
    std::vector<std::tuple<std::size_t, std::size_t, Scheme>> keys;
    for (const auto& [rows, cols] : grids)
      for (auto s : {Scheme::Queen, Scheme::Rook})
        if (table.find({measures.front(), d, 0.0, s, rows, cols})) {
          keys.emplace_back(rows, cols, s);
          series.push_back("n=" + std::to_string(rows * cols) + " " + (s == Scheme::Queen ? "Q" : "R"));
        }
    if (keys.empty()) continue;
    std::vector<std::string> groups;
    std::vector<std::vector<double>> values;
    for (auto m : measures) {
      groups.emplace_back(to_string(m));
      std::vector<double> row;
      for (const auto& [rows, cols, s] : keys) {
        const auto* c = table.find({m, d, 0.0, s, rows, cols});
        row.push_back(c ? c->rate() : 0.0);
      }
      values.push_back(std::move(row));
    }
    put("power_rho0_" + std::string(to_string(d)) + ".svg",
        svg::bar_chart(groups, series, values, "Rejection rate at rho = 0, " + std::string(to_string(d)),
                       "rejection rate"));
  }
  return written;
}

int run_power(const json& cfg, const Common& common) {
  PowerStudyConfig pc;
  from_json_into(cfg.at("study"), pc);
  pc.threads = common.threads;
  pc.validate();
  const bool quiet = get<bool>(cfg, "quiet");
  std::size_t last_decile = 0;
  const auto table = run_power_study(pc, [&](std::size_t done, std::size_t total) {
    if (quiet) return;
    const std::size_t decile = done * 10 / total;
    if (decile > last_decile) {
      last_decile = decile;
      std::fprintf(stderr, "power: %zu/%zu replications\n", done, total);
    }
  });
  const auto dir = prepare_out(common);
  auto outputs = write_power_outputs(dir, table, to_json(pc), get<std::string>(cfg, "layout"));
  write_manifest(dir, "power", cfg, outputs);
  return 0;
}

int run_report(const json& cfg, const Common& common) {
  const auto input = get<std::string>(cfg, "input");
  if (input.empty()) throw UsageError("report needs --input power.json");
  const json j = parse_json(read_text_file(input), input);
  const auto table = power_table_from_json(j);
  const json study = j.is_object() && j.contains("config") ? j.at("config") : json::object();
  const auto dir = prepare_out(common);
  auto outputs = write_power_outputs(dir, table, study, get<std::string>(cfg, "layout"));
  write_manifest(dir, "report", cfg, outputs);
  return 0;
}

/// Builds a power-study JSON from flags on top of the defaults / config.
json power_defaults() {
  return {{"study", to_json(PowerStudyConfig{})}, {"layout", "all"}, {"quiet", false}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classical and robust spatial autocorrelation: measures, permutation tests, influence curves "
               "and Monte Carlo power studies"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common common;
  struct Sub {
    CLI::App* app;
    FlagBinder flags;
    json defaults;
    std::function<int(const json&, const Common&)> run;
  };
  std::vector<std::unique_ptr<Sub>> subs;
  auto make = [&](const char* name, const char* help, json defaults, auto run) {
    auto s = std::make_unique<Sub>();
    s->app = app.add_subcommand(name, help);
    s->defaults = std::move(defaults);
    s->run = run;
    add_common(s->app, common);
    subs.push_back(std::move(s));
    return subs.back().get();
  };

  // gen
  {
    json d = topology_defaults();
    d.update(json{{"rho", 0.0}, {"dist", "normal"}, {"mixture_layout", "scattered"}, {"seed", 1},
                  {"stream", 0}, {"center", "mean"}});
    auto* s = make("gen", "simulate a SAR field Z = rho W Z + eps", d, run_gen);
    add_topology_flags(s->app, s->flags);
    s->flags.option<double>(s->app, "--rho", "rho", "autoregressive parameter, |rho| < 1");
    s->flags.option<std::string>(s->app, "--dist", "dist", "normal|cauchy|laplace|mixture");
    s->flags.option<std::string>(s->app, "--mixture-layout", "mixture_layout", "scattered|blocked");
    s->flags.option<std::uint64_t>(s->app, "--seed", "seed", "master seed");
    s->flags.option<std::uint64_t>(s->app, "--stream", "stream", "replication index of the substream");
    s->flags.option<std::string>(s->app, "--center", "center", "mean|median");
  }
  // measure
  {
    json d = topology_defaults();
    d.update(json{{"input", ""}, {"kinds", {"all"}}, {"center", "mean"}});
    auto* s = make("measure", "compute spatial correlation statistics", d, run_measure);
    add_topology_flags(s->app, s->flags);
    s->flags.option<std::string>(s->app, "--input", "input", "field CSV (column z)");
    s->flags.list(s->app, "--kinds", "kinds", "comma-separated measures or 'all'");
    s->flags.option<std::string>(s->app, "--center", "center", "mean|median");
  }
  // test
  {
    json d = topology_defaults();
    d.update(json{{"input", ""}, {"kinds", {"MC"}}, {"center", "mean"}, {"n_perm", 999}, {"alpha", 0.05},
                  {"seed", 1}});
    auto* s = make("test", "permutation test of no spatial correlation", d, run_test);
    add_topology_flags(s->app, s->flags);
    s->flags.option<std::string>(s->app, "--input", "input", "field CSV (column z)");
    s->flags.list(s->app, "--kinds,--kind", "kinds", "comma-separated measures or 'all'");
    s->flags.option<std::string>(s->app, "--center", "center", "mean|median");
    s->flags.option<std::size_t>(s->app, "--n-perm", "n_perm", "number of permutations");
    s->flags.option<double>(s->app, "--alpha", "alpha", "test level");
    s->flags.option<std::uint64_t>(s->app, "--seed", "seed", "master seed");
  }
  // influence
  {
    json d = {{"grid", "10x10"}, {"scheme", "rook"}, {"torus", false}, {"rho", 0.5}, {"dist", "normal"},
              {"kinds", {"MC", "GC", "APLE"}}, {"runs", 1000}, {"points", 41}, {"zmin", -10.0}, {"zmax", 10.0},
              {"unit", "random"}, {"zero_unit", true}, {"orientation", "correlation"}, {"seed", 1}};
    auto* s = make("influence", "simulated influence curves of one contaminated location", d, run_influence);
    s->flags.option<std::string>(s->app, "--grid", "grid", "lattice size RxC");
    s->flags.option<std::string>(s->app, "--scheme", "scheme", "rook|queen");
    s->flags.flag(s->app, "--torus", "torus", "wrap the lattice onto a torus");
    s->flags.option<double>(s->app, "--rho", "rho", "SAR parameter of the base fields");
    s->flags.option<std::string>(s->app, "--dist", "dist", "innovation distribution of the base fields");
    s->flags.list(s->app, "--kinds", "kinds", "comma-separated measures or 'all'");
    s->flags.option<std::size_t>(s->app, "--runs", "runs", "simulation runs averaged per curve");
    s->flags.option<std::size_t>(s->app, "--points", "points", "grid points in [zmin, zmax]");
    s->flags.option<double>(s->app, "--zmin", "zmin", "smallest contaminating value");
    s->flags.option<double>(s->app, "--zmax", "zmax", "largest contaminating value");
    s->flags.option<std::string>(s->app, "--unit", "unit", "'random' or a fixed location index");
    s->flags.option<bool>(s->app, "--zero-unit", "zero_unit", "zero the unit before contaminating (true|false)");
    s->flags.option<std::string>(s->app, "--orientation", "orientation", "correlation (1-GC for Geary) | raw");
    s->flags.option<std::uint64_t>(s->app, "--seed", "seed", "master seed");
  }
  // power
  {
    auto* s = make("power", "Monte Carlo power study", power_defaults(), run_power);
    // Study flags map onto the nested "study" object; collected separately.
    auto study_flags = std::make_shared<FlagBinder>();
    study_flags->list(s->app, "--grid", "grids", "lattice sizes RxC (comma-separated)");
    study_flags->list(s->app, "--scheme", "schemes", "schemes for every grid: rook,queen");
    study_flags->list(s->app, "--rhos", "rhos", "comma-separated rho values");
    study_flags->list(s->app, "--dist", "distributions", "comma-separated distributions");
    study_flags->list(s->app, "--kinds", "measures", "comma-separated measures or 'all'");
    study_flags->option<std::size_t>(s->app, "--reps", "replications", "replications per cell");
    study_flags->option<std::size_t>(s->app, "--n-perm", "n_perm", "permutations per test");
    study_flags->option<double>(s->app, "--alpha", "alpha", "test level");
    study_flags->option<std::uint64_t>(s->app, "--seed", "seed", "master seed");
    study_flags->option<std::string>(s->app, "--center", "center", "mean|median");
    study_flags->option<std::string>(s->app, "--mixture-layout", "mixture_layout", "blocked|scattered");
    s->flags.option<std::string>(s->app, "--layout", "layout", "table1|appendix|all");
    s->flags.flag(s->app, "--quiet", "quiet", "no progress output");
    s->run = [study_flags](const json& cfg, const Common& common) {
      json resolved = cfg;
      json overlay = json::object();
      study_flags->apply(overlay);
      json& study = resolved["study"];
      for (auto it = overlay.begin(); it != overlay.end(); ++it) {
        const auto& key = it.key();
        if (key == "grids") {
          // --grid and --scheme together describe the grid list.
          json grids = json::array();
          for (const auto& g : it.value()) grids.push_back({{"grid", g}});
          study["grids"] = grids;
        } else if (key == "schemes") {
          continue;
        } else if (key == "rhos") {
          std::vector<double> rhos;
          for (const auto& r : it.value()) {
            try {
              rhos.push_back(std::stod(r.get<std::string>()));
            } catch (const std::logic_error&) {
              throw UsageError("--rhos: not a number: " + r.get<std::string>());
            }
          }
          study["rhos"] = rhos;
        } else if (key == "measures") {
          json kinds = json::array();
          for (auto k : parse_kinds(it.value())) kinds.push_back(to_string(k));
          study["measures"] = kinds;
        } else if (key == "mixture_layout") {
          study["mixture"]["layout"] = it.value();
        } else {
          study[key] = it.value();
        }
      }
      if (overlay.contains("schemes")) {
        if (!study.contains("grids")) throw UsageError("--scheme needs grids in the study");
        for (auto& g : study["grids"]) g["schemes"] = overlay["schemes"];
      }
      // Materialize the full study so the manifest holds every default.
      PowerStudyConfig pc;
      from_json_into(study, pc);
      study = to_json(pc);
      return run_power(resolved, common);
    };
  }
  // report
  {
    json d = {{"input", ""}, {"layout", "all"}};
    auto* s = make("report", "re-emit tables and charts from a saved power.json", d, run_report);
    s->flags.option<std::string>(s->app, "--input", "input", "power.json written by `power`");
    s->flags.option<std::string>(s->app, "--layout", "layout", "table1|appendix|all");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorCategory::Usage);
  }

  try {
    for (const auto& s : subs) {
      if (!s->app->parsed()) continue;
      const json cfg = resolve(s->defaults, common, s->flags);
      return s->run(cfg, common);
    }
  } catch (const Error& e) {
    std::cerr << "robspat: " << e.what() << '\n';
    return e.exit_code();
  } catch (const json::exception& e) {
    std::cerr << "robspat: configuration error: " << e.what() << '\n';
    return static_cast<int>(ErrorCategory::Usage);
  } catch (const std::exception& e) {
    std::cerr << "robspat: " << e.what() << '\n';
    return 1;
  }
  return static_cast<int>(ErrorCategory::Usage);
}
