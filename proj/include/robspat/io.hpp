#pragma once

// File formats: field CSV, JSON encodings of configs and results, table CSV.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"  // nlohmann/json, vendored

#include "robspat/error.hpp"
#include "robspat/inference.hpp"
#include "robspat/influence.hpp"
#include "robspat/lattice.hpp"
#include "robspat/mcstudy.hpp"
#include "robspat/measures.hpp"
#include "robspat/randfield.hpp"

namespace robspat {

using json = nlohmann::ordered_json;

// --- field CSV: one column `z`, header optional ---

inline std::vector<double> read_field_csv(std::istream& in, const std::string& name = "field") {
  std::vector<double> z;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    line = line.substr(first);
    if (lineno == 1 && (line == "z" || line == "\"z\"")) continue;
    std::size_t used = 0;
    try {
      z.push_back(std::stod(line, &used));
    } catch (const std::logic_error&) {
      throw DataError(name + " line " + std::to_string(lineno) + ": not a number: '" + line + "'");
    }
    if (line.find_first_not_of(" \t", used) != std::string::npos)
      throw DataError(name + " line " + std::to_string(lineno) + ": expected a single column");
  }
  return z;
}

inline std::vector<double> load_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open field file '" + path + "'");
  return read_field_csv(in, path);
}

inline void write_field_csv(std::ostream& out, std::span<const double> z) {
  out << "z\n";
  for (double v : z) out << format_full(v) << '\n';
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json(const std::string& text, const std::string& name) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(name + ": invalid JSON: " + e.what());
  }
}

// --- CSV tables ---

inline std::string to_csv(const FormattedTable& t) {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return os.str();
}

inline json to_json(const FormattedTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json obj;
    for (std::size_t i = 0; i < r.size(); ++i) obj[t.header[i]] = r[i];
    rows.push_back(std::move(obj));
  }
  return {{"title", t.title}, {"columns", t.header}, {"rows", rows}};
}

// --- results ---

inline json to_json(const TestResult& r) {
  return {{"kind", to_string(r.kind)},
          {"statistic", r.statistic},
          {"p_value", r.p_value},
          {"n_permutations", r.n_permutations},
          {"alpha", r.alpha},
          {"reject", r.reject},
          {"null_mean", r.null_mean},
          {"failed_permutations", r.failed_permutations},
          {"retried_permutations", r.retried_permutations}};
}

inline json to_json(const PowerCell& c) {
  return {{"measure", to_string(c.key.measure)},
          {"distribution", to_string(c.key.distribution)},
          {"rho", c.key.rho},
          {"scheme", to_string(c.key.scheme)},
          {"rows", c.key.rows},
          {"cols", c.key.cols},
          {"n", c.key.rows * c.key.cols},
          {"replications", c.replications},
          {"rejections", c.rejections},
          {"rate", c.rate()},
          {"standard_error", c.standard_error()},
          {"redraws", c.redraws},
          {"failed_permutations", c.failed_permutations}};
}

inline json to_json(const PowerTable& t) {
  json cells = json::array();
  for (const auto& c : t.cells()) cells.push_back(to_json(c));
  return cells;
}

inline PowerTable power_table_from_json(const json& j) {
  const json& cells = j.is_object() && j.contains("cells") ? j.at("cells") : j;
  if (!cells.is_array()) throw DataError("power table JSON must be an array of cells");
  PowerTable t;
  try {
    for (const auto& c : cells) {
      PowerCell cell;
      cell.key.measure = parse_measure(c.at("measure").get<std::string>());
      cell.key.distribution = parse_distribution(c.at("distribution").get<std::string>());
      cell.key.rho = c.at("rho").get<double>();
      cell.key.scheme = parse_scheme(c.at("scheme").get<std::string>());
      cell.key.rows = c.at("rows").get<std::size_t>();
      cell.key.cols = c.at("cols").get<std::size_t>();
      cell.replications = c.at("replications").get<std::size_t>();
      cell.rejections = c.at("rejections").get<std::size_t>();
      cell.redraws = c.value("redraws", std::size_t{0});
      cell.failed_permutations = c.value("failed_permutations", std::size_t{0});
      t.add(cell);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed power table JSON: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("malformed power table JSON: ") + e.what());
  }
  return t;
}

/// Long-form CSV with one row per cell, full precision plus the MC standard error.
inline std::string power_cells_csv(const PowerTable& t) {
  std::ostringstream os;
  os << "measure,distribution,rho,scheme,rows,cols,n,replications,rejections,rate,standard_error,rate_2dp,"
        "redraws,failed_permutations\n";
  for (const auto& c : t.cells())
    os << to_string(c.key.measure) << ',' << to_string(c.key.distribution) << ',' << format_full(c.key.rho) << ','
       << to_string(c.key.scheme) << ',' << c.key.rows << ',' << c.key.cols << ',' << c.key.rows * c.key.cols << ','
       << c.replications << ',' << c.rejections << ',' << format_full(c.rate()) << ','
       << format_full(c.standard_error()) << ',' << format_fixed2(c.rate()) << ',' << c.redraws << ','
       << c.failed_permutations << '\n';
  return os.str();
}

inline std::string influence_csv(const std::vector<InfluenceCurve>& curves) {
  std::ostringstream os;
  os << "z1,mean_influence,kind\n";
  for (const auto& c : curves)
    for (std::size_t g = 0; g < c.grid.size(); ++g)
      os << format_full(c.grid[g]) << ',' << format_full(c.mean_influence[g]) << ',' << to_string(c.kind) << '\n';
  return os.str();
}

// --- configs ---

inline json to_json(const LatticeSpec& s) {
  return {{"rows", s.rows}, {"cols", s.cols}, {"scheme", to_string(s.scheme)}, {"torus", s.torus}};
}

inline json to_json(const MixtureParams& m) {
  return {{"weight", m.weight}, {"shift", m.shift}, {"layout", to_string(m.layout)}};
}

inline void from_json_into(const json& j, MixtureParams& m) {
  if (j.contains("weight")) m.weight = j.at("weight").get<double>();
  if (j.contains("shift")) m.shift = j.at("shift").get<double>();
  if (j.contains("layout")) m.layout = parse_mixture_layout(j.at("layout").get<std::string>());
}

inline json to_json(const PowerStudyConfig& c) {
  json grids = json::array();
  for (const auto& g : c.grids) {
    json schemes = json::array();
    for (auto s : g.schemes) schemes.push_back(to_string(s));
    grids.push_back({{"rows", g.rows}, {"cols", g.cols}, {"schemes", schemes}, {"torus", g.torus}});
  }
  json dists = json::array(), measures = json::array();
  for (auto d : c.distributions) dists.push_back(to_string(d));
  for (auto m : c.measures) measures.push_back(to_string(m));
  return {{"grids", grids},
          {"rhos", c.rhos},
          {"distributions", dists},
          {"measures", measures},
          {"replications", c.replications},
          {"n_perm", c.n_perm},
          {"alpha", c.alpha},
          {"seed", c.seed},
          {"center", to_string(c.centering)},
          {"mixture", to_json(c.mixture)}};
}

/// Overlays the keys present in `j` onto `c`.
inline void from_json_into(const json& j, PowerStudyConfig& c) {
  try {
    if (j.contains("grids")) {
      c.grids.clear();
      for (const auto& g : j.at("grids")) {
        GridDesign d;
        if (g.contains("grid")) {
          std::tie(d.rows, d.cols) = parse_grid(g.at("grid").get<std::string>());
        } else {
          d.rows = g.at("rows").get<std::size_t>();
          d.cols = g.at("cols").get<std::size_t>();
        }
        if (g.contains("schemes")) {
          d.schemes.clear();
          for (const auto& s : g.at("schemes")) d.schemes.push_back(parse_scheme(s.get<std::string>()));
        }
        d.torus = g.value("torus", false);
        c.grids.push_back(d);
      }
    }
    if (j.contains("rhos")) c.rhos = j.at("rhos").get<std::vector<double>>();
    if (j.contains("distributions")) {
      c.distributions.clear();
      for (const auto& d : j.at("distributions")) c.distributions.push_back(parse_distribution(d.get<std::string>()));
    }
    if (j.contains("measures")) {
      c.measures.clear();
      for (const auto& m : j.at("measures")) c.measures.push_back(parse_measure(m.get<std::string>()));
    }
    if (j.contains("replications")) c.replications = j.at("replications").get<std::size_t>();
    if (j.contains("n_perm")) c.n_perm = j.at("n_perm").get<std::size_t>();
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("center")) c.centering = parse_centering(j.at("center").get<std::string>());
    if (j.contains("mixture")) from_json_into(j.at("mixture"), c.mixture);
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid power study config: ") + e.what());
  }
}

}  // namespace robspat
