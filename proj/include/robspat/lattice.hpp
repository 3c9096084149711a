#pragma once

// Spatial weight matrices: regular lattices (rook / queen, optional torus
// wrap) and general adjacency lists. Every matrix handed out is
// row-standardized; the pre-standardization degree is kept as the
// connectivity eta_i.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <span>
#include <stdexcept>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "robspat/error.hpp"

namespace robspat {

enum class Scheme { Rook, Queen };

inline std::string_view to_string(Scheme s) { return s == Scheme::Rook ? "rook" : "queen"; }

inline Scheme parse_scheme(std::string_view text) {
  if (text == "rook" || text == "R" || text == "r") return Scheme::Rook;
  if (text == "queen" || text == "Q" || text == "q") return Scheme::Queen;
  throw UsageError("unknown contiguity scheme '" + std::string(text) + "' (expected rook|queen)");
}

struct LatticeSpec {
  std::size_t rows = 10;
  std::size_t cols = 10;
  Scheme scheme = Scheme::Rook;
  bool torus = false;

  std::size_t size() const { return rows * cols; }

  void validate() const {
    if (rows < 2 || cols < 2)
      throw DataError("degenerate lattice " + std::to_string(rows) + "x" + std::to_string(cols) +
                      ": rows and cols must both be >= 2");
  }

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

/// Parses "RxC" (e.g. "10x10").
inline std::pair<std::size_t, std::size_t> parse_grid(std::string_view text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string_view::npos) throw UsageError("grid must look like RxC, got '" + std::string(text) + "'");
  try {
    std::size_t used = 0;
    const std::string r(text.substr(0, x)), c(text.substr(x + 1));
    const auto rows = std::stoul(r, &used);
    if (used != r.size()) throw std::invalid_argument(r);
    const auto cols = std::stoul(c, &used);
    if (used != c.size()) throw std::invalid_argument(c);
    return {rows, cols};
  } catch (const std::logic_error&) {
    throw UsageError("grid must look like RxC, got '" + std::string(text) + "'");
  }
}

struct AdjacencyEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  double w = 0.0;
};

/// Sparse row-major weight matrix. Immutable after construction.
class WeightMatrix {
 public:
  struct Neighbor {
    std::size_t index;
    double weight;
  };

  WeightMatrix() = default;

  std::size_t size() const { return connectivity_.size(); }

  std::span<const Neighbor> row(std::size_t i) const {
    return {entries_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  /// Pre-standardization degree (sum of raw weights) of location i.
  double connectivity(std::size_t i) const { return connectivity_[i]; }
  std::span<const double> connectivity() const { return connectivity_; }

  /// Average connectivity of the standardized matrix, which is 1.
  double mean_connectivity() const { return mean_connectivity_; }

  /// tr(W^2) = sum_i sum_{j in N(i)} w_ij w_ji.
  double trace_w2() const { return trace_w2_; }

  std::size_t nonzeros() const { return entries_.size(); }

  /// w_ij, or 0 when j is not a neighbor of i.
  double weight(std::size_t i, std::size_t j) const {
    const auto r = row(i);
    const auto it = std::lower_bound(r.begin(), r.end(), j,
                                     [](const Neighbor& nb, std::size_t k) { return nb.index < k; });
    return (it != r.end() && it->index == j) ? it->weight : 0.0;
  }

  std::vector<AdjacencyEntry> to_adjacency_list() const {
    std::vector<AdjacencyEntry> out;
    out.reserve(nonzeros());
    for (std::size_t i = 0; i < size(); ++i)
      for (const auto& nb : row(i)) out.push_back({i, nb.index, nb.weight});
    return out;
  }

  /// Builds from raw (already validated, deduplicated) rows, sorts each row
  /// by column and row-standardizes.
  static WeightMatrix from_raw_rows(std::vector<std::vector<Neighbor>> rows) {
    WeightMatrix w;
    const std::size_t n = rows.size();
    w.offsets_.assign(n + 1, 0);
    w.connectivity_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& r = rows[i];
      if (r.empty()) throw DataError("location " + std::to_string(i) + " is isolated (no neighbors)");
      std::sort(r.begin(), r.end(), [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
      double eta = 0.0;
      for (const auto& nb : r) eta += nb.weight;
      w.connectivity_[i] = eta;
      for (const auto& nb : r) w.entries_.push_back({nb.index, nb.weight / eta});
      w.offsets_[i + 1] = w.entries_.size();
    }
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& nb : w.row(i)) tr += nb.weight * w.weight(nb.index, i);
    w.trace_w2_ = tr;
    w.mean_connectivity_ = 0.0;
    for (const auto& nb : w.entries_) w.mean_connectivity_ += nb.weight;
    w.mean_connectivity_ /= static_cast<double>(n);
    return w;
  }

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> entries_;
  std::vector<double> connectivity_;
  double trace_w2_ = 0.0;
  double mean_connectivity_ = 0.0;
};

/// Binary contiguity on a rows x cols grid (row-major cell numbering),
/// wrapped if torus, then row-standardized.
inline WeightMatrix build_lattice_weights(const LatticeSpec& spec) {
  spec.validate();
  const auto rows = static_cast<long>(spec.rows);
  const auto cols = static_cast<long>(spec.cols);
  std::vector<std::vector<WeightMatrix::Neighbor>> adj(spec.size());
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      const auto self = static_cast<std::size_t>(r * cols + c);
      auto& out = adj[self];
      for (long dr = -1; dr <= 1; ++dr) {
        for (long dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          if (spec.scheme == Scheme::Rook && dr != 0 && dc != 0) continue;
          long rr = r + dr, cc = c + dc;
          if (spec.torus) {
            rr = (rr + rows) % rows;
            cc = (cc + cols) % cols;
          } else if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) {
            continue;
          }
          const auto other = static_cast<std::size_t>(rr * cols + cc);
          // Narrow tori can reach the same cell twice, or wrap onto itself.
          if (other == self) continue;
          if (std::none_of(out.begin(), out.end(), [&](const auto& nb) { return nb.index == other; }))
            out.push_back({other, 1.0});
        }
      }
    }
  }
  return WeightMatrix::from_raw_rows(std::move(adj));
}

inline WeightMatrix from_adjacency_list(std::span<const AdjacencyEntry> pairs, std::size_t n) {
  if (n == 0) throw DataError("adjacency list needs at least one location");
  std::vector<std::vector<WeightMatrix::Neighbor>> adj(n);
  for (const auto& [i, j, w] : pairs) {
    if (i >= n || j >= n)
      throw DataError("edge (" + std::to_string(i) + "," + std::to_string(j) + ") out of range for n=" +
                      std::to_string(n));
    if (i == j) throw DataError("self-loop at node " + std::to_string(i));
    if (!(w > 0.0) || !std::isfinite(w))
      throw DataError("nonpositive weight on edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
    for (const auto& nb : adj[i])
      if (nb.index == j)
        throw DataError("duplicate edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
    adj[i].push_back({j, w});
  }
  std::vector<char> touched(n, 0);
  for (const auto& e : pairs) touched[e.i] = touched[e.j] = 1;
  for (std::size_t i = 0; i < n; ++i)
    if (!touched[i]) throw DataError("node " + std::to_string(i) + " is isolated");
  for (std::size_t i = 0; i < n; ++i)
    if (adj[i].empty()) throw DataError("node " + std::to_string(i) + " has no outgoing neighbors");
  return WeightMatrix::from_raw_rows(std::move(adj));
}

inline bool is_symmetric(const WeightMatrix& w, double tol = 1e-12) {
  for (std::size_t i = 0; i < w.size(); ++i)
    for (const auto& nb : w.row(i))
      if (std::abs(nb.weight - w.weight(nb.index, i)) > tol) return false;
  return true;
}

// --- adjacency-list CSV: header `i,j,w`, zero-based indices ---

inline std::vector<AdjacencyEntry> read_adjacency_csv(std::istream& in, std::size_t* max_index = nullptr) {
  std::vector<AdjacencyEntry> out;
  std::string line;
  std::size_t lineno = 0, hi = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (lineno == 1 && line.find_first_of("0123456789") != 0) continue;  // header
    std::istringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
      throw DataError("adjacency CSV line " + std::to_string(lineno) + ": expected i,j,w");
    auto index = [&](const std::string& t) {
      std::size_t used = 0;
      const auto first = t.find_first_not_of(" \t");
      if (first == std::string::npos || t[first] == '-' || t[first] == '+') throw std::invalid_argument(t);
      const auto v = std::stoul(t, &used);
      if (t.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(t);
      return static_cast<std::size_t>(v);
    };
    try {
      AdjacencyEntry e{index(a), index(b), std::stod(c)};
      hi = std::max({hi, e.i, e.j});
      out.push_back(e);
    } catch (const std::logic_error&) {
      throw DataError("adjacency CSV line " + std::to_string(lineno) + ": malformed number");
    }
  }
  if (max_index) *max_index = hi;
  return out;
}

/// Reads an adjacency CSV; n is inferred from the largest index unless given.
inline WeightMatrix load_adjacency_csv(const std::string& path, std::size_t n = 0) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open adjacency file '" + path + "'");
  std::size_t hi = 0;
  const auto entries = read_adjacency_csv(in, &hi);
  if (entries.empty()) throw DataError("adjacency file '" + path + "' has no edges");
  return from_adjacency_list(entries, n ? n : hi + 1);
}

inline void write_adjacency_csv(std::ostream& out, const WeightMatrix& w) {
  char buf[64];
  out << "i,j,w\n";
  for (const auto& e : w.to_adjacency_list()) {
    std::snprintf(buf, sizeof buf, "%.17g", e.w);
    out << e.i << ',' << e.j << ',' << buf << '\n';
  }
}

}  // namespace robspat
