#pragma once

// Underlying graphs: generators for the standard families, Laplacians,
// connectivity and average effective resistance.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ridl/errors.hpp"
#include "ridl/linalg.hpp"
#include "ridl/rng.hpp"
#include "ridl/tolerances.hpp"

namespace ridl {

/// Unordered node pair, stored with u < v.
struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple undirected graph on nodes 0..n-1.
class UndirectedGraph {
 public:
  /// Validates and normalizes the edge list. Self-loops, duplicates and
  /// out-of-range endpoints are rejected.
  static UndirectedGraph from_edges(std::size_t n, std::vector<Edge> edges) {
    if (n < 2) throw ValidationError("graph: node count must be at least 2");
    for (auto& e : edges) {
      if (e.u >= n || e.v >= n) {
        std::ostringstream os;
        os << "graph: edge {" << e.u << ", " << e.v << "} references a node outside 0.." << n - 1;
        throw ValidationError(os.str());
      }
      if (e.u == e.v) throw ValidationError("graph: self-loop at node " + std::to_string(e.u));
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end());
    if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end()) {
      std::ostringstream os;
      os << "graph: duplicate edge {" << dup->u << ", " << dup->v << "}";
      throw ValidationError(os.str());
    }
    return UndirectedGraph(n, std::move(edges));
  }

  std::size_t n() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  const DenseMatrix& adjacency() const { return adjacency_; }
  const std::vector<std::size_t>& degrees() const { return degrees_; }
  std::size_t degree(std::size_t i) const { return degrees_[i]; }
  std::size_t d_max() const { return d_max_; }
  std::span<const std::size_t> neighbors(std::size_t i) const { return neighbors_[i]; }

  friend bool operator==(const UndirectedGraph& a, const UndirectedGraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  UndirectedGraph(std::size_t n, std::vector<Edge> edges)
      : n_(n), edges_(std::move(edges)), adjacency_(DenseMatrix::Zero(n, n)),
        degrees_(n, 0), neighbors_(n) {
    for (const auto& e : edges_) {
      const auto u = static_cast<Eigen::Index>(e.u);
      const auto v = static_cast<Eigen::Index>(e.v);
      adjacency_(u, v) = adjacency_(v, u) = 1.0;
      ++degrees_[e.u];
      ++degrees_[e.v];
      neighbors_[e.u].push_back(e.v);
      neighbors_[e.v].push_back(e.u);
    }
    for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
    d_max_ = *std::max_element(degrees_.begin(), degrees_.end());
  }

  std::size_t n_;
  std::vector<Edge> edges_;
  DenseMatrix adjacency_;
  std::vector<std::size_t> degrees_;
  std::vector<std::vector<std::size_t>> neighbors_;
  std::size_t d_max_ = 0;
};

// ---------------------------------------------------------------------------
// Generators

/// Star S_n with hub 0.
inline UndirectedGraph make_star(std::size_t n) {
  if (n < 3) throw ValidationError("make_star: n must be at least 3");
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) edges.push_back({0, i});
  return UndirectedGraph::from_edges(n, std::move(edges));
}

inline UndirectedGraph make_path(std::size_t n) {
  if (n < 2) throw ValidationError("make_path: n must be at least 2");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return UndirectedGraph::from_edges(n, std::move(edges));
}

/// Cartesian grid with 1 to 3 axes. Node (i0, i1, i2) has index
/// i0 + dims[0] * (i1 + dims[1] * i2).
inline UndirectedGraph make_grid(std::span<const std::size_t> dims) {
  if (dims.empty() || dims.size() > 3) throw ValidationError("make_grid: between 1 and 3 dimensions required");
  for (auto d : dims) {
    if (d < 2) throw ValidationError("make_grid: every side length must be at least 2");
  }
  std::size_t n = 1;
  for (auto d : dims) n *= d;

  std::vector<Edge> edges;
  std::vector<std::size_t> stride(dims.size(), 1);
  for (std::size_t a = 1; a < dims.size(); ++a) stride[a] = stride[a - 1] * dims[a - 1];
  for (std::size_t node = 0; node < n; ++node) {
    for (std::size_t a = 0; a < dims.size(); ++a) {
      const std::size_t coord = (node / stride[a]) % dims[a];
      if (coord + 1 < dims[a]) edges.push_back({node, node + stride[a]});
    }
  }
  return UndirectedGraph::from_edges(n, std::move(edges));
}

inline UndirectedGraph make_grid(std::initializer_list<std::size_t> dims) {
  const std::vector<std::size_t> d(dims);
  return make_grid(std::span<const std::size_t>(d));
}

inline UndirectedGraph make_complete(std::size_t n) {
  if (n < 2) throw ValidationError("make_complete: n must be at least 2");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j});
  return UndirectedGraph::from_edges(n, std::move(edges));
}

inline bool is_connected(const UndirectedGraph& g);

struct ErdosRenyiSample {
  UndirectedGraph graph;
  /// Number of draws consumed, 1 when the first draw was accepted.
  std::size_t attempts;
};

/// G(n, p_er). With `require_connected`, disconnected draws are discarded and
/// redrawn from the same stream, up to `max_attempts` draws.
inline ErdosRenyiSample make_erdos_renyi(std::size_t n, double p_er, Rng& rng,
                                         bool require_connected = true,
                                         std::size_t max_attempts = Limits::er_max_attempts) {
  if (n < 2) throw ValidationError("make_erdos_renyi: n must be at least 2");
  if (!(p_er > 0.0 && p_er <= 1.0)) throw ValidationError("make_erdos_renyi: p_er must lie in (0, 1]");
  if (max_attempts == 0) throw ValidationError("make_erdos_renyi: max_attempts must be positive");

  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (uniform01(rng) < p_er) edges.push_back({i, j});
    auto g = UndirectedGraph::from_edges(n, std::move(edges));
    if (!require_connected || is_connected(g)) return {std::move(g), attempt};
  }
  std::ostringstream os;
  os << "make_erdos_renyi: no connected draw in " << max_attempts << " attempts (n=" << n
     << ", p_er=" << p_er << "); p_er is too small for connectivity at this size";
  throw NumericalError(os.str());
}

// ---------------------------------------------------------------------------
// Laplacian and spectra

/// L = D - A.
inline DenseMatrix laplacian(const UndirectedGraph& g) {
  DenseMatrix l = -g.adjacency();
  for (std::size_t i = 0; i < g.n(); ++i) {
    l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = static_cast<double>(g.degree(i));
  }
  return l;
}

inline SpectralData laplacian_spectrum(const UndirectedGraph& g, bool with_vectors = false) {
  return sym_eigen(laplacian(g), with_vectors);
}

/// Breadth-first reachability from node 0.
inline bool is_connected(const UndirectedGraph& g) {
  std::vector<char> seen(g.n(), 0);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop();
    for (auto v : g.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == g.n();
}

/// lambda_2 > connectivity * lambda_N on an ascending Laplacian spectrum.
inline bool spectrally_connected(const SpectralData& laplacian_spectrum) {
  if (laplacian_spectrum.size() < 2) return false;
  const double top = laplacian_spectrum.largest();
  return top > 0.0 && laplacian_spectrum[1] > Tolerances::connectivity * top;
}

/// R_ave = (1/N) sum_{i>=2} 1/lambda_i(L).
inline double average_effective_resistance(const SpectralData& laplacian_spectrum) {
  if (!spectrally_connected(laplacian_spectrum)) {
    throw ValidationError("average_effective_resistance: graph is disconnected (lambda_2 is zero)");
  }
  double sum = 0.0;
  for (std::size_t i = 1; i < laplacian_spectrum.size(); ++i) sum += 1.0 / laplacian_spectrum[i];
  return sum / static_cast<double>(laplacian_spectrum.size());
}

inline double average_effective_resistance(const UndirectedGraph& g) {
  return average_effective_resistance(laplacian_spectrum(g));
}

// Closed-form Laplacian spectra, ascending.

inline Vector star_spectrum(std::size_t n) {
  Vector s = Vector::Ones(static_cast<Eigen::Index>(n));
  s(0) = 0.0;
  s(s.size() - 1) = static_cast<double>(n);
  return s;
}

inline Vector path_spectrum(std::size_t n) {
  Vector s(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    s(static_cast<Eigen::Index>(i)) =
        2.0 - 2.0 * std::cos(std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return s;
}

inline Vector complete_spectrum(std::size_t n) {
  Vector s = Vector::Constant(static_cast<Eigen::Index>(n), static_cast<double>(n));
  s(0) = 0.0;
  return s;
}

/// All sums sum_a (2 - 2 cos(pi h_a / dims[a])), h_a in 0..dims[a]-1.
inline Vector grid_spectrum(std::span<const std::size_t> dims) {
  std::vector<double> values{0.0};
  for (auto side : dims) {
    std::vector<double> next;
    next.reserve(values.size() * side);
    for (double base : values)
      for (std::size_t h = 0; h < side; ++h)
        next.push_back(base + 2.0 - 2.0 * std::cos(std::numbers::pi * static_cast<double>(h) /
                                                   static_cast<double>(side)));
    values = std::move(next);
  }
  std::sort(values.begin(), values.end());
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// ---------------------------------------------------------------------------
// Edge-list text format: "n m" followed by m lines "i j", 0-indexed.

inline UndirectedGraph read_edge_list(std::istream& in) {
  long long n = 0;
  long long m = 0;
  if (!(in >> n >> m)) throw ValidationError("edge list: expected header \"n m\"");
  if (n < 2 || m < 0) throw ValidationError("edge list: header needs n >= 2 and m >= 0");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long e = 0; e < m; ++e) {
    long long i = 0;
    long long j = 0;
    if (!(in >> i >> j)) {
      throw ValidationError("edge list: expected " + std::to_string(m) + " edges, read " +
                            std::to_string(e));
    }
    if (i < 0 || j < 0) throw ValidationError("edge list: negative node index");
    edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
  }
  std::string trailing;
  if (in >> trailing) throw ValidationError("edge list: unexpected trailing content \"" + trailing + "\"");
  return UndirectedGraph::from_edges(static_cast<std::size_t>(n), std::move(edges));
}

inline UndirectedGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open graph file " + path);
  return read_edge_list(in);
}

inline void write_edge_list(std::ostream& out, const UndirectedGraph& g) {
  out << g.n() << ' ' << g.edge_count() << '\n';
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

}  // namespace ridl
