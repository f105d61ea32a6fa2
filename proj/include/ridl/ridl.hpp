#pragma once

// Randomly induced discretized Laplacians: at each step every node is active
// independently with probability p, the active nodes induce a subgraph G(t) of
// the underlying graph, and the update matrix is P(t) = I - eps * L(G(t)).
//
// This header samples such matrices, checks the consensus conditions, and
// computes E[P], E[P^2] and the N^2 x N^2 second-moment operator
// K = E[P Omega kron P] exactly.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "ridl/errors.hpp"
#include "ridl/graph.hpp"
#include "ridl/linalg.hpp"
#include "ridl/rng.hpp"
#include "ridl/tolerances.hpp"

namespace ridl {

/// Sampling and dynamics parameters. Build with from_k or from_epsilon so
/// that d_max matches the graph.
struct RidlConfig {
  double p = 1.0;        ///< activation probability, (0, 1]
  double epsilon = 0.0;  ///< step size, 0 < epsilon < 1/d_max
  double sigma2 = 1.0;   ///< noise variance, >= 0
  std::size_t d_max = 0; ///< maximum degree of the underlying graph

  /// Normalized step size eps * d_max.
  double k() const { return epsilon * static_cast<double>(d_max); }

  static RidlConfig from_epsilon(const UndirectedGraph& g, double p, double epsilon, double sigma2) {
    return RidlConfig{p, epsilon, sigma2, g.d_max()};
  }

  static RidlConfig from_k(const UndirectedGraph& g, double p, double k, double sigma2) {
    if (g.d_max() == 0) throw ValidationError("config: graph has no edges, k cannot be converted to eps");
    return RidlConfig{p, k / static_cast<double>(g.d_max()), sigma2, g.d_max()};
  }

  /// Throws ValidationError naming the first offending field.
  void validate() const {
    if (!(p > 0.0 && p <= 1.0)) throw ValidationError("config: p must lie in (0, 1], got " + std::to_string(p));
    if (!(epsilon > 0.0)) throw ValidationError("config: eps must be positive, got " + std::to_string(epsilon));
    if (d_max == 0) throw ValidationError("config: graph has no edges");
    if (!(k() < 1.0)) {
      std::ostringstream os;
      os << "config: eps must be strictly below 1/d_max = " << 1.0 / static_cast<double>(d_max)
         << " (k = eps*d_max = " << k() << ")";
      throw ValidationError(os.str());
    }
    if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
      throw ValidationError("config: sigma2 must be finite and non-negative");
    }
  }

  void validate_for(const UndirectedGraph& g) const {
    if (g.d_max() != d_max) {
      throw ValidationError("config: d_max " + std::to_string(d_max) + " does not match the graph's " +
                            std::to_string(g.d_max()));
    }
    validate();
  }
};

/// Diagonal of Gamma(t): 1 for active nodes.
struct ActivationPattern {
  std::vector<std::uint8_t> gamma;

  std::size_t size() const { return gamma.size(); }
  std::size_t active_count() const {
    std::size_t c = 0;
    for (auto g : gamma) c += g;
    return c;
  }
};

struct StochasticMatrixSample {
  DenseMatrix matrix;
  ActivationPattern pattern;
};

/// N i.i.d. Bernoulli(p) activations.
inline ActivationPattern sample_activation(std::size_t n, double p, Rng& rng) {
  if (!(p > 0.0 && p <= 1.0)) throw ValidationError("sample_activation: p must lie in (0, 1]");
  ActivationPattern a;
  a.gamma.resize(n);
  for (auto& g : a.gamma) g = uniform01(rng) < p ? 1 : 0;
  return a;
}

/// Laplacian of the subgraph induced by the active nodes, embedded in N x N.
inline DenseMatrix induced_laplacian(const UndirectedGraph& g, const ActivationPattern& pattern) {
  if (pattern.size() != g.n()) throw ValidationError("induced_laplacian: pattern length does not match graph");
  const auto n = static_cast<Eigen::Index>(g.n());
  DenseMatrix l = DenseMatrix::Zero(n, n);
  for (const auto& e : g.edges()) {
    if (pattern.gamma[e.u] && pattern.gamma[e.v]) {
      const auto u = static_cast<Eigen::Index>(e.u);
      const auto v = static_cast<Eigen::Index>(e.v);
      l(u, v) -= 1.0;
      l(v, u) -= 1.0;
      l(u, u) += 1.0;
      l(v, v) += 1.0;
    }
  }
  return l;
}

/// I - eps * L(pattern).
inline DenseMatrix ridl_matrix(const UndirectedGraph& g, double epsilon, const ActivationPattern& pattern) {
  const auto n = static_cast<Eigen::Index>(g.n());
  return DenseMatrix::Identity(n, n) - epsilon * induced_laplacian(g, pattern);
}

inline StochasticMatrixSample sample_ridl(const UndirectedGraph& g, const RidlConfig& cfg, Rng& rng) {
  cfg.validate_for(g);
  auto pattern = sample_activation(g.n(), cfg.p, rng);
  auto m = ridl_matrix(g, cfg.epsilon, pattern);
  return {std::move(m), std::move(pattern)};
}

// ---------------------------------------------------------------------------
// Consensus conditions

struct ConsensusReport {
  /// P_ii(t) >= 1 - k > 0 surely, i.e. eps * d_max < 1.
  bool positive_diagonal = false;
  /// The graph of E[P] (the underlying graph plus self-loops) is connected.
  bool globally_reachable = false;
  std::vector<std::string> failures;

  bool passed() const { return positive_diagonal && globally_reachable; }
};

inline ConsensusReport check_consensus_conditions(const UndirectedGraph& g, const RidlConfig& cfg) {
  ConsensusReport r;
  r.positive_diagonal = cfg.epsilon > 0.0 && g.d_max() > 0 &&
                        cfg.epsilon * static_cast<double>(g.d_max()) < 1.0;
  if (!r.positive_diagonal) {
    std::ostringstream os;
    os << "positive diagonal: eps * d_max = " << cfg.epsilon * static_cast<double>(g.d_max())
       << " is not strictly below 1";
    r.failures.push_back(os.str());
  }
  const bool active = cfg.p > 0.0 && cfg.p <= 1.0;
  const bool connected = is_connected(g);
  r.globally_reachable = active && connected;
  if (!connected) r.failures.push_back("global reachability: underlying graph is disconnected");
  if (!active) r.failures.push_back("global reachability: activation probability must lie in (0, 1]");
  return r;
}

// ---------------------------------------------------------------------------
// Expected operators

/// Omega = I - (1/N) 1 1^T.
inline DenseMatrix consensus_projector(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  return DenseMatrix::Identity(m, m) - DenseMatrix::Constant(m, m, 1.0 / static_cast<double>(n));
}

/// E[P] = I - eps p^2 L.
inline DenseMatrix expected_p(const UndirectedGraph& g, const RidlConfig& cfg) {
  cfg.validate_for(g);
  const auto n = static_cast<Eigen::Index>(g.n());
  return DenseMatrix::Identity(n, n) - cfg.epsilon * cfg.p * cfg.p * laplacian(g);
}

/// E[P^2] = I + 2 eps p^2 (eps - eps p - 1) L + eps^2 p^3 L^2.
inline DenseMatrix expected_p_squared(const UndirectedGraph& g, const RidlConfig& cfg) {
  cfg.validate_for(g);
  const auto n = static_cast<Eigen::Index>(g.n());
  const double e = cfg.epsilon;
  const double p = cfg.p;
  const DenseMatrix l = laplacian(g);
  return DenseMatrix::Identity(n, n) + 2.0 * e * p * p * (e - e * p - 1.0) * l + e * e * p * p * p * (l * l);
}

/// How the consensus projector enters the second-moment operator. All three
/// give the same noise index.
enum class KVariant {
  p_omega_kron_p,        ///< E[P Omega kron P]
  p_omega_kron_p_omega,  ///< E[P Omega kron P Omega]
  p_kron_p_omega,        ///< E[P kron P Omega]
};

namespace ridl_detail {

inline void check_node_cap(std::size_t n, std::size_t cap, const char* op) {
  if (n > cap) {
    std::ostringstream os;
    os << op << ": N = " << n << " exceeds the cap of " << cap
       << " nodes for the N^2-dimensional operator; use the bounds instead";
    throw ValidationError(os.str());
  }
}

/// m <- m * (X kron Y) where X, Y are each Omega or I (selected by the flags).
/// Column (k, l) of the N^2 x N^2 matrix sits at index k * N + l.
inline void right_multiply_projectors(DenseMatrix& m, std::size_t n, bool outer, bool inner) {
  const auto nn = static_cast<Eigen::Index>(n);
  const double inv = 1.0 / static_cast<double>(n);
  if (outer) {
    // (m (Omega kron I))[:, (k,l)] = m[:, (k,l)] - (1/N) sum_k' m[:, (k',l)]
    DenseMatrix acc = DenseMatrix::Zero(m.rows(), nn);
    for (Eigen::Index k = 0; k < nn; ++k) acc += m.middleCols(k * nn, nn);
    acc *= inv;
    for (Eigen::Index k = 0; k < nn; ++k) m.middleCols(k * nn, nn) -= acc;
  }
  if (inner) {
    // (m (I kron Omega))[:, (k,l)] = m[:, (k,l)] - (1/N) sum_l' m[:, (k,l')]
    for (Eigen::Index k = 0; k < nn; ++k) {
      auto block = m.middleCols(k * nn, nn);
      const Vector row_mean = block.rowwise().sum() * inv;
      block.colwise() -= row_mean;
    }
  }
}

inline void apply_variant(DenseMatrix& m, std::size_t n, KVariant variant) {
  switch (variant) {
    case KVariant::p_omega_kron_p: right_multiply_projectors(m, n, true, false); break;
    case KVariant::p_omega_kron_p_omega: right_multiply_projectors(m, n, true, true); break;
    case KVariant::p_kron_p_omega: right_multiply_projectors(m, n, false, true); break;
  }
}

}  // namespace ridl_detail

/// E[L(t) kron L(t)] from the Bernoulli moments of the activations. Entry
/// ((i,j),(k,l)) is E[L_ik L_jl]; every L entry is a polynomial in the gammas
/// (off-diagonal -A_ik g_i g_k, diagonal g_i sum_m A_im g_m) and each monomial
/// has expectation p^(number of distinct indices).
inline DenseMatrix expected_laplacian_kron(const UndirectedGraph& g, double p,
                                           std::size_t max_nodes = Limits::exact_nodes) {
  ridl_detail::check_node_cap(g.n(), max_nodes, "expected_laplacian_kron");
  const std::size_t n = g.n();
  const auto nn = static_cast<Eigen::Index>(n);
  const DenseMatrix& a = g.adjacency();
  const DenseMatrix a2 = a * a;
  const double pw[] = {1.0, p, p * p, p * p * p, p * p * p * p, p * p * p * p * p};

  auto adj = [&](std::size_t i, std::size_t j) {
    return a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };
  auto deg = [&](std::size_t i) { return static_cast<double>(g.degree(i)); };
  auto distinct3 = [](std::size_t x, std::size_t y, std::size_t z) -> std::size_t {
    return 1 + (y != x) + (z != x && z != y);
  };

  // Structurally nonzero entries of L: the diagonal and the edges, both orientations.
  struct Slot {
    std::size_t r, c;
  };
  std::vector<Slot> slots;
  slots.reserve(n + 2 * g.edge_count());
  for (std::size_t i = 0; i < n; ++i) {
    slots.push_back({i, i});
    for (auto k : g.neighbors(i)) slots.push_back({i, k});
  }

  DenseMatrix out = DenseMatrix::Zero(nn * nn, nn * nn);
  for (const auto& s1 : slots) {
    const std::size_t i = s1.r, k = s1.c;
    for (const auto& s2 : slots) {
      const std::size_t j = s2.r, l = s2.c;
      double v = 0.0;
      if (i != k && j != l) {
        // (-g_i g_k)(-g_j g_l)
        std::size_t d = 2 + (j != i && j != k) + (l != i && l != k && l != j);
        v = pw[d];
      } else if (i != k) {
        // -g_i g_k * g_j sum_m A_jm g_m
        const std::size_t s = distinct3(i, k, j);
        v = -(pw[s + 1] * deg(j) + (pw[s] - pw[s + 1]) * (adj(j, i) + adj(j, k)));
      } else if (j != l) {
        const std::size_t s = distinct3(j, l, i);
        v = -(pw[s + 1] * deg(i) + (pw[s] - pw[s + 1]) * (adj(i, j) + adj(i, l)));
      } else {
        // g_i g_j sum_{m,m'} A_im A_jm' g_m g_m'
        const std::size_t t = (i == j) ? 1 : 2;
        const double si = p * deg(i) + (1.0 - p) * adj(i, j);
        const double sj = p * deg(j) + (1.0 - p) * adj(j, i);
        const double shared = a2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        v = pw[t] * (si * sj + (p - p * p) * shared);
      }
      out(static_cast<Eigen::Index>(i * n + j), static_cast<Eigen::Index>(k * n + l)) = v;
    }
  }
  return out;
}

/// E[P kron P] = I - eps p^2 (I kron L + L kron I) + eps^2 E[L kron L].
inline DenseMatrix expected_p_kron_p(const UndirectedGraph& g, const RidlConfig& cfg,
                                     std::size_t max_nodes = Limits::exact_nodes) {
  cfg.validate_for(g);
  const std::size_t n = g.n();
  const auto nn = static_cast<Eigen::Index>(n);
  DenseMatrix m = expected_laplacian_kron(g, cfg.p, max_nodes);
  m *= cfg.epsilon * cfg.epsilon;
  m.diagonal().array() += 1.0;
  const double c = cfg.epsilon * cfg.p * cfg.p;
  const DenseMatrix l = laplacian(g);
  for (Eigen::Index i = 0; i < nn; ++i) {
    for (Eigen::Index j = 0; j < nn; ++j) {
      for (Eigen::Index x = 0; x < nn; ++x) {
        // I kron L: ((i,j),(i,x)) += L_jx ; L kron I: ((j,i),(x,i)) += L_jx
        const double lv = l(j, x);
        if (lv == 0.0) continue;
        m(i * nn + j, i * nn + x) -= c * lv;
        m(j * nn + i, x * nn + i) -= c * lv;
      }
    }
  }
  return m;
}

/// K from the closed-form Bernoulli moments: E[P kron P] (Omega kron I) for
/// the default variant.
inline DenseMatrix k_operator_moments(const UndirectedGraph& g, const RidlConfig& cfg,
                                      KVariant variant = KVariant::p_omega_kron_p,
                                      std::size_t max_nodes = Limits::exact_nodes) {
  DenseMatrix m = expected_p_kron_p(g, cfg, max_nodes);
  ridl_detail::apply_variant(m, g.n(), variant);
  return m;
}

/// Calls visit(pattern, weight) for each of the 2^N activation patterns with
/// nonzero probability.
template <typename Visitor>
void for_each_pattern(std::size_t n, double p, Visitor&& visit,
                      std::size_t max_nodes = Limits::enumeration_nodes) {
  if (n > max_nodes || n >= 63) {
    throw ValidationError("for_each_pattern: N = " + std::to_string(n) + " is too large to enumerate (cap " +
                          std::to_string(max_nodes) + ")");
  }
  if (!(p > 0.0 && p <= 1.0)) throw ValidationError("for_each_pattern: p must lie in (0, 1]");
  ActivationPattern pattern;
  pattern.gamma.assign(n, 0);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    std::size_t active = 0;
    for (std::size_t i = 0; i < n; ++i) {
      pattern.gamma[i] = static_cast<std::uint8_t>((bits >> i) & 1U);
      active += pattern.gamma[i];
    }
    const double w = std::pow(p, static_cast<double>(active)) *
                     std::pow(1.0 - p, static_cast<double>(n - active));
    if (w == 0.0) continue;
    visit(static_cast<const ActivationPattern&>(pattern), w);
  }
}

/// K by summing over all 2^N activation patterns. Exponential; used as an
/// independent check of k_operator_moments.
inline DenseMatrix k_operator_enumeration(const UndirectedGraph& g, const RidlConfig& cfg,
                                          KVariant variant = KVariant::p_omega_kron_p,
                                          std::size_t max_nodes = Limits::enumeration_nodes) {
  cfg.validate_for(g);
  const std::size_t n = g.n();
  const auto nn = static_cast<Eigen::Index>(n);
  const DenseMatrix omega = consensus_projector(n);
  DenseMatrix k = DenseMatrix::Zero(nn * nn, nn * nn);
  for_each_pattern(
      n, cfg.p,
      [&](const ActivationPattern& pattern, double w) {
        const DenseMatrix pm = ridl_matrix(g, cfg.epsilon, pattern);
        DenseMatrix left = pm;
        DenseMatrix right = pm;
        if (variant != KVariant::p_kron_p_omega) left = pm * omega;
        if (variant != KVariant::p_omega_kron_p) right = pm * omega;
        for (Eigen::Index i = 0; i < nn; ++i)
          for (Eigen::Index j = 0; j < nn; ++j) {
            const double c = w * left(i, j);
            if (c != 0.0) k.block(i * nn, j * nn, nn, nn) += c * right;
          }
      },
      max_nodes);
  return k;
}

struct ExpectedOperators {
  DenseMatrix p_bar;   ///< E[P]
  DenseMatrix p_bbar;  ///< E[P^2]
  DenseMatrix k_op;    ///< E[P Omega kron P], N^2 x N^2
  DenseMatrix omega;   ///< I - (1/N) 1 1^T

  std::size_t n() const { return static_cast<std::size_t>(p_bar.rows()); }
};

inline ExpectedOperators expected_operators(const UndirectedGraph& g, const RidlConfig& cfg,
                                            std::size_t max_nodes = Limits::exact_nodes) {
  return ExpectedOperators{expected_p(g, cfg), expected_p_squared(g, cfg),
                           k_operator_moments(g, cfg, KVariant::p_omega_kron_p, max_nodes),
                           consensus_projector(g.n())};
}

}  // namespace ridl
