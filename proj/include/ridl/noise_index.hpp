#pragma once

// Steady-state noise index J = (1/N) lim E||x(t) - (1/N) 1 1^T x(t)||^2 of
// x(t+1) = P(t) x(t) + n(t): the exact value through the N^2-dimensional
// second-moment operator, spectral bounds from E[P] and E[P^2], their RIDL
// forms in terms of the Laplacian spectrum, and the effective-resistance
// bounds.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ridl/errors.hpp"
#include "ridl/family.hpp"
#include "ridl/graph.hpp"
#include "ridl/linalg.hpp"
#include "ridl/ridl.hpp"
#include "ridl/tolerances.hpp"

namespace ridl {

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

namespace noise_detail {

/// Largest |eigenvalue| estimate of a symmetric matrix by power iteration.
inline double power_norm_estimate(const DenseMatrix& m, int iterations = 60) {
  Vector v = Vector::Ones(m.rows()).normalized();
  double est = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector w = m * v;
    est = w.norm();
    if (est == 0.0) return 0.0;
    v = w / est;
  }
  return est;
}

}  // namespace noise_detail

/// J = (sigma2/N) (vec(I)^T (I - K)^{-1} vec(I) - 1), evaluated with a
/// solve. `k_op` is any of the three equivalent second-moment operators.
inline double exact_noise_index(const DenseMatrix& k_op, std::size_t n, double sigma2) {
  const auto nn = static_cast<Eigen::Index>(n);
  if (k_op.rows() != nn * nn || k_op.cols() != nn * nn) {
    throw ValidationError("exact_noise_index: operator must be N^2 x N^2");
  }
  const Vector rhs = vec(DenseMatrix::Identity(nn, nn));
  DenseMatrix system = -k_op;
  system.diagonal().array() += 1.0;
  Vector y;
  try {
    if (is_symmetric(system, 1e-10)) {
      y = solve_symmetric(std::move(system), rhs);
    } else {
      y = solve(system, rhs);
    }
  } catch (const NumericalError& e) {
    std::ostringstream os;
    os << "exact_noise_index: I - K is near-singular (slow mixing); ||K|| estimate "
       << noise_detail::power_norm_estimate(k_op) << "; " << e.what();
    throw NumericalError(os.str());
  }
  const double j = sigma2 / static_cast<double>(n) * (rhs.dot(y) - 1.0);
  if (!std::isfinite(j)) throw NumericalError("exact_noise_index: non-finite result");
  return j;
}

inline double exact_noise_index(const ExpectedOperators& ops, double sigma2) {
  return exact_noise_index(ops.k_op, ops.n(), sigma2);
}

/// Lower bound from E[P], upper bound from E[P^2]. The Perron eigenvalue
/// (the largest) is dropped by position after the ascending sort.
inline Bounds generic_bounds(const DenseMatrix& p_bar, const DenseMatrix& p_bbar, double sigma2) {
  if (p_bar.rows() != p_bbar.rows()) throw ValidationError("generic_bounds: size mismatch");
  const Vector lp = sym_eigenvalues(p_bar);
  const Vector lpp = sym_eigenvalues(p_bbar);
  const Eigen::Index n = lp.size();
  auto check_perron = [&](const Vector& ev, const char* which) {
    if (std::abs(ev(n - 1) - 1.0) > 1e-8) {
      throw NumericalError(std::string("generic_bounds: largest eigenvalue of ") + which +
                           " is not 1; matrix is not stochastic");
    }
    if (n >= 2 && !(ev(n - 2) < 1.0 - Tolerances::perron_gap)) {
      std::ostringstream os;
      os << "generic_bounds: second-largest eigenvalue of " << which << " is " << ev(n - 2)
         << ", not below 1; the expected graph is disconnected";
      throw NumericalError(os.str());
    }
  };
  check_perron(lp, "E[P]");
  check_perron(lpp, "E[P^2]");
  if (!(lp(0) > -1.0 + Tolerances::perron_gap)) {
    throw NumericalError("generic_bounds: E[P] has an eigenvalue at or below -1");
  }
  Bounds b;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    b.lower += 1.0 / (1.0 - lp(i) * lp(i));
    b.upper += 1.0 / (1.0 - lpp(i));
  }
  b.lower *= sigma2 / static_cast<double>(n);
  b.upper *= sigma2 / static_cast<double>(n);
  return b;
}

/// Bounds in terms of the Laplacian spectrum of the underlying graph:
///   lower = sigma2/(eps p^2 N) sum_{i>=2} 1 / (2 l_i - eps p^2 l_i^2)
///   upper = sigma2/(eps p^2 N) sum_{i>=2} 1 / (2 (1 + eps p - eps) l_i - eps p l_i^2)
inline Bounds ridl_bounds(const Vector& laplacian_eigenvalues, const RidlConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = laplacian_eigenvalues.size();
  if (n < 2) throw ValidationError("ridl_bounds: need at least two eigenvalues");
  const double top = laplacian_eigenvalues(n - 1);
  if (!(top > 0.0 && laplacian_eigenvalues(1) > Tolerances::connectivity * top)) {
    throw ValidationError("ridl_bounds: lambda_2 is zero, the underlying graph is disconnected");
  }
  const double e = cfg.epsilon;
  const double p = cfg.p;
  Bounds b;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double l = laplacian_eigenvalues(i);
    const double dl = 2.0 * l - e * p * p * l * l;
    const double du = 2.0 * (1.0 + e * p - e) * l - e * p * l * l;
    if (!(dl > 0.0) || !(du > 0.0)) {
      std::ostringstream os;
      os << "ridl_bounds: nonpositive denominator at eigenvalue " << l << " (eps = " << e
         << " too large for this spectrum)";
      throw ValidationError(os.str());
    }
    b.lower += 1.0 / dl;
    b.upper += 1.0 / du;
  }
  const double scale = cfg.sigma2 / (e * p * p * static_cast<double>(n));
  b.lower *= scale;
  b.upper *= scale;
  return b;
}

inline Bounds ridl_bounds(const SpectralData& laplacian_spectrum, const RidlConfig& cfg) {
  return ridl_bounds(laplacian_spectrum.eigenvalues, cfg);
}

struct ResistanceBounds {
  double lower = 0.0;  ///< sigma2/(2 p^2) * R_ave/eps
  double upper = 0.0;  ///< sigma2/(2 p^3 (1-k)) * R_ave/eps
  /// Same bounds written with d_max * R_ave.
  double lower_dmax_form = 0.0;
  double upper_dmax_form = 0.0;
};

inline ResistanceBounds resistance_bounds(double r_ave, const RidlConfig& cfg) {
  cfg.validate();
  if (!(r_ave > 0.0)) throw ValidationError("resistance_bounds: R_ave must be positive");
  const double p = cfg.p;
  const double k = cfg.k();
  const double dmax = static_cast<double>(cfg.d_max);
  ResistanceBounds r;
  r.lower = cfg.sigma2 / (2.0 * p * p) * r_ave / cfg.epsilon;
  r.upper = cfg.sigma2 / (2.0 * p * p * p * (1.0 - k)) * r_ave / cfg.epsilon;
  r.lower_dmax_form = cfg.sigma2 / (2.0 * p * p * k) * dmax * r_ave;
  r.upper_dmax_form = cfg.sigma2 / (2.0 * p * p * p * k * (1.0 - k)) * dmax * r_ave;
  return r;
}

// ---------------------------------------------------------------------------
// Closed-form bounds for the families with explicit Laplacian spectra. These
// are written out independently of ridl_bounds so each can check the other.

inline Bounds star_bounds(std::size_t n, const RidlConfig& cfg) {
  const double N = static_cast<double>(n);
  const double e = cfg.epsilon;
  const double p = cfg.p;
  const double scale = cfg.sigma2 / (e * p * p * N);
  Bounds b;
  b.lower = scale * ((N - 2.0) / (2.0 - e * p * p) + 1.0 / (N * (2.0 - e * p * p * N)));
  b.upper = scale * ((N - 2.0) / (e * p + 2.0 - 2.0 * e) +
                     1.0 / (N * (2.0 * e * p + 2.0 - 2.0 * e - e * p * N)));
  return b;
}

inline Bounds path_bounds(std::size_t n, const RidlConfig& cfg) {
  const double N = static_cast<double>(n);
  const double e = cfg.epsilon;
  const double p = cfg.p;
  const double ep2 = e * p * p;
  const double ep = e * p;
  Bounds b;
  for (std::size_t i = 1; i < n; ++i) {
    const double c = std::cos(std::numbers::pi * static_cast<double>(i) / N);
    b.lower += 1.0 / (1.0 - ep2 - ep2 * c * c + (2.0 * ep2 - 1.0) * c);
    b.upper += 1.0 / (1.0 - e - ep * c * c + (ep + e - 1.0) * c);
  }
  const double scale = cfg.sigma2 / (4.0 * ep2 * N);
  b.lower *= scale;
  b.upper *= scale;
  return b;
}

inline Bounds complete_bounds(std::size_t n, const RidlConfig& cfg) {
  const double N = static_cast<double>(n);
  const double e = cfg.epsilon;
  const double p = cfg.p;
  Bounds b;
  b.lower = cfg.sigma2 * (N - 1.0) / (e * p * p * N * N * (2.0 - e * p * p * N));
  b.upper = cfg.sigma2 * (N - 1.0) / (e * p * p * N * N * (2.0 + 2.0 * e * p - 2.0 * e - e * p * N));
  return b;
}

// ---------------------------------------------------------------------------
// Large-N behaviour with eps = k / d_max.

enum class Growth { linear, logarithmic, bounded };

inline constexpr std::string_view to_string(Growth g) {
  switch (g) {
    case Growth::linear: return "linear";
    case Growth::logarithmic: return "logarithmic";
    case Growth::bounded: return "bounded";
  }
  return "unknown";
}

/// Predicted leading-order behaviour. For linear growth `lower`/`upper` are
/// slopes per node; for bounded growth they are the limits; for the grids
/// they are the effective-resistance bracket evaluated at `n`.
struct AsymptoticPrediction {
  Family family = Family::star;
  Growth growth = Growth::linear;
  double lower = 0.0;
  double upper = 0.0;
};

inline AsymptoticPrediction family_asymptotics(Family family, std::size_t n, const RidlConfig& cfg) {
  const double s2 = cfg.sigma2;
  const double p = cfg.p;
  const double k = cfg.k();
  if (!(k > 0.0 && k < 1.0)) throw ValidationError("family_asymptotics: k must lie in (0, 1)");
  switch (family) {
    case Family::star: {
      const double slope = s2 / (2.0 * k * p * p);
      return {family, Growth::linear, slope, slope};
    }
    case Family::complete:
      return {family, Growth::bounded, s2 / (p * p * k * (2.0 - p * p * k)), s2 / (p * p * k * (2.0 - p * k))};
    case Family::path:
      // d_max = 2 and R_ave = (N^2 - 1)/(6N) ~ N/6 in the resistance bracket.
      return {family, Growth::linear, s2 / (6.0 * p * p * k), s2 / (6.0 * p * p * p * k * (1.0 - k))};
    case Family::grid2d:
    case Family::grid3d: {
      const std::size_t axes = family == Family::grid2d ? 2 : 3;
      const auto side = static_cast<std::size_t>(
          std::max(2.0, std::round(std::pow(static_cast<double>(n), 1.0 / static_cast<double>(axes)))));
      const std::vector<std::size_t> dims(axes, side);
      const Vector spec = grid_spectrum(dims);
      double r_ave = 0.0;
      for (Eigen::Index i = 1; i < spec.size(); ++i) r_ave += 1.0 / spec(i);
      r_ave /= static_cast<double>(spec.size());
      const double dm = static_cast<double>(side >= 3 ? 2 * axes : axes);
      return {family, family == Family::grid2d ? Growth::logarithmic : Growth::bounded,
              s2 / (2.0 * p * p * k) * dm * r_ave, s2 / (2.0 * p * p * p * k * (1.0 - k)) * dm * r_ave};
    }
    default:
      throw ValidationError("family_asymptotics: no prediction for family " + std::string(to_string(family)));
  }
}

// ---------------------------------------------------------------------------
// Combined report

struct NoiseReport {
  std::size_t n = 0;
  RidlConfig config;
  std::optional<double> j_exact;
  double j_lb = 0.0;
  double j_ub = 0.0;
  double j_res_lb = 0.0;
  double j_res_ub = 0.0;
  double r_ave = 0.0;
  double lambda2 = 0.0;
  double lambda_n = 0.0;
  /// Which computation produced each number.
  std::vector<std::pair<std::string, std::string>> method_tags;

  /// j_res_lb <= j_lb <= j_exact <= j_ub <= j_res_ub with `slack` on each step.
  bool chain_holds(double slack = Tolerances::sandwich_slack) const {
    bool ok = j_res_lb <= j_lb + slack && j_lb <= j_ub + slack && j_ub <= j_res_ub + slack;
    if (j_exact) ok = ok && j_lb <= *j_exact + slack && *j_exact <= j_ub + slack;
    return ok;
  }
};

struct AnalyzeOptions {
  /// Compute the exact index only for N up to this many nodes.
  std::size_t exact_cap = Limits::exact_nodes;
  bool compute_exact = true;
};

inline NoiseReport analyze(const UndirectedGraph& g, const RidlConfig& cfg, const AnalyzeOptions& opt = {}) {
  cfg.validate_for(g);
  const auto cond = check_consensus_conditions(g, cfg);
  if (!cond.passed()) {
    std::string msg = "consensus conditions fail:";
    for (const auto& f : cond.failures) msg += " " + f + ";";
    throw ValidationError(msg);
  }
  NoiseReport r;
  r.n = g.n();
  r.config = cfg;
  const SpectralData spec = laplacian_spectrum(g);
  r.lambda2 = spec[1];
  r.lambda_n = spec.largest();
  r.r_ave = average_effective_resistance(spec);
  const Bounds b = ridl_bounds(spec, cfg);
  r.j_lb = b.lower;
  r.j_ub = b.upper;
  const ResistanceBounds rb = resistance_bounds(r.r_ave, cfg);
  r.j_res_lb = rb.lower;
  r.j_res_ub = rb.upper;
  r.method_tags = {{"j_lb", "laplacian-spectrum"},
                   {"j_ub", "laplacian-spectrum"},
                   {"j_res_lb", "effective-resistance"},
                   {"j_res_ub", "effective-resistance"}};
  if (opt.compute_exact && g.n() <= opt.exact_cap) {
    const DenseMatrix k = k_operator_moments(g, cfg, KVariant::p_omega_kron_p, opt.exact_cap);
    r.j_exact = exact_noise_index(k, g.n(), cfg.sigma2);
    r.method_tags.emplace_back("j_exact", "moment-operator-solve");
  }
  return r;
}

}  // namespace ridl
