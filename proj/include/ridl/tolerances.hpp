#pragma once

#include <cstddef>

namespace ridl {

/// Numerical tolerances and size caps shared by the library, the CLI and the tests.
struct Tolerances {
  /// Relative asymmetry accepted by the symmetric eigensolver.
  static constexpr double symmetry = 1e-12;
  /// Normalized eigen-residual guaranteed by sym_eigen.
  static constexpr double eigen_residual = 1e-8;
  /// Eigenvector orthonormality.
  static constexpr double orthonormality = 1e-8;
  /// lambda_2 > connectivity * lambda_N means connected.
  static constexpr double connectivity = 1e-9;
  /// Relative cut-off for the PSD pseudoinverse.
  static constexpr double pinv_cutoff = 1e-9;
  /// Solves refuse systems whose reciprocal condition estimate is below this.
  static constexpr double min_rcond = 1e-12;
  /// The Perron guard: second-largest eigenvalue of E[P], E[P^2] must be below 1 - perron_gap.
  static constexpr double perron_gap = 1e-9;
  /// Row-sum check on sampled stochastic matrices.
  static constexpr double row_sum = 1e-12;
  /// Absolute slack when checking the bound chain.
  static constexpr double sandwich_slack = 1e-9;
};

/// Size caps. These are defaults; callers may pass their own.
struct Limits {
  /// Largest rows/cols a kron result may have.
  static constexpr std::size_t kron_dimension = 16384;
  /// Largest N for which the N^2-dimensional exact system is built.
  static constexpr std::size_t exact_nodes = 64;
  /// Largest N accepted by the 2^N enumeration oracle.
  static constexpr std::size_t enumeration_nodes = 14;
  /// Resample budget for connected Erdos-Renyi draws.
  static constexpr std::size_t er_max_attempts = 1000;
  /// Upper limit on the automatically chosen simulation horizon.
  static constexpr std::size_t max_horizon = 100000;
};

}  // namespace ridl
