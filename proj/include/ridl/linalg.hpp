#pragma once

// Dense numerical substrate: symmetric eigensolver, Kronecker products,
// linear solves and the PSD pseudoinverse. Backed by Eigen.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>

#include "ridl/errors.hpp"
#include "ridl/tolerances.hpp"

namespace ridl {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Ascending spectrum of a symmetric matrix.
struct SpectralData {
  Vector eigenvalues;
  /// Orthonormal eigenvectors in columns, ordered like `eigenvalues`.
  std::optional<DenseMatrix> eigenvectors;
  /// max_i ||A v_i - lambda_i v_i|| / ||A||_2
  double residual = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
  double operator[](std::size_t i) const { return eigenvalues(static_cast<Eigen::Index>(i)); }
  double smallest() const { return eigenvalues(0); }
  double largest() const { return eigenvalues(eigenvalues.size() - 1); }
};

namespace linalg_detail {

inline std::string shape(const DenseMatrix& a) {
  std::ostringstream os;
  os << a.rows() << "x" << a.cols();
  return os.str();
}

}  // namespace linalg_detail

inline bool all_finite(const DenseMatrix& a) { return a.allFinite(); }

inline double max_abs(const DenseMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

/// Symmetric to `rel_tol` relative to the largest entry.
inline bool is_symmetric(const DenseMatrix& a, double rel_tol = Tolerances::symmetry) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, max_abs(a));
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

inline void require_square_symmetric(const DenseMatrix& a, const char* op) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw ValidationError(std::string(op) + ": expected a non-empty square matrix, got " +
                          linalg_detail::shape(a));
  }
  if (!all_finite(a)) throw ValidationError(std::string(op) + ": non-finite entry");
  if (!is_symmetric(a)) throw ValidationError(std::string(op) + ": matrix is not symmetric");
}

/// Full spectrum of a symmetric matrix (Householder tridiagonalization followed
/// by implicit symmetric QR). The result is deterministic for a given input.
inline SpectralData sym_eigen(const DenseMatrix& a, bool with_vectors = false) {
  require_square_symmetric(a, "sym_eigen");
  // Symmetrize exactly so that the solver sees the same lower/upper triangle.
  const DenseMatrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(sym, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericalError("sym_eigen: eigensolver did not converge");

  SpectralData out;
  out.eigenvalues = solver.eigenvalues();  // Eigen returns ascending order
  const DenseMatrix& v = solver.eigenvectors();
  const double norm = std::max(std::abs(out.eigenvalues(0)),
                               std::abs(out.eigenvalues(out.eigenvalues.size() - 1)));
  double worst = 0.0;
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    const double r = (sym * v.col(i) - out.eigenvalues(i) * v.col(i)).norm();
    worst = std::max(worst, r);
  }
  out.residual = norm > 0.0 ? worst / norm : worst;
  if (with_vectors) out.eigenvectors = v;
  return out;
}

/// Eigenvalues only, ascending.
inline Vector sym_eigenvalues(const DenseMatrix& a) { return sym_eigen(a).eigenvalues; }

/// Spectral norm of a symmetric matrix.
inline double spectral_norm_symmetric(const DenseMatrix& a) {
  const Vector ev = sym_eigenvalues(a);
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// Kronecker product, (ra*rb) x (ca*cb).
inline DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b,
                        std::size_t max_dimension = Limits::kron_dimension) {
  if (!all_finite(a) || !all_finite(b)) throw ValidationError("kron: non-finite entry");
  const auto rows = static_cast<std::size_t>(a.rows() * b.rows());
  const auto cols = static_cast<std::size_t>(a.cols() * b.cols());
  if (rows > max_dimension || cols > max_dimension) {
    std::ostringstream os;
    os << "kron: result " << rows << "x" << cols << " exceeds the dimension cap " << max_dimension;
    throw ValidationError(os.str());
  }
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Column-stacking vectorization, so that vec(ABC) = (C^T kron A) vec(B).
inline Vector vec(const DenseMatrix& a) {
  return Eigen::Map<const Vector>(a.data(), a.size());
}

inline DenseMatrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw ValidationError("unvec: size mismatch");
  return Eigen::Map<const DenseMatrix>(v.data(), rows, cols);
}

namespace linalg_detail {

inline void check_system(const DenseMatrix& a, const Vector& rhs, const char* op) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw ValidationError(std::string(op) + ": expected a square matrix, got " + shape(a));
  }
  if (rhs.size() != a.rows()) throw ValidationError(std::string(op) + ": right-hand side size mismatch");
  if (!a.allFinite() || !rhs.allFinite()) throw ValidationError(std::string(op) + ": non-finite entry");
}

inline void check_rcond(double rcond, const char* op) {
  if (!(rcond >= Tolerances::min_rcond)) {
    std::ostringstream os;
    os << op << ": matrix is singular to working precision (reciprocal condition estimate "
       << rcond << ")";
    throw NumericalError(os.str());
  }
}

}  // namespace linalg_detail

/// Solves a*x = rhs with partial-pivoting LU.
inline Vector solve(const DenseMatrix& a, const Vector& rhs) {
  linalg_detail::check_system(a, rhs, "solve");
  Eigen::PartialPivLU<DenseMatrix> lu(a);
  linalg_detail::check_rcond(lu.rcond(), "solve");
  return lu.solve(rhs);
}

/// Solves a*x = rhs for symmetric `a`. Uses Cholesky when `a` is positive
/// definite and falls back to LU otherwise. Consumes `a` to avoid a copy of
/// large systems.
inline Vector solve_symmetric(DenseMatrix a, const Vector& rhs) {
  linalg_detail::check_system(a, rhs, "solve_symmetric");
  Eigen::LLT<Eigen::Ref<DenseMatrix>> llt(a);
  if (llt.info() == Eigen::Success) {
    linalg_detail::check_rcond(llt.rcond(), "solve_symmetric");
    return llt.solve(rhs);
  }
  // LLT overwrote the lower triangle; rebuild it from the untouched upper one.
  a.triangularView<Eigen::StrictlyLower>() = a.transpose();
  return solve(a, rhs);
}

/// Moore-Penrose pseudoinverse of a symmetric PSD matrix. Eigenvalues below
/// pinv_cutoff * lambda_max are treated as zero.
inline DenseMatrix pseudoinverse_psd(const DenseMatrix& a) {
  require_square_symmetric(a, "pseudoinverse_psd");
  const SpectralData s = sym_eigen(a, true);
  const double top = std::max(0.0, s.largest());
  const double cutoff = Tolerances::pinv_cutoff * top;
  if (s.smallest() < -std::max(cutoff, 1e-12)) {
    throw ValidationError("pseudoinverse_psd: matrix has a negative eigenvalue");
  }
  Vector inv = Vector::Zero(s.eigenvalues.size());
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    if (top > 0.0 && s.eigenvalues(i) > cutoff) inv(i) = 1.0 / s.eigenvalues(i);
  }
  const DenseMatrix& v = *s.eigenvectors;
  return v * inv.asDiagonal() * v.transpose();
}

}  // namespace ridl
