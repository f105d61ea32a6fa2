#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ridl/graph.hpp"
#include "ridl/linalg.hpp"

using namespace ridl;

namespace {

DenseMatrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

DenseMatrix random_symmetric(std::mt19937_64& rng, Eigen::Index n) {
  const DenseMatrix m = random_matrix(rng, n, n);
  return m + m.transpose();
}

DenseMatrix random_spd(std::mt19937_64& rng, Eigen::Index n) {
  const DenseMatrix m = random_matrix(rng, n, n);
  return m * m.transpose() + static_cast<double>(n) * DenseMatrix::Identity(n, n);
}

}  // namespace

TEST(SymEigen, TwoByTwoLaplacian) {
  DenseMatrix a(2, 2);
  a << 1, -1, -1, 1;
  const auto s = sym_eigen(a);
  EXPECT_NEAR(s[0], 0.0, 1e-14);
  EXPECT_NEAR(s[1], 2.0, 1e-14);
}

TEST(SymEigen, Identity) {
  const auto s = sym_eigen(DenseMatrix::Identity(5, 5));
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(s[i], 1.0);
}

TEST(SymEigen, PathFourMatchesClosedForm) {
  const auto s = sym_eigen(laplacian(make_path(4)));
  const double expected[] = {0.0, 2.0 - std::sqrt(2.0), 2.0, 2.0 + std::sqrt(2.0)};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(s[i], expected[i], 1e-12);
}

TEST(SymEigen, RejectsNonSymmetricAndNonFinite) {
  DenseMatrix a(2, 2);
  a << 1, 2, 3, 4;
  EXPECT_THROW(sym_eigen(a), ValidationError);
  DenseMatrix b = DenseMatrix::Identity(2, 2);
  b(0, 0) = std::nan("");
  EXPECT_THROW(sym_eigen(b), ValidationError);
  EXPECT_THROW(sym_eigen(DenseMatrix(2, 3)), ValidationError);
}

TEST(SymEigen, ReconstructionOnRandomSymmetricMatrices) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 200);
    const DenseMatrix a = random_symmetric(rng, n);
    const auto s = sym_eigen(a, true);
    ASSERT_TRUE(s.eigenvectors.has_value());
    const DenseMatrix& v = *s.eigenvectors;
    const double norm = std::max(std::abs(s.smallest()), std::abs(s.largest()));
    EXPECT_LE((a - v * s.eigenvalues.asDiagonal() * v.transpose()).norm(), 1e-8 * norm * std::sqrt(double(n)));
    EXPECT_LE((v.transpose() * v - DenseMatrix::Identity(n, n)).cwiseAbs().maxCoeff(), Tolerances::orthonormality);
    EXPECT_LE(s.residual, Tolerances::eigen_residual);
    for (Eigen::Index i = 1; i < n; ++i) EXPECT_LE(s.eigenvalues(i - 1), s.eigenvalues(i));
  }
}

TEST(SymEigen, ResidualBoundAtDimension1024) {
  std::mt19937_64 rng(11);
  const auto s = sym_eigen(random_symmetric(rng, 1024));
  EXPECT_LE(s.residual, Tolerances::eigen_residual);
}

TEST(SymEigen, Deterministic) {
  std::mt19937_64 rng(3);
  const DenseMatrix a = random_symmetric(rng, 40);
  const auto s1 = sym_eigen(a);
  const auto s2 = sym_eigen(a);
  EXPECT_EQ(s1.eigenvalues, s2.eigenvalues);
}

TEST(Kron, IdentityAndSwap) {
  EXPECT_EQ(kron(DenseMatrix::Identity(2, 2), DenseMatrix::Identity(2, 2)), DenseMatrix::Identity(4, 4));
  DenseMatrix swap(2, 2);
  swap << 0, 1, 1, 0;
  DenseMatrix two(1, 1);
  two << 2;
  DenseMatrix expected(2, 2);
  expected << 0, 2, 2, 0;
  EXPECT_EQ(kron(swap, two), expected);
}

TEST(Kron, VecIdentityOnRandomTriples) {
  // vec(ABC) = (C^T kron A) vec(B), with the product computed directly.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix a = random_matrix(rng, 3, 3);
    const DenseMatrix b = random_matrix(rng, 3, 3);
    const DenseMatrix c = random_matrix(rng, 3, 3);
    const Vector lhs = vec(a * b * c);
    const Vector rhs = kron(c.transpose(), a) * vec(b);
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Kron, MixedProduct) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix a = random_matrix(rng, 3, 3), b = random_matrix(rng, 3, 3);
    const DenseMatrix c = random_matrix(rng, 3, 3), d = random_matrix(rng, 3, 3);
    EXPECT_LE((kron(a, b) * kron(c, d) - kron(a * c, b * d)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Kron, DimensionCap) {
  EXPECT_THROW(kron(DenseMatrix::Identity(200, 200), DenseMatrix::Identity(100, 100)), ValidationError);
  EXPECT_THROW(kron(DenseMatrix::Identity(4, 4), DenseMatrix::Identity(4, 4), 15), ValidationError);
  EXPECT_NO_THROW(kron(DenseMatrix::Identity(4, 4), DenseMatrix::Identity(4, 4), 16));
}

TEST(Solve, TrivialSystems) {
  Vector rhs(3);
  rhs << 1, 2, 3;
  EXPECT_EQ(solve(DenseMatrix::Identity(3, 3), rhs), rhs);
  DenseMatrix d = DenseMatrix::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 4;
  Vector r2(2);
  r2 << 2, 4;
  const Vector x = solve(d, r2);
  EXPECT_DOUBLE_EQ(x(0), 1.0);
  EXPECT_DOUBLE_EQ(x(1), 1.0);
}

TEST(Solve, RandomSpdRoundTrip) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 25; ++trial) {
    const DenseMatrix a = random_spd(rng, 20);
    const Vector x = random_matrix(rng, 20, 1);
    const Vector rhs = a * x;
    EXPECT_LE((solve(a, rhs) - x).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((solve_symmetric(a, rhs) - x).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((a * solve(a, rhs) - rhs).norm(), 1e-9 * rhs.norm());
  }
}

TEST(Solve, SymmetricIndefiniteFallsBackToLu) {
  DenseMatrix a(2, 2);
  a << 0, 1, 1, 0;
  Vector rhs(2);
  rhs << 3, 5;
  const Vector x = solve_symmetric(a, rhs);
  EXPECT_NEAR(x(0), 5.0, 1e-14);
  EXPECT_NEAR(x(1), 3.0, 1e-14);
}

TEST(Solve, SingularMatrixReported) {
  DenseMatrix a(2, 2);
  a << 1, 1, 1, 1;
  Vector rhs(2);
  rhs << 1, 1;
  try {
    solve(a, rhs);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("condition"), std::string::npos);
  }
  EXPECT_THROW(solve(DenseMatrix::Identity(2, 2), Vector::Ones(3)), ValidationError);
}

TEST(Pseudoinverse, CompleteTwo) {
  const DenseMatrix lp = pseudoinverse_psd(laplacian(make_complete(2)));
  DenseMatrix expected(2, 2);
  expected << 0.25, -0.25, -0.25, 0.25;
  EXPECT_LE((lp - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Pseudoinverse, ZeroMatrix) {
  EXPECT_EQ(pseudoinverse_psd(DenseMatrix::Zero(3, 3)), DenseMatrix::Zero(3, 3));
}

TEST(Pseudoinverse, PenroseIdentitiesOnLaplacians) {
  std::vector<UndirectedGraph> graphs{make_complete(3)};
  for (std::size_t n = 3; n <= 20; n += 3) {
    graphs.push_back(make_star(n));
    graphs.push_back(make_path(n));
    graphs.push_back(make_complete(n));
  }
  graphs.push_back(make_grid({3, 4}));
  for (const auto& g : graphs) {
    const DenseMatrix l = laplacian(g);
    const DenseMatrix lp = pseudoinverse_psd(l);
    EXPECT_LE((l * lp * l - l).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((lp * l * lp - lp).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE(((l * lp).transpose() - l * lp).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE(((lp * l).transpose() - lp * l).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Pseudoinverse, RejectsNonSymmetric) {
  DenseMatrix a(2, 2);
  a << 1, 0, 1, 1;
  EXPECT_THROW(pseudoinverse_psd(a), ValidationError);
}
