// Copyright 2026 The esr-engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Dense complex linear algebra over finite-dimensional Hilbert spaces.
 *
 * Every type is templated on the real scalar of its complex entries; the
 * rest of the engine works with the `double` aliases at the bottom.
 * Validated wrappers (state vectors, density operators, projectors) check
 * their invariants once on construction and are immutable afterwards.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "esr/error.hpp"

namespace esr {

namespace tolerance {
inline constexpr double kNorm = 1e-10;
inline constexpr double kHermitian = 1e-10;
inline constexpr double kPositivity = 1e-10;
inline constexpr double kTrace = 1e-10;
inline constexpr double kIdempotent = 1e-10;
inline constexpr double kDegeneracy = 1e-8;
}  // namespace tolerance

inline constexpr Eigen::Index kMaxDimension = 64;

template <typename Real>
using BasicCMatrix =
    Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using BasicCVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Derived>
auto max_abs(const Eigen::MatrixBase<Derived>& m) {
  using RealScalar = typename Derived::RealScalar;
  return m.size() == 0 ? RealScalar(0) : m.cwiseAbs().maxCoeff();
}

template <typename Derived>
auto hermiticity_defect(const Eigen::MatrixBase<Derived>& m) {
  return max_abs(m - m.adjoint());
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m,
                  double tol = tolerance::kHermitian) {
  return m.rows() == m.cols() && hermiticity_defect(m) <= tol;
}

template <typename Derived>
bool is_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const auto& z = m(i, j);
      if (!std::isfinite(std::real(z)) || !std::isfinite(std::imag(z))) {
        return false;
      }
    }
  }
  return true;
}

template <typename Derived>
void require_hermitian(const Eigen::MatrixBase<Derived>& m,
                       const char* what) {
  if (m.rows() != m.cols()) {
    fail(ErrorKind::DimensionMismatch,
         std::string(what) + " must be square, got " +
             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (!is_finite(m)) {
    fail(ErrorKind::InvalidState, std::string(what) + " has non-finite entries");
  }
  if (hermiticity_defect(m) > tolerance::kHermitian) {
    fail(ErrorKind::NotHermitian,
         std::string(what) + " deviates from its adjoint by " +
             std::to_string(static_cast<double>(hermiticity_defect(m))));
  }
}

inline void require_dimension_cap(Eigen::Index dim, const char* what) {
  if (dim < 1 || dim > kMaxDimension) {
    fail(ErrorKind::DimensionMismatch,
         std::string(what) + " dimension " + std::to_string(dim) +
             " outside [1, " + std::to_string(kMaxDimension) + "]");
  }
}

// ---------------------------------------------------------------------------
// Validated value types
// ---------------------------------------------------------------------------

template <typename Real>
class BasicStateVector {
 public:
  using Vector = BasicCVector<Real>;

  explicit BasicStateVector(Vector amplitudes)
      : amplitudes_(std::move(amplitudes)) {
    require_dimension_cap(amplitudes_.size(), "state vector");
    if (!is_finite(amplitudes_)) {
      fail(ErrorKind::InvalidState, "state vector has non-finite amplitudes");
    }
    const Real norm = amplitudes_.norm();
    if (std::abs(norm - Real(1)) > tolerance::kNorm) {
      fail(ErrorKind::InvalidState,
           "state vector norm " + std::to_string(static_cast<double>(norm)) +
               " is not 1");
    }
  }

  /// Scales a nonzero vector to unit norm.
  static BasicStateVector normalized(const Vector& v) {
    const Real norm = v.norm();
    if (!(norm > Real(0)) || !std::isfinite(static_cast<double>(norm))) {
      fail(ErrorKind::InvalidState, "cannot normalize a zero vector");
    }
    return BasicStateVector(v / norm);
  }

  static BasicStateVector basis(Eigen::Index dim, Eigen::Index index) {
    Vector v = Vector::Zero(dim);
    v(index) = Real(1);
    return BasicStateVector(std::move(v));
  }

  Eigen::Index dim() const { return amplitudes_.size(); }
  const Vector& amplitudes() const { return amplitudes_; }

  BasicCMatrix<Real> outer() const {
    return amplitudes_ * amplitudes_.adjoint();
  }

  /// Representative with the first non-negligible amplitude real-positive.
  BasicStateVector canonical() const {
    for (Eigen::Index i = 0; i < amplitudes_.size(); ++i) {
      const Real mag = std::abs(amplitudes_(i));
      if (mag > Real(tolerance::kNorm)) {
        return BasicStateVector(amplitudes_ * (std::conj(amplitudes_(i)) / mag));
      }
    }
    return *this;
  }

 private:
  Vector amplitudes_;
};

template <typename Real>
class BasicDensityOperator {
 public:
  using Matrix = BasicCMatrix<Real>;

  explicit BasicDensityOperator(const Matrix& m) {
    require_dimension_cap(m.rows(), "density operator");
    require_hermitian(m, "density operator");
    matrix_ = (m + m.adjoint()) * Real(0.5);
    const Real trace = std::real(matrix_.trace());
    if (std::abs(trace - Real(1)) > tolerance::kTrace) {
      fail(ErrorKind::InvalidState,
           "density operator trace " +
               std::to_string(static_cast<double>(trace)) + " is not 1");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_,
                                                 Eigen::EigenvaluesOnly);
    const Real smallest = solver.eigenvalues().minCoeff();
    if (smallest < -Real(tolerance::kPositivity)) {
      fail(ErrorKind::InvalidState,
           "density operator has negative eigenvalue " +
               std::to_string(static_cast<double>(smallest)));
    }
  }

  static BasicDensityOperator from_pure(const BasicStateVector<Real>& psi) {
    return BasicDensityOperator(psi.outer());
  }

  static BasicDensityOperator maximally_mixed(Eigen::Index dim) {
    return BasicDensityOperator(Matrix::Identity(dim, dim) / Real(dim));
  }

  /// Divides a positive operator by its trace.
  static BasicDensityOperator normalized(const Matrix& m) {
    const Real trace = std::real(m.trace());
    if (!(trace > Real(0))) {
      fail(ErrorKind::InvalidState, "cannot normalize a traceless operator");
    }
    return BasicDensityOperator(m / trace);
  }

  Eigen::Index dim() const { return matrix_.rows(); }
  const Matrix& matrix() const { return matrix_; }

  Real purity() const { return std::real((matrix_ * matrix_).trace()); }

 private:
  Matrix matrix_;
};

template <typename Real>
class BasicProjector {
 public:
  using Matrix = BasicCMatrix<Real>;

  explicit BasicProjector(const Matrix& m) {
    require_hermitian(m, "projector");
    matrix_ = (m + m.adjoint()) * Real(0.5);
    const auto defect = max_abs(Matrix(matrix_ * matrix_ - matrix_));
    if (defect > tolerance::kIdempotent) {
      fail(ErrorKind::InvalidState,
           "projector is not idempotent (defect " +
               std::to_string(static_cast<double>(defect)) + ")");
    }
  }

  static BasicProjector zero(Eigen::Index dim) {
    return BasicProjector(Matrix::Zero(dim, dim));
  }

  Eigen::Index dim() const { return matrix_.rows(); }
  const Matrix& matrix() const { return matrix_; }
  Eigen::Index rank() const {
    return static_cast<Eigen::Index>(std::lround(std::real(matrix_.trace())));
  }

 private:
  Matrix matrix_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

template <typename Real>
struct SpectralComponent {
  Real eigenvalue;
  BasicProjector<Real> projector;
  /// Orthonormal eigenvectors spanning the eigenspace, one per column.
  BasicCMatrix<Real> basis;
};

/**
 * Spectral decomposition of a Hermitian matrix.
 *
 * Eigenvalues come back ascending. Consecutive eigenvalues closer than
 * `tolerance::kDegeneracy` share one eigenspace, reported at their mean.
 */
template <typename Derived>
auto spectral_decompose(const Eigen::MatrixBase<Derived>& op) {
  using Real = typename Derived::RealScalar;
  using Matrix = BasicCMatrix<Real>;
  require_hermitian(op, "observable");
  const Matrix herm = (op + op.adjoint()) * Real(0.5);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm);
  const auto& values = solver.eigenvalues();
  const Matrix& vectors = solver.eigenvectors();

  std::vector<SpectralComponent<Real>> spectrum;
  const Eigen::Index n = values.size();
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index stop = start + 1;
    while (stop < n &&
           values(stop) - values(stop - 1) < Real(tolerance::kDegeneracy)) {
      ++stop;
    }
    const Eigen::Index count = stop - start;
    Matrix basis = vectors.middleCols(start, count);
    spectrum.push_back({values.segment(start, count).mean(),
                        BasicProjector<Real>(basis * basis.adjoint()),
                        std::move(basis)});
    start = stop;
  }
  return spectrum;
}

/// Kronecker product; the left factor owns the slow index.
template <typename DerivedA, typename DerivedB>
auto tensor(const Eigen::MatrixBase<DerivedA>& a,
            const Eigen::MatrixBase<DerivedB>& b) {
  using Real = typename DerivedA::RealScalar;
  BasicCMatrix<Real> out = Eigen::kroneckerProduct(a.eval(), b.eval());
  return out;
}

template <typename Real>
BasicDensityOperator<Real> tensor(const BasicDensityOperator<Real>& a,
                                  const BasicDensityOperator<Real>& b) {
  return BasicDensityOperator<Real>(tensor(a.matrix(), b.matrix()));
}

template <typename Real>
BasicStateVector<Real> tensor(const BasicStateVector<Real>& a,
                              const BasicStateVector<Real>& b) {
  BasicCVector<Real> v = Eigen::kroneckerProduct(a.amplitudes(), b.amplitudes());
  return BasicStateVector<Real>(std::move(v));
}

struct BipartiteDims {
  Eigen::Index a;
  Eigen::Index b;
};

enum class Keep { A, B };

template <typename Real>
BasicCMatrix<Real> partial_trace_matrix(const BasicCMatrix<Real>& m,
                                        BipartiteDims dims, Keep keep) {
  if (dims.a < 1 || dims.b < 1 || m.rows() != dims.a * dims.b ||
      m.cols() != m.rows()) {
    fail(ErrorKind::DimensionMismatch,
         "operator of size " + std::to_string(m.rows()) +
             " does not factor as " + std::to_string(dims.a) + "x" +
             std::to_string(dims.b));
  }
  const Eigen::Index kept = keep == Keep::A ? dims.a : dims.b;
  const Eigen::Index traced = keep == Keep::A ? dims.b : dims.a;
  BasicCMatrix<Real> out = BasicCMatrix<Real>::Zero(kept, kept);
  for (Eigen::Index i = 0; i < kept; ++i) {
    for (Eigen::Index j = 0; j < kept; ++j) {
      std::complex<Real> acc(0);
      for (Eigen::Index k = 0; k < traced; ++k) {
        acc += keep == Keep::A ? m(i * dims.b + k, j * dims.b + k)
                               : m(k * dims.b + i, k * dims.b + j);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

template <typename Real>
BasicDensityOperator<Real> partial_trace(const BasicDensityOperator<Real>& rho,
                                         BipartiteDims dims, Keep keep) {
  return BasicDensityOperator<Real>(
      partial_trace_matrix(rho.matrix(), dims, keep));
}

/// Tr[rho * op].
template <typename Real, typename Derived>
std::complex<Real> expectation(const BasicDensityOperator<Real>& rho,
                               const Eigen::MatrixBase<Derived>& op) {
  if (op.rows() != rho.dim() || op.cols() != rho.dim()) {
    fail(ErrorKind::DimensionMismatch,
         "operator size " + std::to_string(op.rows()) + "x" +
             std::to_string(op.cols()) + " vs state dimension " +
             std::to_string(rho.dim()));
  }
  // Tr[AB] = sum_ij A_ij B_ji without forming the product.
  return (rho.matrix().transpose().cwiseProduct(op)).sum();
}

/// exp(-i h t / hbar) through the eigenbasis of h; exactly unitary up to
/// rounding.
template <typename Derived>
auto unitary_exp(const Eigen::MatrixBase<Derived>& h,
                 typename Derived::RealScalar t,
                 typename Derived::RealScalar hbar = 1) {
  using Real = typename Derived::RealScalar;
  using Matrix = BasicCMatrix<Real>;
  require_hermitian(h, "Hamiltonian");
  if (!(hbar > Real(0))) {
    fail(ErrorKind::InvalidArgument, "hbar must be positive");
  }
  const Matrix herm = (h + h.adjoint()) * Real(0.5);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm);
  BasicCVector<Real> phases(herm.rows());
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    phases(i) = std::polar(Real(1), -solver.eigenvalues()(i) * t / hbar);
  }
  Matrix u = solver.eigenvectors() * phases.asDiagonal() *
             solver.eigenvectors().adjoint();
  return u;
}

using Complex = std::complex<double>;
using CMatrix = BasicCMatrix<double>;
using CVector = BasicCVector<double>;
using StateVector = BasicStateVector<double>;
using DensityOperator = BasicDensityOperator<double>;
using Projector = BasicProjector<double>;
using Spectrum = std::vector<SpectralComponent<double>>;

}  // namespace esr
