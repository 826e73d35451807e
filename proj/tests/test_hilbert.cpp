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


#include <doctest.h>

#include <cmath>
#include <numbers>

#include "esr/error.hpp"
#include "esr/hilbert.hpp"
#include "support/checks.hpp"
#include "support/random.hpp"

using namespace esr;
using namespace esr::testing;

namespace {

constexpr double kPi = std::numbers::pi;
const Complex I1(0.0, 1.0);

}  // namespace

TEST_CASE("state vectors check their norm") {
  CVector v(2);
  v << 1.0, 1.0;
  CHECK(kind_of([&] { StateVector s(v); }) == ErrorKind::InvalidState);
  const StateVector s = StateVector::normalized(v);
  CHECK(s.amplitudes().norm() == doctest::Approx(1.0));
  CHECK(kind_of([&] { StateVector::normalized(CVector::Zero(3)); }) == ErrorKind::InvalidState);

  CVector nan(1);
  nan << std::nan("");
  CHECK(kind_of([&] { StateVector s2(nan); }) == ErrorKind::InvalidState);
  CHECK(kind_of([&] { StateVector::basis(65, 0); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("canonical phase makes the first nonzero amplitude real and positive") {
  CVector v(3);
  v << 0.0, Complex(0.0, -1.0) / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const StateVector c = StateVector(v).canonical();
  CHECK(std::abs(c.amplitudes()(1) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(c.amplitudes()(2) - I1 / std::sqrt(2.0)) < 1e-15);
}

TEST_CASE("density operators enforce Hermiticity, positivity and unit trace") {
  CHECK(kind_of([] { DensityOperator d(ket_bra(2, 0, 1)); }) == ErrorKind::NotHermitian);
  CMatrix neg(2, 2);
  neg << 1.5, 0, 0, -0.5;
  CHECK(kind_of([&] { DensityOperator d(neg); }) == ErrorKind::InvalidState);
  CHECK(kind_of([] { DensityOperator d(CMatrix::Identity(2, 2)); }) == ErrorKind::InvalidState);
  CHECK(DensityOperator::maximally_mixed(4).purity() == doctest::Approx(0.25));
}

TEST_CASE("projectors must be idempotent") {
  CHECK(kind_of([] { Projector p(CMatrix::Identity(2, 2) * 0.5); }) == ErrorKind::InvalidState);
  CHECK(Projector(ket_bra(3, 1, 1)).rank() == 1);
  CHECK(Projector::zero(3).rank() == 0);
}

TEST_CASE("spectral decomposition of sigma_z") {
  const Spectrum s = spectral_decompose(sigma_z());
  REQUIRE(s.size() == 2);
  CHECK(s[0].eigenvalue == doctest::Approx(-1.0));
  CHECK(max_abs(s[0].projector.matrix() - ket_bra(2, 1, 1)) < 1e-12);
  CHECK(s[1].eigenvalue == doctest::Approx(1.0));
  CHECK(max_abs(s[1].projector.matrix() - ket_bra(2, 0, 0)) < 1e-12);
}

TEST_CASE("identity has one merged eigenspace") {
  const Spectrum s = spectral_decompose(CMatrix::Identity(2, 2));
  REQUIRE(s.size() == 1);
  CHECK(s[0].eigenvalue == doctest::Approx(1.0));
  CHECK(max_abs(s[0].projector.matrix() - CMatrix::Identity(2, 2)) < 1e-12);
  CHECK(s[0].basis.cols() == 2);
}

TEST_CASE("spectral decomposition of sigma_x against hand diagonalization") {
  // |+-> = (|0> +- |1>)/sqrt2, so |+><+| = [[1,1],[1,1]]/2.
  CMatrix plus(2, 2), minus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  minus << 0.5, -0.5, -0.5, 0.5;
  const Spectrum s = spectral_decompose(sigma_x());
  REQUIRE(s.size() == 2);
  CHECK(s[0].eigenvalue == doctest::Approx(-1.0));
  CHECK(max_abs(s[0].projector.matrix() - minus) < 1e-12);
  CHECK(max_abs(s[1].projector.matrix() - plus) < 1e-12);
}

TEST_CASE("near-degenerate eigenvalues merge below the gap tolerance") {
  CMatrix m = CMatrix::Zero(3, 3);
  m.diagonal() << 1.0, 1.0 + 5e-9, 2.0;
  const Spectrum merged = spectral_decompose(m);
  REQUIRE(merged.size() == 2);
  CHECK(merged[0].projector.rank() == 2);
  CHECK(merged[0].eigenvalue == doctest::Approx(1.0 + 2.5e-9).epsilon(1e-15));

  m(1, 1) = 1.0 + 1e-6;
  CHECK(spectral_decompose(m).size() == 3);
}

TEST_CASE("non-Hermitian input is rejected") {
  CHECK(kind_of([] { spectral_decompose(ket_bra(2, 0, 1)); }) == ErrorKind::NotHermitian);
  CHECK(kind_of([] { spectral_decompose(CMatrix(2, 3)); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("spectral decomposition reconstructs random Hermitian matrices") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index dim = random_dim(rng, 1, 16);
    const CMatrix h = trial % 2 ? random_hermitian(dim, rng)
                                : random_degenerate_hermitian(dim, 2, rng);
    const Spectrum s = spectral_decompose(h);
    CMatrix sum = CMatrix::Zero(dim, dim);
    CMatrix identity = CMatrix::Zero(dim, dim);
    for (std::size_t n = 0; n < s.size(); ++n) {
      if (n > 0) CHECK(s[n].eigenvalue > s[n - 1].eigenvalue);
      sum += s[n].eigenvalue * s[n].projector.matrix();
      identity += s[n].projector.matrix();
      for (std::size_t m = n + 1; m < s.size(); ++m) {
        CHECK(max_abs(s[n].projector.matrix() * s[m].projector.matrix()) < 1e-10);
      }
    }
    CHECK((h - sum).norm() <= 1e-9);
    CHECK(max_abs(identity - CMatrix::Identity(dim, dim)) < 1e-10);
  }
}

TEST_CASE("spectral decomposition is generic in the scalar type") {
  using LMatrix = BasicCMatrix<long double>;
  LMatrix m(2, 2);
  m << 0.0L, 1.0L, 1.0L, 0.0L;
  const auto s = spectral_decompose(m);
  REQUIRE(s.size() == 2);
  CHECK(std::abs(s[0].eigenvalue + 1.0L) < 1e-15L);
  CHECK(std::abs(s[1].projector.matrix()(0, 1) - 0.5L) < 1e-15L);
}

TEST_CASE("tensor products") {
  CHECK(max_abs(tensor(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)) -
                CMatrix::Identity(4, 4)) == 0.0);
  // |0><0| x |1><1| = |01><01|, index 0*2+1.
  CHECK(max_abs(tensor(ket_bra(2, 0, 0), ket_bra(2, 1, 1)) - ket_bra(4, 1, 1)) == 0.0);
  CMatrix zz = CMatrix::Zero(4, 4);
  zz.diagonal() << 1, -1, -1, 1;
  CHECK(max_abs(tensor(sigma_z(), sigma_z()) - zz) == 0.0);

  Rng rng(3);
  const CMatrix a = random_matrix(2, 3, rng), b = random_matrix(3, 2, rng);
  const CMatrix c = random_matrix(3, 2, rng), d = random_matrix(2, 3, rng);
  CHECK(max_abs(tensor(a, b) * tensor(c, d) - tensor(CMatrix(a * c), CMatrix(b * d))) < 1e-12);

  const StateVector psi = tensor(StateVector::basis(2, 1), StateVector::basis(3, 2));
  CHECK(std::abs(psi.amplitudes()(5) - 1.0) == 0.0);
}

TEST_CASE("partial trace examples") {
  Rng rng(5);
  const DensityOperator ra = random_density(2, 2, rng);
  const DensityOperator rb = random_density(3, 2, rng);
  const DensityOperator ab = tensor(ra, rb);
  CHECK(max_abs(partial_trace(ab, {2, 3}, Keep::A).matrix() - ra.matrix()) < 1e-10);
  CHECK(max_abs(partial_trace(ab, {2, 3}, Keep::B).matrix() - rb.matrix()) < 1e-10);

  CVector bell = CVector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const DensityOperator phi = DensityOperator::from_pure(StateVector(bell));
  CHECK(max_abs(partial_trace(phi, {2, 2}, Keep::A).matrix() - CMatrix::Identity(2, 2) * 0.5) <
        1e-12);
  CHECK(kind_of([&] { partial_trace(phi, {3, 2}, Keep::A); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("partial trace is trace preserving and positive on random composites") {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index da = random_dim(rng, 1, 4);
    const Eigen::Index db = random_dim(rng, 1, 4);
    const DensityOperator rho =
        random_density(da * db, random_dim(rng, 1, da * db), rng);
    // The DensityOperator constructor checks trace and positivity.
    const DensityOperator a = partial_trace(rho, {da, db}, Keep::A);
    const DensityOperator b = partial_trace(rho, {da, db}, Keep::B);
    CHECK(std::abs(a.matrix().trace() - 1.0) < 1e-10);
    CHECK(std::abs(b.matrix().trace() - 1.0) < 1e-10);
  }
}

TEST_CASE("expectation values") {
  const DensityOperator mixed = DensityOperator::maximally_mixed(2);
  CHECK(std::abs(expectation(mixed, sigma_z())) < 1e-15);
  const DensityOperator zero = DensityOperator::from_pure(StateVector::basis(2, 0));
  CHECK(std::abs(expectation(zero, ket_bra(2, 0, 0)) - 1.0) < 1e-15);
  CVector plus(2);
  plus << 1.0, 1.0;
  const DensityOperator p = DensityOperator::from_pure(StateVector::normalized(plus));
  CHECK(std::abs(expectation(p, ket_bra(2, 0, 0)) - 0.5) < 1e-15);
  CHECK(kind_of([&] { expectation(p, CMatrix::Identity(3, 3)); }) == ErrorKind::DimensionMismatch);

  Rng rng(9);
  const DensityOperator r = random_density(5, 3, rng);
  CHECK(std::abs(std::imag(expectation(r, random_hermitian(5, rng)))) < 1e-10);
}

TEST_CASE("unitary exponential against the closed form for sigma_z") {
  // exp(-i sigma_z t) = diag(exp(-it), exp(it)).
  for (double t : {0.0, 0.3, kPi / 2.0, kPi, -2.0}) {
    CMatrix oracle = CMatrix::Zero(2, 2);
    oracle(0, 0) = std::exp(-I1 * t);
    oracle(1, 1) = std::exp(I1 * t);
    CHECK(max_abs(unitary_exp(sigma_z(), t) - oracle) < 1e-14);
  }
  CHECK(max_abs(unitary_exp(sigma_z(), kPi) + CMatrix::Identity(2, 2)) < 1e-14);
  CMatrix quarter = CMatrix::Zero(2, 2);
  quarter(0, 0) = -I1;
  quarter(1, 1) = I1;
  CHECK(max_abs(unitary_exp(sigma_z(), kPi / 2.0) - quarter) < 1e-14);
  // hbar rescales time.
  CHECK(max_abs(unitary_exp(sigma_z(), 2.0, 2.0) - unitary_exp(sigma_z(), 1.0)) < 1e-14);
  CHECK(kind_of([] { unitary_exp(ket_bra(2, 0, 1), 1.0); }) == ErrorKind::NotHermitian);
  CHECK(kind_of([] { unitary_exp(sigma_z(), 1.0, 0.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("unitary exponential is unitary and inverted by -t") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index dim = random_dim(rng, 1, 10);
    const CMatrix h = random_hermitian(dim, rng);
    const double t = uniform(rng, -5.0, 5.0);
    const CMatrix u = unitary_exp(h, t);
    const CMatrix id = CMatrix::Identity(dim, dim);
    CHECK(max_abs(u.adjoint() * u - id) < 1e-9);
    CHECK(max_abs(u * unitary_exp(h, -t) - id) < 1e-9);
    CHECK(max_abs(unitary_exp(h, 0.0) - id) < 1e-14);
  }
}
