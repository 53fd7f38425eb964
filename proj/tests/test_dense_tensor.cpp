// Copyright 2026 The tnld authors
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "test_util.hpp"
#include "tnld/dense_tensor.hpp"

using namespace tnld;
using test::max_abs_diff;
using test::naive_contract;
using test::random_tensor;
using test::taylor_exp;

namespace {

DenseTensor pauli_x() {
  DenseTensor t({2, 2});
  t.at({0, 1}) = 1.0;
  t.at({1, 0}) = 1.0;
  return t;
}

}  // namespace

TEST_CASE("contract traces the identity to a scalar") {
  const DenseTensor id = DenseTensor::identity(2);
  const DenseTensor tr = contract(id, {0, 1}, id, {0, 1});
  CHECK(tr.rank() == 0);
  CHECK(std::abs(tr[0] - cplx(2.0)) < 1e-15);
}

TEST_CASE("contract composes pauli x with itself to the identity") {
  const DenseTensor prod = contract(pauli_x(), {1}, pauli_x(), {0});
  CHECK(max_abs_diff(prod, DenseTensor::identity(2)) < 1e-15);
}

TEST_CASE("contract matches explicit nested-loop summation") {
  std::mt19937_64 rng(7);
  const DenseTensor a = random_tensor(rng, {3, 4, 5});
  const DenseTensor b = random_tensor(rng, {5, 4});
  const DenseTensor fast = contract(a, {2, 1}, b, {0, 1});
  const DenseTensor slow = naive_contract(a, {2, 1}, b, {0, 1});
  REQUIRE(fast.shape() == slow.shape());
  CHECK(max_abs_diff(fast, slow) < 1e-13);

  const DenseTensor fast2 = contract(a, {2}, b, {0});
  const DenseTensor slow2 = naive_contract(a, {2}, b, {0});
  CHECK(max_abs_diff(fast2, slow2) < 1e-13);
}

TEST_CASE("contract is bilinear") {
  std::mt19937_64 rng(11);
  const DenseTensor a = random_tensor(rng, {3, 4});
  DenseTensor x = random_tensor(rng, {4, 2});
  DenseTensor y = random_tensor(rng, {4, 2});
  const cplx alpha(0.3, -1.1), beta(-0.7, 0.2);
  DenseTensor combo({4, 2});
  for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = alpha * x[i] + beta * y[i];
  const DenseTensor lhs = contract(a, {1}, combo, {0});
  DenseTensor rhs = contract(a, {1}, x, {0});
  const DenseTensor ry = contract(a, {1}, y, {0});
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = alpha * rhs[i] + beta * ry[i];
  CHECK(max_abs_diff(lhs, rhs) < 1e-13);
}

TEST_CASE("contracting with the identity is a no-op") {
  std::mt19937_64 rng(13);
  const DenseTensor a = random_tensor(rng, {3, 4});
  const DenseTensor out = contract(a, {1}, DenseTensor::identity(4), {0});
  CHECK(max_abs_diff(out, a) < 1e-15);
}

TEST_CASE("contract rejects mismatched extents") {
  const DenseTensor a({2, 3});
  const DenseTensor b({4, 2});
  CHECK_THROWS_AS(contract(a, {1}, b, {0}), std::invalid_argument);
  CHECK_THROWS_AS(contract(a, {0, 1}, b, {0}), std::invalid_argument);
}

TEST_CASE("svd_truncate drops the null value of a rank-1 matrix") {
  DenseTensor m({2, 2});
  m.at({0, 0}) = 1.0;
  const SvdSplit split = svd_truncate(m, 2, 1e-14);
  REQUIRE(split.singular_values.size() == 1);
  CHECK(split.singular_values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(split.discarded_weight == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("svd_truncate caps equal singular values at d_max") {
  const SvdSplit split = svd_truncate(DenseTensor::identity(2), 1, 1e-14);
  REQUIRE(split.singular_values.size() == 1);
  CHECK(split.singular_values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(split.discarded_weight == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("svd_truncate reconstructs a full-rank matrix") {
  std::mt19937_64 rng(17);
  const DenseTensor m = random_tensor(rng, {8, 8});
  const SvdSplit split = svd_truncate(m, 8, 0.0);
  REQUIRE(split.singular_values.size() == 8);
  // descending order
  for (std::size_t i = 0; i + 1 < 8; ++i) {
    CHECK(split.singular_values[i] >= split.singular_values[i + 1]);
  }
  // left columns and right rows orthonormal
  const DenseTensor utu =
      contract(split.left_isometry.conjugated(), {0}, split.left_isometry, {0});
  CHECK(max_abs_diff(utu, DenseTensor::identity(8)) < 1e-12);
  const DenseTensor vvt = contract(split.right_factor, {1}, split.right_factor.conjugated(), {1});
  CHECK(max_abs_diff(vvt, DenseTensor::identity(8)) < 1e-12);
  // U S V reconstruction
  DenseTensor us = split.left_isometry;
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 8; ++c) us[r * 8 + c] *= split.singular_values[c];
  const DenseTensor recon = contract(us, {1}, split.right_factor, {0});
  CHECK(max_abs_diff(recon, m) < 1e-12);
}

TEST_CASE("svd_truncate reports the discarded weight of a truncation") {
  std::mt19937_64 rng(19);
  const DenseTensor m = random_tensor(rng, {10, 6});
  const SvdSplit full = svd_truncate(m, 6, 0.0);
  double total = 0.0;
  for (double s : full.singular_values) total += s * s;

  const std::size_t keep = 3;
  const SvdSplit cut = svd_truncate(m, keep, 0.0);
  REQUIRE(cut.singular_values.size() == keep);
  DenseTensor us = cut.left_isometry;
  for (std::size_t r = 0; r < 10; ++r)
    for (std::size_t c = 0; c < keep; ++c) us[r * keep + c] *= cut.singular_values[c];
  const DenseTensor recon = contract(us, {1}, cut.right_factor, {0});
  double err2 = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) err2 += std::norm(recon[i] - m[i]);
  CHECK(std::abs(err2 - cut.discarded_weight * total) < 1e-10);
}

TEST_CASE("svd_truncate rejects bad input") {
  DenseTensor m({2, 2});
  CHECK_THROWS_AS(svd_truncate(m, 0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(svd_truncate(m, 2, -1.0), std::invalid_argument);
  m.at({0, 0}) = cplx(std::nan(""), 0.0);
  CHECK_THROWS_AS(svd_truncate(m, 2, 0.0), std::runtime_error);
}

TEST_CASE("exp_hermitian of zero is the identity") {
  const DenseTensor out = exp_hermitian(DenseTensor({3, 3}), cplx(0.0, -1.0));
  CHECK(max_abs_diff(out, DenseTensor::identity(3)) < 1e-14);
}

TEST_CASE("exp_hermitian reproduces the pauli rotation") {
  const double theta = 0.7;
  const DenseTensor out = exp_hermitian(pauli_x(), cplx(0.0, -theta));
  DenseTensor expected({2, 2});
  expected.at({0, 0}) = std::cos(theta);
  expected.at({1, 1}) = std::cos(theta);
  expected.at({0, 1}) = cplx(0.0, -std::sin(theta));
  expected.at({1, 0}) = cplx(0.0, -std::sin(theta));
  CHECK(max_abs_diff(out, expected) < 1e-14);
}

TEST_CASE("exp_hermitian agrees with the taylor series") {
  std::mt19937_64 rng(23);
  DenseTensor h = random_tensor(rng, {4, 4});
  // hermitize
  DenseTensor hsym({4, 4});
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      hsym[r * 4 + c] = 0.5 * (h[r * 4 + c] + std::conj(h[c * 4 + r]));
  const cplx scale(0.1, -0.4);
  const DenseTensor fast = exp_hermitian(hsym, scale);
  const DenseTensor series = taylor_exp(hsym, scale, 30);
  CHECK(max_abs_diff(fast, series) < 1e-12);
}

TEST_CASE("exp_hermitian produces a unitary for imaginary scale") {
  std::mt19937_64 rng(29);
  DenseTensor h = random_tensor(rng, {4, 4});
  DenseTensor hsym({4, 4});
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      hsym[r * 4 + c] = 0.5 * (h[r * 4 + c] + std::conj(h[c * 4 + r]));
  const double t = 0.83;
  const DenseTensor fwd = exp_hermitian(hsym, cplx(0.0, -t));
  const DenseTensor bwd = exp_hermitian(hsym, cplx(0.0, t));
  CHECK(max_abs_diff(contract(fwd, {1}, bwd, {0}), DenseTensor::identity(4)) < 1e-12);
}

TEST_CASE("exp_hermitian rejects non-hermitian input and large dimensions") {
  DenseTensor bad({2, 2});
  bad.at({0, 1}) = 1.0;  // not symmetric against the zero at (1,0)
  CHECK_THROWS_AS(exp_hermitian(bad, cplx(0, -1)), std::invalid_argument);
  CHECK_THROWS_AS(exp_hermitian(DenseTensor({17, 17}), cplx(0, -1)), std::invalid_argument);

  // roundoff-level asymmetry is absorbed
  DenseTensor nearly = DenseTensor::identity(2);
  nearly.at({0, 1}) = 1e-13;
  CHECK_NOTHROW(exp_hermitian(nearly, cplx(0, -1)));
}
