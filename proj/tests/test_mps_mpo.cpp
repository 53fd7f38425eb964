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
#include "tnld/exact_oracle.hpp"
#include "tnld/mps.hpp"

using namespace tnld;
using test::max_abs_diff;
using test::random_mpo;
using test::random_mps;
using test::random_tensor;

namespace {

DenseTensor dense_state(const Mps& m) { return mps_to_dense(m); }

// Dense matrix-vector product through the fully contracted operator.
DenseTensor dense_apply(const Mpo& op, const Mps& state) {
  return contract(mpo_to_dense(op), {1}, dense_state(state), {0});
}

}  // namespace

TEST_CASE("identity mpo leaves amplitudes unchanged") {
  std::mt19937_64 rng(3);
  const Mps state = random_mps(rng, 3, 2, 3);
  const Mps out = apply_mpo(Mpo::identity({2, 2, 2}), state);
  CHECK(max_abs_diff(dense_state(out), dense_state(state)) < 1e-13);
}

TEST_CASE("product-operator mpo acts site by site on a product state") {
  const Mps state = Mps::product_state({{1.0, 2.0}, {0.5, cplx(0.0, 1.0)}});
  std::mt19937_64 rng(5);
  Mpo op;
  op.sites.push_back(random_tensor(rng, {1, 2, 2, 1}));
  op.sites.push_back(random_tensor(rng, {1, 2, 2, 1}));
  const Mps out = apply_mpo(op, state);
  // expected: per-site matrix-vector products
  std::vector<std::vector<cplx>> expected;
  for (std::size_t i = 0; i < 2; ++i) {
    std::vector<cplx> v(2, 0.0);
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b)
        v[a] += op.sites[i].at({0, a, b, 0}) * state.sites[i].at({0, b, 0});
    expected.push_back(v);
  }
  CHECK(max_abs_diff(dense_state(out), dense_state(Mps::product_state(expected))) < 1e-13);
}

TEST_CASE("apply_mpo matches the dense matrix-vector product") {
  std::mt19937_64 rng(7);
  const Mps state = random_mps(rng, 3, 2, 3);
  const Mpo op = random_mpo(rng, 3, 2, 2);
  const Mps out = apply_mpo(op, state);
  CHECK(out.max_bond_dim() == 6);  // bond dimensions multiply
  CHECK(max_abs_diff(dense_state(out), dense_apply(op, state)) < 1e-12);
}

TEST_CASE("apply_mpo validates shapes") {
  std::mt19937_64 rng(9);
  const Mps state = random_mps(rng, 3, 2, 2);
  CHECK_THROWS_AS(apply_mpo(Mpo::identity({2, 2}), state), std::invalid_argument);
  CHECK_THROWS_AS(apply_mpo(Mpo::identity({2, 3, 2}), state), std::invalid_argument);
}

TEST_CASE("compose matches dense operator multiplication") {
  std::mt19937_64 rng(11);
  const Mpo a = random_mpo(rng, 3, 2, 2);
  const Mpo b = random_mpo(rng, 3, 2, 3);
  const DenseTensor lhs = mpo_to_dense(compose(a, b));
  const DenseTensor rhs = contract(mpo_to_dense(a), {1}, mpo_to_dense(b), {0});
  CHECK(max_abs_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("compress leaves a product state unchanged") {
  const Mps state = Mps::product_state({{0.6, 0.8}, {1.0, 0.0}, {0.0, 1.0}});
  const auto [out, err] = compress(state, 1, 1e-14);
  CHECK(err == 0.0);
  CHECK(max_abs_diff(dense_state(out), dense_state(state)) < 1e-13);
  CHECK(out.center == 0);
}

TEST_CASE("compress truncates the rank-2 cat state with weight one half") {
  // (|0000> + |1111>)/sqrt(2) as a bond-2 chain
  const std::size_t n = 4;
  Mps state;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t l = i == 0 ? 1 : 2, r = i + 1 == n ? 1 : 2;
    DenseTensor t({l, 2, r});
    if (i == 0) {
      t.at({0, 0, 0}) = 1.0 / std::sqrt(2.0);
      t.at({0, 1, 1}) = 1.0 / std::sqrt(2.0);
    } else if (i + 1 == n) {
      t.at({0, 0, 0}) = 1.0;
      t.at({1, 1, 0}) = 1.0;
    } else {
      t.at({0, 0, 0}) = 1.0;
      t.at({1, 1, 1}) = 1.0;
    }
    state.sites.push_back(std::move(t));
  }
  const auto [out, err] = compress(state, 1, 1e-14);
  CHECK(err == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(out.max_bond_dim() == 1);
}

TEST_CASE("lossless compress is exact and canonical") {
  std::mt19937_64 rng(13);
  const Mps state = random_mps(rng, 4, 2, 8);
  const auto [out, err] = compress(state, 8, 0.0);
  CHECK(err < 1e-24);
  CHECK(out.center == 0);
  CHECK(canonical_defect(out) < 1e-10);
  // fidelity 1
  const cplx overlap = inner(out, state);
  const double n1 = std::sqrt(std::abs(inner(out, out).real()));
  const double n2 = std::sqrt(std::abs(inner(state, state).real()));
  CHECK(std::abs(overlap) / (n1 * n2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("compress is idempotent at fixed settings") {
  std::mt19937_64 rng(17);
  const Mps state = random_mps(rng, 4, 2, 6);
  const auto first = compress(state, 3, 1e-14);
  const auto second = compress(first.state, 3, 1e-14);
  CHECK(second.truncation_error < 1e-24);
  CHECK(max_abs_diff(dense_state(second.state), dense_state(first.state)) < 1e-12);
}

TEST_CASE("compress respects the bond cap") {
  std::mt19937_64 rng(19);
  const Mps state = random_mps(rng, 5, 2, 7);
  const auto [out, err] = compress(state, 2, 0.0);
  CHECK(out.max_bond_dim() <= 2);
  CHECK(err > 0.0);
}

TEST_CASE("inner of a normalized state is one") {
  std::mt19937_64 rng(23);
  Mps state = random_mps(rng, 3, 2, 3);
  const double nrm = std::sqrt(inner(state, state).real());
  state.sites[0].scale(1.0 / nrm);
  CHECK(inner(state, state).real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inner of orthogonal basis states vanishes") {
  const Mps a = Mps::product_state({{1.0, 0.0}, {0.0, 1.0}});
  const Mps b = Mps::product_state({{1.0, 0.0}, {1.0, 0.0}});
  CHECK(std::abs(inner(a, b)) < 1e-15);
}

TEST_CASE("inner matches the dense dot product and carries log_norm") {
  std::mt19937_64 rng(29);
  Mps a = random_mps(rng, 3, 2, 3);
  const Mps b = random_mps(rng, 3, 2, 2);
  a.log_norm = 1.7;  // represented vector is scaled by e^1.7
  const DenseTensor da = dense_state(a), db = dense_state(b);
  cplx dot = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) dot += std::conj(da[i]) * db[i];
  CHECK(std::abs(inner(a, b) - dot) < 1e-10);
}

TEST_CASE("trace_vectorized of the single-qubit mixed state is one") {
  const Mps state = Mps::product_state({{0.5, 0.0, 0.0, 0.5}});
  CHECK(std::abs(trace_vectorized(state) - cplx(1.0)) < 1e-14);
}

TEST_CASE("trace_vectorized applies a site operator") {
  // vectorized |1><1|, measured with n
  const Mps state = Mps::product_state({{0.0, 0.0, 0.0, 1.0}});
  DenseTensor n_op({2, 2});
  n_op.at({1, 1}) = 1.0;
  CHECK(std::abs(trace_vectorized(state, {{0, n_op}}) - cplx(1.0)) < 1e-14);
}

TEST_CASE("trace_vectorized matches the dense partial trace") {
  std::mt19937_64 rng(31);
  // a random two-qubit density matrix, hermitized
  DenseTensor raw = random_tensor(rng, {4, 4});
  Eigen::MatrixXcd rho(4, 4);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      rho(r, c) = 0.5 * (raw[r * 4 + c] + std::conj(raw[c * 4 + r]));
  const Mps state = density_matrix_to_mps(rho);

  DenseTensor n_op({2, 2});
  n_op.at({1, 1}) = 1.0;
  // Tr[(n x 1) rho]
  cplx expected = 0.0;
  for (std::size_t b = 0; b < 2; ++b) expected += rho(2 + b, 2 + b);
  CHECK(std::abs(trace_vectorized(state, {{0, n_op}}) - expected) < 1e-12);
}

TEST_CASE("trace_vectorized rejects non-square physical dimensions") {
  const Mps state = Mps::product_state({{1.0, 0.0, 0.0}});
  CHECK_THROWS_AS(trace_vectorized(state), std::invalid_argument);
}

TEST_CASE("apply_mpo with lossless compress preserves inner products") {
  std::mt19937_64 rng(37);
  const Mps state = random_mps(rng, 3, 2, 3);
  const Mps reference = random_mps(rng, 3, 2, 4);
  const Mpo op = random_mpo(rng, 3, 2, 2);
  const Mps applied = apply_mpo(op, state);
  const auto [compressed, err] = compress(applied, 16, 0.0);
  CHECK(std::abs(inner(reference, applied) - inner(reference, compressed)) < 1e-10);
}

TEST_CASE("normalize_trace rescales to unit trace") {
  std::mt19937_64 rng(41);
  Mps state = random_mps(rng, 2, 4, 3);
  state.log_norm = -2.5;
  const Mps out = normalize_trace(state);
  CHECK(std::abs(trace_vectorized(out) - cplx(1.0)) < 1e-12);
  CHECK(out.log_norm == 0.0);
}
