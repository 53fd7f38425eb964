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

#include "test_util.hpp"
#include "tnld/collision.hpp"
#include "tnld/exact_oracle.hpp"

using namespace tnld;
using test::max_abs_diff;

namespace {

// p = sin^2(sqrt(gamma dt)) for gamma = 3, dt = 1.25; the single-site flip
// probability of the bare collision.
constexpr double kFlipProb = 0.8721231356861453;

ModelParams default_params(std::size_t l) { return {l, 1.0, 2.0, 3.0, 1.25, 10}; }

double operator_norm(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

TEST_CASE("system layers are identities when omega and v vanish") {
  ModelParams p = default_params(3);
  p.omega = 0.0;
  p.v = 0.0;
  const TrotterLayers layers = build_trotter_layers(p);
  const std::size_t dim = 64;
  CHECK(max_abs_diff(mpo_to_dense(layers.even), DenseTensor::identity(dim)) < 1e-12);
  CHECK(max_abs_diff(mpo_to_dense(layers.odd), DenseTensor::identity(dim)) < 1e-12);
}

TEST_CASE("interaction layer is the identity when gamma vanishes") {
  ModelParams p = default_params(3);
  p.gamma = 0.0;
  const TrotterLayers layers = build_trotter_layers(p);
  CHECK(max_abs_diff(mpo_to_dense(layers.interaction), DenseTensor::identity(64)) < 1e-12);
}

TEST_CASE("layer mpos have bond dimension at most two") {
  const TrotterLayers layers = build_trotter_layers(default_params(5));
  CHECK(layers.even.max_bond_dim() <= 2);
  CHECK(layers.odd.max_bond_dim() <= 2);
  CHECK(layers.interaction.max_bond_dim() == 1);
}

TEST_CASE("substep defect shrinks fourfold when the step is halved") {
  // One substep of duration dt/N versus the dense exponential of the same
  // Hamiltonian: scaling gamma by 1/N keeps the coupling sqrt(gamma/dt)
  // fixed while shortening the interval.
  auto substep_defect = [](std::size_t n) {
    ModelParams p = default_params(2);
    ModelParams sub = p;
    sub.dt = p.dt / static_cast<double>(n);
    sub.gamma = p.gamma / static_cast<double>(n);
    sub.n_trotter = 1;
    return operator_norm(trotter_step_unitary(sub) - exact_step_unitary(sub));
  };
  const double ratio = substep_defect(8) / substep_defect(16);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("composed step defect halves when n_trotter doubles") {
  ModelParams p = default_params(2);
  const Eigen::MatrixXcd exact = exact_step_unitary(p);
  std::vector<double> defects;
  for (std::size_t n : {5u, 10u, 20u}) {
    ModelParams pn = p;
    pn.n_trotter = n;
    defects.push_back(operator_norm(trotter_step_unitary(pn) - exact));
  }
  CHECK(defects[0] / defects[1] == doctest::Approx(2.0).epsilon(0.15));
  CHECK(defects[1] / defects[2] == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("exact kraus set reduces to the system unitary when gamma vanishes") {
  ModelParams p = default_params(2);
  p.gamma = 0.0;
  const auto kraus = exact_kraus_set(p);
  REQUIRE(kraus.size() == 4);
  // K_0 must be unitary, the others zero
  const Eigen::MatrixXcd check = kraus[0].adjoint() * kraus[0];
  CHECK((check - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  for (std::size_t k = 1; k < 4; ++k) CHECK(kraus[k].cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("kraus completeness holds for generic parameters") {
  const ModelParams p = default_params(2);
  for (const auto& kraus : {exact_kraus_set(p), trotter_kraus_set(p)}) {
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(4, 4);
    for (const auto& k : kraus) sum += k.adjoint() * k;
    CHECK((sum - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("single-site flip probability matches the closed form") {
  ModelParams p = default_params(1);
  p.omega = 0.0;
  const auto kraus = exact_kraus_set(p);
  // |K_1|0>|^2
  const double prob = std::norm(kraus[1](0, 0)) + std::norm(kraus[1](1, 0));
  CHECK(prob == doctest::Approx(kFlipProb).epsilon(1e-12));
  // the Trotterization is exact at omega = 0 on a single site
  const auto tk = trotter_kraus_set(p);
  const double tprob = std::norm(tk[1](0, 0)) + std::norm(tk[1](1, 0));
  CHECK(tprob == doctest::Approx(kFlipProb).epsilon(1e-12));
}

TEST_CASE("kraus construction is guarded at large L") {
  CHECK_THROWS_AS(exact_kraus_set(default_params(5)), std::invalid_argument);
}

TEST_CASE("collision step preserves the trace when gamma vanishes") {
  ModelParams p = default_params(2);
  p.gamma = 0.0;
  const StepResult r =
      apply_collision_step(maximally_mixed_mps(2), p, AncillaClosure::tilt(0.7), 64, 0.0);
  CHECK(std::abs(r.step_log_weight) < 1e-10);
}

TEST_CASE("collision step preserves the trace at zero tilt") {
  const ModelParams p = default_params(2);
  std::mt19937_64 rng(5);
  // a generic positive state: mixed state plus a small random hermitian part
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(4, 4);
  const DenseTensor raw = test::random_tensor(rng, {4, 4});
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      rho(r, c) += 0.1 * (raw[r * 4 + c] + std::conj(raw[c * 4 + r]));
  rho /= rho.trace();
  const StepResult r =
      apply_collision_step(density_matrix_to_mps(rho), p, AncillaClosure::tilt(0.0), 64, 0.0);
  CHECK(std::abs(r.step_log_weight) < 1e-10);
}

TEST_CASE("projected flip weight matches the closed form") {
  ModelParams p = default_params(1);
  p.omega = 0.0;
  const Mps state = basis_state_mps({0});
  const StepResult r = apply_collision_step(state, p, AncillaClosure::project({1}), 16, 0.0);
  CHECK(std::exp(r.step_log_weight) == doctest::Approx(kFlipProb).epsilon(1e-10));
}

TEST_CASE("project weights sum to the untilted weight") {
  for (std::size_t l : {2u, 3u}) {
    const ModelParams p = default_params(l);
    const CollisionStep step(p);
    const Mps state = maximally_mixed_mps(l);
    const std::size_t d_max = 1ull << (2 * l);
    const double w0 =
        std::exp(step.apply(state, AncillaClosure::tilt(0.0), d_max, 0.0).step_log_weight);
    double sum = 0.0;
    for (std::size_t k = 0; k < (1ull << l); ++k) {
      std::vector<int> bits(l);
      for (std::size_t i = 0; i < l; ++i) bits[i] = (k >> (l - 1 - i)) & 1;
      sum += std::exp(
          step.apply(state, AncillaClosure::project(bits), d_max, 0.0).step_log_weight);
    }
    CHECK(std::abs(sum - w0) < 1e-10);
  }
}

TEST_CASE("tilt weight equals the activity-weighted sum of project weights") {
  const ModelParams p = default_params(2);
  const CollisionStep step(p);
  const Mps state = maximally_mixed_mps(2);
  const double s = 0.3;
  const double tilt =
      std::exp(step.apply(state, AncillaClosure::tilt(s), 16, 0.0).step_log_weight);
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) {
    const std::vector<int> bits{(k >> 1) & 1, k & 1};
    const double w =
        std::exp(step.apply(state, AncillaClosure::project(bits), 16, 0.0).step_log_weight);
    sum += std::exp(-s * (bits[0] + bits[1])) * w;
  }
  CHECK(std::abs(tilt - sum) / tilt < 1e-10);
}

TEST_CASE("tilted step matches the dense tilted channel") {
  const ModelParams p = default_params(2);
  const double s = 0.2;
  std::mt19937_64 rng(7);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(4, 4) / 4.0;
  rho(1, 2) = cplx(0.05, 0.02);
  rho(2, 1) = cplx(0.05, -0.02);

  StepResult r = apply_collision_step(density_matrix_to_mps(rho), p,
                                      AncillaClosure::tilt(s), 16, 0.0);
  const Eigen::MatrixXcd tn_out = mps_to_density_matrix(r.state);

  const auto super = dense_tilted_superoperator(p, s, KrausSource::kTrotterized);
  const Eigen::MatrixXcd dense_out =
      vec_to_density_matrix(super.matrix * density_matrix_to_vec(rho));
  CHECK((tn_out - dense_out).cwiseAbs().maxCoeff() < 1e-10);
  // and the recorded weight is the trace ratio
  CHECK(std::exp(r.step_log_weight) ==
        doctest::Approx(std::abs(dense_out.trace()) / std::abs(rho.trace())).epsilon(1e-10));
}

TEST_CASE("tilt-derivative step matches the dense derivative channel") {
  const ModelParams p = default_params(2);
  const double s = 0.15;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(4, 4) / 4.0;
  rho(0, 3) = cplx(0.03, -0.01);
  rho(3, 0) = cplx(0.03, 0.01);
  const Mps state = density_matrix_to_mps(rho);

  const CollisionStep step(p);
  const StepResult r = step.apply(state, AncillaClosure::tilt_derivative(s), 16, 0.0);
  Mps raw = r.state;  // keep the physical (unnormalized) output
  const Eigen::MatrixXcd tn_out = mps_to_density_matrix(raw);

  // dense: sum_k (-popcount) e^{-s popcount} K rho K^dag
  const auto kraus = trotter_kraus_set(p);
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(4, 4);
  for (std::size_t k = 0; k < kraus.size(); ++k) {
    const double pop = __builtin_popcountll(k);
    expected += -pop * std::exp(-s * pop) * kraus[k] * rho * kraus[k].adjoint();
  }
  CHECK((tn_out - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("adjoint step matches the dense adjoint channel") {
  const ModelParams p = default_params(2);
  const double s = 0.2;
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Identity(4, 4);
  x(0, 0) = 2.0;
  x(1, 3) = cplx(0.1, 0.3);
  x(3, 1) = cplx(0.1, -0.3);

  const CollisionStep step(p);
  const StepResult r = step.apply_adjoint(density_matrix_to_mps(x), s, 16, 0.0);
  const Eigen::MatrixXcd tn_out = mps_to_density_matrix(r.state);

  const auto kraus = trotter_kraus_set(p);
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(4, 4);
  for (std::size_t k = 0; k < kraus.size(); ++k) {
    const double pop = __builtin_popcountll(k);
    expected += std::exp(-s * pop) * kraus[k].adjoint() * x * kraus[k];
  }
  CHECK((tn_out - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("partial-sample closure is rejected by the step") {
  const ModelParams p = default_params(2);
  CHECK_THROWS_AS(
      apply_collision_step(maximally_mixed_mps(2), p, AncillaClosure::partial_sample(), 16, 0.0),
      std::invalid_argument);
}

TEST_CASE("project closure validates the outcome length") {
  const ModelParams p = default_params(2);
  CHECK_THROWS_AS(
      apply_collision_step(maximally_mixed_mps(2), p, AncillaClosure::project({1}), 16, 0.0),
      std::invalid_argument);
}

TEST_CASE("model parameters are validated") {
  ModelParams p = default_params(2);
  p.dt = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = default_params(2);
  p.n_trotter = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = default_params(2);
  p.gamma = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
