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

#include "tnld/exact_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace tnld {

namespace {

// Fused vector index from (ket bits, bra bits), site 0 most significant,
// ket as the fast bit within each site.
std::size_t fuse_index(std::size_t ket, std::size_t bra, std::size_t n) {
  std::size_t f = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = (ket >> (n - 1 - i)) & 1u;
    const std::size_t b = (bra >> (n - 1 - i)) & 1u;
    f = f * 4 + (b * 2 + k);
  }
  return f;
}

std::size_t popcount(std::size_t x) { return static_cast<std::size_t>(__builtin_popcountll(x)); }

std::vector<Eigen::MatrixXcd> kraus_for(const ModelParams& p, KrausSource source) {
  return source == KrausSource::kExactExponential ? exact_kraus_set(p) : trotter_kraus_set(p);
}

}  // namespace

DenseSuperoperator dense_tilted_superoperator(const ModelParams& p, double s, KrausSource source) {
  if (p.n_sites > 4) throw std::invalid_argument("dense_tilted_superoperator: L must be <= 4");
  const std::size_t n = p.n_sites;
  const std::size_t sys_dim = 1ull << n;
  const std::size_t dim = sys_dim * sys_dim;
  const auto kraus = kraus_for(p, source);

  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t k = 0; k < kraus.size(); ++k) {
    const double w = std::exp(-s * static_cast<double>(popcount(k)));
    const Eigen::MatrixXcd& kk = kraus[k];
    for (std::size_t ko = 0; ko < sys_dim; ++ko)
      for (std::size_t bo = 0; bo < sys_dim; ++bo)
        for (std::size_t ki = 0; ki < sys_dim; ++ki)
          for (std::size_t bi = 0; bi < sys_dim; ++bi) {
            const cplx val = w * kk(ko, ki) * std::conj(kk(bo, bi));
            if (val != cplx(0.0)) {
              m(static_cast<Eigen::Index>(fuse_index(ko, bo, n)),
                static_cast<Eigen::Index>(fuse_index(ki, bi, n))) += val;
            }
          }
  }
  return {n, std::move(m)};
}

DominantEig dense_dominant_eig(const DenseSuperoperator& m) {
  if (m.matrix.rows() != m.matrix.cols() || m.matrix.rows() == 0) {
    throw std::invalid_argument("dense_dominant_eig: square matrix required");
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> right(m.matrix);
  if (right.info() != Eigen::Success) throw std::runtime_error("dense_dominant_eig: solver failed");
  Eigen::Index imax = 0;
  for (Eigen::Index i = 1; i < right.eigenvalues().size(); ++i) {
    if (std::abs(right.eigenvalues()[i]) > std::abs(right.eigenvalues()[imax])) imax = i;
  }
  const cplx lambda = right.eigenvalues()[imax];
  if (std::abs(lambda.imag()) > 1e-10 * std::max(1.0, std::abs(lambda))) {
    throw std::runtime_error("dense_dominant_eig: dominant eigenvalue is not real");
  }

  Eigen::MatrixXcd rho = vec_to_density_matrix(right.eigenvectors().col(imax));
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const cplx tr = rho.trace();
  if (std::abs(tr) < 1e-14) throw std::runtime_error("dense_dominant_eig: traceless eigenvector");
  rho /= tr;

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> left(m.matrix.adjoint().eval());
  Eigen::Index jmax = 0;
  for (Eigen::Index i = 1; i < left.eigenvalues().size(); ++i) {
    if (std::abs(left.eigenvalues()[i]) > std::abs(left.eigenvalues()[jmax])) jmax = i;
  }
  Eigen::MatrixXcd omega = vec_to_density_matrix(left.eigenvectors().col(jmax));
  omega = 0.5 * (omega + omega.adjoint()).eval();
  const cplx overlap = (omega.adjoint() * rho).trace();
  if (std::abs(overlap) < 1e-14) {
    throw std::runtime_error("dense_dominant_eig: left/right eigenvectors are orthogonal");
  }
  omega /= std::conj(overlap);
  return {lambda.real(), std::move(rho), std::move(omega)};
}

std::vector<TrajectoryProb> enumerate_trajectory_probs(const ModelParams& p,
                                                       const Eigen::MatrixXcd& rho0,
                                                       std::size_t n_steps, KrausSource source) {
  const std::size_t n = p.n_sites;
  if (n * n_steps > 12) {
    throw std::invalid_argument("enumerate_trajectory_probs: 2^(L*T) exceeds 2^12");
  }
  const auto kraus = kraus_for(p, source);
  const std::size_t branches = kraus.size();

  std::vector<TrajectoryProb> out;
  std::vector<std::uint8_t> record(n * n_steps, 0);

  auto recurse = [&](auto&& self, const Eigen::MatrixXcd& rho, std::size_t step) -> void {
    if (step == n_steps) {
      out.push_back({record, rho.trace().real()});
      return;
    }
    for (std::size_t k = 0; k < branches; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        record[step * n + i] = static_cast<std::uint8_t>((k >> (n - 1 - i)) & 1u);
      }
      const Eigen::MatrixXcd next = kraus[k] * rho * kraus[k].adjoint();
      self(self, next, step + 1);
    }
  };
  recurse(recurse, rho0, 0);
  return out;
}

Eigen::VectorXcd density_matrix_to_vec(const Eigen::MatrixXcd& rho) {
  const std::size_t sys_dim = static_cast<std::size_t>(rho.rows());
  std::size_t n = 0;
  while ((1ull << n) < sys_dim) ++n;
  if ((1ull << n) != sys_dim || rho.rows() != rho.cols()) {
    throw std::invalid_argument("density_matrix_to_vec: dimension must be a power of two");
  }
  Eigen::VectorXcd v(static_cast<Eigen::Index>(sys_dim * sys_dim));
  for (std::size_t k = 0; k < sys_dim; ++k)
    for (std::size_t b = 0; b < sys_dim; ++b)
      v[static_cast<Eigen::Index>(fuse_index(k, b, n))] = rho(k, b);
  return v;
}

Eigen::MatrixXcd vec_to_density_matrix(const Eigen::VectorXcd& v) {
  std::size_t n = 0;
  while ((1ull << (2 * n)) < static_cast<std::size_t>(v.size())) ++n;
  if ((1ull << (2 * n)) != static_cast<std::size_t>(v.size())) {
    throw std::invalid_argument("vec_to_density_matrix: length must be 4^L");
  }
  const std::size_t sys_dim = 1ull << n;
  Eigen::MatrixXcd rho(sys_dim, sys_dim);
  for (std::size_t k = 0; k < sys_dim; ++k)
    for (std::size_t b = 0; b < sys_dim; ++b)
      rho(k, b) = v[static_cast<Eigen::Index>(fuse_index(k, b, n))];
  return rho;
}

Eigen::MatrixXcd mps_to_density_matrix(const Mps& state) {
  const DenseTensor flat = mps_to_dense(state);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(flat.size()));
  for (std::size_t i = 0; i < flat.size(); ++i) v[static_cast<Eigen::Index>(i)] = flat[i];
  return vec_to_density_matrix(v);
}

Mps density_matrix_to_mps(const Eigen::MatrixXcd& rho) {
  const Eigen::VectorXcd v = density_matrix_to_vec(rho);
  std::size_t n = 0;
  while ((1ull << (2 * n)) < static_cast<std::size_t>(v.size())) ++n;

  // Exact sequential splitting of the dense vector into site tensors.
  Mps out;
  std::size_t left = 1;
  DenseTensor rest({1, static_cast<std::size_t>(v.size())});
  for (std::size_t i = 0; i < static_cast<std::size_t>(v.size()); ++i) rest[i] = v[static_cast<Eigen::Index>(i)];
  for (std::size_t site = 0; site + 1 < n; ++site) {
    const std::size_t cols = rest.extent(1) / 4;
    DenseTensor m = rest.reshaped({left * 4, cols});
    SvdSplit split = svd_truncate(m, left * 4, 0.0);
    const std::size_t k = split.singular_values.size();
    out.sites.push_back(split.left_isometry.reshaped({left, 4, k}));
    DenseTensor carry = split.right_factor;  // k x cols
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < cols; ++c) carry[r * cols + c] *= split.singular_values[r];
    rest = std::move(carry);
    left = k;
  }
  out.sites.push_back(rest.reshaped({left, 4, 1}));
  out.center = n - 1;
  return out;
}

}  // namespace tnld
