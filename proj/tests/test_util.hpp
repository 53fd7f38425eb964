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

#pragma once

#include <random>
#include <vector>

#include "tnld/dense_tensor.hpp"
#include "tnld/mps.hpp"

namespace tnld::test {

inline DenseTensor random_tensor(std::mt19937_64& rng, std::vector<std::size_t> shape) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseTensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = cplx(dist(rng), dist(rng));
  return t;
}

inline Mps random_mps(std::mt19937_64& rng, std::size_t n_sites, std::size_t phys,
                      std::size_t bond) {
  Mps out;
  std::size_t left = 1;
  for (std::size_t i = 0; i < n_sites; ++i) {
    const std::size_t right = i + 1 == n_sites ? 1 : bond;
    out.sites.push_back(random_tensor(rng, {left, phys, right}));
    left = right;
  }
  return out;
}

inline Mpo random_mpo(std::mt19937_64& rng, std::size_t n_sites, std::size_t phys,
                      std::size_t bond) {
  Mpo out;
  std::size_t left = 1;
  for (std::size_t i = 0; i < n_sites; ++i) {
    const std::size_t right = i + 1 == n_sites ? 1 : bond;
    out.sites.push_back(random_tensor(rng, {left, phys, phys, right}));
    left = right;
  }
  return out;
}

// Brute-force contraction by explicit index summation; deliberately shares no
// code with contract().
inline DenseTensor naive_contract(const DenseTensor& a, const std::vector<std::size_t>& legs_a,
                                  const DenseTensor& b, const std::vector<std::size_t>& legs_b) {
  std::vector<std::size_t> free_a, free_b;
  for (std::size_t l = 0; l < a.rank(); ++l) {
    if (std::find(legs_a.begin(), legs_a.end(), l) == legs_a.end()) free_a.push_back(l);
  }
  for (std::size_t l = 0; l < b.rank(); ++l) {
    if (std::find(legs_b.begin(), legs_b.end(), l) == legs_b.end()) free_b.push_back(l);
  }
  std::vector<std::size_t> out_shape;
  for (std::size_t l : free_a) out_shape.push_back(a.extent(l));
  for (std::size_t l : free_b) out_shape.push_back(b.extent(l));

  std::size_t k_total = 1;
  for (std::size_t l : legs_a) k_total *= a.extent(l);

  DenseTensor out(out_shape);
  std::vector<std::size_t> ia(a.rank(), 0), ib(b.rank(), 0);
  auto flat = [](const DenseTensor& t, const std::vector<std::size_t>& idx) {
    std::size_t f = 0;
    for (std::size_t l = 0; l < idx.size(); ++l) f = f * t.extent(l) + idx[l];
    return f;
  };
  const std::size_t out_total = out.size() ? out.size() : 1;
  for (std::size_t o = 0; o < out_total; ++o) {
    // decode the output multi-index
    std::size_t rem = o;
    std::vector<std::size_t> oi(out_shape.size());
    for (std::size_t l = out_shape.size(); l-- > 0;) {
      oi[l] = rem % out_shape[l];
      rem /= out_shape[l];
    }
    for (std::size_t l = 0; l < free_a.size(); ++l) ia[free_a[l]] = oi[l];
    for (std::size_t l = 0; l < free_b.size(); ++l) ib[free_b[l]] = oi[free_a.size() + l];
    cplx sum = 0.0;
    for (std::size_t k = 0; k < k_total; ++k) {
      std::size_t kr = k;
      for (std::size_t l = legs_a.size(); l-- > 0;) {
        const std::size_t v = kr % a.extent(legs_a[l]);
        kr /= a.extent(legs_a[l]);
        ia[legs_a[l]] = v;
        ib[legs_b[l]] = v;
      }
      sum += a[flat(a, ia)] * b[flat(b, ib)];
    }
    out[o] = sum;
  }
  return out;
}

// Truncated Taylor series of exp(scale*h), the series oracle for the
// eigendecomposition-based exponential.
inline DenseTensor taylor_exp(const DenseTensor& h, cplx scale, int terms = 30) {
  const std::size_t d = h.extent(0);
  DenseTensor result = DenseTensor::identity(d);
  DenseTensor power = DenseTensor::identity(d);
  double factorial = 1.0;
  for (int n = 1; n <= terms; ++n) {
    power = contract(power, {1}, h, {0});
    factorial *= n;
    cplx coeff = std::pow(scale, n) / factorial;
    for (std::size_t i = 0; i < result.size(); ++i) result[i] += coeff * power[i];
  }
  return result;
}

inline double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace tnld::test
