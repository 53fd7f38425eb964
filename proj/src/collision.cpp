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

#include "tnld/collision.hpp"

#include <cmath>
#include <stdexcept>

namespace tnld {

namespace {

constexpr cplx kImag(0.0, 1.0);

// Single-qubit blocks.
DenseTensor pauli_x() {
  DenseTensor t({2, 2});
  t.at({0, 1}) = 1.0;
  t.at({1, 0}) = 1.0;
  return t;
}

DenseTensor number_op() {
  DenseTensor t({2, 2});
  t.at({1, 1}) = 1.0;
  return t;
}

DenseTensor hole_op() {  // 1 - n
  DenseTensor t({2, 2});
  t.at({0, 0}) = 1.0;
  return t;
}

DenseTensor kron(const DenseTensor& a, const DenseTensor& b) {
  const std::size_t da = a.extent(0), db = b.extent(0);
  DenseTensor out({da * db, da * db});
  for (std::size_t ia = 0; ia < da; ++ia)
    for (std::size_t ib = 0; ib < db; ++ib)
      for (std::size_t ja = 0; ja < da; ++ja)
        for (std::size_t jb = 0; jb < db; ++jb)
          out.at({ia * db + ib, ja * db + jb}) = a.at({ia, ja}) * b.at({ib, jb});
  return out;
}

DenseTensor matmul(const DenseTensor& a, const DenseTensor& b) { return contract(a, {1}, b, {0}); }

// Split a two-site gate (16x16 on a pair of 4-dim legs) into an MPO pair.
std::pair<DenseTensor, DenseTensor> split_two_site_gate(const DenseTensor& gate) {
  // (a'b', ab) -> (a', b', a, b) -> (a', a, b', b) -> ((a'a), (b'b))
  DenseTensor t = gate.reshaped({4, 4, 4, 4}).permuted({0, 2, 1, 3}).reshaped({16, 16});
  SvdSplit split = svd_truncate(t, 16, 1e-12);
  const std::size_t chi = split.singular_values.size();
  DenseTensor left = split.left_isometry;   // 16 x chi
  DenseTensor right = split.right_factor;   // chi x 16
  for (std::size_t r = 0; r < 16; ++r)
    for (std::size_t c = 0; c < chi; ++c)
      left[r * chi + c] *= std::sqrt(split.singular_values[c]);
  for (std::size_t r = 0; r < chi; ++r)
    for (std::size_t c = 0; c < 16; ++c)
      right[r * 16 + c] *= std::sqrt(split.singular_values[r]);
  return {left.reshaped({1, 4, 4, chi}).permuted({0, 1, 2, 3}),
          right.reshaped({chi, 4, 4, 1})};
}

// Embeds a joint-ket MPO (phys dim 4 = system x ancilla ket) into an MPO on
// the fused 16-dim leg f = ((sb*2 + sk)*2 + ab)*2 + ak, acting on the ket
// slots only.
Mpo embed_ket_mpo(const Mpo& op4) {
  Mpo out;
  for (const auto& w : op4.sites) {
    const std::size_t cl = w.extent(0), cr = w.extent(3);
    DenseTensor t({cl, 16, 16, cr});
    for (std::size_t c = 0; c < cl; ++c)
      for (std::size_t cc = 0; cc < cr; ++cc)
        for (std::size_t sko = 0; sko < 2; ++sko)
          for (std::size_t ako = 0; ako < 2; ++ako)
            for (std::size_t ski = 0; ski < 2; ++ski)
              for (std::size_t aki = 0; aki < 2; ++aki) {
                const cplx val = w.at({c, sko * 2 + ako, ski * 2 + aki, cc});
                if (val == cplx(0.0)) continue;
                for (std::size_t sb = 0; sb < 2; ++sb)
                  for (std::size_t ab = 0; ab < 2; ++ab) {
                    t.at({c, sb * 8 + sko * 4 + ab * 2 + ako, sb * 8 + ski * 4 + ab * 2 + aki,
                          cc}) = val;
                  }
              }
    out.sites.push_back(std::move(t));
  }
  return out;
}

// Bra-side counterpart: the conjugated gates act on the bra slots. With
// conjugate=false the map is deliberately wrong (negative-control fixture).
Mpo embed_bra_mpo(const Mpo& op4, bool conjugate) {
  Mpo out;
  for (const auto& w : op4.sites) {
    const std::size_t cl = w.extent(0), cr = w.extent(3);
    DenseTensor t({cl, 16, 16, cr});
    for (std::size_t c = 0; c < cl; ++c)
      for (std::size_t cc = 0; cc < cr; ++cc)
        for (std::size_t sbo = 0; sbo < 2; ++sbo)
          for (std::size_t abo = 0; abo < 2; ++abo)
            for (std::size_t sbi = 0; sbi < 2; ++sbi)
              for (std::size_t abi = 0; abi < 2; ++abi) {
                cplx val = w.at({c, sbo * 2 + abo, sbi * 2 + abi, cc});
                if (conjugate) val = std::conj(val);
                if (val == cplx(0.0)) continue;
                for (std::size_t sk = 0; sk < 2; ++sk)
                  for (std::size_t ak = 0; ak < 2; ++ak) {
                    t.at({c, sbo * 8 + sk * 4 + abo * 2 + ak, sbi * 8 + sk * 4 + abi * 2 + ak,
                          cc}) = val;
                  }
              }
    out.sites.push_back(std::move(t));
  }
  return out;
}

// Substep MPO on the joint ket space: interaction * even * odd, bond dim <= 2.
Mpo build_substep_mpo(const ModelParams& p) {
  TrotterLayers layers = build_trotter_layers(p);
  return compose(layers.interaction, compose(layers.even, layers.odd));
}

Mps extend_with_ancillas(const Mps& state, const DenseTensor& anc_vec) {
  Mps out;
  out.log_norm = state.log_norm;
  for (const auto& site : state.sites) {
    const std::size_t l = site.extent(0), r = site.extent(2);
    if (site.extent(1) != 4) {
      throw std::invalid_argument("collision step: system state must have physical dimension 4");
    }
    DenseTensor t({l, 16, r});
    for (std::size_t il = 0; il < l; ++il)
      for (std::size_t f4 = 0; f4 < 4; ++f4)
        for (std::size_t a4 = 0; a4 < 4; ++a4)
          for (std::size_t ir = 0; ir < r; ++ir)
            t.at({il, f4 * 4 + a4, ir}) = site.at({il, f4, ir}) * anc_vec[a4];
    out.sites.push_back(std::move(t));
  }
  return out;
}

Mps close_ancillas_with_mpo(const Mps& joint, const std::vector<DenseTensor>& site_tensors) {
  Mps out;
  out.log_norm = joint.log_norm;
  for (std::size_t i = 0; i < joint.length(); ++i) {
    const auto& s = joint.sites[i].shape();
    DenseTensor site = joint.sites[i].reshaped({s[0], 4, 4, s[2]});
    DenseTensor t = contract(site, {2}, site_tensors[i], {1});  // (l, f4, r, c, c')
    t = t.permuted({3, 0, 1, 4, 2});
    const auto& ts = t.shape();
    out.sites.push_back(t.reshaped({ts[0] * ts[1], ts[2], ts[3] * ts[4]}));
  }
  return out;
}

double log_abs_trace(const Mps& state) {
  Mps flat = state;
  flat.log_norm = 0.0;
  const cplx t = trace_vectorized(flat);
  const double mag = std::abs(t);
  if (!(mag > 0.0) || !std::isfinite(mag)) {
    throw std::runtime_error("collision step: state trace collapsed to zero");
  }
  return std::log(mag) + state.log_norm;
}

}  // namespace

double ModelParams::coupling() const { return std::sqrt(gamma / dt); }

void ModelParams::validate() const {
  if (n_sites < 1) throw std::invalid_argument("ModelParams: n_sites must be >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("ModelParams: dt must be > 0");
  if (n_trotter < 1) throw std::invalid_argument("ModelParams: n_trotter must be >= 1");
  if (gamma < 0.0) throw std::invalid_argument("ModelParams: gamma must be >= 0");
}

TrotterLayers build_trotter_layers(const ModelParams& p) {
  p.validate();
  const std::size_t n = p.n_sites;
  const double dt_sub = p.dt / static_cast<double>(p.n_trotter);

  const DenseTensor id2 = DenseTensor::identity(2);
  const DenseTensor sx4 = kron(pauli_x(), id2);       // Rabi term on the joint leg
  const DenseTensor n4 = kron(number_op(), id2);      // excitation number
  const DenseTensor coupling4 = kron(hole_op(), pauli_x());

  const DenseTensor half_rabi = exp_hermitian(sx4, -kImag * (p.omega * dt_sub / 2.0));
  const DenseTensor bond_phase = exp_hermitian(kron(n4, n4), -kImag * (p.v * dt_sub));
  // Half Rabi rotations on both legs composed with the interaction phase:
  // operator Schmidt rank stays 2.
  const DenseTensor bond_gate = matmul(kron(half_rabi, half_rabi), bond_phase);
  const DenseTensor igate = exp_hermitian(coupling4, -kImag * (p.coupling() * dt_sub));

  auto layer_for_parity = [&](std::size_t parity) {
    Mpo layer;
    layer.sites.resize(n);
    std::vector<bool> placed(n, false);
    for (std::size_t b = 0; b + 1 < n; ++b) {
      if (b % 2 != parity) continue;
      auto [wl, wr] = split_two_site_gate(bond_gate);
      layer.sites[b] = std::move(wl);
      layer.sites[b + 1] = std::move(wr);
      placed[b] = placed[b + 1] = true;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!placed[i]) layer.sites[i] = half_rabi.reshaped({1, 4, 4, 1});
    }
    return layer;
  };

  TrotterLayers out;
  out.even = layer_for_parity(0);
  out.odd = layer_for_parity(1);
  Mpo inter;
  for (std::size_t i = 0; i < n; ++i) inter.sites.push_back(igate.reshaped({1, 4, 4, 1}));
  out.interaction = std::move(inter);
  return out;
}

DenseTensor ancilla_vacuum_vector() {
  DenseTensor v({4});
  v[0] = 1.0;
  return v;
}

DenseTensor ancilla_trace_vector() {
  DenseTensor v({4});
  v[0] = 1.0;
  v[3] = 1.0;
  return v;
}

DenseTensor ancilla_project_vector(int outcome) {
  DenseTensor v({4});
  v[outcome ? 3 : 0] = 1.0;
  return v;
}

DenseTensor ancilla_tilt_vector(double s) {
  DenseTensor v({4});
  v[0] = 1.0;
  v[3] = std::exp(-s);
  return v;
}

Mps close_ancillas_with_vectors(const Mps& joint, const std::vector<DenseTensor>& vectors) {
  if (vectors.size() != joint.length()) {
    throw std::invalid_argument("close_ancillas: one vector per site required");
  }
  Mps out;
  out.log_norm = joint.log_norm;
  for (std::size_t i = 0; i < joint.length(); ++i) {
    const auto& s = joint.sites[i].shape();
    if (s[1] != 16) throw std::invalid_argument("close_ancillas: joint physical dimension != 16");
    DenseTensor site = joint.sites[i].reshaped({s[0], 4, 4, s[2]});
    out.sites.push_back(contract(site, {2}, vectors[i], {0}));
  }
  return out;
}

CollisionStep::CollisionStep(const ModelParams& p, const StepDebugOptions& debug) : params_(p) {
  p.validate();
  const Mpo sub4 = build_substep_mpo(p);
  step_ket_ = embed_ket_mpo(sub4);
  step_bra_ = embed_bra_mpo(sub4, !debug.skip_bra_conjugation);
  const Mpo adj4 = sub4.adjoint();
  adj_ket_ = embed_ket_mpo(adj4);
  adj_bra_ = embed_bra_mpo(adj4, !debug.skip_bra_conjugation);
}

JointStepResult CollisionStep::apply_layers(const Mps& state, std::size_t d_max,
                                            double cutoff) const {
  Mps work = extend_with_ancillas(state, ancilla_vacuum_vector());
  double terr = 0.0;
  for (std::size_t n = 0; n < params_.n_trotter; ++n) {
    auto c1 = compress(apply_mpo(step_ket_, work), d_max, cutoff);
    terr += c1.truncation_error;
    auto c2 = compress(apply_mpo(step_bra_, c1.state), d_max, cutoff);
    terr += c2.truncation_error;
    work = std::move(c2.state);
  }
  return {std::move(work), terr};
}

StepResult CollisionStep::apply(const Mps& state, const AncillaClosure& closure,
                                std::size_t d_max, double cutoff) const {
  if (closure.mode == AncillaClosure::Mode::kPartialSample) {
    throw std::invalid_argument("apply_collision_step: PartialSample is handled by the sampler");
  }
  if (state.length() != params_.n_sites) {
    throw std::invalid_argument("apply_collision_step: state length mismatch");
  }
  const double ln_tr_in = log_abs_trace(state);

  JointStepResult joint = apply_layers(state, d_max, cutoff);
  double terr = joint.truncation_error;

  Mps closed;
  switch (closure.mode) {
    case AncillaClosure::Mode::kTilt: {
      std::vector<DenseTensor> vecs(params_.n_sites, ancilla_tilt_vector(closure.s));
      closed = close_ancillas_with_vectors(joint.state, vecs);
      break;
    }
    case AncillaClosure::Mode::kProject: {
      if (closure.outcomes.size() != params_.n_sites) {
        throw std::invalid_argument("apply_collision_step: outcomes length must equal L");
      }
      std::vector<DenseTensor> vecs;
      for (int k : closure.outcomes) vecs.push_back(ancilla_project_vector(k));
      closed = close_ancillas_with_vectors(joint.state, vecs);
      break;
    }
    case AncillaClosure::Mode::kTiltDerivative: {
      // -A exp(-s A) over the ancilla legs: an upper-triangular block MPO of
      // bond dimension 2 built from the tilt weight and its site derivative.
      const DenseTensor a = ancilla_tilt_vector(closure.s);
      DenseTensor b({4});
      b[3] = -std::exp(-closure.s);
      const std::size_t n = params_.n_sites;
      std::vector<DenseTensor> tensors;
      if (n == 1) {
        tensors.push_back(b.reshaped({1, 4, 1}));
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          if (i == 0) {
            DenseTensor t({1, 4, 2});
            for (std::size_t f = 0; f < 4; ++f) {
              t.at({0, f, 0}) = a[f];
              t.at({0, f, 1}) = b[f];
            }
            tensors.push_back(std::move(t));
          } else if (i + 1 == n) {
            DenseTensor t({2, 4, 1});
            for (std::size_t f = 0; f < 4; ++f) {
              t.at({0, f, 0}) = b[f];
              t.at({1, f, 0}) = a[f];
            }
            tensors.push_back(std::move(t));
          } else {
            DenseTensor t({2, 4, 2});
            for (std::size_t f = 0; f < 4; ++f) {
              t.at({0, f, 0}) = a[f];
              t.at({0, f, 1}) = b[f];
              t.at({1, f, 1}) = a[f];
            }
            tensors.push_back(std::move(t));
          }
        }
      }
      closed = close_ancillas_with_mpo(joint.state, tensors);
      break;
    }
    case AncillaClosure::Mode::kPartialSample:
      break;  // unreachable
  }

  auto final_compress = compress(closed, d_max, cutoff);
  terr += final_compress.truncation_error;
  const double ln_tr_out = log_abs_trace(final_compress.state);
  return {std::move(final_compress.state), ln_tr_out - ln_tr_in, terr};
}

StepResult CollisionStep::apply_adjoint(const Mps& state, double s, std::size_t d_max,
                                        double cutoff) const {
  if (state.length() != params_.n_sites) {
    throw std::invalid_argument("apply_adjoint: state length mismatch");
  }
  const double ln_tr_in = log_abs_trace(state);
  // adjoint(E_s): inject the tilt weight as the ancilla boundary, run the
  // adjoint layers, and close on the ancilla vacuum.
  Mps work = extend_with_ancillas(state, ancilla_tilt_vector(s));
  double terr = 0.0;
  for (std::size_t n = 0; n < params_.n_trotter; ++n) {
    auto c1 = compress(apply_mpo(adj_ket_, work), d_max, cutoff);
    terr += c1.truncation_error;
    auto c2 = compress(apply_mpo(adj_bra_, c1.state), d_max, cutoff);
    terr += c2.truncation_error;
    work = std::move(c2.state);
  }
  std::vector<DenseTensor> vecs(params_.n_sites, ancilla_vacuum_vector());
  auto final_compress = compress(close_ancillas_with_vectors(work, vecs), d_max, cutoff);
  terr += final_compress.truncation_error;
  const double ln_tr_out = log_abs_trace(final_compress.state);
  return {std::move(final_compress.state), ln_tr_out - ln_tr_in, terr};
}

StepResult apply_collision_step(const Mps& state, const ModelParams& p,
                                const AncillaClosure& closure, std::size_t d_max, double cutoff) {
  return CollisionStep(p).apply(state, closure, d_max, cutoff);
}

namespace {

Eigen::MatrixXcd eigen_kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Eigen::MatrixXcd site_operator(std::size_t n_sites, std::size_t site, const Eigen::MatrixXcd& op) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (std::size_t i = 0; i < n_sites; ++i) {
    out = eigen_kron(out, i == site ? op : Eigen::MatrixXcd::Identity(4, 4));
  }
  return out;
}

Eigen::MatrixXcd two_site_operator(std::size_t n_sites, std::size_t site,
                                   const Eigen::MatrixXcd& op_a, const Eigen::MatrixXcd& op_b) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (std::size_t i = 0; i < n_sites; ++i) {
    Eigen::MatrixXcd local = Eigen::MatrixXcd::Identity(4, 4);
    if (i == site) local = op_a;
    if (i == site + 1) local = op_b;
    out = eigen_kron(out, local);
  }
  return out;
}

Eigen::MatrixXcd dense_collision_hamiltonian(const ModelParams& p) {
  const std::size_t n = p.n_sites;
  Eigen::Matrix2cd sx;
  sx << 0, 1, 1, 0;
  Eigen::Matrix2cd num;
  num << 0, 0, 0, 1;
  Eigen::Matrix2cd hole;
  hole << 1, 0, 0, 0;
  const Eigen::Matrix2cd id2 = Eigen::Matrix2cd::Identity();

  const Eigen::MatrixXcd sx4 = eigen_kron(sx, id2);
  const Eigen::MatrixXcd n4 = eigen_kron(num, id2);
  const Eigen::MatrixXcd c4 = eigen_kron(hole, sx);

  const std::size_t dim = 1ull << (2 * n);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t i = 0; i < n; ++i) {
    h += p.omega * site_operator(n, i, sx4);
    h += p.coupling() * site_operator(n, i, c4);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h += p.v * two_site_operator(n, i, n4, n4);
  }
  return h;
}

std::vector<Eigen::MatrixXcd> kraus_from_unitary(const Eigen::MatrixXcd& u, std::size_t n) {
  const std::size_t sys_dim = 1ull << n;
  const std::size_t n_kraus = 1ull << n;
  auto joint_index = [&](std::size_t sys, std::size_t anc) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t sk = (sys >> (n - 1 - i)) & 1u;
      const std::size_t ak = (anc >> (n - 1 - i)) & 1u;
      idx = idx * 4 + (sk * 2 + ak);
    }
    return idx;
  };
  std::vector<Eigen::MatrixXcd> kraus;
  kraus.reserve(n_kraus);
  for (std::size_t k = 0; k < n_kraus; ++k) {
    Eigen::MatrixXcd m(sys_dim, sys_dim);
    for (std::size_t r = 0; r < sys_dim; ++r)
      for (std::size_t c = 0; c < sys_dim; ++c)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            u(static_cast<Eigen::Index>(joint_index(r, k)),
              static_cast<Eigen::Index>(joint_index(c, 0)));
    kraus.push_back(std::move(m));
  }
  return kraus;
}

}  // namespace

Eigen::MatrixXcd exact_step_unitary(const ModelParams& p) {
  p.validate();
  if (p.n_sites > 4) throw std::invalid_argument("exact_step_unitary: L must be <= 4");
  const Eigen::MatrixXcd h = dense_collision_hamiltonian(p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXcd phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    phases[i] = std::exp(-kImag * p.dt * es.eigenvalues()[i]);
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::MatrixXcd trotter_step_unitary(const ModelParams& p) {
  p.validate();
  if (p.n_sites > 4) throw std::invalid_argument("trotter_step_unitary: L must be <= 4");
  const DenseTensor sub = mpo_to_dense(build_substep_mpo(p));
  const std::size_t dim = sub.extent(0);
  Eigen::MatrixXcd u_sub(dim, dim);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c)
      u_sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = sub[r * dim + c];
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  for (std::size_t k = 0; k < p.n_trotter; ++k) u = u_sub * u;
  return u;
}

std::vector<Eigen::MatrixXcd> exact_kraus_set(const ModelParams& p) {
  if (p.n_sites > 4) throw std::invalid_argument("exact_kraus_set: L must be <= 4");
  return kraus_from_unitary(exact_step_unitary(p), p.n_sites);
}

std::vector<Eigen::MatrixXcd> trotter_kraus_set(const ModelParams& p) {
  if (p.n_sites > 4) throw std::invalid_argument("trotter_kraus_set: L must be <= 4");
  return kraus_from_unitary(trotter_step_unitary(p), p.n_sites);
}

Mps maximally_mixed_mps(std::size_t n_sites) {
  std::vector<std::vector<cplx>> vecs(n_sites, {0.5, 0.0, 0.0, 0.5});
  return Mps::product_state(vecs);
}

Mps identity_mps(std::size_t n_sites) {
  std::vector<std::vector<cplx>> vecs(n_sites, {1.0, 0.0, 0.0, 1.0});
  return Mps::product_state(vecs);
}

Mps basis_state_mps(const std::vector<int>& bits) {
  std::vector<std::vector<cplx>> vecs;
  for (int b : bits) {
    std::vector<cplx> v(4, 0.0);
    v[b ? 3 : 0] = 1.0;
    vecs.push_back(std::move(v));
  }
  return Mps::product_state(vecs);
}

}  // namespace tnld
