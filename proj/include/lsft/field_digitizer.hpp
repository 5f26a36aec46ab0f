// Copyright 2026 The lsft Authors
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
 * Digitized field space: each site carries n_s = 2^nQ equally spaced field
 * values in [-phi_max, phi_max], and a lattice state is a real vector of
 * n_s^N amplitudes.
 *
 * Basis order is site-major with the first lattice site most significant;
 * within a site the value index ascends from -phi_max.
 */
#pragma once

#include "lsft/lattice_free.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace lsft {

inline constexpr std::size_t kDefaultAmplitudeBudget = std::size_t{1} << 26;
inline constexpr const char *kBasisOrder = "site_major_first_site_msb";

struct FieldGrid {
  std::vector<double> values;
  double spacing = 0.0;

  int size() const { return static_cast<int>(values.size()); }
};

inline FieldGrid make_grid(int qubits_per_site, double phi_max) {
  detail::require(qubits_per_site >= 1 && qubits_per_site <= 20,
                  "qubits_per_site must lie in 1..20");
  detail::require(std::isfinite(phi_max) && phi_max > 0.0, "phi_max must be positive");
  const int ns = 1 << qubits_per_site;
  FieldGrid grid;
  grid.spacing = 2.0 * phi_max / (ns - 1);
  grid.values.resize(ns);
  for (int i = 0; i < ns / 2; ++i) {
    const double v = phi_max - grid.spacing * i;
    grid.values[ns - 1 - i] = v;
    grid.values[i] = -v;
  }
  return grid;
}

inline FieldGrid make_grid(const LatticeSpec &spec) {
  return make_grid(spec.qubits_per_site, spec.phi_max);
}

struct StateVector {
  Vector amplitudes;
  LatticeSpec spec;
  std::string basis_order = kBasisOrder;

  std::size_t dimension() const { return static_cast<std::size_t>(amplitudes.size()); }
};

namespace detail {

/// Throws BudgetError when n_s^N amplitudes exceed the budget.
inline std::size_t checked_dimension(const LatticeSpec &spec, std::size_t budget) {
  const int bits = spec.n_qubits();
  const double required = std::ldexp(1.0, bits);
  if (bits >= 62 || required > static_cast<double>(budget)) {
    std::ostringstream msg;
    msg << std::fixed << std::setprecision(0) << "state of 2^" << bits << " amplitudes ("
        << required * 8.0 << " bytes) exceeds the amplitude budget of " << budget;
    throw BudgetError(msg.str(), required * 8.0);
  }
  return std::size_t{1} << bits;
}

/// Sum of squares with Neumaier compensation, in index order.
inline double compensated_norm(const Vector &v) {
  double sum = 0.0;
  double comp = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double term = v(i) * v(i);
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
  }
  return std::sqrt(sum + comp);
}

/// Value index of `site` inside basis index `index`.
inline int site_value(std::size_t index, int site, int n_sites, int qubits) {
  const int shift = qubits * (n_sites - 1 - site);
  return static_cast<int>((index >> shift) & ((std::size_t{1} << qubits) - 1));
}

/**
 * @brief phi^T Q phi on every grid configuration.
 *
 * Depth-first over sites carrying the partial form and the partial couplings
 * u_j = sum_{i<d} Q_ij phi_i, so each configuration costs O(N). Only the lower
 * half of the index range is evaluated; the upper half is its reflection.
 */
inline Vector quadratic_form_table(const Matrix &q, const FieldGrid &grid, int n_sites,
                                   int qubits) {
  const int ns = grid.size();
  const std::size_t dim = std::size_t{1} << (n_sites * qubits);
  Vector out(static_cast<Eigen::Index>(dim));
  const std::size_t half = dim / 2;

  // Per-depth state: partial value of the form and couplings to later sites.
  std::vector<double> partial(n_sites + 1, 0.0);
  std::vector<std::vector<double>> coupling(n_sites + 1, std::vector<double>(n_sites, 0.0));
  std::vector<int> digit(n_sites, 0);

  auto descend = [&](int depth) {
    for (int d = depth; d < n_sites; ++d) {
      const double v = grid.values[digit[d]];
      partial[d + 1] = partial[d] + q(d, d) * v * v + 2.0 * v * coupling[d][d];
      for (int j = d + 1; j < n_sites; ++j) {
        coupling[d + 1][j] = coupling[d][j] + q(d, j) * v;
      }
    }
  };

  descend(0);
  for (std::size_t idx = 0; idx < half; ++idx) {
    out(static_cast<Eigen::Index>(idx)) = partial[n_sites];
    // Odometer increment; the deepest changed site determines the restart depth.
    int d = n_sites - 1;
    while (d >= 0 && ++digit[d] == ns) {
      digit[d] = 0;
      --d;
    }
    if (d < 0) {
      break;
    }
    descend(d);
  }
  for (std::size_t idx = 0; idx < half; ++idx) {
    out(static_cast<Eigen::Index>(dim - 1 - idx)) = out(static_cast<Eigen::Index>(idx));
  }
  return out;
}

} // namespace detail

/**
 * @brief Digitized free ground state, amplitude ~ exp(-phi^T K phi / 2) on the grid.
 *
 * Exponents are shifted by their minimum before exponentiation.
 */
inline StateVector ground_state(const CorrelationKernel &kernel, const FieldGrid &grid,
                                std::size_t budget = kDefaultAmplitudeBudget) {
  const LatticeSpec &spec = kernel.spec;
  detail::require(grid.size() == spec.states_per_site(),
                  "grid size does not match qubits_per_site");
  detail::require(std::abs(grid.values.back() - spec.phi_max) <= 1e-12 * spec.phi_max,
                  "grid phi_max does not match the kernel spec");
  detail::checked_dimension(spec, budget);
  Vector q = detail::quadratic_form_table(kernel.k_matrix, grid, spec.n_sites,
                                          spec.qubits_per_site);
  const double qmin = q.minCoeff();
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    q(i) = std::exp(-0.5 * (q(i) - qmin));
  }
  const double norm = detail::compensated_norm(q);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw NumericalError("ground-state normalisation failed");
  }
  StateVector state;
  state.spec = spec;
  state.amplitudes = q / norm;
  return state;
}

inline StateVector uniform_state(const LatticeSpec &spec,
                                 std::size_t budget = kDefaultAmplitudeBudget) {
  spec.validate();
  const std::size_t dim = detail::checked_dimension(spec, budget);
  StateVector state;
  state.spec = spec;
  state.amplitudes = Vector::Constant(static_cast<Eigen::Index>(dim),
                                      1.0 / std::sqrt(static_cast<double>(dim)));
  return state;
}

/// Multiply each amplitude by sum_j phi_j and renormalise.
inline StateVector apply_field_sum(const StateVector &state) {
  const LatticeSpec &spec = state.spec;
  const FieldGrid grid = make_grid(spec);
  const std::size_t dim = state.dimension();
  detail::require(dim == (std::size_t{1} << spec.n_qubits()),
                  "state dimension does not match its spec");
  StateVector out = state;
  for (std::size_t idx = 0; idx < dim; ++idx) {
    double sum = 0.0;
    for (int s = 0; s < spec.n_sites; ++s) {
      sum += grid.values[detail::site_value(idx, s, spec.n_sites, spec.qubits_per_site)];
    }
    out.amplitudes(static_cast<Eigen::Index>(idx)) *= sum;
  }
  const double norm = detail::compensated_norm(out.amplitudes);
  if (!(norm > 0.0)) {
    throw ValidationError("field-sum image of the state vanishes identically");
  }
  out.amplitudes /= norm;
  return out;
}

/// Global field reflection: index i -> dim - 1 - i.
inline Vector reflect(const Vector &v) { return v.reverse(); }

struct FieldMoments {
  Vector mean;
  /// <phi_i phi_j>, not connected.
  Matrix second;
};

inline FieldMoments field_moments(const StateVector &state) {
  const LatticeSpec &spec = state.spec;
  const FieldGrid grid = make_grid(spec);
  const int n = spec.n_sites;
  FieldMoments m{Vector::Zero(n), Matrix::Zero(n, n)};
  std::vector<double> phi(n);
  for (std::size_t idx = 0; idx < state.dimension(); ++idx) {
    const double p = state.amplitudes(static_cast<Eigen::Index>(idx)) *
                     state.amplitudes(static_cast<Eigen::Index>(idx));
    if (p == 0.0) {
      continue;
    }
    for (int s = 0; s < n; ++s) {
      phi[s] = grid.values[detail::site_value(idx, s, n, spec.qubits_per_site)];
      m.mean(s) += p * phi[s];
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        m.second(i, j) += p * phi[i] * phi[j];
      }
    }
  }
  m.second = m.second.selfadjointView<Eigen::Upper>();
  return m;
}

inline nlohmann::json state_metadata(const StateVector &state) {
  return {
      {"spec", to_json(state.spec)},
      {"spec_hash", spec_hash(state.spec)},
      {"basis_order", state.basis_order},
      {"dimension", state.dimension()},
      {"norm", detail::compensated_norm(state.amplitudes)},
  };
}

namespace detail {

inline constexpr std::array<char, 8> kStateMagic = {'L', 'S', 'F', 'T', 'S', 'T', 'V', 0};
inline constexpr std::uint32_t kStateVersion = 1;
inline constexpr std::uint32_t kBasisOrderTag = 1;

template <typename T> void put_le(std::ostream &out, T value) {
  std::uint64_t bits = 0;
  static_assert(sizeof(T) <= 8);
  std::memcpy(&bits, &value, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.put(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

template <typename T> T get_le(std::istream &in) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) {
      throw ValidationError("truncated state file");
    }
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  T value;
  std::memcpy(&value, &bits, sizeof(T));
  return value;
}

} // namespace detail

/**
 * @brief Binary state file: magic, version, N, nQ, phi_max, basis-order tag,
 * amplitude count, then little-endian doubles.
 *
 * A JSON sidecar at `path + ".json"` carries the full spec.
 */
inline void save_state(const StateVector &state, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot open '" + path + "' for writing");
  }
  out.write(detail::kStateMagic.data(), detail::kStateMagic.size());
  detail::put_le<std::uint32_t>(out, detail::kStateVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(state.spec.n_sites));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(state.spec.qubits_per_site));
  detail::put_le<double>(out, state.spec.phi_max);
  detail::put_le<std::uint32_t>(out, detail::kBasisOrderTag);
  detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(state.dimension()));
  for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i) {
    detail::put_le<double>(out, state.amplitudes(i));
  }
  std::ofstream meta(path + ".json");
  meta << state_metadata(state).dump(2) << '\n';
  if (!out || !meta) {
    throw ValidationError("failed writing state to '" + path + "'");
  }
}

inline StateVector load_state(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open state file '" + path + "'");
  }
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != detail::kStateMagic) {
    throw ValidationError("'" + path + "' is not a state file");
  }
  if (detail::get_le<std::uint32_t>(in) != detail::kStateVersion) {
    throw ValidationError("unsupported state file version");
  }
  StateVector state;
  std::ifstream meta_in(path + ".json");
  if (meta_in) {
    state.spec = spec_from_json(nlohmann::json::parse(meta_in).at("spec"));
  }
  state.spec.n_sites = static_cast<int>(detail::get_le<std::uint32_t>(in));
  state.spec.qubits_per_site = static_cast<int>(detail::get_le<std::uint32_t>(in));
  state.spec.phi_max = detail::get_le<double>(in);
  if (detail::get_le<std::uint32_t>(in) != detail::kBasisOrderTag) {
    throw ValidationError("unknown basis order in state file");
  }
  const auto count = detail::get_le<std::uint64_t>(in);
  if (count != (std::uint64_t{1} << state.spec.n_qubits())) {
    throw ValidationError("state file amplitude count does not match its header");
  }
  state.amplitudes.resize(static_cast<Eigen::Index>(count));
  for (std::uint64_t i = 0; i < count; ++i) {
    state.amplitudes(static_cast<Eigen::Index>(i)) = detail::get_le<double>(in);
  }
  return state;
}

} // namespace lsft
