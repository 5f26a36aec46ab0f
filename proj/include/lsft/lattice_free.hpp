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
 * Free lattice scalar field in one spatial dimension: the mass matrix, its
 * square root K (the precision matrix of the Gaussian ground state), and
 * two-point correlation functions in the finite-lattice, infinite-volume,
 * continuum and asymptotic regimes.
 */
#pragma once

#include "lsft/error.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace lsft {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Boundary {
  Periodic,
  /// Fixed-zero ghost sites beyond both ends: every site keeps its full set of
  /// difference terms, and terms reaching past an end couple to a zero field.
  Open,
  /// Difference terms with an endpoint outside the lattice are dropped.
  Free,
};

inline const char *to_string(Boundary b) {
  switch (b) {
  case Boundary::Periodic:
    return "periodic";
  case Boundary::Open:
    return "open";
  case Boundary::Free:
    return "free";
  }
  return "unknown";
}

inline Boundary boundary_from_string(const std::string &s) {
  if (s == "periodic" || s == "pbc") {
    return Boundary::Periodic;
  }
  if (s == "open") {
    return Boundary::Open;
  }
  if (s == "free") {
    return Boundary::Free;
  }
  throw ValidationError("unknown boundary condition '" + s + "'");
}

/// Weights w_d multiplying (phi(i+d) - phi(i))^2 for d = 1..weights.size().
struct GradientStencil {
  std::vector<double> weights;

  static GradientStencil none() { return {}; }
  static GradientStencil s1() { return {{1.0}}; }
  static GradientStencil s3() { return {{1.0 / 3.0, 1.0 / 12.0, 1.0 / 27.0}}; }

  int reach() const { return static_cast<int>(weights.size()); }

  bool is_zero() const {
    for (double w : weights) {
      if (w != 0.0) {
        return false;
      }
    }
    return true;
  }

  friend bool operator==(const GradientStencil &, const GradientStencil &) = default;
};

inline GradientStencil stencil_from_string(const std::string &s) {
  if (s == "s1") {
    return GradientStencil::s1();
  }
  if (s == "s3") {
    return GradientStencil::s3();
  }
  if (s == "none") {
    return GradientStencil::none();
  }
  throw ValidationError("unknown stencil '" + s + "' (expected s1, s3 or none)");
}

struct LatticeSpec {
  int n_sites = 2;
  int qubits_per_site = 2;
  double mass = 1.0;
  double phi_max = 1.0;
  double coupling = 0.0;
  Boundary boundary = Boundary::Periodic;
  GradientStencil stencil = GradientStencil::s1();

  void validate() const {
    detail::require(n_sites >= 1, "n_sites must be positive");
    detail::require(n_sites >= 2 || stencil.is_zero(),
                    "a single site requires a zero-weight stencil");
    detail::require(qubits_per_site >= 1 && qubits_per_site <= 20,
                    "qubits_per_site must lie in 1..20");
    detail::require(std::isfinite(mass) && mass > 0.0, "mass must be positive");
    detail::require(std::isfinite(phi_max) && phi_max > 0.0,
                    "phi_max must be positive");
    detail::require(std::isfinite(coupling) && coupling >= 0.0,
                    "coupling must be non-negative");
    for (double w : stencil.weights) {
      detail::require(std::isfinite(w), "stencil weights must be finite");
    }
  }

  int states_per_site() const { return 1 << qubits_per_site; }
  int n_qubits() const { return n_sites * qubits_per_site; }

  friend bool operator==(const LatticeSpec &, const LatticeSpec &) = default;
};

inline nlohmann::json to_json(const LatticeSpec &spec) {
  return {
      {"n_sites", spec.n_sites},
      {"qubits_per_site", spec.qubits_per_site},
      {"mass", spec.mass},
      {"phi_max", spec.phi_max},
      {"coupling", spec.coupling},
      {"boundary", to_string(spec.boundary)},
      {"stencil", spec.stencil.weights},
  };
}

inline LatticeSpec spec_from_json(const nlohmann::json &j) {
  LatticeSpec spec;
  spec.n_sites = j.at("n_sites").get<int>();
  spec.qubits_per_site = j.at("qubits_per_site").get<int>();
  spec.mass = j.at("mass").get<double>();
  spec.phi_max = j.at("phi_max").get<double>();
  spec.coupling = j.at("coupling").get<double>();
  spec.boundary = boundary_from_string(j.at("boundary").get<std::string>());
  spec.stencil.weights = j.at("stencil").get<std::vector<double>>();
  return spec;
}

/// FNV-1a over the canonical JSON dump; stable across platforms and runs.
inline std::string spec_hash(const LatticeSpec &spec) {
  const std::string canonical = to_json(spec).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/**
 * @brief Assemble M^2 = mhat^2 I + the quadratic form of the stencil-weighted
 * squared differences.
 *
 * Periodic wraps indices mod N and rejects a non-zero weight at distance >= N.
 */
inline Matrix build_mass_matrix(const LatticeSpec &spec) {
  spec.validate();
  const int n = spec.n_sites;
  Matrix m2 = Matrix::Identity(n, n) * (spec.mass * spec.mass);
  const auto &w = spec.stencil.weights;
  for (int d = 1; d <= static_cast<int>(w.size()); ++d) {
    const double wd = w[d - 1];
    if (wd == 0.0) {
      continue;
    }
    switch (spec.boundary) {
    case Boundary::Periodic:
      if (d >= n) {
        throw ValidationError("stencil distance " + std::to_string(d) +
                              " >= N under periodic boundaries");
      }
      for (int i = 0; i < n; ++i) {
        const int j = (i + d) % n;
        m2(i, i) += wd;
        m2(j, j) += wd;
        m2(i, j) -= wd;
        m2(j, i) -= wd;
      }
      break;
    case Boundary::Open:
    case Boundary::Free:
      for (int i = -d; i < n; ++i) {
        const int j = i + d;
        const bool in_i = i >= 0;
        const bool in_j = j < n;
        if (spec.boundary == Boundary::Free && !(in_i && in_j)) {
          continue;
        }
        if (in_i) {
          m2(i, i) += wd;
        }
        if (in_j) {
          m2(j, j) += wd;
        }
        if (in_i && in_j) {
          m2(i, j) -= wd;
          m2(j, i) -= wd;
        }
      }
      break;
    }
  }
  return m2;
}

/// K with its normal-mode decomposition K = modes^T diag(energies) modes.
struct CorrelationKernel {
  Matrix k_matrix;
  Vector energies;
  /// Row i holds normal mode i over the lattice sites.
  Matrix modes;
  LatticeSpec spec;

  int size() const { return static_cast<int>(k_matrix.rows()); }

  Matrix inverse() const {
    return modes.transpose() * energies.cwiseInverse().asDiagonal() * modes;
  }

  /// Ground-state covariance <phi_i phi_j> = (K^-1)_ij / 2.
  Matrix covariance() const { return 0.5 * inverse(); }
};

namespace detail {

// Real Fourier basis ordered p = 0, then (cos, sin) per |p|, then p = pi.
inline void periodic_modes(int n, Matrix &modes, std::vector<double> &momenta) {
  modes.resize(n, n);
  momenta.clear();
  const double two_pi = 2.0 * std::numbers::pi;
  int row = 0;
  modes.row(row).setConstant(1.0 / std::sqrt(double(n)));
  momenta.push_back(0.0);
  ++row;
  for (int q = 1; 2 * q < n; ++q) {
    const double p = two_pi * q / n;
    for (int j = 0; j < n; ++j) {
      modes(row, j) = std::sqrt(2.0 / n) * std::cos(p * j);
      modes(row + 1, j) = std::sqrt(2.0 / n) * std::sin(p * j);
    }
    momenta.push_back(p);
    momenta.push_back(p);
    row += 2;
  }
  if (n % 2 == 0) {
    for (int j = 0; j < n; ++j) {
      modes(row, j) = (j % 2 == 0 ? 1.0 : -1.0) / std::sqrt(double(n));
    }
    momenta.push_back(std::numbers::pi);
  }
}

inline void check_positive_mode(double eigenvalue, int index) {
  if (!(eigenvalue > 0.0)) {
    throw NumericalError("massless/unstable mode: M^2 eigenvalue " +
                         std::to_string(eigenvalue) + " at mode " +
                         std::to_string(index));
  }
}

} // namespace detail

/**
 * @brief Square root of the mass matrix and its normal modes.
 *
 * Periodic lattices use the closed circulant spectrum in a real cos/sin basis
 * and fill K from its first row, so K is exactly circulant. Other boundaries
 * diagonalise M^2 numerically.
 */
inline CorrelationKernel build_kernel(const LatticeSpec &spec) {
  const Matrix m2 = build_mass_matrix(spec);
  const int n = spec.n_sites;
  CorrelationKernel kernel;
  kernel.spec = spec;
  kernel.energies.resize(n);

  if (spec.boundary == Boundary::Periodic) {
    std::vector<double> momenta;
    detail::periodic_modes(n, kernel.modes, momenta);
    for (int i = 0; i < n; ++i) {
      double lambda = 0.0;
      for (int c = 0; c < n; ++c) {
        lambda += m2(0, c) * std::cos(momenta[i] * c);
      }
      detail::check_positive_mode(lambda, i);
      kernel.energies(i) = std::sqrt(lambda);
    }
    // First row of the circulant K from the spectrum.
    std::vector<double> row(n, 0.0);
    for (int r = 0; r < n; ++r) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += kernel.energies(i) * kernel.modes(i, 0) * kernel.modes(i, r);
      }
      row[r] = acc;
    }
    // Symmetrise r <-> N - r so K is symmetric as well as circulant.
    for (int r = 1; 2 * r <= n; ++r) {
      const double s = 0.5 * (row[r] + row[n - r]);
      row[r] = s;
      row[n - r] = s;
    }
    kernel.k_matrix.resize(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        kernel.k_matrix(i, j) = row[((j - i) % n + n) % n];
      }
    }
    return kernel;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(m2);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigen-decomposition of M^2 failed");
  }
  const Vector &lambdas = solver.eigenvalues();
  Matrix u = solver.eigenvectors();
  for (int i = 0; i < n; ++i) {
    detail::check_positive_mode(lambdas(i), i);
    kernel.energies(i) = std::sqrt(lambdas(i));
    // Sign convention: the largest-magnitude component of each mode is positive.
    Eigen::Index arg = 0;
    u.col(i).cwiseAbs().maxCoeff(&arg);
    if (u(arg, i) < 0.0) {
      u.col(i) = -u.col(i);
    }
  }
  kernel.modes = u.transpose();
  Matrix k = kernel.modes.transpose() * kernel.energies.asDiagonal() * kernel.modes;
  kernel.k_matrix = 0.5 * (k + k.transpose());
  return kernel;
}

enum class TwoPointMode {
  FiniteLattice,
  InfiniteVolumeLattice,
  Continuum,
  Asymptotic,
};

inline const char *to_string(TwoPointMode mode) {
  switch (mode) {
  case TwoPointMode::FiniteLattice:
    return "finite_lattice";
  case TwoPointMode::InfiniteVolumeLattice:
    return "infinite_volume_lattice";
  case TwoPointMode::Continuum:
    return "continuum";
  case TwoPointMode::Asymptotic:
    return "asymptotic";
  }
  return "unknown";
}

/// <phi_0 phi_r> on an infinite lattice: int_{-pi}^{pi} dp e^{ipr} / (4 pi E(p)).
inline double infinite_volume_two_point(double mass, int r) {
  const double m2 = mass * mass;
  auto integrand = [m2, r](double p) {
    const double s = 2.0 * std::sin(0.5 * p);
    return std::cos(p * r) / std::sqrt(m2 + s * s);
  };
  double error = 0.0;
  // Even integrand: integrate [0, pi] and double.
  const double half = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, std::numbers::pi, 20, 1e-14, &error);
  if (error > 1e-12) {
    throw NumericalError("two-point quadrature did not reach 1e-12 (error " +
                         std::to_string(error) + ")");
  }
  return 2.0 * half / (4.0 * std::numbers::pi);
}

/// Scalar two-point value for the mass-only regimes (r >= 1 for continuum forms).
inline double two_point_value(TwoPointMode mode, double mass, int r) {
  detail::require(mass > 0.0, "mass must be positive");
  detail::require(r >= 0, "separation must be non-negative");
  switch (mode) {
  case TwoPointMode::InfiniteVolumeLattice:
    return infinite_volume_two_point(mass, r);
  case TwoPointMode::Continuum:
    detail::require(r >= 1, "continuum two-point function diverges at r = 0");
    return std::cyl_bessel_k(0.0, mass * r) / (2.0 * std::numbers::pi);
  case TwoPointMode::Asymptotic:
    detail::require(r >= 1, "asymptotic two-point form is singular at r = 0");
    return std::exp(-mass * r) / std::sqrt(8.0 * std::numbers::pi * mass * r);
  case TwoPointMode::FiniteLattice:
    break;
  }
  throw ValidationError("finite-lattice two-point values need a kernel");
}

struct TwoPointTable {
  std::map<int, double> values;
  TwoPointMode mode = TwoPointMode::FiniteLattice;
};

/**
 * @brief Two-point function <phi_0 phi_r> for r = 0..N-1.
 *
 * The continuum and asymptotic regimes start at r = 1.
 */
inline TwoPointTable two_point(const CorrelationKernel &kernel, TwoPointMode mode) {
  TwoPointTable table;
  table.mode = mode;
  const int n = kernel.size();
  if (mode == TwoPointMode::FiniteLattice) {
    const Matrix cov = kernel.covariance();
    for (int r = 0; r < n; ++r) {
      table.values[r] = cov(0, r);
    }
    return table;
  }
  const int first = (mode == TwoPointMode::InfiniteVolumeLattice) ? 0 : 1;
  for (int r = first; r < n; ++r) {
    table.values[r] = two_point_value(mode, kernel.spec.mass, r);
  }
  return table;
}

/// Infinite-volume continuum envelope of K_ij: -(m / (pi r)) K_1(m r).
inline double kernel_asymptote(double mass, int r) {
  detail::require(r >= 1, "kernel asymptote requires r >= 1");
  detail::require(mass > 0.0, "mass must be positive");
  return -(mass / (std::numbers::pi * r)) * std::cyl_bessel_k(1.0, mass * r);
}

inline nlohmann::json kernel_to_json(const CorrelationKernel &kernel) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(kernel.size()) * kernel.size());
  for (int i = 0; i < kernel.size(); ++i) {
    for (int j = 0; j < kernel.size(); ++j) {
      flat.push_back(kernel.k_matrix(i, j));
    }
  }
  std::vector<double> energies(kernel.energies.data(),
                               kernel.energies.data() + kernel.energies.size());
  return {
      {"spec", to_json(kernel.spec)},
      {"spec_hash", spec_hash(kernel.spec)},
      {"n", kernel.size()},
      {"k_matrix", flat},
      {"energies", energies},
  };
}

inline std::string two_point_csv(const TwoPointTable &table) {
  std::ostringstream out;
  out.precision(17);
  out << "r,value,mode\n";
  for (const auto &[r, v] : table.values) {
    out << r << ',' << v << ',' << to_string(table.mode) << '\n';
  }
  return out.str();
}

} // namespace lsft
