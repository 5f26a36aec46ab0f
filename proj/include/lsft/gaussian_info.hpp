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
 * Entanglement of the Gaussian ground state: reduced density matrices of
 * subsets of sites, von Neumann entropy, mutual information and the
 * logarithmic-free (trace norm) negativity between two sites.
 *
 * Site indices are zero-based. Logarithms are natural.
 */
#pragma once

#include "lsft/lattice_free.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace lsft {

/**
 * Reduced state of the kept sites,
 * rho(x, x') ~ exp(-(x^T gamma x + x'^T gamma x') / 2 + x^T beta x').
 */
struct GaussianReduction {
  Matrix gamma;
  Matrix beta;
  Vector beta_prime_eigs;
  std::vector<int> kept_sites;
};

namespace detail {

inline std::vector<int> complement(int n, const std::vector<int> &kept) {
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    if (!std::binary_search(kept.begin(), kept.end(), i)) {
      out.push_back(i);
    }
  }
  return out;
}

inline Matrix submatrix(const Matrix &m, const std::vector<int> &rows,
                        const std::vector<int> &cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(i, j) = m(rows[i], cols[j]);
    }
  }
  return out;
}

/// Eigenvalues of gamma_D^{-1/2} V beta V^T gamma_D^{-1/2} with gamma = V^T gamma_D V.
inline Vector normalised_beta_eigs(const Matrix &gamma, const Matrix &beta) {
  Eigen::SelfAdjointEigenSolver<Matrix> gsolve(0.5 * (gamma + gamma.transpose()));
  if (gsolve.info() != Eigen::Success) {
    throw NumericalError("eigen-decomposition of gamma failed");
  }
  const Vector &gd = gsolve.eigenvalues();
  if (!(gd.minCoeff() > 0.0)) {
    throw NumericalError("gamma is not positive definite");
  }
  const Matrix v = gsolve.eigenvectors().transpose();
  const Vector scale = gd.cwiseSqrt().cwiseInverse();
  Matrix bp = scale.asDiagonal() * (v * beta * v.transpose()) * scale.asDiagonal();
  bp = 0.5 * (bp + bp.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> bsolve(bp, Eigen::EigenvaluesOnly);
  if (bsolve.info() != Eigen::Success) {
    throw NumericalError("eigen-decomposition of beta' failed");
  }
  return bsolve.eigenvalues();
}

} // namespace detail

/// Trace out every site not in kept_sites.
inline GaussianReduction reduce(const CorrelationKernel &kernel,
                                std::vector<int> kept_sites) {
  const int n = kernel.size();
  detail::require(!kept_sites.empty(), "kept_sites must be non-empty");
  std::sort(kept_sites.begin(), kept_sites.end());
  detail::require(std::adjacent_find(kept_sites.begin(), kept_sites.end()) ==
                      kept_sites.end(),
                  "kept_sites must be distinct");
  detail::require(kept_sites.front() >= 0 && kept_sites.back() < n,
                  "kept site index out of range");
  const std::vector<int> traced = detail::complement(n, kept_sites);
  detail::require(!traced.empty(), "at least one site must be traced out");

  const Matrix &k = kernel.k_matrix;
  const Matrix a = detail::submatrix(k, traced, traced);
  const Matrix b = detail::submatrix(k, traced, kept_sites);
  const Matrix c = detail::submatrix(k, kept_sites, kept_sites);

  Eigen::SelfAdjointEigenSolver<Matrix> asolve(a, Eigen::EigenvaluesOnly);
  const double amin = asolve.eigenvalues().minCoeff();
  const double amax = asolve.eigenvalues().maxCoeff();
  if (!(amin > 1e-13 * amax)) {
    throw NumericalError("ill-conditioned partition: traced block is singular");
  }
  Eigen::LLT<Matrix> llt(a);
  GaussianReduction red;
  red.kept_sites = kept_sites;
  red.beta = 0.5 * b.transpose() * llt.solve(b);
  red.beta = 0.5 * (red.beta + red.beta.transpose());
  red.gamma = c - red.beta;
  red.beta_prime_eigs = detail::normalised_beta_eigs(red.gamma, red.beta);
  return red;
}

/// Geometric ratio of the oscillator tower: xi = b / (1 + sqrt(1 - b^2)).
inline double tower_ratio(double beta_prime) {
  if (!(std::abs(beta_prime) < 1.0)) {
    throw ValidationError("|beta'| >= 1: reduced state is not normalisable");
  }
  return beta_prime / (1.0 + std::sqrt(1.0 - beta_prime * beta_prime));
}

/// Entropy of one tower with eigenvalues (1 - xi) xi^n, 0 <= xi < 1.
inline double tower_entropy(double xi) {
  if (xi <= 0.0) {
    return 0.0;
  }
  return -(std::log1p(-xi) + xi * std::log(xi) / (1.0 - xi));
}

inline double entropy(const GaussianReduction &reduction) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < reduction.beta_prime_eigs.size(); ++i) {
    s += tower_entropy(tower_ratio(reduction.beta_prime_eigs(i)));
  }
  return s;
}

/// Entropy of an arbitrary site set; the full lattice is pure.
inline double entropy(const CorrelationKernel &kernel, const std::vector<int> &sites) {
  if (static_cast<int>(sites.size()) == kernel.size()) {
    return 0.0;
  }
  return entropy(reduce(kernel, sites));
}

inline double mutual_information(const CorrelationKernel &kernel, int site_a, int site_b) {
  detail::require(site_a != site_b, "mutual information needs two distinct sites");
  const double sa = entropy(kernel, {site_a});
  const double sb = entropy(kernel, {site_b});
  const double sab = entropy(kernel, {site_a, site_b});
  return sa + sb - sab;
}

/// Closed form for the two-site lattice: |K12| / (K11 - |K12| + sqrt(det K)).
inline double negativity_full_two_site(const CorrelationKernel &kernel) {
  detail::require(kernel.size() == 2, "two-site negativity requires N = 2");
  const Matrix &k = kernel.k_matrix;
  const double k12 = std::abs(k(0, 1));
  return k12 / (k(0, 0) - k12 + std::sqrt(k.determinant()));
}

namespace detail {

/// Negativity of a product of towers; only towers with xi < 0 contribute.
inline double negativity_from_ratios(const Vector &beta_prime) {
  double norm = 1.0;
  for (Eigen::Index i = 0; i < beta_prime.size(); ++i) {
    const double xi = tower_ratio(beta_prime(i));
    if (xi < 0.0) {
      norm *= (1.0 - xi) / (1.0 + xi);
    }
  }
  return 0.5 * (norm - 1.0);
}

} // namespace detail

/**
 * @brief Negativity between two sites of a lattice with N > 2.
 *
 * The partial transpose on site b maps (gamma_12, beta_12) to
 * (-beta_12, -gamma_12); the transposed kernel is reduced to decoupled towers
 * and the negative ones give the trace norm.
 */
inline double negativity_reduced(const CorrelationKernel &kernel, int site_a, int site_b) {
  detail::require(kernel.size() > 2, "reduced negativity requires N > 2");
  detail::require(site_a != site_b, "negativity needs two distinct sites");
  const GaussianReduction red = reduce(kernel, {site_a, site_b});
  Matrix g = red.gamma;
  Matrix b = red.beta;
  g(0, 1) = g(1, 0) = -red.beta(0, 1);
  b(0, 1) = b(1, 0) = -red.gamma(0, 1);
  return detail::negativity_from_ratios(detail::normalised_beta_eigs(g, b));
}

inline double negativity(const CorrelationKernel &kernel, int site_a, int site_b) {
  if (kernel.size() == 2) {
    detail::require(site_a != site_b, "negativity needs two distinct sites");
    return negativity_full_two_site(kernel);
  }
  return negativity_reduced(kernel, site_a, site_b);
}

struct EntanglementReport {
  double entropy_single = 0.0;
  double entropy_pair = 0.0;
  double mutual_information = 0.0;
  double negativity = 0.0;
  int site_a = 0;
  int site_b = 0;
};

inline EntanglementReport entanglement_report(const CorrelationKernel &kernel, int site_a,
                                              int site_b) {
  detail::require(site_a != site_b, "report needs two distinct sites");
  EntanglementReport rep;
  rep.site_a = site_a;
  rep.site_b = site_b;
  rep.entropy_single = entropy(kernel, {site_a});
  const double sb = entropy(kernel, {site_b});
  rep.entropy_pair = entropy(kernel, {site_a, site_b});
  rep.mutual_information = rep.entropy_single + sb - rep.entropy_pair;
  rep.negativity = negativity(kernel, site_a, site_b);
  return rep;
}

struct CorrelationSweepRow {
  int r = 0;
  double two_point = 0.0;
  double k_entry = 0.0;
  double mutual_information = 0.0;
  double negativity_s1 = 0.0;
  double negativity_s3 = 0.0;
};

/**
 * @brief Correlations between site 0 and site r for r = 1..r_max.
 *
 * Two-point values, K entries and mutual information use the spec's stencil;
 * negativities are given for the s1 and s3 stencils.
 */
inline std::vector<CorrelationSweepRow> correlation_sweep(const LatticeSpec &spec, int r_max) {
  const CorrelationKernel k = build_kernel(spec);
  LatticeSpec variant = spec;
  variant.stencil = GradientStencil::s1();
  const CorrelationKernel k1 = build_kernel(variant);
  variant.stencil = GradientStencil::s3();
  const CorrelationKernel k3 = build_kernel(variant);
  detail::require(r_max >= 1 && r_max < k.size(), "r_max must lie in 1..N-1");
  const Matrix cov = k.covariance();
  std::vector<CorrelationSweepRow> rows;
  for (int r = 1; r <= r_max; ++r) {
    CorrelationSweepRow row;
    row.r = r;
    row.two_point = cov(0, r);
    row.k_entry = k.k_matrix(0, r);
    row.mutual_information = mutual_information(k, 0, r);
    row.negativity_s1 = negativity(k1, 0, r);
    row.negativity_s3 = negativity(k3, 0, r);
    rows.push_back(row);
  }
  return rows;
}

inline std::string correlation_sweep_csv(const std::vector<CorrelationSweepRow> &rows) {
  std::ostringstream out;
  out.precision(17);
  out << "r,two_point,K_entry,mutual_information,negativity_s1,negativity_s3\n";
  for (const auto &row : rows) {
    out << row.r << ',' << row.two_point << ',' << row.k_entry << ','
        << row.mutual_information << ',' << row.negativity_s1 << ','
        << row.negativity_s3 << '\n';
  }
  return out.str();
}

} // namespace lsft
