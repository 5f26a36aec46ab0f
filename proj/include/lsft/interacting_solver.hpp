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
 * Digitized lambda phi^4 Hamiltonian applied matrix-free, and a Lanczos
 * solver for the lowest state in each field-parity sector.
 */
#pragma once

#include "lsft/field_digitizer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace lsft {

enum class PiMode {
  SpectralPeriodic,
  CentralDifference,
};

inline const char *to_string(PiMode mode) {
  return mode == PiMode::SpectralPeriodic ? "spectral_periodic" : "central_difference";
}

inline PiMode pi_mode_from_string(const std::string &s) {
  if (s == "spectral" || s == "spectral_periodic") {
    return PiMode::SpectralPeriodic;
  }
  if (s == "central" || s == "central_difference") {
    return PiMode::CentralDifference;
  }
  throw ValidationError("unknown Pi^2 mode '" + s + "'");
}

/**
 * @brief Conjugate-momentum-squared operator on one site's field grid.
 *
 * The spectral form is F^dagger diag(p_k^2) F with p_k = 2 pi k / (n_s dphi),
 * k = -n_s/2+1 .. n_s/2; its matrix elements depend only on the index
 * difference and are real.
 */
inline Matrix build_pi_squared(const FieldGrid &grid, PiMode mode = PiMode::SpectralPeriodic) {
  const int ns = grid.size();
  detail::require(ns >= 2, "Pi^2 needs at least two field values");
  const double dphi = grid.spacing;
  Matrix pi2 = Matrix::Zero(ns, ns);
  if (mode == PiMode::CentralDifference) {
    for (int i = 0; i < ns; ++i) {
      pi2(i, i) = 2.0 / (dphi * dphi);
      if (i + 1 < ns) {
        pi2(i, i + 1) = pi2(i + 1, i) = -1.0 / (dphi * dphi);
      }
    }
    return pi2;
  }
  const double unit = 2.0 * std::numbers::pi / (ns * dphi);
  std::vector<double> by_offset(ns, 0.0);
  for (int d = 0; d < ns; ++d) {
    double acc = 0.0;
    for (int k = -ns / 2 + 1; k <= ns / 2; ++k) {
      const double p = unit * k;
      acc += p * p * std::cos(2.0 * std::numbers::pi * k * d / ns);
    }
    by_offset[d] = acc / ns;
  }
  for (int a = 0; a < ns; ++a) {
    for (int b = 0; b < ns; ++b) {
      pi2(a, b) = by_offset[std::abs(a - b)];
    }
  }
  // Enforce exact symmetry and reflection invariance.
  Matrix reflected = pi2.reverse();
  pi2 = 0.25 * (pi2 + pi2.transpose() + reflected + reflected.transpose());
  return pi2;
}

struct SiteOperatorSet {
  Matrix pi_squared;
  Vector phi_diag;
  Vector phi4_diag;
  PiMode pi_mode = PiMode::SpectralPeriodic;
};

inline SiteOperatorSet make_site_operators(const FieldGrid &grid, PiMode mode) {
  SiteOperatorSet ops;
  ops.pi_squared = build_pi_squared(grid, mode);
  ops.pi_mode = mode;
  ops.phi_diag = Eigen::Map<const Vector>(grid.values.data(), grid.size());
  ops.phi4_diag = ops.phi_diag.array().pow(4.0);
  return ops;
}

/**
 * @brief H = sum_j Pi_j^2 / 2 + phi^T M^2 phi / 2 + lambda/24 sum_j phi_j^4,
 * stored as its diagonal plus the single-site Pi^2 block.
 */
class SparseHamiltonian {
public:
  SparseHamiltonian(const LatticeSpec &spec, PiMode mode = PiMode::SpectralPeriodic,
                    std::size_t budget = kDefaultAmplitudeBudget)
      : spec_(spec) {
    spec.validate();
    dim_ = detail::checked_dimension(spec, budget);
    const FieldGrid grid = make_grid(spec);
    ops_ = make_site_operators(grid, mode);
    const Matrix m2 = build_mass_matrix(spec);
    diagonal_ = 0.5 * detail::quadratic_form_table(m2, grid, spec.n_sites,
                                                   spec.qubits_per_site);
    const double quartic = spec.coupling / 24.0;
    if (quartic != 0.0) {
      for (std::size_t idx = 0; idx < dim_; ++idx) {
        double acc = 0.0;
        for (int s = 0; s < spec.n_sites; ++s) {
          acc += ops_.phi4_diag(
              detail::site_value(idx, s, spec.n_sites, spec.qubits_per_site));
        }
        diagonal_(static_cast<Eigen::Index>(idx)) += quartic * acc;
      }
    }
    half_pi2_ = 0.5 * ops_.pi_squared;
  }

  std::size_t dimension() const { return dim_; }
  const LatticeSpec &spec() const { return spec_; }
  const SiteOperatorSet &site_operators() const { return ops_; }
  const Vector &diagonal() const { return diagonal_; }

  void apply(const Vector &in, Vector &out) const {
    if (static_cast<std::size_t>(in.size()) != dim_) {
      throw ValidationError("state dimension " + std::to_string(in.size()) +
                            " does not match Hamiltonian dimension " +
                            std::to_string(dim_));
    }
    out = diagonal_.cwiseProduct(in);
    const int ns = spec_.states_per_site();
    std::vector<double> column(ns);
    for (int s = 0; s < spec_.n_sites; ++s) {
      const std::size_t stride = std::size_t{1}
                                 << (spec_.qubits_per_site * (spec_.n_sites - 1 - s));
      const std::size_t block = stride * ns;
      for (std::size_t base = 0; base < dim_; base += block) {
        for (std::size_t off = 0; off < stride; ++off) {
          const std::size_t start = base + off;
          for (int a = 0; a < ns; ++a) {
            double acc = 0.0;
            for (int b = 0; b < ns; ++b) {
              acc += half_pi2_(a, b) * in(static_cast<Eigen::Index>(start + b * stride));
            }
            column[a] = acc;
          }
          for (int a = 0; a < ns; ++a) {
            out(static_cast<Eigen::Index>(start + a * stride)) += column[a];
          }
        }
      }
    }
  }

  Vector apply(const Vector &in) const {
    Vector out;
    apply(in, out);
    return out;
  }

private:
  LatticeSpec spec_;
  std::size_t dim_ = 0;
  SiteOperatorSet ops_;
  Vector diagonal_;
  Matrix half_pi2_;
};

inline StateVector apply_hamiltonian(const SparseHamiltonian &h, const StateVector &psi) {
  StateVector out = psi;
  h.apply(psi.amplitudes, out.amplitudes);
  return out;
}

struct LanczosOptions {
  double tolerance = 1e-8;
  int max_iterations = 500;
  /// Krylov basis size before restarting from the current Ritz vector.
  int restart_size = 120;
};

struct LanczosResult {
  double energy = 0.0;
  StateVector state;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  /// Ritz value after each iteration.
  std::vector<double> history;
};

/**
 * @brief Lowest eigenpair in the parity sector of the seed.
 *
 * Full reorthogonalisation; every Krylov vector is projected onto the seed's
 * reflection sector. Restarts from the Ritz vector when the basis is full.
 */
inline LanczosResult lanczos_lowest(const SparseHamiltonian &h, const StateVector &seed,
                                    const LanczosOptions &opt = {}) {
  const auto dim = static_cast<Eigen::Index>(h.dimension());
  detail::require(seed.amplitudes.size() == dim, "seed dimension mismatch");
  const double seed_norm = seed.amplitudes.norm();
  detail::require(seed_norm > 0.0, "Lanczos seed must be non-zero");
  const double even = (seed.amplitudes - reflect(seed.amplitudes)).norm();
  const double odd = (seed.amplitudes + reflect(seed.amplitudes)).norm();
  detail::require(std::min(even, odd) <= 1e-12 * seed_norm,
                  "Lanczos seed must have definite field parity");
  const double parity = even <= odd ? 1.0 : -1.0;
  auto project = [parity](Vector &v) { v = 0.5 * (v + parity * reflect(v)); };

  LanczosResult result;
  result.state = seed;
  Vector start = seed.amplitudes / seed_norm;
  const int m_max = std::max(2, std::min<int>(opt.restart_size, static_cast<int>(dim)));
  Vector w;
  double energy = 0.0;

  while (result.iterations < opt.max_iterations) {
    Matrix basis(dim, m_max);
    std::vector<double> alpha;
    std::vector<double> beta;
    basis.col(0) = start;
    Vector ritz_coeffs;
    bool invariant = false;
    int k = 0;
    for (; k < m_max && result.iterations < opt.max_iterations; ++k) {
      h.apply(basis.col(k), w);
      project(w);
      alpha.push_back(basis.col(k).dot(w));
      // Two passes of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass) {
        w -= basis.leftCols(k + 1) * (basis.leftCols(k + 1).transpose() * w);
      }
      const double b = w.norm();
      ++result.iterations;

      const int size = k + 1;
      Matrix t = Matrix::Zero(size, size);
      for (int i = 0; i < size; ++i) {
        t(i, i) = alpha[i];
        if (i + 1 < size) {
          t(i, i + 1) = t(i + 1, i) = beta[i];
        }
      }
      Eigen::SelfAdjointEigenSolver<Matrix> ts(t);
      energy = ts.eigenvalues()(0);
      ritz_coeffs = ts.eigenvectors().col(0);
      result.history.push_back(energy);
      const double estimate = std::abs(b * ritz_coeffs(size - 1));

      if (estimate < 0.1 * opt.tolerance || b < 1e-14) {
        invariant = b < 1e-14;
        ++k;
        break;
      }
      if (k + 1 < m_max) {
        beta.push_back(b);
        basis.col(k + 1) = w / b;
      }
    }
    Vector ritz = basis.leftCols(k) * ritz_coeffs;
    project(ritz);
    ritz.normalize();
    Vector hr = h.apply(ritz);
    project(hr);
    energy = ritz.dot(hr);
    // Two projections, as for the Krylov vectors, so roundoff in the
    // Rayleigh quotient does not set the residual floor.
    hr -= energy * ritz;
    hr -= ritz.dot(hr) * ritz;
    result.residual = hr.norm();
    result.energy = energy;
    result.state.amplitudes = ritz;
    if (result.residual < opt.tolerance || invariant) {
      result.converged = result.residual < opt.tolerance;
      break;
    }
    start = ritz;
  }
  // Sign convention: the largest-magnitude amplitude (first on ties) is positive.
  Eigen::Index at = 0;
  result.state.amplitudes.cwiseAbs().maxCoeff(&at);
  if (result.state.amplitudes(at) < 0.0) {
    result.state.amplitudes = -result.state.amplitudes;
  }
  return result;
}

namespace detail {

inline std::string convergence_failure(const char *which, const LanczosResult &r) {
  std::ostringstream msg;
  msg << which << " Lanczos did not converge: residual " << std::scientific
      << std::setprecision(3) << r.residual << " after " << r.iterations << " iterations";
  return msg.str();
}

} // namespace detail

struct SpectrumResult {
  double e0 = 0.0;
  double e1 = 0.0;
  double mass_gap = 0.0;
  StateVector ground_state;
  StateVector excited_state;
  int iterations_ground = 0;
  int iterations_excited = 0;
  double residual_ground = 0.0;
  double residual_excited = 0.0;
};

/**
 * @brief Ground state from the uniform seed and the one-particle state from
 * sum_j phi_j applied to the ground state.
 */
inline SpectrumResult solve_spectrum(const SparseHamiltonian &h, const LanczosOptions &opt = {}) {
  const StateVector seed = uniform_state(h.spec(), h.dimension());
  const LanczosResult g = lanczos_lowest(h, seed, opt);
  if (!g.converged) {
    throw NumericalError(detail::convergence_failure("ground-state", g));
  }
  const LanczosResult x = lanczos_lowest(h, apply_field_sum(g.state), opt);
  if (!x.converged) {
    throw NumericalError(detail::convergence_failure("one-particle", x));
  }
  SpectrumResult r;
  r.e0 = g.energy;
  r.e1 = x.energy;
  r.mass_gap = x.energy - g.energy;
  r.ground_state = g.state;
  r.excited_state = x.state;
  r.iterations_ground = g.iterations;
  r.iterations_excited = x.iterations;
  r.residual_ground = g.residual;
  r.residual_excited = x.residual;
  return r;
}

struct InteractingObservables {
  /// Connected <phi_i phi_j> - <phi_i><phi_j>.
  Matrix correlation;
  Matrix inverse;
};

inline InteractingObservables interacting_observables(const StateVector &ground) {
  const FieldMoments m = field_moments(ground);
  InteractingObservables obs;
  obs.correlation = m.second - m.mean * m.mean.transpose();
  obs.correlation = 0.5 * (obs.correlation + obs.correlation.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(obs.correlation, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 1e-14 * es.eigenvalues().cwiseAbs().maxCoeff())) {
    throw NumericalError("connected two-point matrix is singular");
  }
  obs.inverse = obs.correlation.inverse();
  obs.inverse = 0.5 * (obs.inverse + obs.inverse.transpose());
  return obs;
}

inline nlohmann::json spectrum_manifest(const SpectrumResult &r, PiMode mode) {
  const LatticeSpec &spec = r.ground_state.spec;
  return {
      {"spec", to_json(spec)},
      {"spec_hash", spec_hash(spec)},
      {"boundary", to_string(spec.boundary)},
      {"pi_mode", to_string(mode)},
      {"seeds", {"uniform", "field_sum(ground)"}},
      {"e0", r.e0},
      {"e1", r.e1},
      {"M_phi", r.mass_gap},
      {"iterations", {r.iterations_ground, r.iterations_excited}},
      {"residuals", {r.residual_ground, r.residual_excited}},
  };
}

} // namespace lsft
