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

#include "lsft/interacting_solver.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace lsft;

namespace {

LatticeSpec spec_of(int n, int nq, double m, double phi_max, double lambda, Boundary b,
                    GradientStencil st = GradientStencil::s1()) {
  LatticeSpec s;
  s.n_sites = n;
  s.qubits_per_site = nq;
  s.mass = m;
  s.phi_max = phi_max;
  s.coupling = lambda;
  s.boundary = b;
  s.stencil = st;
  return s;
}

Matrix dense_of(const LatticeSpec &s, PiMode mode = PiMode::SpectralPeriodic) {
  const auto g = make_grid(s);
  return oracle::dense_hamiltonian(s.n_sites, g.values, build_pi_squared(g, mode),
                                   build_mass_matrix(s), s.coupling);
}

Vector random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = d(rng);
  }
  return v;
}

double lowest_dense(const Matrix &h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

} // namespace

TEST(PiSquared, TwoStates) {
  const auto p = build_pi_squared(make_grid(1, 1.3));
  EXPECT_EQ(p(0, 0), p(1, 1));
  EXPECT_NE(p(0, 1), 0.0);
  EXPECT_EQ(p(0, 1), p(1, 0));
}

TEST(PiSquared, SpectralMatchesDft) {
  for (int nq : {1, 2, 3, 4}) {
    const auto g = make_grid(nq, 2.1);
    const Matrix p = build_pi_squared(g);
    const Matrix want = oracle::spectral_pi2_dft(g.size(), g.spacing);
    EXPECT_LT((p - want).cwiseAbs().maxCoeff(), 1e-12 * want.cwiseAbs().maxCoeff());
  }
}

TEST(PiSquared, SymmetriesAndPositivity) {
  for (auto mode : {PiMode::SpectralPeriodic, PiMode::CentralDifference}) {
    const Matrix p = build_pi_squared(make_grid(3, 2.0), mode);
    EXPECT_EQ(p, p.transpose());
    EXPECT_LT((p.reverse() - p).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> es(p, Eigen::EigenvaluesOnly);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(PiSquared, CentralDifference) {
  const auto g = make_grid(2, 1.5);
  const Matrix p = build_pi_squared(g, PiMode::CentralDifference);
  const double d2 = g.spacing * g.spacing;
  EXPECT_DOUBLE_EQ(p(1, 1), 2.0 / d2);
  EXPECT_DOUBLE_EQ(p(1, 2), -1.0 / d2);
  EXPECT_EQ(p(0, 2), 0.0);
}

TEST(PiSquared, HarmonicOscillatorGroundEnergy) {
  const auto s = spec_of(1, 3, 1.0, 3.5, 0.0, Boundary::Open, GradientStencil::none());
  const double e0 = lowest_dense(dense_of(s));
  EXPECT_NEAR(e0, 0.5, 0.01);
}

TEST(Hamiltonian, MatchesDenseOracle) {
  const auto s = spec_of(2, 2, 0.7, 2.2, 3.0, Boundary::Periodic);
  const SparseHamiltonian h(s);
  const Matrix dense = dense_of(s);
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const Vector v = random_vector(16, seed);
    EXPECT_NEAR(v.dot(h.apply(v)), v.dot(dense * v), 1e-10);
    EXPECT_LT((h.apply(v) - dense * v).cwiseAbs().maxCoeff(), 1e-10);
  }
  const auto s3 = spec_of(3, 2, 0.4, 2.0, 1.5, Boundary::Open, GradientStencil::s3());
  const SparseHamiltonian h3(s3, PiMode::CentralDifference);
  const Matrix d3 = dense_of(s3, PiMode::CentralDifference);
  const Vector v = random_vector(64, 9);
  EXPECT_LT((h3.apply(v) - d3 * v).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Hamiltonian, SymmetricAndReflectionInvariant) {
  const SparseHamiltonian h(spec_of(4, 2, 0.5, 2.0, 4.0, Boundary::Periodic));
  for (unsigned seed = 1; seed <= 4; ++seed) {
    const Vector u = random_vector(256, seed);
    const Vector v = random_vector(256, seed + 100);
    EXPECT_NEAR(u.dot(h.apply(v)), h.apply(u).dot(v), 1e-10);
    EXPECT_LT((h.apply(reflect(u)) - reflect(h.apply(u))).norm(), 1e-10);
  }
}

TEST(Hamiltonian, QuarticDiagonal) {
  const double lambda = 2.5, pm = 1.7;
  const auto base = spec_of(3, 2, 0.9, pm, 0.0, Boundary::Open);
  auto with = base;
  with.coupling = lambda;
  const SparseHamiltonian h0(base), h1(with);
  const Eigen::Index top = 63;
  EXPECT_NEAR(h1.diagonal()(top) - h0.diagonal()(top), 3.0 * lambda * std::pow(pm, 4) / 24.0,
              1e-12);
}

TEST(Hamiltonian, DimensionMismatch) {
  const SparseHamiltonian h(spec_of(2, 2, 0.5, 2.0, 0.0, Boundary::Open));
  Vector out;
  EXPECT_THROW(h.apply(Vector::Ones(15), out), ValidationError);
}

TEST(Lanczos, MatchesDenseGroundEnergy) {
  const auto s = spec_of(3, 2, 0.5, 2.0, 1.0, Boundary::Periodic);
  const SparseHamiltonian h(s);
  const auto r = lanczos_lowest(h, uniform_state(s));
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.energy, lowest_dense(dense_of(s)), 1e-10);
  EXPECT_LT(r.residual, 1e-8);
  // <psi| sum phi |psi> vanishes in the even sector.
  double expect = 0.0;
  const auto g = make_grid(s);
  for (Eigen::Index i = 0; i < r.state.amplitudes.size(); ++i) {
    double f = 0.0;
    for (int site = 0; site < 3; ++site) {
      f += g.values[detail::site_value(i, site, 3, 2)];
    }
    expect += f * r.state.amplitudes(i) * r.state.amplitudes(i);
  }
  EXPECT_NEAR(expect, 0.0, 1e-10);
}

TEST(Lanczos, ConvergesToRoundoffAndFixesSign) {
  const auto s = spec_of(4, 2, 1.6, 1.3, 32.0, Boundary::Open);
  const SparseHamiltonian h(s);
  LanczosOptions opt;
  opt.tolerance = 1e-13;
  const auto r = lanczos_lowest(h, uniform_state(s), opt);
  ASSERT_TRUE(r.converged);
  EXPECT_LT(r.residual, 1e-13);
  Eigen::SelfAdjointEigenSolver<Matrix> es(dense_of(s));
  Vector exact = es.eigenvectors().col(0);
  Eigen::Index at = 0;
  exact.cwiseAbs().maxCoeff(&at);
  exact *= exact(at) < 0 ? -1.0 : 1.0;
  EXPECT_LT((r.state.amplitudes - exact).cwiseAbs().maxCoeff(), 1e-13);
  r.state.amplitudes.cwiseAbs().maxCoeff(&at);
  EXPECT_GT(r.state.amplitudes(at), 0.0);
}

TEST(Lanczos, RandomDrawsMatchDense) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> mass(0.2, 2.0), coupling(0.0, 10.0);
  const int shapes[][2] = {{2, 2}, {3, 2}, {2, 3}, {4, 2}, {5, 2}};
  for (const auto &sh : shapes) {
    const auto s = spec_of(sh[0], sh[1], mass(rng), 2.0, coupling(rng), Boundary::Periodic);
    const SparseHamiltonian h(s);
    const Matrix dense = dense_of(s);
    Eigen::SelfAdjointEigenSolver<Matrix> es(dense);
    const auto spec = solve_spectrum(h);
    EXPECT_NEAR(spec.e0, es.eigenvalues()(0), 1e-10) << sh[0] << "x" << sh[1];
    // The one-particle state is the lowest odd eigenvector.
    double lowest_odd = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const Vector v = es.eigenvectors().col(i);
      if ((v + reflect(v)).norm() < 1e-6) {
        lowest_odd = std::min(lowest_odd, es.eigenvalues()(i));
      }
    }
    EXPECT_NEAR(spec.e1, lowest_odd, 1e-9);
  }
}

TEST(Lanczos, VariationalHistory) {
  const auto s = spec_of(4, 2, 0.6, 2.0, 2.0, Boundary::Open);
  const auto r = lanczos_lowest(SparseHamiltonian(s), uniform_state(s));
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    EXPECT_LE(r.history[i], r.history[i - 1] + 1e-12);
  }
}

TEST(Lanczos, SectorsDoNotMix) {
  const auto s = spec_of(4, 2, 0.6, 2.0, 2.0, Boundary::Periodic);
  const auto spec = solve_spectrum(SparseHamiltonian(s));
  EXPECT_LT(std::abs(spec.ground_state.amplitudes.dot(spec.excited_state.amplitudes)), 1e-10);
  EXPECT_GT(spec.e1, spec.e0);
  EXPECT_LT(spec.residual_ground, 1e-8);
  EXPECT_LT(spec.residual_excited, 1e-8);
  EXPECT_GT(spec.mass_gap, 0.0);
}

TEST(Lanczos, SeedWithoutParityRejected) {
  const auto s = spec_of(2, 2, 0.6, 2.0, 0.0, Boundary::Open);
  StateVector seed = uniform_state(s);
  seed.amplitudes(0) += 0.3;
  EXPECT_THROW(lanczos_lowest(SparseHamiltonian(s), seed), ValidationError);
  seed.amplitudes.setZero();
  EXPECT_THROW(lanczos_lowest(SparseHamiltonian(s), seed), ValidationError);
}

TEST(Lanczos, ExtensiveWithoutCoupling) {
  const auto one = spec_of(1, 2, 0.8, 2.0, 0.0, Boundary::Open, GradientStencil::none());
  const auto two = spec_of(2, 2, 0.8, 2.0, 0.0, Boundary::Open, GradientStencil::none());
  const auto three = spec_of(3, 2, 0.8, 2.0, 0.0, Boundary::Open, GradientStencil::none());
  const double e1 = lanczos_lowest(SparseHamiltonian(one), uniform_state(one)).energy;
  const double e2 = lanczos_lowest(SparseHamiltonian(two), uniform_state(two)).energy;
  const double e3 = lanczos_lowest(SparseHamiltonian(three), uniform_state(three)).energy;
  EXPECT_NEAR(e2, 2.0 * e1, 1e-10);
  EXPECT_NEAR(e3, 3.0 * e1, 1e-9);
}

TEST(Lanczos, FreeLimitImprovesWithQubits) {
  auto rel_err = [](int nq) {
    const auto s = spec_of(3, nq, 1.0, 3.0, 0.0, Boundary::Periodic);
    const double exact = 0.5 * build_kernel(s).energies.sum();
    const double e0 = lanczos_lowest(SparseHamiltonian(s), uniform_state(s)).energy;
    return std::abs(e0 - exact) / exact;
  };
  EXPECT_LT(rel_err(4), rel_err(2));
}

TEST(Observables, ProductStateDiagonal) {
  const auto s = spec_of(3, 2, 0.8, 2.0, 0.0, Boundary::Open, GradientStencil::none());
  const auto spec = solve_spectrum(SparseHamiltonian(s));
  const auto obs = interacting_observables(spec.ground_state);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i != j) {
        EXPECT_NEAR(obs.correlation(i, j), 0.0, 1e-10);
      }
    }
  }
}

TEST(Observables, FreeCaseMatchesKernel) {
  const auto s = spec_of(4, 3, 0.3, 3.5, 0.0, Boundary::Periodic);
  const auto spec = solve_spectrum(SparseHamiltonian(s));
  const auto obs = interacting_observables(spec.ground_state);
  const Matrix want = build_kernel(s).covariance();
  const double rel = ((obs.correlation - want).array() / want.array()).abs().maxCoeff();
  EXPECT_LT(rel, 0.05);
  EXPECT_LT((obs.correlation - obs.correlation.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      EXPECT_NEAR(obs.correlation(i, j), obs.correlation(0, ((j - i) % 4 + 4) % 4), 1e-10);
    }
  }
  EXPECT_LT((obs.inverse * obs.correlation - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(),
            1e-10);
}

TEST(Observables, Manifest) {
  const auto s = spec_of(2, 2, 0.8, 2.0, 1.0, Boundary::Periodic);
  const auto spec = solve_spectrum(SparseHamiltonian(s));
  const auto j = spectrum_manifest(spec, PiMode::SpectralPeriodic);
  EXPECT_EQ(j.at("pi_mode"), "spectral_periodic");
  EXPECT_DOUBLE_EQ(j.at("M_phi").get<double>(), spec.e1 - spec.e0);
}
