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

#include "lsft/gaussian_info.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace lsft;

namespace {

LatticeSpec spec_of(int n, double m, Boundary b, GradientStencil st = GradientStencil::s1()) {
  LatticeSpec s;
  s.n_sites = n;
  s.mass = m;
  s.boundary = b;
  s.stencil = st;
  return s;
}

// Sorted descending eigenvalues of the product of towers with ratios xi.
std::vector<double> tower_spectrum(const std::vector<double> &xi, int keep) {
  std::vector<double> out{1.0};
  for (double x : xi) {
    std::vector<double> next;
    for (double v : out) {
      for (int k = 0; k < 40; ++k) {
        next.push_back(v * (1.0 - x) * std::pow(x, k));
      }
    }
    out = std::move(next);
  }
  std::sort(out.rbegin(), out.rend());
  out.resize(keep);
  return out;
}

double grid_entropy(const Vector &ev) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > 0.0) {
      s -= ev(i) * std::log(ev(i));
    }
  }
  return s;
}

double grid_half_width(const GaussianReduction &red) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(red.gamma - red.beta, Eigen::EigenvaluesOnly);
  return 8.0 / std::sqrt(es.eigenvalues().minCoeff());
}

} // namespace

TEST(Reduce, ProductStateHasNoEntanglement) {
  const auto k = build_kernel(spec_of(5, 0.7, Boundary::Periodic, GradientStencil::none()));
  const auto red = reduce(k, {1, 3});
  EXPECT_LT(red.beta.cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(red.beta_prime_eigs.cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(entropy(red), 0.0, 1e-15);
  EXPECT_NEAR(mutual_information(k, 0, 2), 0.0, 1e-15);
  EXPECT_NEAR(negativity(k, 0, 2), 0.0, 1e-15);
}

TEST(Reduce, TwoSiteEigenvalues) {
  const auto k = build_kernel(spec_of(9, 0.4, Boundary::Periodic));
  const auto red = reduce(k, {2, 5});
  const auto &g = red.gamma;
  const auto &b = red.beta;
  std::vector<double> want = {(b(0, 0) - b(0, 1)) / (g(0, 0) - g(0, 1)),
                              (b(0, 0) + b(0, 1)) / (g(0, 0) + g(0, 1))};
  std::sort(want.begin(), want.end());
  EXPECT_NEAR(red.beta_prime_eigs(0), want[0], 1e-13);
  EXPECT_NEAR(red.beta_prime_eigs(1), want[1], 1e-13);
  for (Eigen::Index i = 0; i < 2; ++i) {
    EXPECT_LT(std::abs(red.beta_prime_eigs(i)), 1.0);
  }
}

TEST(Reduce, MatchesFieldGridSpectrum) {
  const auto k = build_kernel(spec_of(6, 0.5, Boundary::Open));
  const auto red = reduce(k, {1, 4});
  std::vector<double> xi;
  for (Eigen::Index i = 0; i < red.beta_prime_eigs.size(); ++i) {
    xi.push_back(tower_ratio(red.beta_prime_eigs(i)));
  }
  const Vector grid = oracle::grid_reduced_spectrum(red.gamma, red.beta, 60, grid_half_width(red));
  const auto want = tower_spectrum(xi, 4);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(grid(i), want[i], 1e-6) << "eigenvalue " << i;
  }
  EXPECT_NEAR(grid(1) / grid(0), *std::max_element(xi.begin(), xi.end()), 1e-6);
}

TEST(Reduce, RejectsBadSiteSets) {
  const auto k = build_kernel(spec_of(4, 0.5, Boundary::Open));
  EXPECT_THROW(reduce(k, {}), ValidationError);
  EXPECT_THROW(reduce(k, {0, 1, 2, 3}), ValidationError);
  EXPECT_THROW(reduce(k, {4}), ValidationError);
  EXPECT_THROW(reduce(k, {1, 1}), ValidationError);
}

TEST(Reduce, SingularTracedBlock) {
  CorrelationKernel k = build_kernel(spec_of(3, 0.5, Boundary::Open));
  k.k_matrix(0, 0) = 0.0;
  k.k_matrix(0, 1) = k.k_matrix(1, 0) = 0.0;
  k.k_matrix(0, 2) = k.k_matrix(2, 0) = 0.0;
  EXPECT_THROW(reduce(k, {1, 2}), NumericalError);
}

TEST(Entropy, TowerSummation) {
  for (double xi : {1e-4, 0.01, 0.1, 0.35, 0.7}) {
    EXPECT_NEAR(tower_entropy(xi), oracle::tower_sum_entropy(xi), 1e-12);
  }
  EXPECT_EQ(tower_entropy(0.0), 0.0);
}

TEST(Entropy, MonotoneInBetaPrime) {
  double last = -1.0;
  for (int i = 0; i < 200; ++i) {
    const double bp = i / 200.0;
    const double s = tower_entropy(tower_ratio(bp));
    EXPECT_GT(s, last);
    last = s;
  }
}

TEST(Entropy, RejectsUnnormalisableTower) {
  EXPECT_THROW(tower_ratio(1.0), ValidationError);
  EXPECT_THROW(tower_ratio(-1.2), ValidationError);
}

TEST(MutualInformation, MatchesFieldGrid) {
  const auto k = build_kernel(spec_of(8, 1.0, Boundary::Periodic));
  const auto ra = reduce(k, {1});
  const auto rb = reduce(k, {2});
  const auto rab = reduce(k, {1, 2});
  const double sa = grid_entropy(oracle::grid_reduced_spectrum(ra.gamma, ra.beta, 60,
                                                               grid_half_width(ra)));
  const double sb = grid_entropy(oracle::grid_reduced_spectrum(rb.gamma, rb.beta, 60,
                                                               grid_half_width(rb)));
  const double sab = grid_entropy(oracle::grid_reduced_spectrum(rab.gamma, rab.beta, 60,
                                                                grid_half_width(rab)));
  EXPECT_NEAR(mutual_information(k, 1, 2), sa + sb - sab, 1e-6);
}

TEST(MutualInformation, LargeSeparationSlope) {
  const auto k = build_kernel(spec_of(80, 0.3, Boundary::Periodic));
  double prev = std::log(mutual_information(k, 0, 20));
  for (int r = 21; r <= 35; ++r) {
    const double cur = std::log(mutual_information(k, 0, r));
    EXPECT_NEAR(cur - prev, -0.6, 0.25 * 0.6) << "r=" << r;
    prev = cur;
  }
}

TEST(MutualInformation, SymmetriesAndPositivity) {
  const auto k = build_kernel(spec_of(10, 0.35, Boundary::Periodic, GradientStencil::s3()));
  for (int a = 0; a < 10; ++a) {
    for (int b = 0; b < 10; ++b) {
      if (a == b) {
        continue;
      }
      const double mi = mutual_information(k, a, b);
      const double ng = negativity(k, a, b);
      EXPECT_GE(mi, 0.0);
      EXPECT_GE(ng, 0.0);
      EXPECT_NEAR(mi, mutual_information(k, b, a), 1e-12);
      EXPECT_NEAR(ng, negativity(k, b, a), 1e-12);
      const int d = ((b - a) % 10 + 10) % 10;
      EXPECT_NEAR(mi, mutual_information(k, 0, d), 1e-12);
      EXPECT_NEAR(ng, negativity(k, 0, d), 1e-12);
    }
  }
  EXPECT_THROW(mutual_information(k, 3, 3), ValidationError);
}

TEST(MutualInformation, TwoSiteLattice) {
  const auto k = build_kernel(spec_of(2, 0.5, Boundary::Periodic));
  EXPECT_NEAR(mutual_information(k, 0, 1), 2.0 * entropy(k, {0}), 1e-14);
}

TEST(Negativity, TwoSiteClosedFormMatchesSeries) {
  for (double m : {0.1, 0.3, 1.0, 3.0}) {
    const auto k = build_kernel(spec_of(2, m, Boundary::Periodic));
    const double want = oracle::two_site_negativity_series(k.k_matrix(0, 0), k.k_matrix(0, 1), 400);
    EXPECT_NEAR(negativity_full_two_site(k), want, 1e-10) << "m=" << m;
  }
}

TEST(Negativity, TwoSiteLimits) {
  auto k = build_kernel(spec_of(2, 10.0, Boundary::Periodic));
  EXPECT_LT(negativity_full_two_site(k), 0.006);
  auto decoupled = build_kernel(spec_of(2, 0.5, Boundary::Periodic, GradientStencil::none()));
  EXPECT_EQ(negativity_full_two_site(decoupled), 0.0);
}

TEST(Negativity, SignOfCouplingIrrelevant) {
  auto k = build_kernel(spec_of(2, 0.3, Boundary::Periodic));
  const double n0 = negativity_full_two_site(k);
  k.k_matrix(0, 1) = -k.k_matrix(0, 1);
  k.k_matrix(1, 0) = -k.k_matrix(1, 0);
  EXPECT_EQ(negativity_full_two_site(k), n0);

  auto big = build_kernel(spec_of(7, 0.4, Boundary::Open));
  const double n1 = negativity(big, 2, 3);
  Vector flip = Vector::Ones(7);
  flip(3) = -1.0;
  big.k_matrix = flip.asDiagonal() * big.k_matrix * flip.asDiagonal();
  EXPECT_NEAR(negativity(big, 2, 3), n1, 1e-13);
}

TEST(Negativity, TransposeRouteAgreesWithTwoSiteClosedForm) {
  const auto k = build_kernel(spec_of(2, 0.3, Boundary::Periodic));
  Matrix g = Matrix::Zero(2, 2);
  Matrix b = Matrix::Zero(2, 2);
  g(0, 0) = k.k_matrix(0, 0);
  g(1, 1) = k.k_matrix(1, 1);
  b(0, 1) = b(1, 0) = -k.k_matrix(0, 1);
  const double via_towers = detail::negativity_from_ratios(detail::normalised_beta_eigs(g, b));
  EXPECT_NEAR(via_towers, negativity_full_two_site(k), 1e-13);
}

TEST(Negativity, NearestNeighbourOnlyForS1) {
  const auto k = build_kernel(spec_of(80, 0.3, Boundary::Periodic));
  EXPECT_GT(negativity(k, 0, 1), 1e-3);
  for (int r = 2; r <= 40; ++r) {
    EXPECT_LT(negativity(k, 0, r), 1e-8) << "r=" << r;
  }
}

TEST(Negativity, RangeThreeForS3) {
  const auto k = build_kernel(spec_of(80, 0.3, Boundary::Periodic, GradientStencil::s3()));
  for (int r = 1; r <= 3; ++r) {
    EXPECT_GT(negativity(k, 0, r), 1e-8) << "r=" << r;
  }
  for (int r = 4; r <= 40; ++r) {
    EXPECT_LT(negativity(k, 0, r), 1e-8) << "r=" << r;
  }
}

TEST(Negativity, ReducedRequiresThreeSites) {
  const auto k = build_kernel(spec_of(2, 0.3, Boundary::Periodic));
  EXPECT_THROW(negativity_reduced(k, 0, 1), ValidationError);
}

TEST(Report, ConsistentCombination) {
  const auto k = build_kernel(spec_of(12, 0.3, Boundary::Open));
  const auto rep = entanglement_report(k, 3, 4);
  EXPECT_NEAR(rep.mutual_information,
              rep.entropy_single + entropy(k, {4}) - rep.entropy_pair, 1e-15);
  EXPECT_NEAR(rep.negativity, negativity(k, 3, 4), 1e-15);
}

TEST(Sweep, CsvColumns) {
  LatticeSpec s = spec_of(20, 0.3, Boundary::Periodic);
  const auto rows = correlation_sweep(s, 6);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_GT(rows[0].negativity_s1, 0.0);
  EXPECT_LT(rows[0].k_entry, 0.0);
  const std::string csv = correlation_sweep_csv(rows);
  EXPECT_EQ(csv.rfind("r,two_point,K_entry,mutual_information,negativity_s1,negativity_s3\n", 0),
            0u);
}
