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
 * Truncation of angle schedules by control range and magnitude, state
 * fidelities, and exponential decay fits of angle and correlation envelopes.
 */
#pragma once

#include "lsft/angle_synth.hpp"
#include "lsft/gaussian_info.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace lsft {

/// Lattice distance spanned by an h-controlled rotation on level l.
inline int control_distance(int level, int h, int qubits_per_site) {
  detail::require(h >= 0 && h <= level, "control range must satisfy 0 <= h <= l");
  detail::require(qubits_per_site >= 1, "qubits_per_site must be positive");
  const int offset = level % qubits_per_site;
  if (h <= offset) {
    return 0;
  }
  return (h - offset + qubits_per_site - 1) / qubits_per_site;
}

enum class TruncationOrdering {
  ByDistanceThenMagnitude,
};

struct TruncationPolicy {
  std::optional<int> h_max;
  std::optional<double> tau;
  TruncationOrdering ordering = TruncationOrdering::ByDistanceThenMagnitude;

  void validate() const {
    detail::require(h_max.has_value() || tau.has_value(),
                    "truncation policy needs h_max or tau");
    detail::require(!h_max || *h_max >= 0, "h_max must be non-negative");
    detail::require(!tau || (*tau >= 0.0 && std::isfinite(*tau)),
                    "tau must be a non-negative number");
  }

  bool drops(int h, double angle) const {
    return (h_max && h > *h_max) || (tau && std::abs(angle) < *tau);
  }
};

template <typename Schedule> struct Truncated {
  Schedule schedule;
  std::size_t retained = 0;
  std::size_t zeroed = 0;
};

/// Zero alpha entries beyond h_max or below tau in magnitude.
inline Truncated<AlphaSchedule> truncate(const AlphaSchedule &alphas,
                                         const TruncationPolicy &policy) {
  policy.validate();
  Truncated<AlphaSchedule> out{alphas, 0, 0};
  for (auto &level : out.schedule.levels) {
    for (auto &[h, block] : level) {
      for (double &a : block) {
        if (a == 0.0) {
          continue;
        }
        if (policy.drops(h, a)) {
          a = 0.0;
          ++out.zeroed;
        } else {
          ++out.retained;
        }
      }
    }
  }
  return out;
}

/// For theta schedules the control range of level l is l itself.
inline Truncated<ThetaSchedule> truncate(const ThetaSchedule &sched,
                                         const TruncationPolicy &policy) {
  policy.validate();
  Truncated<ThetaSchedule> out{sched, 0, 0};
  for (int level = 0; level < sched.n_qubits; ++level) {
    for (double &t : out.schedule.levels[level]) {
      if (t == 0.0) {
        continue;
      }
      if (policy.drops(level, t)) {
        t = 0.0;
        ++out.zeroed;
      } else {
        ++out.retained;
      }
    }
  }
  return out;
}

/**
 * @brief Keep the first `budget` non-zero theta angles ordered by level, then
 * by decreasing magnitude; zero the rest.
 */
inline Truncated<ThetaSchedule> truncate_to_count(const ThetaSchedule &sched,
                                                  std::size_t budget) {
  struct Entry {
    int level;
    std::size_t k;
    double magnitude;
  };
  std::vector<Entry> entries;
  for (int level = 0; level < sched.n_qubits; ++level) {
    for (std::size_t k = 0; k < sched.levels[level].size(); ++k) {
      if (sched.levels[level][k] != 0.0) {
        entries.push_back({level, k, std::abs(sched.levels[level][k])});
      }
    }
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry &a, const Entry &b) {
    if (a.level != b.level) {
      return a.level < b.level;
    }
    return a.magnitude > b.magnitude;
  });
  Truncated<ThetaSchedule> out{sched, 0, 0};
  for (std::size_t i = budget; i < entries.size(); ++i) {
    out.schedule.levels[entries[i].level][entries[i].k] = 0.0;
  }
  out.retained = std::min(budget, entries.size());
  out.zeroed = entries.size() - out.retained;
  return out;
}

/// Squared overlap |<a|b>|^2.
inline double fidelity(const Vector &a, const Vector &b) {
  detail::require(a.size() == b.size(), "fidelity needs states of equal dimension");
  const double overlap = a.dot(b);
  return std::min(1.0, overlap * overlap);
}

inline double fidelity(const StateVector &a, const StateVector &b) {
  return fidelity(a.amplitudes, b.amplitudes);
}

/// State prepared by a truncated alpha schedule.
inline Vector truncated_state(const AlphaSchedule &alphas, const TruncationPolicy &policy) {
  return state_from_thetas(thetas_from_alphas(truncate(alphas, policy).schedule));
}

/// Largest |alpha| at each lattice control distance.
inline std::map<int, double> max_alpha_by_distance(const AlphaSchedule &alphas,
                                                   int qubits_per_site) {
  std::map<int, double> env;
  for (int level = 0; level < alphas.n_qubits; ++level) {
    for (const auto &[h, block] : alphas.levels[level]) {
      const int r = control_distance(level, h, qubits_per_site);
      double &slot = env[r];
      for (double a : block) {
        slot = std::max(slot, std::abs(a));
      }
    }
  }
  return env;
}

enum class FitModel {
  /// Z exp(-eta (x + 1))
  ExpLinear,
  /// amplitude * M K_1(M r) / r
  BesselEnvelope,
  /// c exp(-M r) / r^p
  PowerExp,
  /// c exp(-M r)
  PureExp,
};

inline const char *to_string(FitModel m) {
  switch (m) {
  case FitModel::ExpLinear:
    return "exp_linear";
  case FitModel::BesselEnvelope:
    return "bessel_envelope";
  case FitModel::PowerExp:
    return "power_exp";
  case FitModel::PureExp:
    return "pure_exp";
  }
  return "unknown";
}

enum class FitMethod {
  /// Linear regression of log y.
  LogLinear,
  /// Least squares on y itself, amplitude profiled out.
  Direct,
};

struct FitOptions {
  FitMethod method = FitMethod::LogLinear;
  /// Power p of the PowerExp model.
  double power = 1.5;
};

struct FitPoint {
  double x = 0.0;
  double y = 0.0;
};

struct FitResult {
  FitModel model = FitModel::PureExp;
  FitMethod method = FitMethod::LogLinear;
  double power = 0.0;
  /// Z, c or c_1 depending on the model.
  double amplitude = 0.0;
  /// eta or M.
  double rate = 0.0;
  double amplitude_error = 0.0;
  double rate_error = 0.0;
  double residual_norm = 0.0;
  int points_used = 0;
  std::vector<double> rejected_x;

  double evaluate(double x) const {
    switch (model) {
    case FitModel::ExpLinear:
      return amplitude * std::exp(-rate * (x + 1.0));
    case FitModel::BesselEnvelope:
      return amplitude * rate * std::cyl_bessel_k(1.0, rate * x) / x;
    case FitModel::PowerExp:
      return amplitude * std::exp(-rate * x) / std::pow(x, power);
    case FitModel::PureExp:
      return amplitude * std::exp(-rate * x);
    }
    return 0.0;
  }
};

namespace detail {

/// Shape of the model with unit amplitude; log of it for the linear fits.
inline double log_shape(FitModel model, double power, double rate, double x) {
  switch (model) {
  case FitModel::ExpLinear:
    return -rate * (x + 1.0);
  case FitModel::BesselEnvelope:
    return std::log(rate * std::cyl_bessel_k(1.0, rate * x) / x);
  case FitModel::PowerExp:
    return -rate * x - power * std::log(x);
  case FitModel::PureExp:
    return -rate * x;
  }
  return 0.0;
}

struct LineFit {
  double intercept, slope, se_intercept, se_slope, rss;
};

inline LineFit line_fit(const std::vector<double> &x, const std::vector<double> &y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) {
    throw ValidationError("fit abscissae must not all coincide");
  }
  LineFit f{};
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    f.rss += r * r;
  }
  const double s2 = x.size() > 2 ? f.rss / (n - 2.0) : 0.0;
  f.se_slope = std::sqrt(s2 / sxx);
  f.se_intercept = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  return f;
}

/// Minimise a one-dimensional objective over a log-spaced scan refined by Brent.
template <typename F> double scan_minimum(F objective, double lo, double hi) {
  constexpr int kScan = 200;
  double best_x = lo;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> grid(kScan + 1);
  for (int i = 0; i <= kScan; ++i) {
    grid[i] = lo * std::pow(hi / lo, double(i) / kScan);
    const double v = objective(grid[i]);
    if (v < best) {
      best = v;
      best_x = grid[i];
    }
  }
  const auto at = std::find(grid.begin(), grid.end(), best_x) - grid.begin();
  const double a = grid[std::max<std::ptrdiff_t>(at - 1, 0)];
  const double b = grid[std::min<std::ptrdiff_t>(at + 1, kScan)];
  const auto r = boost::math::tools::brent_find_minima(objective, a, b, 52);
  return r.second <= best ? r.first : best_x;
}

} // namespace detail

/**
 * @brief Fit one of the decay models to (x, y) points.
 *
 * Non-positive ordinates are rejected and reported. At least three usable
 * points are required.
 */
inline FitResult fit(FitModel model, const std::vector<FitPoint> &points,
                     const FitOptions &opt = {}) {
  FitResult res;
  res.model = model;
  res.method = model == FitModel::BesselEnvelope ? FitMethod::LogLinear : opt.method;
  res.power = model == FitModel::PowerExp ? opt.power : 0.0;
  std::vector<double> xs, ys;
  for (const auto &p : points) {
    const bool needs_positive_x =
        model == FitModel::PowerExp || model == FitModel::BesselEnvelope;
    if (!(p.y > 0.0) || !std::isfinite(p.y) || (needs_positive_x && !(p.x > 0.0))) {
      res.rejected_x.push_back(p.x);
      continue;
    }
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  detail::require(xs.size() >= 3, "fit needs at least three points with positive ordinate");
  res.points_used = static_cast<int>(xs.size());
  const double n = static_cast<double>(xs.size());

  if (model == FitModel::BesselEnvelope) {
    std::vector<double> ly(ys.size());
    std::transform(ys.begin(), ys.end(), ly.begin(), [](double v) { return std::log(v); });
    auto profile = [&](double m, double *intercept) {
      double a = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        a += ly[i] - detail::log_shape(model, 0.0, m, xs[i]);
      }
      a /= n;
      double rss = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ly[i] - a - detail::log_shape(model, 0.0, m, xs[i]);
        rss += r * r;
      }
      if (intercept) {
        *intercept = a;
      }
      return std::isfinite(rss) ? rss : std::numeric_limits<double>::max();
    };
    const double m = detail::scan_minimum([&](double v) { return profile(v, nullptr); },
                                          1e-4, 50.0);
    double a = 0.0;
    const double rss = profile(m, &a);
    res.rate = m;
    res.amplitude = std::exp(a);
    res.residual_norm = std::sqrt(rss);
    // Gauss-Newton covariance in (log amplitude, M).
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    const double h = 1e-6 * std::max(1.0, m);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double d = (detail::log_shape(model, 0.0, m + h, xs[i]) -
                        detail::log_shape(model, 0.0, m - h, xs[i])) /
                       (2.0 * h);
      Eigen::Vector2d row(1.0, d);
      jtj += row * row.transpose();
    }
    const double s2 = n > 2 ? rss / (n - 2.0) : 0.0;
    const Eigen::Matrix2d cov = s2 * jtj.inverse();
    res.amplitude_error = res.amplitude * std::sqrt(std::max(0.0, cov(0, 0)));
    res.rate_error = std::sqrt(std::max(0.0, cov(1, 1)));
    return res;
  }

  // Log-linear regression: log y - (shape at unit rate excluding the exponential) = a - M x'.
  std::vector<double> lx(xs.size()), ly(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    lx[i] = model == FitModel::ExpLinear ? xs[i] + 1.0 : xs[i];
    ly[i] = std::log(ys[i]);
    if (model == FitModel::PowerExp) {
      ly[i] += res.power * std::log(xs[i]);
    }
  }
  const detail::LineFit line = detail::line_fit(lx, ly);
  res.rate = -line.slope;
  res.amplitude = std::exp(line.intercept);
  res.rate_error = line.se_slope;
  res.amplitude_error = res.amplitude * line.se_intercept;
  res.residual_norm = std::sqrt(line.rss);
  if (res.method == FitMethod::LogLinear) {
    return res;
  }

  // Direct least squares with the amplitude profiled out.
  auto shape = [&](double m, double x) {
    return std::exp(detail::log_shape(model, res.power, m, x));
  };
  auto profile = [&](double m, double *amp) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double f = shape(m, xs[i]);
      num += ys[i] * f;
      den += f * f;
    }
    const double c = den > 0.0 ? num / den : 0.0;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - c * shape(m, xs[i]);
      rss += r * r;
    }
    if (amp) {
      *amp = c;
    }
    return std::isfinite(rss) ? rss : std::numeric_limits<double>::max();
  };
  const double guess = res.rate > 0.0 ? res.rate : 1.0;
  const double m = detail::scan_minimum([&](double v) { return profile(v, nullptr); },
                                        guess / 8.0, guess * 8.0);
  double c = 0.0;
  const double rss = profile(m, &c);
  res.rate = m;
  res.amplitude = c;
  res.residual_norm = std::sqrt(rss);
  Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = shape(m, xs[i]);
    const double xe = model == FitModel::ExpLinear ? xs[i] + 1.0 : xs[i];
    Eigen::Vector2d row(f, -c * xe * f);
    jtj += row * row.transpose();
  }
  const double s2 = n > 2 ? rss / (n - 2.0) : 0.0;
  const Eigen::Matrix2d cov = s2 * jtj.inverse();
  res.amplitude_error = std::sqrt(std::max(0.0, cov(0, 0)));
  res.rate_error = std::sqrt(std::max(0.0, cov(1, 1)));
  return res;
}

inline std::vector<FitPoint> to_points(const std::map<int, double> &table, int x_min,
                                       int x_max) {
  std::vector<FitPoint> pts;
  for (const auto &[x, y] : table) {
    if (x >= x_min && x <= x_max) {
      pts.push_back({double(x), y});
    }
  }
  return pts;
}

inline nlohmann::json to_json(const FitResult &f) {
  return {
      {"model", to_string(f.model)},
      {"method", f.method == FitMethod::LogLinear ? "log_linear" : "direct"},
      {"power", f.power},
      {"amplitude", f.amplitude},
      {"amplitude_error", f.amplitude_error},
      {"rate", f.rate},
      {"rate_error", f.rate_error},
      {"residual_norm", f.residual_norm},
      {"points_used", f.points_used},
      {"rejected_x", f.rejected_x},
  };
}

struct DecaySweep {
  std::vector<CorrelationSweepRow> rows;
  std::optional<FitResult> fit_k;
  std::optional<FitResult> fit_two_point;
  std::optional<FitResult> fit_mutual_information;
};

/**
 * @brief Correlation sweep from site 0 with PureExp fits of |K_0r|, the
 * two-point function and the mutual information over r in [r_lo, r_hi].
 *
 * A column without enough positive values has no fit.
 */
inline DecaySweep decay_sweep(const LatticeSpec &spec, int r_max, int r_lo, int r_hi) {
  detail::require(r_lo >= 1 && r_lo < r_hi && r_hi <= r_max, "need 1 <= r_lo < r_hi <= r_max");
  DecaySweep out;
  out.rows = correlation_sweep(spec, r_max);
  if (spec.stencil.is_zero()) {
    // Decoupled sites: off-diagonal entries are roundoff, nothing to fit.
    return out;
  }
  std::vector<FitPoint> k, g, mi;
  for (const auto &row : out.rows) {
    if (row.r < r_lo || row.r > r_hi) {
      continue;
    }
    k.push_back({double(row.r), std::abs(row.k_entry)});
    g.push_back({double(row.r), row.two_point});
    mi.push_back({double(row.r), row.mutual_information});
  }
  auto try_fit = [](const std::vector<FitPoint> &pts) -> std::optional<FitResult> {
    try {
      return fit(FitModel::PureExp, pts);
    } catch (const ValidationError &) {
      return std::nullopt;
    }
  };
  out.fit_k = try_fit(k);
  out.fit_two_point = try_fit(g);
  out.fit_mutual_information = try_fit(mi);
  return out;
}

struct FidelityScanRow {
  int h_max = 0;
  double tau = 0.0;
  std::size_t retained = 0;
  double fidelity_alpha = 0.0;
  /// theta schedule cut to the same number of rotations.
  double fidelity_theta = 0.0;
};

/// Compare alpha truncation against theta truncation with equal rotation counts.
inline std::vector<FidelityScanRow> fidelity_scan(const Vector &target,
                                                  const Decomposition &decomposition,
                                                  const std::vector<int> &h_values,
                                                  const std::vector<double> &tau_values) {
  const ThetaSchedule theta = thetas_from_state(target);
  const AlphaSchedule alphas = alphas_from_thetas(theta, decomposition);
  std::vector<FidelityScanRow> rows;
  for (int h : h_values) {
    for (double tau : tau_values) {
      TruncationPolicy policy;
      policy.h_max = h;
      policy.tau = tau;
      const auto cut = truncate(alphas, policy);
      FidelityScanRow row;
      row.h_max = h;
      row.tau = tau;
      row.retained = cut.retained;
      row.fidelity_alpha =
          fidelity(target, state_from_thetas(thetas_from_alphas(cut.schedule)));
      row.fidelity_theta = fidelity(
          target, state_from_thetas(truncate_to_count(theta, cut.retained).schedule));
      rows.push_back(row);
    }
  }
  return rows;
}

/// Fit Z e^{-eta(h+1)} to 1 - F over rows at `tau` with h in [h_lo, h_hi] and h % step == 0.
inline FitResult infidelity_fit(const std::vector<FidelityScanRow> &rows, double tau, int h_lo,
                                int h_hi, int step, FitMethod method = FitMethod::Direct) {
  detail::require(step >= 1, "step must be >= 1");
  std::vector<FitPoint> pts;
  for (const auto &r : rows) {
    if (r.tau == tau && r.h_max >= h_lo && r.h_max <= h_hi && r.h_max % step == 0) {
      pts.push_back({double(r.h_max), 1.0 - r.fidelity_alpha});
    }
  }
  FitOptions opt;
  opt.method = method;
  return fit(FitModel::ExpLinear, pts, opt);
}

/// Envelope and correlator decay of a digitized state, measured from site 0.
struct StateDecay {
  std::map<int, double> envelope;
  /// Connected <phi_0 phi_r> and its matrix inverse G_{0r}, index r.
  std::vector<double> two_point;
  std::vector<double> inverse;
  std::optional<FitResult> alpha;
  std::optional<FitResult> two_point_fit;
  std::optional<FitResult> inverse_fit;
};

/**
 * @brief PowerExp fits over r in [r_lo, r_hi]: power 3/2 for the alpha
 * envelope and |G|, 1/2 for the two-point function.
 */
inline StateDecay state_decay(const StateVector &state, int r_lo, int r_hi) {
  const int n = state.spec.n_sites;
  detail::require(r_lo >= 1 && r_hi > r_lo && r_hi < n, "need 1 <= r_lo < r_hi < n_sites");
  StateDecay out;
  const auto alphas = alphas_from_thetas(thetas_from_state(state), Decomposition::full());
  out.envelope = max_alpha_by_distance(alphas, state.spec.qubits_per_site);

  const FieldMoments m = field_moments(state);
  Matrix c = m.second - m.mean * m.mean.transpose();
  c = 0.5 * (c + c.transpose());
  Eigen::LDLT<Matrix> ldlt(c);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericalError("connected two-point matrix is not positive definite");
  }
  const Matrix g = ldlt.solve(Matrix::Identity(n, n));
  std::vector<FitPoint> gp, ip;
  for (int r = 0; r < n; ++r) {
    out.two_point.push_back(c(0, r));
    out.inverse.push_back(g(0, r));
    if (r >= r_lo && r <= r_hi) {
      gp.push_back({double(r), c(0, r)});
      ip.push_back({double(r), std::abs(g(0, r))});
    }
  }
  auto try_fit = [](const std::vector<FitPoint> &pts, double power) -> std::optional<FitResult> {
    FitOptions opt;
    opt.power = power;
    try {
      return fit(FitModel::PowerExp, pts, opt);
    } catch (const ValidationError &) {
      return std::nullopt;
    }
  };
  out.alpha = try_fit(to_points(out.envelope, r_lo, r_hi), 1.5);
  out.two_point_fit = try_fit(gp, 0.5);
  out.inverse_fit = try_fit(ip, 1.5);
  return out;
}

inline std::string fidelity_scan_csv(const std::vector<FidelityScanRow> &rows) {
  std::ostringstream out;
  out.precision(17);
  out << "h_trunc,tau,retained_rotations,fidelity,fidelity_theta_same_count\n";
  for (const auto &r : rows) {
    out << r.h_max << ',' << r.tau << ',' << r.retained << ',' << r.fidelity_alpha << ','
        << r.fidelity_theta << '\n';
  }
  return out.str();
}

inline std::string envelope_csv(const std::map<int, double> &env) {
  std::ostringstream out;
  out.precision(17);
  out << "r,max_abs_alpha\n";
  for (const auto &[r, v] : env) {
    out << r << ',' << v << '\n';
  }
  return out.str();
}

} // namespace lsft
