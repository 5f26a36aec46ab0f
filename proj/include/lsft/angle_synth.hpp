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
 * Rotation-angle schedules for preparing real amplitude vectors with a
 * cascade of uniformly controlled R_y rotations.
 *
 * Level l acts on qubit l (qubit 0 is the most significant bit of the basis
 * index) controlled on qubits 0..l-1 with control value k. theta angles give
 * one angle per (l, k); alpha angles re-express each level as a sum of
 * rotations controlled only on the nearest h qubits, indexed by k mod 2^h.
 */
#pragma once

#include "lsft/field_digitizer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <system_error>
#include <vector>

namespace lsft {

inline constexpr const char *kAngleConvention = "level0_msb_ry_half_angle";

struct ThetaSchedule {
  int n_qubits = 0;
  /// levels[l] has 2^l angles indexed by control value k.
  std::vector<std::vector<double>> levels;
  /// dead[l][k] is set when the whole subtree below (l, k) carries no weight.
  std::vector<std::vector<std::uint8_t>> dead;
};

enum class DecompositionKind {
  Full,
  SiteWise,
  Custom,
};

/// Which control ranges h appear at each level.
struct Decomposition {
  DecompositionKind kind = DecompositionKind::Full;
  int qubits_per_site = 1;
  /// For Custom: one sorted set per level.
  std::vector<std::vector<int>> custom_sets;

  static Decomposition full() { return {}; }
  static Decomposition site_wise(int qubits_per_site) {
    detail::require(qubits_per_site >= 1, "qubits_per_site must be positive");
    return {DecompositionKind::SiteWise, qubits_per_site, {}};
  }
  static Decomposition custom(std::vector<std::vector<int>> sets) {
    return {DecompositionKind::Custom, 1, std::move(sets)};
  }

  std::vector<int> ranges(int level) const {
    std::vector<int> hs;
    switch (kind) {
    case DecompositionKind::Full:
      for (int h = 0; h <= level; ++h) {
        hs.push_back(h);
      }
      break;
    case DecompositionKind::SiteWise:
      for (int h = level % qubits_per_site; h <= level; h += qubits_per_site) {
        hs.push_back(h);
      }
      break;
    case DecompositionKind::Custom:
      detail::require(level < static_cast<int>(custom_sets.size()),
                      "custom decomposition has no set for level " + std::to_string(level));
      hs = custom_sets[level];
      std::sort(hs.begin(), hs.end());
      detail::require(std::adjacent_find(hs.begin(), hs.end()) == hs.end(),
                      "duplicate range in custom decomposition");
      detail::require(!hs.empty() && hs.front() >= 0 && hs.back() == level,
                      "decomposition set for level " + std::to_string(level) +
                          " must lie in 0..l and contain l");
      break;
    }
    return hs;
  }
};

inline const char *to_string(DecompositionKind kind) {
  switch (kind) {
  case DecompositionKind::Full:
    return "full";
  case DecompositionKind::SiteWise:
    return "site_wise";
  case DecompositionKind::Custom:
    return "custom";
  }
  return "unknown";
}

struct AlphaSchedule {
  int n_qubits = 0;
  Decomposition decomposition;
  /// levels[l][h] has 2^h angles; absent h contribute nothing.
  std::vector<std::map<int, std::vector<double>>> levels;
};

/// theta angles of a real non-negative state by recursive bipartition weights.
inline ThetaSchedule thetas_from_state(const Vector &amplitudes) {
  const auto dim = static_cast<std::size_t>(amplitudes.size());
  detail::require(dim >= 2 && (dim & (dim - 1)) == 0,
                  "state dimension must be a power of two >= 2");
  int n = 0;
  while ((std::size_t{1} << n) < dim) {
    ++n;
  }
  for (Eigen::Index i = 0; i < amplitudes.size(); ++i) {
    detail::require(amplitudes(i) >= 0.0 && std::isfinite(amplitudes(i)),
                    "theta extraction requires finite non-negative amplitudes");
  }
  ThetaSchedule sched;
  sched.n_qubits = n;
  sched.levels.resize(n);
  sched.dead.resize(n);
  std::vector<double> weights(amplitudes.data(), amplitudes.data() + dim);
  for (double &w : weights) {
    w *= w;
  }
  for (int level = n - 1; level >= 0; --level) {
    const std::size_t count = std::size_t{1} << level;
    auto &theta = sched.levels[level];
    auto &dead = sched.dead[level];
    theta.assign(count, 0.0);
    dead.assign(count, 0);
    std::vector<double> parent(count);
    for (std::size_t k = 0; k < count; ++k) {
      const double lo = weights[2 * k];
      const double hi = weights[2 * k + 1];
      parent[k] = lo + hi;
      if (lo == 0.0 && hi == 0.0) {
        dead[k] = 1;
      } else {
        theta[k] = std::atan2(std::sqrt(hi), std::sqrt(lo));
      }
    }
    weights = std::move(parent);
  }
  return sched;
}

inline ThetaSchedule thetas_from_state(const StateVector &state) {
  return thetas_from_state(state.amplitudes);
}

/// Amplitudes from the rotation cascade: bit 0 takes cos(theta), bit 1 sin(theta).
inline Vector state_from_thetas(const ThetaSchedule &sched) {
  detail::require(static_cast<int>(sched.levels.size()) == sched.n_qubits,
                  "schedule level count does not match n_qubits");
  std::vector<double> amps{1.0};
  for (int level = 0; level < sched.n_qubits; ++level) {
    const auto &theta = sched.levels[level];
    detail::require(theta.size() == amps.size(), "level " + std::to_string(level) +
                                                     " has the wrong number of angles");
    std::vector<double> next(2 * amps.size());
    for (std::size_t k = 0; k < amps.size(); ++k) {
      next[2 * k] = amps[k] * std::cos(theta[k]);
      next[2 * k + 1] = amps[k] * std::sin(theta[k]);
    }
    amps = std::move(next);
  }
  return Eigen::Map<Vector>(amps.data(), static_cast<Eigen::Index>(amps.size()));
}

/**
 * @brief alpha angles of every level.
 *
 * With M_h[j] the mean of theta_k over k = j mod 2^h, the ranges h of a level
 * are processed in increasing order and
 * alpha_h[j] = M_h[j] - sum of already assigned alpha_h'[j mod 2^h'].
 * For the full decomposition this reduces to M_h[j] - M_{h-1}[j mod 2^(h-1)].
 */
inline AlphaSchedule alphas_from_thetas(const ThetaSchedule &sched,
                                        const Decomposition &decomposition) {
  AlphaSchedule out;
  out.n_qubits = sched.n_qubits;
  out.decomposition = decomposition;
  out.levels.resize(sched.n_qubits);
  for (int level = 0; level < sched.n_qubits; ++level) {
    const auto &theta = sched.levels[level];
    detail::require(theta.size() == (std::size_t{1} << level),
                    "level " + std::to_string(level) + " has the wrong number of angles");
    const std::vector<int> hs = decomposition.ranges(level);
    // Strided means by pairwise folding, means[h] for h = level..0.
    std::vector<std::vector<double>> means(level + 1);
    means[level] = theta;
    for (int h = level - 1; h >= 0; --h) {
      const std::size_t half = std::size_t{1} << h;
      means[h].resize(half);
      for (std::size_t j = 0; j < half; ++j) {
        means[h][j] = 0.5 * (means[h + 1][j] + means[h + 1][j + half]);
      }
    }
    auto &alphas = out.levels[level];
    for (int h : hs) {
      const std::size_t count = std::size_t{1} << h;
      std::vector<double> a(means[h]);
      for (const auto &[hp, prev] : alphas) {
        const std::size_t mask = (std::size_t{1} << hp) - 1;
        for (std::size_t j = 0; j < count; ++j) {
          a[j] -= prev[j & mask];
        }
      }
      alphas.emplace(h, std::move(a));
    }
  }
  return out;
}

/// theta_k = sum over present h of alpha_h[k mod 2^h].
inline ThetaSchedule thetas_from_alphas(const AlphaSchedule &alphas) {
  ThetaSchedule sched;
  sched.n_qubits = alphas.n_qubits;
  sched.levels.resize(alphas.n_qubits);
  sched.dead.resize(alphas.n_qubits);
  detail::require(static_cast<int>(alphas.levels.size()) == alphas.n_qubits,
                  "alpha schedule level count does not match n_qubits");
  for (int level = 0; level < alphas.n_qubits; ++level) {
    const std::size_t count = std::size_t{1} << level;
    auto &theta = sched.levels[level];
    theta.assign(count, 0.0);
    sched.dead[level].assign(count, 0);
    for (const auto &[h, a] : alphas.levels[level]) {
      detail::require(h >= 0 && h <= level && a.size() == (std::size_t{1} << h),
                      "malformed alpha block at level " + std::to_string(level));
      const std::size_t mask = (std::size_t{1} << h) - 1;
      for (std::size_t k = 0; k < count; ++k) {
        theta[k] += a[k & mask];
      }
    }
  }
  return sched;
}

/// Number of alpha entries (all blocks, all levels).
inline std::size_t alpha_count(const AlphaSchedule &alphas, bool nonzero_only = false) {
  std::size_t n = 0;
  for (const auto &level : alphas.levels) {
    for (const auto &[h, a] : level) {
      if (!nonzero_only) {
        n += a.size();
        continue;
      }
      for (double v : a) {
        n += v != 0.0;
      }
    }
  }
  return n;
}

inline ThetaSchedule ghz_schedule(int n) {
  detail::require(n >= 2, "GHZ schedule needs n >= 2");
  ThetaSchedule sched;
  sched.n_qubits = n;
  sched.levels.resize(n);
  sched.dead.resize(n);
  sched.levels[0] = {-0.75 * std::numbers::pi};
  sched.dead[0] = {0};
  for (int level = 1; level < n; ++level) {
    const std::size_t count = std::size_t{1} << level;
    sched.levels[level].resize(count);
    sched.dead[level].assign(count, 0);
    for (std::size_t k = 0; k < count; ++k) {
      sched.levels[level][k] = (k % 2 == 0) ? 0.0 : 0.5 * std::numbers::pi;
    }
  }
  return sched;
}

inline ThetaSchedule w_schedule(int n) {
  detail::require(n >= 2, "W schedule needs n >= 2");
  ThetaSchedule sched;
  sched.n_qubits = n;
  sched.levels.resize(n);
  sched.dead.resize(n);
  for (int level = 0; level < n; ++level) {
    const std::size_t count = std::size_t{1} << level;
    sched.levels[level].assign(count, 0.0);
    sched.dead[level].assign(count, 0);
    sched.levels[level][0] =
        std::acos(std::sqrt(double(n - level - 1) / double(n - level)));
  }
  return sched;
}

/// Negativity of any two-qubit reduction of the n-qubit W state.
inline double w_negativity(int n) {
  detail::require(n >= 2, "W negativity needs n >= 2");
  const double a = n - 2.0;
  return (std::sqrt(4.0 + a * a) - a) / (2.0 * n);
}

namespace detail {

/// Lossless "0x1.8p+1" style rendering.
inline std::string hex_float(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, std::abs(v), std::chars_format::hex);
  std::string body(buf, res.ptr);
  if (!std::isfinite(v)) {
    return std::signbit(v) ? "-" + body : body;
  }
  return (std::signbit(v) ? "-0x" : "0x") + body;
}

inline double parse_hex_float(const std::string &s) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) {
    negative = s[pos] == '-';
    ++pos;
  }
  if (s.compare(pos, 2, "0x") == 0 || s.compare(pos, 2, "0X") == 0) {
    pos += 2;
  }
  double v = 0.0;
  const char *first = s.data() + pos;
  const char *last = s.data() + s.size();
  auto res = std::from_chars(first, last, v, std::chars_format::hex);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ValidationError("malformed hex float '" + s + "'");
  }
  return negative ? -v : v;
}

} // namespace detail

inline nlohmann::json schedule_to_json(const ThetaSchedule &sched) {
  nlohmann::json levels = nlohmann::json::array();
  for (int level = 0; level < sched.n_qubits; ++level) {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t k = 0; k < sched.levels[level].size(); ++k) {
      entries.push_back({{"k", k}, {"angle", detail::hex_float(sched.levels[level][k])}});
    }
    std::vector<std::size_t> dead;
    if (level < static_cast<int>(sched.dead.size())) {
      for (std::size_t k = 0; k < sched.dead[level].size(); ++k) {
        if (sched.dead[level][k]) {
          dead.push_back(k);
        }
      }
    }
    levels.push_back({{"level", level}, {"entries", entries}, {"dead", dead}});
  }
  return {{"kind", "theta"},
          {"n_qubits", sched.n_qubits},
          {"convention", kAngleConvention},
          {"levels", levels}};
}

inline nlohmann::json schedule_to_json(const AlphaSchedule &alphas) {
  nlohmann::json levels = nlohmann::json::array();
  for (int level = 0; level < alphas.n_qubits; ++level) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto &[h, a] : alphas.levels[level]) {
      for (std::size_t k = 0; k < a.size(); ++k) {
        entries.push_back({{"h", h}, {"k", k}, {"angle", detail::hex_float(a[k])}});
      }
    }
    levels.push_back({{"level", level}, {"entries", entries}});
  }
  nlohmann::json decomposition = {{"kind", to_string(alphas.decomposition.kind)}};
  if (alphas.decomposition.kind == DecompositionKind::SiteWise) {
    decomposition["qubits_per_site"] = alphas.decomposition.qubits_per_site;
  }
  if (alphas.decomposition.kind == DecompositionKind::Custom) {
    decomposition["sets"] = alphas.decomposition.custom_sets;
  }
  return {{"kind", "alpha"},
          {"n_qubits", alphas.n_qubits},
          {"convention", kAngleConvention},
          {"decomposition", decomposition},
          {"levels", levels}};
}

inline ThetaSchedule theta_schedule_from_json(const nlohmann::json &j) {
  detail::require(j.at("kind") == "theta", "not a theta schedule");
  ThetaSchedule sched;
  sched.n_qubits = j.at("n_qubits").get<int>();
  detail::require(sched.n_qubits >= 1 && sched.n_qubits <= 40, "n_qubits out of range");
  sched.levels.resize(sched.n_qubits);
  sched.dead.resize(sched.n_qubits);
  for (const auto &lv : j.at("levels")) {
    const int level = lv.at("level").get<int>();
    detail::require(level >= 0 && level < sched.n_qubits, "level out of range");
    const std::size_t count = std::size_t{1} << level;
    sched.levels[level].assign(count, 0.0);
    sched.dead[level].assign(count, 0);
    for (const auto &e : lv.at("entries")) {
      const auto k = e.at("k").get<std::size_t>();
      detail::require(k < count, "control value out of range");
      sched.levels[level][k] = detail::parse_hex_float(e.at("angle").get<std::string>());
    }
    if (lv.contains("dead")) {
      for (const auto &k : lv.at("dead")) {
        detail::require(k.get<std::size_t>() < count, "dead index out of range");
        sched.dead[level][k.get<std::size_t>()] = 1;
      }
    }
  }
  return sched;
}

inline AlphaSchedule alpha_schedule_from_json(const nlohmann::json &j) {
  detail::require(j.at("kind") == "alpha", "not an alpha schedule");
  AlphaSchedule alphas;
  alphas.n_qubits = j.at("n_qubits").get<int>();
  detail::require(alphas.n_qubits >= 1 && alphas.n_qubits <= 40, "n_qubits out of range");
  const auto &d = j.at("decomposition");
  const std::string kind = d.at("kind").get<std::string>();
  if (kind == "full") {
    alphas.decomposition = Decomposition::full();
  } else if (kind == "site_wise") {
    alphas.decomposition = Decomposition::site_wise(d.at("qubits_per_site").get<int>());
  } else if (kind == "custom") {
    alphas.decomposition =
        Decomposition::custom(d.at("sets").get<std::vector<std::vector<int>>>());
  } else {
    throw ValidationError("unknown decomposition '" + kind + "'");
  }
  alphas.levels.resize(alphas.n_qubits);
  for (const auto &lv : j.at("levels")) {
    const int level = lv.at("level").get<int>();
    detail::require(level >= 0 && level < alphas.n_qubits, "level out of range");
    for (const auto &e : lv.at("entries")) {
      const int h = e.at("h").get<int>();
      const auto k = e.at("k").get<std::size_t>();
      detail::require(h >= 0 && h <= level && k < (std::size_t{1} << h),
                      "alpha entry out of range");
      auto &block = alphas.levels[level][h];
      block.resize(std::size_t{1} << h, 0.0);
      block[k] = detail::parse_hex_float(e.at("angle").get<std::string>());
    }
  }
  return alphas;
}

} // namespace lsft
