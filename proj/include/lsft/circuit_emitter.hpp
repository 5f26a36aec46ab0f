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
 * Circuits of uniformly controlled rotations built from angle schedules,
 * with a text IR, OpenQASM 3 rendering and a dense simulator.
 *
 * R(angle) = [[cos, -sin], [sin, cos]], which is ry(2 angle).
 */
#pragma once

#include "lsft/angle_synth.hpp"

#include <cmath>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace lsft {

enum class GateKind {
  Theta,
  Alpha,
};

struct Gate {
  int target = 0;
  /// Qubits target-h .. target-1, most significant bit of `value` first.
  std::vector<int> controls;
  std::uint64_t value = 0;
  double angle = 0.0;
  GateKind kind = GateKind::Theta;
  /// Dead branch: rendered as a comment, never applied.
  bool skip = false;

  int h() const { return static_cast<int>(controls.size()); }

  friend bool operator==(const Gate &a, const Gate &b) {
    return a.target == b.target && a.controls == b.controls && a.value == b.value &&
           std::bit_cast<std::uint64_t>(a.angle) == std::bit_cast<std::uint64_t>(b.angle) &&
           a.kind == b.kind && a.skip == b.skip;
  }
};

struct CircuitCounts {
  std::size_t rotations = 0;
  /// 2^h per multiplexed group of h >= 1 controls.
  std::size_t cnot_estimate = 0;

  friend bool operator==(const CircuitCounts &, const CircuitCounts &) = default;
};

struct CircuitIR {
  int n_qubits = 0;
  std::vector<Gate> gates;
  CircuitCounts counts;
  std::string spec_hash;
  std::string convention = kAngleConvention;

  friend bool operator==(const CircuitIR &, const CircuitIR &) = default;
};

namespace detail {

inline Gate make_gate(int target, int h, std::uint64_t value, double angle, GateKind kind) {
  Gate g;
  g.target = target;
  g.value = value;
  g.angle = angle;
  g.kind = kind;
  for (int q = target - h; q < target; ++q) {
    g.controls.push_back(q);
  }
  return g;
}

inline CircuitCounts count_gates(const std::vector<Gate> &gates) {
  CircuitCounts c;
  std::set<std::pair<int, int>> groups;
  for (const auto &g : gates) {
    if (g.skip) {
      continue;
    }
    ++c.rotations;
    if (g.h() >= 1 && groups.emplace(g.target, g.h()).second) {
      c.cnot_estimate += std::size_t{1} << g.h();
    }
  }
  return c;
}

} // namespace detail

/// One gate per non-zero theta; dead branches become skipped gates.
inline CircuitIR emit(const ThetaSchedule &sched, const std::string &spec_hash = "") {
  CircuitIR ir;
  ir.n_qubits = sched.n_qubits;
  ir.spec_hash = spec_hash;
  for (int level = 0; level < sched.n_qubits; ++level) {
    for (std::size_t k = 0; k < sched.levels[level].size(); ++k) {
      const bool dead = level < static_cast<int>(sched.dead.size()) &&
                        k < sched.dead[level].size() && sched.dead[level][k];
      const double angle = sched.levels[level][k];
      if (angle == 0.0 && !dead) {
        continue;
      }
      Gate g = detail::make_gate(level, level, k, angle, GateKind::Theta);
      g.skip = dead;
      ir.gates.push_back(std::move(g));
    }
  }
  ir.counts = detail::count_gates(ir.gates);
  return ir;
}

/// One gate per non-zero alpha, levels in order and h increasing within a level.
inline CircuitIR emit(const AlphaSchedule &alphas, const std::string &spec_hash = "") {
  CircuitIR ir;
  ir.n_qubits = alphas.n_qubits;
  ir.spec_hash = spec_hash;
  for (int level = 0; level < alphas.n_qubits; ++level) {
    for (const auto &[h, block] : alphas.levels[level]) {
      for (std::size_t k = 0; k < block.size(); ++k) {
        if (block[k] != 0.0) {
          ir.gates.push_back(detail::make_gate(level, h, k, block[k], GateKind::Alpha));
        }
      }
    }
  }
  ir.counts = detail::count_gates(ir.gates);
  return ir;
}

namespace detail {

inline std::string value_bits(const Gate &g) {
  std::string bits;
  for (int i = g.h() - 1; i >= 0; --i) {
    bits.push_back(((g.value >> i) & 1u) ? '1' : '0');
  }
  return bits;
}

inline std::string gate_line(const Gate &g) {
  std::ostringstream line;
  line << "CRY target=" << g.target << " controls=";
  for (std::size_t i = 0; i < g.controls.size(); ++i) {
    line << (i ? "," : "") << g.controls[i];
  }
  line << " value=" << value_bits(g) << " angle=" << hex_float(g.angle)
       << " kind=" << (g.kind == GateKind::Theta ? "theta" : "alpha");
  return line.str();
}

} // namespace detail

inline std::string render_text(const CircuitIR &ir) {
  std::ostringstream out;
  out << "# lsft-circuit 1\n";
  out << "# n_qubits=" << ir.n_qubits << '\n';
  out << "# convention=" << ir.convention << '\n';
  out << "# spec_hash=" << ir.spec_hash << '\n';
  out << "# rotations=" << ir.counts.rotations << " cnot_estimate=" << ir.counts.cnot_estimate
      << '\n';
  for (const auto &g : ir.gates) {
    out << (g.skip ? "# DEAD " : "") << detail::gate_line(g) << '\n';
  }
  return out.str();
}

inline CircuitIR parse_text(const std::string &text) {
  CircuitIR ir;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  auto field = [](const std::string &tok, const std::string &key) {
    detail::require(tok.rfind(key + "=", 0) == 0, "expected field '" + key + "'");
    return tok.substr(key.size() + 1);
  };
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    bool skip = false;
    if (line.rfind("# DEAD ", 0) == 0) {
      skip = true;
      line = line.substr(7);
    } else if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string tok;
      while (hs >> tok) {
        if (tok == "lsft-circuit") {
          header = true;
        } else if (tok.rfind("n_qubits=", 0) == 0) {
          ir.n_qubits = std::stoi(tok.substr(9));
        } else if (tok.rfind("convention=", 0) == 0) {
          ir.convention = tok.substr(11);
        } else if (tok.rfind("spec_hash=", 0) == 0) {
          ir.spec_hash = tok.substr(10);
        }
      }
      continue;
    }
    std::istringstream ls(line);
    std::string op, target, controls, value, angle, kind;
    ls >> op >> target >> controls >> value >> angle >> kind;
    detail::require(op == "CRY", "unknown circuit instruction '" + op + "'");
    Gate g;
    g.target = std::stoi(field(target, "target"));
    std::stringstream cs(field(controls, "controls"));
    std::string c;
    while (std::getline(cs, c, ',')) {
      g.controls.push_back(std::stoi(c));
    }
    const std::string bits = field(value, "value");
    detail::require(bits.size() == g.controls.size(), "control value width mismatch");
    for (char b : bits) {
      detail::require(b == '0' || b == '1', "control value must be binary");
      g.value = (g.value << 1) | static_cast<std::uint64_t>(b == '1');
    }
    g.angle = detail::parse_hex_float(field(angle, "angle"));
    const std::string k = field(kind, "kind");
    detail::require(k == "theta" || k == "alpha", "unknown gate kind '" + k + "'");
    g.kind = k == "theta" ? GateKind::Theta : GateKind::Alpha;
    g.skip = skip;
    detail::require(g.target >= 0 && g.target < ir.n_qubits, "gate target out of range");
    ir.gates.push_back(std::move(g));
  }
  detail::require(header, "missing circuit header");
  ir.counts = detail::count_gates(ir.gates);
  return ir;
}

/// OpenQASM 3; q[0] is the most significant qubit, multi-controls are symbolic.
inline std::string render_qasm(const CircuitIR &ir) {
  std::ostringstream out;
  out.precision(17);
  out << "OPENQASM 3.0;\n";
  out << "include \"stdgates.inc\";\n";
  out << "// spec_hash=" << ir.spec_hash << '\n';
  out << "// convention=" << ir.convention << " R(a) = ry(2a)\n";
  out << "// rotations=" << ir.counts.rotations << " cnot_estimate=" << ir.counts.cnot_estimate
      << '\n';
  out << "qubit[" << ir.n_qubits << "] q;\n";
  for (const auto &g : ir.gates) {
    if (g.skip) {
      out << "// dead branch: " << detail::gate_line(g) << '\n';
      continue;
    }
    std::vector<int> flips;
    for (int i = 0; i < g.h(); ++i) {
      if (((g.value >> (g.h() - 1 - i)) & 1u) == 0) {
        flips.push_back(g.controls[i]);
      }
    }
    for (int q : flips) {
      out << "x q[" << q << "];\n";
    }
    if (g.h() > 0) {
      out << "ctrl(" << g.h() << ") @ ";
    }
    out << "ry(" << 2.0 * g.angle << ") ";
    for (int q : g.controls) {
      out << "q[" << q << "], ";
    }
    out << "q[" << g.target << "];\n";
    for (int q : flips) {
      out << "x q[" << q << "];\n";
    }
  }
  return out.str();
}

/// Dense statevector simulation from |0...0>.
inline Vector simulate(const CircuitIR &ir) {
  detail::require(ir.n_qubits >= 1 && ir.n_qubits <= 30, "simulation supports 1..30 qubits");
  const int n = ir.n_qubits;
  const std::size_t dim = std::size_t{1} << n;
  Vector psi = Vector::Zero(static_cast<Eigen::Index>(dim));
  psi(0) = 1.0;
  for (const auto &g : ir.gates) {
    if (g.skip) {
      continue;
    }
    const std::size_t tbit = std::size_t{1} << (n - 1 - g.target);
    std::size_t cmask = 0;
    std::size_t cval = 0;
    for (int i = 0; i < g.h(); ++i) {
      const std::size_t bit = std::size_t{1} << (n - 1 - g.controls[i]);
      cmask |= bit;
      if ((g.value >> (g.h() - 1 - i)) & 1u) {
        cval |= bit;
      }
    }
    const double c = std::cos(g.angle);
    const double s = std::sin(g.angle);
    for (std::size_t idx = 0; idx < dim; ++idx) {
      if ((idx & tbit) || (idx & cmask) != cval) {
        continue;
      }
      const auto i0 = static_cast<Eigen::Index>(idx);
      const auto i1 = static_cast<Eigen::Index>(idx | tbit);
      const double a0 = psi(i0);
      const double a1 = psi(i1);
      psi(i0) = c * a0 - s * a1;
      psi(i1) = s * a0 + c * a1;
    }
  }
  return psi;
}

} // namespace lsft
