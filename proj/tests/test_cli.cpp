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

#include <gtest/gtest.h>
#include <json.hpp>

#include "table1.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using json = nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

/// Run the CLI through the shell; `redirect` picks which stream is captured.
Result run(const std::string &args, const std::string &redirect = "2>/dev/null") {
  const std::string cmd = std::string(LSFT_CLI_PATH) + " " + args + " " + redirect;
  Result r;
  FILE *pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    return r;
  }
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    r.out.append(buf.data(), n);
  }
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

Result run_stderr(const std::string &args) { return run(args, "2>&1 1>/dev/null"); }

std::filesystem::path scratch(const std::string &name) {
  auto p = std::filesystem::temp_directory_path() / ("lsft_cli_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

} // namespace

TEST(Cli, KMatrixThreeSites) {
  const auto r = run("kmatrix --sites 3 --qubits 2 --mass 0.3 --phimax 3.5 --boundary open");
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  const double want[3][3] = {
      {1.396, -0.371, -0.0493}, {-0.371, 1.347, -0.371}, {-0.0493, -0.371, 1.396}};
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(j["k_rows"][i][k].get<double>(), want[i][k], 5e-4);
    }
  }
  EXPECT_EQ(j["manifest"]["spec_hash"], j["spec_hash"]);
}

TEST(Cli, KMatrixCsvCarriesHash) {
  const auto r = run("kmatrix --sites 2 --boundary open --format csv");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("# spec_hash=", 0), 0u);
  EXPECT_NE(r.out.find("i,j,K\n"), std::string::npos);
}

TEST(Cli, ReproduceTable) {
  const auto r = run("reproduce table1");
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  const auto table = golden::three_site_table();
  for (std::size_t l = 0; l < table.theta.size(); ++l) {
    for (std::size_t k = 0; k < table.theta[l].size(); ++k) {
      EXPECT_TRUE(golden::matches_four_figures(j["theta"][l][k].get<double>(), table.theta[l][k]))
          << "theta level " << l << " k " << k;
    }
  }
  for (std::size_t l = 0; l < table.alpha.size(); ++l) {
    for (const auto &[h, block] : table.alpha[l]) {
      const auto &got = j["alpha_sitewise"][l][std::to_string(h)];
      ASSERT_EQ(got.size(), block.size());
      for (std::size_t k = 0; k < block.size(); ++k) {
        EXPECT_TRUE(golden::matches_four_figures(got[k].get<double>(), block[k]))
            << "alpha level " << l << " h " << h << " k " << k;
      }
    }
  }
}

TEST(Cli, TruncateIdentity) {
  const auto r = run("truncate --tau 0 --hmax 999 --sites 3 --boundary open");
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["fidelity"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(j["zeroed_rotations"], 0);
}

TEST(Cli, ExitCodes) {
  auto r = run_stderr("kmatrix --sites 0");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.out)["error"]["kind"], "validation");
  r = run_stderr("angles --sites 20 --qubits 2");
  EXPECT_EQ(r.code, 3);
  const json e = json::parse(r.out)["error"];
  EXPECT_EQ(e["kind"], "budget");
  EXPECT_DOUBLE_EQ(e["required_bytes"].get<double>(), 8.0 * std::ldexp(1.0, 40));
  EXPECT_EQ(run_stderr("kmatrix --no-such-flag").code, 2);
  EXPECT_EQ(run_stderr("truncate --sites 2").code, 2);
  EXPECT_EQ(run_stderr("reproduce fig99").code, 2);
  EXPECT_EQ(run_stderr("interacting --sites 3 --max-iter 2 --tol 1e-14").code, 4);
}

TEST(Cli, Deterministic) {
  for (const std::string args :
       {"kmatrix --sites 5 --mass 0.4", "correlations --sites 24 --stencil s3 --format csv",
        "angles --sites 3 --decomposition sitewise --boundary open",
        "fidelity-scan --sites 3 --hvalues 1,2,3 --taus 0,1e-3 --boundary open",
        "interacting --sites 3 --coupling 4 --phimax 2", "emit --sites 2 --format qasm"}) {
    const auto a = run(args);
    const auto b = run(args);
    ASSERT_EQ(a.code, 0) << args;
    EXPECT_EQ(a.out, b.out) << args;
  }
}

TEST(Cli, OutputDirectoryAndStateFile) {
  const auto dir = scratch("gs");
  auto r = run("groundstate --sites 3 --boundary open --out " + dir.string());
  ASSERT_EQ(r.code, 0);
  const json manifest = json::parse(std::ifstream(dir / "manifest.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "groundstate.bin"));
  EXPECT_EQ(manifest["spec_hash"], json::parse(r.out)["state"]["spec_hash"]);
  EXPECT_EQ(manifest["config"]["boundary"], "open");

  // A state read back gives the same schedule as the one computed in place.
  const auto from_file = run("angles --state " + (dir / "groundstate.bin").string());
  const auto direct = run("angles --sites 3 --boundary open");
  ASSERT_EQ(from_file.code, 0);
  EXPECT_EQ(json::parse(from_file.out)["theta"], json::parse(direct.out)["theta"]);
  std::filesystem::remove_all(dir);
}

TEST(Cli, EmitParsesBack) {
  const auto r = run("emit --sites 2 --boundary open --decomposition sitewise --hmax 2");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("# lsft-circuit 1\n", 0), 0u);
  EXPECT_NE(r.out.find("kind=alpha"), std::string::npos);
}

TEST(Cli, InteractingDefaultsToOpen) {
  const auto r = run("interacting --sites 3 --coupling 4 --phimax 2");
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_EQ(j["manifest"]["spec"]["boundary"], "open");
  EXPECT_GT(j["spectrum"]["M_phi"].get<double>(), 0.0);
}
