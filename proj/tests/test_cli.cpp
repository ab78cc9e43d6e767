// Copyright 2026 The uncertainty-lab Authors
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

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <locale>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ulab/cli.hpp"
#include "ulab/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kGolden = ULAB_GOLDEN_DIR;
const fs::path kInputs = kGolden / "inputs";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "ulab");
  std::ostringstream out, err;
  const int code = ulab::cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool updating() {
  const char* v = std::getenv("ULAB_UPDATE_GOLDEN");
  return v && std::string(v) == "1";
}

// Numbers may differ in the last ulp between platforms; structure may not.
bool json_close(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) {
    return std::abs(a.get<double>() - b.get<double>()) <= 1e-12;
  }
  if (a.type() != b.type() || a.size() != b.size()) return false;
  if (a.is_array()) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!json_close(a[i], b[i])) return false;
    }
    return true;
  }
  if (a.is_object()) {
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!b.contains(it.key()) || !json_close(it.value(), b[it.key()])) return false;
    }
    return true;
  }
  return a == b;
}

void check_golden(const std::string& name, const std::string& actual) {
  const fs::path p = kGolden / name;
  if (updating()) {
    std::ofstream(p, std::ios::binary) << actual;
    return;
  }
  INFO("golden " << p.string() << " (regenerate with ULAB_UPDATE_GOLDEN=1)");
  REQUIRE(fs::exists(p));
  const std::string expected = slurp(p);
  if (p.extension() == ".json") {
    CHECK(json_close(json::parse(actual), json::parse(expected)));
  } else {
    CHECK(actual == expected);
  }
}

void golden_case(const std::string& name, const std::vector<std::string>& args) {
  const Run r = run(args);
  INFO(r.err);
  REQUIRE(r.code == 0);
  check_golden(name, r.out);
}

fs::path temp_dir() {
  const fs::path d = fs::temp_directory_path() / "ulab_cli_tests";
  fs::create_directories(d);
  return d;
}

struct CommaDecimal : std::numpunct<char> {
  char do_decimal_point() const override { return ','; }
};

class ScopedEnv {
 public:
  ScopedEnv(const char* name, const char* value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    if (value) {
      ::setenv(name, value, 1);
    } else {
      ::unsetenv(name);
    }
  }
  ~ScopedEnv() {
    if (old_.empty()) {
      ::unsetenv(name_);
    } else {
      ::setenv(name_, old_.c_str(), 1);
    }
  }

 private:
  const char* name_;
  std::string old_;
};

}  // namespace

TEST_CASE("parse_phi accepts radians and multiples of pi") {
  CHECK(ulab::cli::parse_phi("0.2618") == 0.2618);
  CHECK(std::abs(ulab::cli::parse_phi("pi/12") - std::numbers::pi / 12) < 1e-15);
  CHECK(std::abs(ulab::cli::parse_phi("-5pi/6") + 5 * std::numbers::pi / 6) < 1e-15);
  CHECK(std::abs(ulab::cli::parse_phi("pi") - std::numbers::pi) < 1e-15);
  CHECK(std::abs(ulab::cli::parse_phi("2*pi/3") - 2 * std::numbers::pi / 3) < 1e-15);
  CHECK_THROWS_AS(ulab::cli::parse_phi("pi/0"), ulab::Error);
  CHECK_THROWS_AS(ulab::cli::parse_phi("abc"), ulab::Error);
  CHECK_THROWS_AS(ulab::cli::parse_phi(""), ulab::Error);
  CHECK_THROWS_AS(ulab::cli::parse_phi("pi*2"), ulab::Error);
}

TEST_CASE("bounds golden output") {
  golden_case("bounds_dim3_opt.txt", {"bounds", "--dim", "3", "--phi", "0.2618", "--orthogonal", "opt"});
  golden_case("bounds_dim3_all.txt", {"bounds", "--phi", "pi/12"});
  golden_case("bounds_dim3_r2.json", {"bounds", "--phi", "pi/3", "--orthogonal", "2", "--format", "json"});
  golden_case("bounds_dim2.txt", {"bounds", "--dim", "2", "--phi", "pi/4"});
  golden_case("bounds_custom.txt", {"bounds", "--phi", "pi/12", "--orthogonal", "[0, [0, 1], 0]"});
}

TEST_CASE("bounds example values") {
  const Run r = run({"bounds", "--dim", "3", "--phi", "0.2618", "--orthogonal", "opt"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("lhs_sum     1\n") != std::string::npos);
  CHECK(r.out.find("mp1_opt     1 ") != std::string::npos);
  CHECK(r.out.find("mp2         0.5\n") != std::string::npos);
  CHECK(r.out.find("hr_product  0.1875\n") != std::string::npos);
}

TEST_CASE("compile golden output") {
  golden_case("compile_jx.txt", {"compile", "--observable", "Jx"});
  golden_case("compile_jy.txt", {"compile", "--observable", "Jy"});
  golden_case("compile_d.json", {"compile", "--observable", "D", "--format", "json"});
  golden_case("compile_sigma_y.csv", {"compile", "--observable", "sigma_y", "--format", "csv"});
  golden_case("compile_c_r3.txt", {"compile", "--observable", "C", "--phi", "pi/12", "--k", "3"});
  golden_case("compile_d_qubit.txt", {"compile", "--observable", "D", "--dim", "2", "--phi", "pi/6"});
}

TEST_CASE("compile prints the published Jx angles") {
  const Run r = run({"compile", "--observable", "Jx"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("H3          -17.63\n") != std::string::npos);
  CHECK(r.out.find("H4          75.00\n") != std::string::npos);
  CHECK(r.out.find("H7          -62.63\n") != std::string::npos);
}

TEST_CASE("compile writes a circuit that simulate reads back") {
  const fs::path circuit = temp_dir() / "jx_roundtrip.json";
  fs::remove(circuit);
  REQUIRE(run({"compile", "--observable", "Jx", "--circuit-out", circuit.string()}).code == 0);
  REQUIRE(fs::exists(circuit));
  CHECK(json_close(json::parse(slurp(circuit)), json::parse(slurp(kInputs / "jx_circuit.json"))));
  const Run r = run({"simulate", "--circuit", circuit.string(), "--input",
                     (kInputs / "psi_pi12.json").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out == run({"simulate", "--circuit", (kInputs / "jx_circuit.json").string(), "--input",
                      (kInputs / "psi_pi12.json").string()})
                     .out);
}

TEST_CASE("simulate golden output") {
  const std::string jx = (kInputs / "jx_circuit.json").string();
  const std::string psi = (kInputs / "psi_pi12.json").string();
  golden_case("simulate_jx_trace.txt", {"simulate", "--circuit", jx, "--input", psi, "--trace"});
  golden_case("simulate_jx_trace.json",
              {"simulate", "--circuit", jx, "--input", psi, "--trace", "--format", "json"});
  golden_case("simulate_jx_leaky.txt",
              {"simulate", "--circuit", jx, "--input", (kInputs / "leaky_rail_state.json").string()});
  golden_case("simulate_sigma_x.txt",
              {"simulate", "--circuit", (kInputs / "sigma_x_circuit.json").string(), "--input",
               (kInputs / "qubit_state.json").string(), "--trace"});
  golden_case("simulate_d.txt", {"simulate", "--circuit", (kInputs / "d_circuit.json").string(),
                                 "--input", psi});
}

TEST_CASE("sweep golden output") {
  const ScopedEnv env("UNCERTAINTY_LAB_SEED", nullptr);
  golden_case("sweep_exact_dim3.csv", {"sweep"});
  golden_case("sweep_exact_dim2.json", {"sweep", "--dim", "2", "--format", "json"});
  golden_case("sweep_sampled_dim2.csv",
              {"sweep", "--dim", "2", "--mode", "sampled", "--seed", "7", "--shots", "5000"});
}

TEST_CASE("sweep writes the configured dataset") {
  const ScopedEnv env("UNCERTAINTY_LAB_SEED", nullptr);
  const fs::path out = temp_dir() / "default_sweep.csv";
  fs::remove(out);
  const Run r = run({"sweep", "--config", (kGolden / ".." / ".." / "configs" / "default.json").string(),
                     "--out", out.string()});
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.out == "wrote 12 rows to " + out.string() + "\n");
  const std::string csv = slurp(out);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
  CHECK(csv == run({"sweep"}).out);
}

TEST_CASE("sweep seed precedence") {
  const auto sampled = [](std::vector<std::string> extra) {
    std::vector<std::string> args{"sweep", "--dim", "2", "--mode", "sampled", "--shots", "2000"};
    args.insert(args.end(), extra.begin(), extra.end());
    const Run r = run(args);
    REQUIRE(r.code == 0);
    return r.out;
  };
  std::string flag11, env11, env11_flag5, flag5, config_seed;
  {
    const ScopedEnv env("UNCERTAINTY_LAB_SEED", nullptr);
    flag11 = sampled({"--seed", "11"});
    flag5 = sampled({"--seed", "5"});
    config_seed = sampled({});
  }
  {
    const ScopedEnv env("UNCERTAINTY_LAB_SEED", "11");
    env11 = sampled({});
    env11_flag5 = sampled({"--seed", "5"});
  }
  CHECK(env11 == flag11);
  CHECK(env11_flag5 == flag5);
  CHECK(flag11 != flag5);
  CHECK(config_seed != flag11);
  {
    const ScopedEnv env("UNCERTAINTY_LAB_SEED", "not-a-number");
    CHECK(run({"sweep", "--mode", "sampled"}).code == 1);
  }
}

TEST_CASE("tables golden output") {
  golden_case("tables_all.txt", {"tables"});
  golden_case("tables_2.csv", {"tables", "--table", "2", "--format", "csv"});
  golden_case("tables_3.json", {"tables", "--table", "3", "--format", "json"});
}

TEST_CASE("exit codes") {
  SECTION("usage errors") {
    CHECK(run({}).code == 1);
    CHECK(run({"bounds"}).code == 1);
    CHECK(run({"bounds", "--phi", "0.1", "--unknown"}).code == 1);
    CHECK(run({"bounds", "--phi", "0.1", "--dim", "4"}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    const Run r = run({"bounds", "--phi", "0.1", "--unknown"});
    CHECK(r.err.find("--unknown") != std::string::npos);
  }
  SECTION("validation errors") {
    CHECK(run({"bounds", "--phi", "x"}).code == 1);
    CHECK(run({"bounds", "--phi", "pi/12", "--orthogonal", "[1, 0, 0]"}).code == 1);
    CHECK(run({"bounds", "--phi", "pi/12", "--orthogonal", "[1, 0"}).code == 1);
    CHECK(run({"compile", "--observable", "Jw"}).code == 1);
    CHECK(run({"simulate", "--circuit", "/nonexistent.json", "--input", "x"}).code == 1);
    CHECK(run({"simulate", "--circuit", (kInputs / "jx_circuit.json").string(), "--input",
               (kInputs / "qubit_state.json").string()})
              .code == 1);
    CHECK(run({"sweep", "--shots", "0", "--mode", "sampled"}).code == 1);
    CHECK(run({"sweep", "--config", "/nonexistent.json"}).code == 1);
    const Run r = run({"bounds", "--phi", "x"});
    CHECK(r.err.rfind("error: ", 0) == 0);
    CHECK(r.out.empty());
  }
  SECTION("help") {
    const Run r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("sweep") != std::string::npos);
  }
}

TEST_CASE("numeric output ignores the global locale") {
  const std::string before = run({"bounds", "--phi", "pi/12"}).out +
                             run({"compile", "--observable", "Jx"}).out +
                             run({"sweep", "--dim", "2"}).out;
  const std::locale saved = std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
  const std::string after = run({"bounds", "--phi", "pi/12"}).out +
                            run({"compile", "--observable", "Jx"}).out +
                            run({"sweep", "--dim", "2"}).out;
  std::locale::global(saved);
  CHECK(before == after);
  CHECK(after.find("0.1875") != std::string::npos);
}
