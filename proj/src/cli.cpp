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

#include "ulab/cli.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ulab/catalog.hpp"
#include "ulab/error.hpp"
#include "ulab/experiment.hpp"
#include "ulab/optics_json.hpp"
#include "ulab/relations.hpp"
#include "ulab/tables.hpp"

namespace ulab::cli {

namespace {

using nlohmann::json;
using qmath::cplx;
using qmath::CVector;
using qmath::QState;

constexpr const char* kSeedEnv = "UNCERTAINTY_LAB_SEED";

// Text output only; JSON keeps the raw doubles.
std::string num(double v) {
  if (std::abs(v) < 1e-14) return "0";
  return fmt::format("{:.6g}", v);
}

double parse_double(std::string_view s, const char* what) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("bad {} '{}'", what, s));
  }
  return v;
}

std::uint64_t parse_seed(std::string_view s, const char* what) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("bad {} '{}'", what, s));
  }
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, where + ": " + e.what());
  }
}

void write_or_print(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
  f << text;
  if (!f) throw Error(ErrorCode::IoError, "failed writing " + path);
}

// Amplitudes as numbers or [re, im] pairs.
CVector amplitudes_from_json(const json& j) {
  if (!j.is_array() || j.empty() || j.size() > static_cast<std::size_t>(qmath::kMaxDim)) {
    throw Error(ErrorCode::ParseError, "expected an array of 1 to 4 amplitudes");
  }
  CVector v(static_cast<int>(j.size()));
  try {
    for (std::size_t i = 0; i < j.size(); ++i) {
      const json& a = j[i];
      if (a.is_number()) {
        v[static_cast<int>(i)] = a.get<double>();
      } else if (a.is_array() && a.size() == 2) {
        v[static_cast<int>(i)] = cplx(a[0].get<double>(), a[1].get<double>());
      } else {
        throw Error(ErrorCode::ParseError, "amplitude must be a number or [re, im]");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return v;
}

std::string amplitude_text(cplx a) {
  auto clean = [](double x) { return std::abs(x) < 1e-12 ? 0.0 : x; };
  const double re = clean(a.real()), im = clean(a.imag());
  if (im == 0) return num(re);
  if (re == 0) return num(im) + "i";
  return fmt::format("{}{}{}i", num(re), im < 0 ? "-" : "+", num(std::abs(im)));
}

std::string rail_state_text(const optics::RailState& s) {
  std::string out;
  for (const auto& [mode, a] : s.entries()) {
    if (std::abs(a) < 1e-12) continue;
    out += fmt::format("  {:<6}{}\n", optics::to_string(mode), amplitude_text(a));
  }
  return out.empty() ? "  (vacuum)\n" : out;
}

std::string group_name(const std::vector<optics::Mode>& g) {
  std::string s = "{";
  for (std::size_t i = 0; i < g.size(); ++i) s += (i ? "," : "") + optics::to_string(g[i]);
  return s + "}";
}

json report_json(const relations::BoundReport& r, int dim) {
  json mp1 = json::array();
  for (const auto& e : r.mp1) mp1.push_back({{"origin", e.origin}, {"bound", e.bound}, {"sign", e.sign}});
  json j{{"dim", dim},          {"lhs_sum", r.lhs_sum}, {"hr_product", r.hr_product},
         {"hr_bound", r.hr_bound}, {"mp1", mp1},        {"mp2", r.mp2}};
  if (r.phi) j["phi"] = *r.phi;
  return j;
}

std::string report_text(const relations::BoundReport& r, int dim) {
  std::string s;
  if (r.phi) s += fmt::format("{:<12}{} (dim {})\n", "phi", num(*r.phi), dim);
  s += fmt::format("{:<12}{}\n", "lhs_sum", num(r.lhs_sum));
  s += fmt::format("{:<12}{}\n", "hr_product", num(r.hr_product));
  s += fmt::format("{:<12}{}\n", "hr_bound", num(r.hr_bound));
  for (const auto& e : r.mp1) {
    s += fmt::format("{:<12}{}  sign {:+d}\n", "mp1_" + e.origin, num(e.bound), e.sign);
  }
  s += fmt::format("{:<12}{}\n", "mp2", num(r.mp2));
  return s;
}

struct BoundsArgs {
  int dim = 3;
  std::string phi;
  std::string orthogonal = "default";
  std::string format = "text";
};

void run_bounds(const BoundsArgs& a, std::ostream& out) {
  const double phi = parse_phi(a.phi);
  std::vector<relations::OrthogonalRequest> reqs;
  if (a.orthogonal == "default") {
    reqs = relations::default_requests(a.dim);
  } else if (a.orthogonal == "opt") {
    reqs.push_back(relations::OrthogonalRequest::optimal());
  } else if (a.orthogonal == "1" || a.orthogonal == "2" || a.orthogonal == "3") {
    reqs.push_back(relations::OrthogonalRequest::family(a.orthogonal[0] - '0'));
  } else {
    const std::string text = a.orthogonal.front() == '@' ? read_file(a.orthogonal.substr(1))
                                                          : a.orthogonal;
    const CVector v = amplitudes_from_json(parse_json(text, "--orthogonal"));
    reqs.push_back(relations::OrthogonalRequest::custom(QState::normalize(v)));
  }
  const relations::BoundReport r = relations::evaluate_family(a.dim, phi, reqs);
  out << (a.format == "json" ? report_json(r, a.dim).dump(2) + "\n" : report_text(r, a.dim));
}

struct CompileArgs {
  std::string observable;
  std::optional<int> dim;
  std::string phi;
  std::optional<int> k;
  bool unanchored = false;
  std::string format = "text";
  std::string circuit_out;
};

void run_compile(const CompileArgs& a, std::ostream& out) {
  compiler::CatalogRequest req;
  req.name = a.observable;
  req.dim = a.dim.value_or(a.observable.rfind("sigma_", 0) == 0 ? 2 : 3);
  if (!a.phi.empty()) req.phi = parse_phi(a.phi);
  req.k = a.k;
  req.anchored = !a.unanchored;
  const compiler::CompiledMeasurement c = compiler::compile_catalog(req);
  if (!a.circuit_out.empty()) {
    write_or_print(optics::circuit_to_string(c.circuit) + "\n", a.circuit_out, out);
  }
  out << compiler::render_solution(c, compiler::table_format_from_name(a.format));
}

struct SimulateArgs {
  std::string circuit;
  std::string input;
  bool trace = false;
  std::string format = "text";
};

void run_simulate(const SimulateArgs& a, std::ostream& out) {
  const optics::Circuit c = optics::circuit_from_string(read_file(a.circuit));
  const json in = parse_json(read_file(a.input), a.input);
  optics::RailState start;
  if (in.is_array() && !in.empty() && in[0].is_object()) {
    start = optics::rail_state_from_json(in);
  } else {
    const CVector v = amplitudes_from_json(in);
    if (v.dim() != static_cast<int>(c.input.size())) {
      throw Error(ErrorCode::DimMismatch,
                  fmt::format("input has {} amplitudes, circuit encodes {}", v.dim(),
                              c.input.size()));
    }
    start = optics::encode(QState::normalize(v), c.input);
  }
  const std::vector<optics::RailState> states = optics::simulate_trace(c, start);
  const optics::Detection d = optics::detect(states.back(), c.readout);
  if (a.format == "json") {
    json j = json::object();
    if (a.trace) {
      json steps = json::array();
      for (std::size_t i = 0; i < states.size(); ++i) {
        steps.push_back({{"element", i == 0 ? "input" : optics::describe(c.elements[i - 1])},
                         {"state", optics::to_json(states[i])}});
      }
      j["trace"] = std::move(steps);
    } else {
      j["output"] = optics::to_json(states.back());
    }
    json groups = json::array();
    for (const auto& g : c.readout) groups.push_back(group_name(g));
    j["readout"] = std::move(groups);
    j["probabilities"] = d.p;
    j["leakage"] = d.leakage;
    out << j.dump(2) << "\n";
    return;
  }
  if (a.trace) {
    for (std::size_t i = 0; i < states.size(); ++i) {
      out << fmt::format("[{}] {}\n", i, i == 0 ? "input" : optics::describe(c.elements[i - 1]));
      out << rail_state_text(states[i]);
    }
  } else {
    out << "output\n" << rail_state_text(states.back());
  }
  out << "detection\n";
  for (std::size_t i = 0; i < d.p.size(); ++i) {
    out << fmt::format("  {:<10}{}\n", group_name(c.readout[i]),
                      num(d.p[i]));
  }
  out << fmt::format("  {:<10}{}\n", "leakage", num(d.leakage));
}

struct SweepArgs {
  std::string config;
  std::string out;
  std::string format;
  std::string seed;
  std::string mode;
  std::optional<std::int64_t> shots;
  std::optional<int> dim;
  std::optional<int> threads;
};

void run_sweep_command(const SweepArgs& a, std::ostream& out) {
  experiment::RunConfig c =
      a.config.empty() ? experiment::default_config(3) : experiment::load_config(a.config);
  if (a.dim) {
    c.dim = *a.dim;
  }
  if (const char* env = std::getenv(kSeedEnv); env && *env) c.seed = parse_seed(env, kSeedEnv);
  if (!a.seed.empty()) c.seed = parse_seed(a.seed, "--seed");
  if (!a.mode.empty()) c.mode = experiment::mode_from_name(a.mode);
  if (a.shots) c.shots = *a.shots;
  if (a.threads) c.threads = *a.threads;
  c.validate();
  const experiment::Format f = !a.format.empty()  ? experiment::format_from_name(a.format)
                               : !a.out.empty()   ? experiment::format_for_path(a.out)
                                                  : experiment::Format::Csv;
  const std::vector<experiment::SweepRow> rows = experiment::run_sweep(c);
  if (a.out.empty()) {
    out << experiment::format_dataset(rows, f);
    return;
  }
  experiment::export_dataset(rows, f, a.out);
  out << fmt::format("wrote {} rows to {}\n", rows.size(), a.out);
}

struct TablesArgs {
  int table = 0;
  std::string format = "text";
  std::string out;
};

void run_tables(const TablesArgs& a, std::ostream& out) {
  const compiler::AngleTables t = compiler::angle_tables();
  write_or_print(compiler::render_tables(t, compiler::table_format_from_name(a.format), a.table),
                 a.out, out);
}

}  // namespace

double parse_phi(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  const auto pi = s.find("pi");
  if (pi == std::string_view::npos) {
    const double v = parse_double(s, "phi");
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "phi must be finite");
    return v;
  }
  std::string_view head = s.substr(0, pi);
  std::string_view tail = s.substr(pi + 2);
  double factor = 1.0;
  if (!head.empty() && (head.front() == '-' || head.front() == '+')) {
    if (head.front() == '-') factor = -1.0;
    head.remove_prefix(1);
  }
  if (!head.empty()) {
    if (head.back() == '*') head.remove_suffix(1);
    factor *= parse_double(head, "phi");
  }
  if (!tail.empty()) {
    if (tail.front() != '/') {
      throw Error(ErrorCode::InvalidArgument, fmt::format("bad phi '{}'", text));
    }
    const double d = parse_double(tail.substr(1), "phi");
    if (d == 0) throw Error(ErrorCode::InvalidArgument, "phi divides by zero");
    factor /= d;
  }
  return factor * std::numbers::pi;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Uncertainty relation lab: bounds, circuit compilation, simulation and sweeps",
               "ulab"};
  app.require_subcommand(1, 1);
  const auto formats = CLI::IsMember({"text", "json"});
  const auto table_formats = CLI::IsMember({"text", "csv", "json"});

  BoundsArgs bounds;
  CLI::App* b = app.add_subcommand("bounds", "Evaluate every bound for psi_phi");
  b->add_option("--dim", bounds.dim, "2 or 3")->check(CLI::IsMember({2, 3}));
  b->add_option("--phi", bounds.phi, "radians, e.g. 0.2618 or pi/12")->required();
  b->add_option("--orthogonal", bounds.orthogonal,
                "opt, 1, 2, 3, a JSON amplitude list, or @file.json");
  b->add_option("--format", bounds.format)->check(formats);

  CompileArgs compile;
  CLI::App* c = app.add_subcommand("compile", "Compile a measurement into plate angles");
  c->add_option("--observable", compile.observable,
                "Jx Jx2 Jy Jy2 Jz C+ C- C D comm, or sigma_x ... for dim 2")
      ->required();
  c->add_option("--dim", compile.dim)->check(CLI::IsMember({2, 3}));
  c->add_option("--phi", compile.phi, "radians; required for C with --k, and for dim 2");
  c->add_option("--k", compile.k, "orthogonal family state 1..3 for C")
      ->check(CLI::Range(1, 3));
  c->add_flag("--unanchored", compile.unanchored, "ignore the published settings");
  c->add_option("--format", compile.format)->check(table_formats);
  c->add_option("--circuit-out", compile.circuit_out, "write the circuit JSON here");

  SimulateArgs simulate;
  CLI::App* s = app.add_subcommand("simulate", "Run a circuit on an input state");
  s->add_option("--circuit", simulate.circuit)->required();
  s->add_option("--input", simulate.input, "amplitudes or rail-state JSON")->required();
  s->add_flag("--trace", simulate.trace, "print the state after every element");
  s->add_option("--format", simulate.format)->check(formats);

  SweepArgs sweep;
  CLI::App* w = app.add_subcommand("sweep", "Run the phi sweep");
  w->add_option("--config", sweep.config, "RunConfig JSON");
  w->add_option("--out", sweep.out, "output file (.csv or .json)");
  w->add_option("--format", sweep.format)->check(CLI::IsMember({"csv", "json"}));
  w->add_option("--seed", sweep.seed, "overrides the config and " + std::string(kSeedEnv));
  w->add_option("--mode", sweep.mode)->check(CLI::IsMember({"exact", "sampled", "both"}));
  w->add_option("--shots", sweep.shots);
  w->add_option("--dim", sweep.dim)->check(CLI::IsMember({2, 3}));
  w->add_option("--threads", sweep.threads);

  TablesArgs tables;
  CLI::App* t = app.add_subcommand("tables", "Regenerate the preparation and measurement tables");
  t->add_option("--table", tables.table, "1, 2 or 3; all by default")->check(CLI::Range(1, 3));
  t->add_option("--format", tables.format)->check(table_formats);
  t->add_option("--out", tables.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  try {
    if (b->parsed()) run_bounds(bounds, out);
    if (c->parsed()) run_compile(compile, out);
    if (s->parsed()) run_simulate(simulate, out);
    if (w->parsed()) run_sweep_command(sweep, out);
    if (t->parsed()) run_tables(tables, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace ulab::cli
