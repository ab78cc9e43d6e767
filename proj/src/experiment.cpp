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

#include "ulab/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <thread>

#include "ulab/catalog.hpp"
#include "ulab/error.hpp"
#include "ulab/optics.hpp"

namespace ulab::experiment {

namespace {

using compiler::CatalogRequest;
using compiler::CompiledMeasurement;
using compiler::Slot;
using qmath::CVector;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Runs f(i) for i in [0, n) on up to `threads` workers; rethrows the first
// exception by index.
template <class F>
void parallel_for(int n, int threads, F&& f) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n);
  std::vector<std::exception_ptr> errors(n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) {
          try {
            f(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Settings measured at each phi, in the order derive() reads them:
// A, A^2, B, B^2, i[A,B], one C per mp1 entry, D.
std::vector<CatalogRequest> setting_requests(int dim, double phi) {
  auto req = [&](std::string name, std::optional<int> k = std::nullopt) {
    return CatalogRequest{dim, std::move(name), phi, k, true};
  };
  const std::string a = dim == 3 ? "Jx" : "sigma_x";
  const std::string b = dim == 3 ? "Jy" : "sigma_y";
  std::vector<CatalogRequest> r{req(a), req(a + "2"), req(b), req(b + "2"), req("comm"), req("C")};
  if (dim == 3) {
    for (int k = 1; k <= 3; ++k) r.push_back(req("C", k));
  }
  r.push_back(req("D"));
  return r;
}

std::string setting_label(const CatalogRequest& r) {
  if (r.name == "C") return r.k ? fmt::format("C(r{})", *r.k) : "C(opt)";
  return r.name;
}

constexpr int kFixedQuantities = 3;  // lhs, hr product, hr bound

// Derived quantities from setting means: lhs, hr product, hr bound, mp1 per
// entry, mp2.
std::vector<double> derive(const std::vector<double>& m, const std::vector<int>& signs) {
  const double va = m[1] - m[0] * m[0];
  const double vb = m[3] - m[2] * m[2];
  std::vector<double> q{va + vb, va * vb, m[4] * m[4] / 4};
  for (std::size_t e = 0; e < signs.size(); ++e) q.push_back(signs[e] * m[4] + m[5 + e]);
  q.push_back(m.back());
  return q;
}

// Linear error propagation with a central-difference gradient.
std::vector<double> propagate(const std::vector<Estimate>& est, const std::vector<int>& signs) {
  std::vector<double> m;
  for (const Estimate& e : est) m.push_back(e.mean);
  const std::size_t nq = derive(m, signs).size();
  std::vector<double> var(nq, 0.0);
  for (std::size_t s = 0; s < m.size(); ++s) {
    if (est[s].err == 0) continue;
    const double h = 1e-5 * std::max(1.0, std::abs(m[s]));
    std::vector<double> up = m, dn = m;
    up[s] += h;
    dn[s] -= h;
    const std::vector<double> qu = derive(up, signs), qd = derive(dn, signs);
    for (std::size_t q = 0; q < nq; ++q) {
      const double g = (qu[q] - qd[q]) / (2 * h);
      var[q] += g * g * est[s].err * est[s].err;
    }
  }
  for (double& v : var) v = std::sqrt(v);
  return var;
}

std::vector<double> normalized(const std::vector<double>& p) {
  double total = 0.0;
  for (double x : p) total += std::max(0.0, x);
  if (!(total > 0)) throw Error(ErrorCode::BadProbabilities, "nothing detected");
  std::vector<double> out;
  for (double x : p) out.push_back(std::max(0.0, x) / total);
  return out;
}

std::string fmt_number(double v) {
  if (v == 0) return "0";
  return fmt::format("{:.10g}", v);
}

double round10(double v) {
  const std::string s = fmt_number(v);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

const char* const kBase[] = {"lhs_sum", "hr_product", "hr_bound", "mp1_opt",
                             "mp1_r1",  "mp1_r2",     "mp1_r3",   "mp2"};

std::vector<const std::optional<Value>*> optional_values(const SweepRow& r,
                                                         std::vector<std::optional<Value>>& hold) {
  hold = {r.lhs_sum, r.hr_product, r.hr_bound, r.mp1_opt, r.mp1_r1, r.mp1_r2, r.mp1_r3, r.mp2};
  std::vector<const std::optional<Value>*> out;
  for (const auto& v : hold) out.push_back(&v);
  return out;
}

}  // namespace

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::Exact: return "exact";
    case Mode::Sampled: return "sampled";
    case Mode::Both: return "both";
  }
  return "exact";
}

Mode mode_from_name(std::string_view name) {
  if (name == "exact") return Mode::Exact;
  if (name == "sampled") return Mode::Sampled;
  if (name == "both") return Mode::Both;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown mode '{}'", name));
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
  if (dim != 2 && dim != 3) fail("dim must be 2 or 3");
  if (phis.empty()) fail("phis must not be empty");
  for (double p : phis) {
    if (!std::isfinite(p)) fail("phis must be finite");
  }
  if (shots < 1) fail("shots must be at least 1");
  if (!(noise.preparation_fidelity > 0 && noise.preparation_fidelity <= 1)) {
    fail("preparation_fidelity must lie in (0, 1]");
  }
  if (!(noise.angle_jitter_deg >= 0) || !std::isfinite(noise.angle_jitter_deg)) {
    fail("angle_jitter_deg must be finite and nonnegative");
  }
  if (bootstrap_resamples < 2) fail("bootstrap_resamples must be at least 2");
  if (threads < 0) fail("threads must be nonnegative");
}

std::vector<double> twelve_phis() {
  std::vector<double> out;
  for (int j = 1; j <= 12; ++j) out.push_back(j * std::numbers::pi / 12);
  return out;
}

RunConfig default_config(int dim) {
  RunConfig c;
  c.dim = dim;
  c.phis = twelve_phis();
  return c;
}

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  RunConfig c = default_config(3);
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "dim") {
        c.dim = v.get<int>();
      } else if (key == "phis") {
        c.phis = v.get<std::vector<double>>();
      } else if (key == "shots") {
        c.shots = v.get<std::int64_t>();
      } else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else if (key == "mode") {
        c.mode = mode_from_name(v.get<std::string>());
      } else if (key == "noise") {
        for (const auto& [nk, nv] : v.items()) {
          if (nk == "angle_jitter_deg") {
            c.noise.angle_jitter_deg = nv.get<double>();
          } else if (nk == "preparation_fidelity") {
            c.noise.preparation_fidelity = nv.get<double>();
          } else {
            throw Error(ErrorCode::ParseError, "unknown noise field '" + nk + "'");
          }
        }
      } else if (key == "poisson_totals") {
        c.poisson_totals = v.get<bool>();
      } else if (key == "bootstrap") {
        c.bootstrap = v.get<bool>();
      } else if (key == "bootstrap_resamples") {
        c.bootstrap_resamples = v.get<int>();
      } else if (key == "threads") {
        c.threads = v.get<int>();
      } else {
        throw Error(ErrorCode::ParseError, "unknown config field '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  c.validate();
  return c;
}

nlohmann::json config_to_json(const RunConfig& c) {
  return {{"dim", c.dim},
          {"phis", c.phis},
          {"shots", c.shots},
          {"seed", c.seed},
          {"mode", mode_name(c.mode)},
          {"noise",
           {{"angle_jitter_deg", c.noise.angle_jitter_deg},
            {"preparation_fidelity", c.noise.preparation_fidelity}}},
          {"poisson_totals", c.poisson_totals},
          {"bootstrap", c.bootstrap},
          {"bootstrap_resamples", c.bootstrap_resamples},
          {"threads", c.threads}};
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, int phi_index) {
  return seed ^ splitmix64(fnv1a(label) ^ splitmix64(static_cast<std::uint64_t>(phi_index)));
}

CountRecord sample_counts(const std::vector<double>& p, std::int64_t shots,
                          std::uint64_t seed, std::string label) {
  std::mt19937_64 rng(seed);
  return sample_counts(p, shots, rng, std::move(label));
}

CountRecord sample_counts(const std::vector<double>& p, std::int64_t shots,
                          std::mt19937_64& rng, std::string label) {
  if (p.empty()) throw Error(ErrorCode::BadProbabilities, "no outcomes");
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= -1e-12)) throw Error(ErrorCode::BadProbabilities, "negative probability");
    sum += x;
  }
  if (std::abs(sum - 1) > 1e-9) {
    throw Error(ErrorCode::BadProbabilities, fmt::format("probabilities sum to {:.12g}", sum));
  }
  if (shots < 0) throw Error(ErrorCode::InvalidArgument, "shots must be nonnegative");
  CountRecord r;
  r.label = std::move(label);
  r.total = shots;
  r.counts.assign(p.size(), 0);
  std::int64_t left = shots;
  double mass = 1.0;
  for (std::size_t i = 0; i + 1 < p.size() && left > 0; ++i) {
    const double q = mass > 0 ? std::clamp(std::max(0.0, p[i]) / mass, 0.0, 1.0) : 1.0;
    std::binomial_distribution<std::int64_t> b(left, q);
    r.counts[i] = b(rng);
    left -= r.counts[i];
    mass -= std::max(0.0, p[i]);
  }
  r.counts.back() += left;
  return r;
}

Estimate estimate_observable(const CountRecord& counts, const std::vector<double>& eigenvalues) {
  if (counts.total <= 0) throw Error(ErrorCode::EmptyRecord, "no counts in " + counts.label);
  if (counts.counts.size() != eigenvalues.size()) {
    throw Error(ErrorCode::DimMismatch, "counts and eigenvalues differ in length");
  }
  const double n = static_cast<double>(counts.total);
  double mean = 0.0, second = 0.0;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    const double f = counts.counts[i] / n;
    mean += eigenvalues[i] * f;
    second += eigenvalues[i] * eigenvalues[i] * f;
  }
  return {mean, std::sqrt(std::max(0.0, second - mean * mean)) / std::sqrt(n)};
}

QState prepare_state(double phi, int dim, const NoiseConfig& noise, std::mt19937_64& rng) {
  QState psi = relations::family_state(phi, dim);
  if (noise.angle_jitter_deg > 0) {
    optics::Circuit prep = optics::preparation_circuit(phi, dim);
    std::normal_distribution<double> jitter(0.0, noise.angle_jitter_deg);
    for (auto& e : prep.elements) {
      if (e.kind == optics::ElementKind::HWP) e.theta_deg += jitter(rng);
    }
    psi = optics::decode(optics::simulate(prep, optics::RailState{}), prep.output);
  }
  if (noise.preparation_fidelity < 1) {
    // Rotate by a fixed angle towards a random orthogonal direction.
    std::normal_distribution<double> n(0.0, 1.0);
    CVector chi(dim);
    for (int i = 0; i < dim; ++i) chi[i] = {n(rng), n(rng)};
    chi -= qmath::inner(psi, chi) * psi.vec();
    chi = chi.normalized();
    const double f = noise.preparation_fidelity;
    psi = QState::normalize(std::sqrt(f) * psi.vec() + std::sqrt(1 - f) * chi);
  }
  return psi;
}

SweepPlan plan_sweep(const RunConfig& config) {
  config.validate();
  SweepPlan plan;
  plan.dim = config.dim;
  plan.points.resize(config.phis.size());
  // Only C and D depend on phi; the rest compile once.
  auto per_phi = [](const CatalogRequest& r) { return r.name == "C" || r.name == "D"; };
  std::vector<std::optional<CompiledMeasurement>> shared;
  if (config.sampled()) {
    const auto reqs = setting_requests(config.dim, config.phis.front());
    shared.resize(reqs.size());
    parallel_for(static_cast<int>(reqs.size()), config.threads, [&](int k) {
      if (!per_phi(reqs[k])) shared[k] = compiler::compile_catalog(reqs[k]);
    });
  }
  parallel_for(static_cast<int>(config.phis.size()), config.threads, [&](int i) {
    PointPlan& pt = plan.points[i];
    pt.index = i;
    pt.phi = config.phis[i];
    pt.psi = relations::family_state(pt.phi, config.dim);
    pt.exact = relations::evaluate_family(config.dim, pt.phi,
                                          relations::default_requests(config.dim));
    for (const auto& e : pt.exact.mp1) pt.mp1_signs.push_back(e.sign);
    if (!config.sampled()) return;
    const auto reqs = setting_requests(config.dim, pt.phi);
    for (std::size_t k = 0; k < reqs.size(); ++k) {
      pt.settings.push_back({setting_label(reqs[k]),
                             shared[k] ? *shared[k] : compiler::compile_catalog(reqs[k])});
    }
  });
  return plan;
}

std::vector<SweepRow> run_sweep(const RunConfig& config) {
  return run_sweep(config, plan_sweep(config));
}

std::vector<SweepRow> run_sweep(const RunConfig& config, const SweepPlan& plan) {
  config.validate();
  if (plan.dim != config.dim || plan.points.size() != config.phis.size()) {
    throw Error(ErrorCode::InvalidArgument, "plan does not belong to this config");
  }
  std::vector<SweepRow> rows(plan.points.size());
  parallel_for(static_cast<int>(plan.points.size()), config.threads, [&](int i) {
    const PointPlan& pt = plan.points[i];
    SweepRow& row = rows[i];
    row.phi = pt.phi;
    const relations::BoundReport& x = pt.exact;
    row.lhs_sum.exact = x.lhs_sum;
    row.hr_product.exact = x.hr_product;
    row.hr_bound.exact = x.hr_bound;
    row.mp2.exact = x.mp2;
    std::vector<std::optional<Value>*> mp1_slots{&row.mp1_opt, &row.mp1_r1, &row.mp1_r2,
                                                 &row.mp1_r3};
    for (std::size_t e = 0; e < x.mp1.size() && e < mp1_slots.size(); ++e) {
      *mp1_slots[e] = Value{x.mp1[e].bound, {}, {}};
    }
    if (!config.sampled()) return;
    if (pt.settings.empty()) throw Error(ErrorCode::InvalidArgument, "plan was built without settings");

    std::vector<Estimate> est;
    std::vector<std::vector<double>> eigenvalues;
    for (const SettingPlan& s : pt.settings) {
      std::mt19937_64 rng(derive_seed(config.seed, s.label, pt.index));
      const QState psi = prepare_state(pt.phi, config.dim, config.noise, rng);
      optics::Circuit circuit = s.compiled.circuit;
      if (config.noise.angle_jitter_deg > 0) {
        std::normal_distribution<double> jitter(0.0, config.noise.angle_jitter_deg);
        compiler::PlateSettings plates = s.compiled.solution.plates;
        for (std::size_t k = 0; k < compiler::kSlotCount; ++k) {
          if (const auto v = plates.get(Slot(k))) plates.set(Slot(k), *v + jitter(rng));
        }
        circuit = compiler::build_circuit(plates, config.dim, circuit.readout);
      }
      const std::vector<double> p = normalized(optics::outcome_probabilities(circuit, psi));
      std::int64_t shots = config.shots;
      if (config.poisson_totals) {
        std::poisson_distribution<std::int64_t> pois(static_cast<double>(config.shots));
        shots = pois(rng);
      }
      row.records.push_back(sample_counts(p, shots, rng, s.label));
      eigenvalues.push_back(s.compiled.solution.eigenvalues);
      est.push_back(estimate_observable(row.records.back(), eigenvalues.back()));
    }

    std::vector<double> means;
    for (const Estimate& e : est) means.push_back(e.mean);
    const std::vector<double> q = derive(means, pt.mp1_signs);
    std::vector<double> err = propagate(est, pt.mp1_signs);

    if (config.bootstrap) {
      std::mt19937_64 rng(derive_seed(config.seed, "bootstrap", pt.index));
      std::vector<double> sum(q.size(), 0.0), sum2(q.size(), 0.0);
      const int b = config.bootstrap_resamples;
      for (int r = 0; r < b; ++r) {
        std::vector<double> m;
        for (std::size_t s = 0; s < row.records.size(); ++s) {
          const CountRecord& rec = row.records[s];
          std::vector<double> phat;
          for (std::int64_t c : rec.counts) phat.push_back(static_cast<double>(c) / rec.total);
          m.push_back(estimate_observable(sample_counts(phat, rec.total, rng), eigenvalues[s]).mean);
        }
        const std::vector<double> qb = derive(m, pt.mp1_signs);
        for (std::size_t k = 0; k < q.size(); ++k) {
          sum[k] += qb[k];
          sum2[k] += qb[k] * qb[k];
        }
      }
      for (std::size_t k = 0; k < q.size(); ++k) {
        const double mean = sum[k] / b;
        err[k] = std::sqrt(std::max(0.0, (sum2[k] - b * mean * mean) / (b - 1)));
      }
    }

    auto put = [&](Value& v, std::size_t k) {
      v.est = q[k];
      v.err = err[k];
    };
    put(row.lhs_sum, 0);
    put(row.hr_product, 1);
    put(row.hr_bound, 2);
    for (std::size_t e = 0; e < pt.mp1_signs.size() && e < mp1_slots.size(); ++e) {
      put(**mp1_slots[e], kFixedQuantities + e);
    }
    put(row.mp2, q.size() - 1);
  });
  return rows;
}

Format format_from_name(std::string_view name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown format '{}'", name));
}

Format format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".json" ? Format::Json : Format::Csv;
}

std::vector<std::string> dataset_columns(bool sampled) {
  std::vector<std::string> cols{"phi_rad"};
  for (const char* b : kBase) cols.push_back(b);
  if (sampled) {
    for (const char* b : kBase) {
      cols.push_back(std::string(b) + "_est");
      cols.push_back(std::string(b) + "_err");
    }
  }
  return cols;
}

std::string format_dataset(const std::vector<SweepRow>& rows, Format format) {
  if (rows.empty()) throw Error(ErrorCode::EmptyDataset, "no rows to export");
  const bool sampled = std::any_of(rows.begin(), rows.end(),
                                   [](const SweepRow& r) { return r.lhs_sum.est.has_value(); });
  const std::vector<std::string> cols = dataset_columns(sampled);

  // One cell per column; nullopt for an absent value.
  auto cells = [&](const SweepRow& r) {
    std::vector<std::optional<Value>> hold;
    const auto vals = optional_values(r, hold);
    std::vector<std::optional<double>> out{r.phi};
    for (const auto* v : vals) out.push_back(*v ? std::optional((*v)->exact) : std::nullopt);
    if (sampled) {
      for (const auto* v : vals) {
        out.push_back(*v ? (*v)->est : std::nullopt);
        out.push_back(*v ? (*v)->err : std::nullopt);
      }
    }
    return out;
  };

  if (format == Format::Json) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const SweepRow& r : rows) {
      nlohmann::ordered_json o = nlohmann::ordered_json::object();
      const auto c = cells(r);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        if (c[k]) {
          o[cols[k]] = round10(*c[k]);
        } else {
          o[cols[k]] = nullptr;
        }
      }
      arr.push_back(std::move(o));
    }
    return arr.dump(2) + "\n";
  }
  std::string out;
  for (std::size_t k = 0; k < cols.size(); ++k) out += (k ? "," : "") + cols[k];
  out += '\n';
  for (const SweepRow& r : rows) {
    const auto c = cells(r);
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (k) out += ',';
      if (c[k]) out += fmt_number(*c[k]);
    }
    out += '\n';
  }
  return out;
}

void export_dataset(const std::vector<SweepRow>& rows, Format format,
                    const std::filesystem::path& path) {
  const std::string text = format_dataset(rows, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  out.close();
  if (!out) {
    std::error_code ec;
    std::filesystem::remove(path, ec);
    throw Error(ErrorCode::IoError, "failed writing " + path.string());
  }
}

}  // namespace ulab::experiment
