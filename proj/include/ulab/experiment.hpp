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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "ulab/compiler.hpp"
#include "ulab/relations.hpp"

namespace ulab::experiment {

using qmath::QState;

enum class Mode { Exact, Sampled, Both };
std::string_view mode_name(Mode m);
Mode mode_from_name(std::string_view name);

struct NoiseConfig {
  double angle_jitter_deg = 0.0;     // Gaussian sigma per plate
  double preparation_fidelity = 1.0;  // in (0, 1]

  bool operator==(const NoiseConfig&) const = default;
};

struct RunConfig {
  int dim = 3;
  std::vector<double> phis;  // radians
  std::int64_t shots = 10000;
  std::uint64_t seed = 20260415;
  Mode mode = Mode::Exact;
  NoiseConfig noise;
  bool poisson_totals = false;
  bool bootstrap = false;
  int bootstrap_resamples = 1000;
  int threads = 0;  // 0: hardware concurrency

  bool sampled() const { return mode != Mode::Exact; }
  // Throws InvalidArgument.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

std::vector<double> twelve_phis();
RunConfig default_config(int dim = 3);

// Missing fields keep their defaults; unknown fields are a ParseError.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_config(const std::filesystem::path& path);

struct CountRecord {
  std::string label;
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;
};

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, int phi_index);

// Multinomial draw. Throws BadProbabilities.
CountRecord sample_counts(const std::vector<double>& p, std::int64_t shots,
                          std::uint64_t seed, std::string label = "");
CountRecord sample_counts(const std::vector<double>& p, std::int64_t shots,
                          std::mt19937_64& rng, std::string label = "");

struct Estimate {
  double mean = 0.0;
  double err = 0.0;
};

// Throws EmptyRecord.
Estimate estimate_observable(const CountRecord& counts,
                             const std::vector<double>& eigenvalues);

// psi_phi after the configured preparation noise.
QState prepare_state(double phi, int dim, const NoiseConfig& noise, std::mt19937_64& rng);

struct Value {
  double exact = 0.0;
  std::optional<double> est;
  std::optional<double> err;
};

struct SweepRow {
  double phi = 0.0;
  Value lhs_sum, hr_product, hr_bound;
  std::optional<Value> mp1_opt, mp1_r1, mp1_r2, mp1_r3;
  Value mp2;
  std::vector<CountRecord> records;  // sampled mode only
};

// Compiled settings for one phi; shared across repetitions.
struct SettingPlan {
  std::string label;
  compiler::CompiledMeasurement compiled;
};

struct PointPlan {
  int index = 0;
  double phi = 0.0;
  QState psi;
  relations::BoundReport exact;
  std::vector<int> mp1_signs;  // per mp1 entry
  std::vector<SettingPlan> settings;
};

struct SweepPlan {
  int dim = 3;
  std::vector<PointPlan> points;
};

SweepPlan plan_sweep(const RunConfig& config);
std::vector<SweepRow> run_sweep(const RunConfig& config);
std::vector<SweepRow> run_sweep(const RunConfig& config, const SweepPlan& plan);

enum class Format { Csv, Json };
Format format_from_name(std::string_view name);
Format format_for_path(const std::filesystem::path& path);

std::vector<std::string> dataset_columns(bool sampled);
// Throws EmptyDataset.
std::string format_dataset(const std::vector<SweepRow>& rows, Format format);
// Throws EmptyDataset or IoError; no file is created on error.
void export_dataset(const std::vector<SweepRow>& rows, Format format,
                    const std::filesystem::path& path);

}  // namespace ulab::experiment
