// Copyright 2026 The svasim Authors.
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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "svasim/config.hpp"
#include "svasim/workloads.hpp"

namespace svasim {

inline constexpr int kSchemaVersion = 1;

enum class Mode : std::uint8_t { Baseline, Iommu, IommuLlc };
enum class Offload : std::uint8_t { HostOnly, Copy, ZeroCopy };

Mode parse_mode(const std::string& s);
Offload parse_offload(const std::string& s);
const char* to_string(Mode m);
const char* to_string(Offload o);
/// COPY for BASELINE, ZERO_COPY otherwise.
Offload default_offload(Mode m);

/// Fitted constants: per-kernel compute efficiency and the mapping ioctl's
/// fixed cost. defaults() returns the shipped (calibrated) values.
struct Calibration {
  std::array<double, 5> eta{};
  Cycle ioctl_cycles = 0;

  static Calibration defaults();
  double eta_for(KernelKind k) const { return eta[static_cast<std::size_t>(k)]; }
  void set_eta(KernelKind k, double v) { eta[static_cast<std::size_t>(k)] = v; }
  void apply(const KeyValueConfig& cfg);
  KeyValueConfig to_config() const;
};

struct ScenarioConfig {
  KernelSpec kernel;  // eta is filled in from `calib` unless eta_override
  bool eta_override = false;
  Cycle latency = 200;
  Mode mode = Mode::Baseline;
  Offload offload = Offload::Copy;
  InterferenceSpec interference;
  bool interference_seed_set = false;
  std::uint64_t seed = 1;
  Cycle sync_cycles = 5000;
  PlatformConfig platform;
  Calibration calib = Calibration::defaults();

  /// Builds a scenario from flat keys on top of the defaults.
  static ScenarioConfig from_config(const KeyValueConfig& cfg);
  /// Throws ConfigError for invalid combinations.
  void validate() const;
  /// Platform configuration with the mode and latency applied.
  PlatformConfig effective_platform() const;
  KernelSpec effective_kernel() const;
};

struct RunReport {
  int schema_version = kSchemaVersion;
  std::string kernel;
  std::uint64_t size = 0;
  Cycle latency = 0;
  Mode mode = Mode::Baseline;
  Offload offload = Offload::Copy;
  std::uint64_t seed = 0;
  bool interference = false;

  DeviceSegment device;     // second (reported) execution
  DeviceSegment first_run;  // warm-up execution
  Cycle host_cycles = 0;    // HOST_ONLY execution time (second run)
  Cycle copy_or_map = 0;
  Cycle sync = 0;
  Cycle flush = 0;
  std::uint64_t ptes_written = 0;

  // Counters over the reported execution.
  std::uint64_t iotlb_hits = 0;
  std::uint64_t iotlb_misses = 0;
  std::uint64_t ptw_samples = 0;
  double ptw_mean = 0;
  Cycle ptw_min = 0;
  Cycle ptw_max = 0;
  std::uint64_t ptw_reads = 0;
  std::uint64_t llc_hits = 0;
  std::uint64_t llc_misses = 0;
  std::uint64_t llc_ptw_hits = 0;
  std::uint64_t llc_ptw_misses = 0;
  std::uint64_t llc_dma_lookups = 0;
  std::uint64_t interference_reads = 0;
  std::uint64_t events = 0;

  /// Kernel runtime: device total, or host time for
  /// HOST_ONLY.
  Cycle total_cycles() const;
  Cycle compute_cycles() const;
  Cycle dma_wait_cycles() const;
  double pct_dma() const;
  /// copy_or_map + sync + kernel runtime.
  Cycle end_to_end() const;

  std::string csv_row() const;
  nlohmann::json to_json() const;
};

const std::string& csv_header();

RunReport run_scenario(const ScenarioConfig& cfg);

struct SweepSpec {
  ScenarioConfig base;
  std::vector<KernelKind> kernels{KernelKind::Gemm, KernelKind::Gesummv, KernelKind::Heat3d, KernelKind::Mergesort};
  std::vector<Cycle> latencies{200, 600, 1000};
  std::vector<Mode> modes{Mode::Baseline, Mode::Iommu, Mode::IommuLlc};
  unsigned threads = 0;  // 0 = hardware concurrency

  static SweepSpec from_config(const KeyValueConfig& cfg);
};

struct SweepResult {
  std::vector<RunReport> cells;  // in cell-index order
  std::string csv() const;
  nlohmann::json summary() const;
};

/// Seed of one sweep cell, derived from the base seed and the cell's
/// identity (kernel, size, latency, mode) so it does not depend on order.
std::uint64_t cell_seed(std::uint64_t seed, KernelKind k, std::uint64_t size, Cycle latency, Mode m);

/// Runs every cell as an isolated simulation (possibly in parallel).
SweepResult run_sweep(const SweepSpec& spec);

/// Writes `sweep.csv` and `summary.json` into `dir` (created if needed).
void write_sweep(const SweepResult& r, const std::string& dir);

struct OffloadRow {
  std::uint64_t size = 0;
  Cycle latency = 0;
  Offload offload = Offload::HostOnly;
  Cycle copy_or_map = 0;
  Cycle sync = 0;
  Cycle compute = 0;  // device (or host) execution time
  Cycle end_to_end = 0;
};

std::vector<OffloadRow> run_offload_comparison(const ScenarioConfig& base, const std::vector<std::uint64_t>& sizes,
                                               const std::vector<Cycle>& latencies);
std::string offload_csv(const std::vector<OffloadRow>& rows);

struct PtwRow {
  Cycle latency = 0;
  bool llc = false;
  bool interference = false;
  double mean = 0;
  Cycle max = 0;
  std::uint64_t samples = 0;
  Cycle device_total = 0;
};

/// axpy under IOMMU (LLC off) and IOMMU_LLC, with and without host
/// interference, at each latency.
std::vector<PtwRow> run_ptw_study(const ScenarioConfig& base, const std::vector<Cycle>& latencies);
std::string ptw_csv(const std::vector<PtwRow>& rows);

class CalibrationFailure : public SimFault {
 public:
  using SimFault::SimFault;
};

struct CalibrationTarget {
  KernelKind kernel;
  double pct_dma;  // BASELINE %DMA at latency 200
};

/// Reference baseline %DMA at latency 200.
const std::vector<CalibrationTarget>& calibration_targets();

struct CalibrationResult {
  Calibration calib;
  std::vector<std::pair<KernelKind, double>> achieved;  // %DMA with the fitted eta
  double map_ratio = 0;                                  // map time 1000 / 200 with the fitted ioctl cost
};

/// Fits eta per kernel by bisection so BASELINE %DMA at latency 200 lands
/// within `tolerance_pp` of the target, then fits the ioctl constant so the
/// axpy mapping time grows 2.1x from latency 200 to 1000. Throws
/// CalibrationFailure listing residuals if any kernel misses its band.
CalibrationResult calibrate(const ScenarioConfig& base, double tolerance_pp = 5.0);

}  // namespace svasim
