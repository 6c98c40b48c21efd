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

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "svasim/cache.hpp"
#include "svasim/error.hpp"
#include "svasim/simcore.hpp"

namespace svasim {

struct IommuConfig {
  bool enabled = true;
  unsigned iotlb_entries = 4;
  ReplPolicy iotlb_policy = ReplPolicy::Lru;
  Cycle hit_latency = 2;
  /// Physical base of the (single-level) device directory; entry i lives
  /// at ddt_base + 8*i and holds (root_ppn << 10) | V.
  Addr ddt_base = 0;

  void validate() const;
};

/// A walk fault aborts the scenario. `level` is the Sv39 level of the
/// invalid entry, or 3 for a missing device-directory entry.
class TranslationFault : public SimFault {
 public:
  TranslationFault(std::uint64_t iova, int level);
  std::uint64_t iova() const { return iova_; }
  int level() const { return level_; }

 private:
  std::uint64_t iova_;
  int level_;
};

struct PtwSample {
  Cycle start = 0;
  Cycle end = 0;
  unsigned memory_reads = 0;
  Cycle latency() const { return end - start; }
};

struct IommuStats {
  std::uint64_t iotlb_hits = 0;
  std::uint64_t iotlb_misses = 0;
  std::uint64_t ddtc_hits = 0;
  std::uint64_t ddtc_misses = 0;
  std::uint64_t faults = 0;
  std::uint64_t ptw_reads = 0;  // page-table reads only (DDT fetches excluded)
  std::uint64_t ddt_reads = 0;
  std::vector<PtwSample> samples;

  double ptw_mean() const;
  Cycle ptw_max() const;
  Cycle ptw_min() const;
};

/// IOMMU between the cluster DMA engine and the interconnect: one-entry
/// device-directory cache, a small fully-associative IOTLB and a walker that
/// performs the three Sv39 reads back to back, one event per read.
class Iommu {
 public:
  using Done = std::function<void(Addr phys, Cycle done)>;

  Iommu(IommuConfig cfg, MemorySystem& mem, EventQueue& eq);

  /// Driver side: writes the device-directory entry and loads the DDTC.
  /// Stale IOTLB entries from an earlier root are the caller's problem.
  void configure_ddt(std::uint32_t device_id, std::uint64_t root_ppn);
  void ddtc_invalidate() { ddtc_valid_ = false; }
  void iotlb_invalidate_all();

  /// Starts a translation at eq.now(); `done` runs at the completion time.
  /// [iova, iova+len) must lie in one page. With the IOMMU disabled the
  /// address passes through with no added cycles and `done` runs inline.
  void translate_async(std::uint32_t device_id, Addr iova, std::uint32_t len, Done done);

  /// Blocking convenience wrapper: advances the event queue to `now`, runs
  /// the translation and drains the queue.
  std::pair<Addr, Cycle> translate(std::uint32_t device_id, Addr iova, std::uint32_t len, Cycle now);

  /// Resident IOTLB vpns, most recently used (or inserted) first.
  std::vector<std::uint64_t> iotlb_contents() const;
  bool busy() const { return busy_; }

  const IommuConfig& config() const { return cfg_; }
  const IommuStats& stats() const { return stats_; }
  IommuStats& stats() { return stats_; }

 private:
  struct Walk {
    std::uint32_t device;
    Addr iova;
    Done done;
    Addr table = 0;
    int level = 2;
    PtwSample sample;
  };

  void fetch_ddt(std::shared_ptr<Walk> w);
  void walk_step(std::shared_ptr<Walk> w);
  void finish(std::shared_ptr<Walk> w, std::uint64_t ppn);
  [[noreturn]] void fault(const Walk& w, int level);

  IommuConfig cfg_;
  MemorySystem& mem_;
  EventQueue& eq_;
  TagArray iotlb_;
  std::vector<std::uint64_t> iotlb_ppn_;
  bool ddtc_valid_ = false;
  std::uint32_t ddtc_device_ = 0;
  std::uint64_t ddtc_root_ = 0;
  bool busy_ = false;
  IommuStats stats_;
};

}  // namespace svasim
