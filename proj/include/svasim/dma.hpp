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
#include <deque>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "svasim/cache.hpp"
#include "svasim/iommu.hpp"
#include "svasim/simcore.hpp"

namespace svasim {

class EmptyTransfer : public std::invalid_argument {
 public:
  EmptyTransfer() : std::invalid_argument("empty DMA transfer") {}
};

struct Burst {
  Addr addr = 0;
  std::uint32_t len = 0;
  bool operator==(const Burst&) const = default;
};

/// Splits [addr, addr+len) into ascending bursts that never cross a 4 KiB
/// boundary and never exceed `max_burst_bytes`. Throws EmptyTransfer for
/// len == 0.
std::vector<Burst> split_bursts(Addr addr, std::uint64_t len, std::uint32_t max_burst_bytes = 2048);

enum class DmaDir : std::uint8_t { In, Out };  // In: DRAM -> TCDM

struct DmaTransfer {
  DmaDir dir = DmaDir::In;
  Addr bus_addr = 0;  // IOVA with the IOMMU on, else physical/alias address
  std::uint32_t tcdm_addr = 0;
  std::uint32_t len = 0;
};

struct DmaConfig {
  std::uint32_t max_burst_bytes = 2048;
  std::uint32_t tcdm_bytes = 128 * 1024;
  std::uint32_t device_id = 0;

  void validate() const;
};

struct TransferRecord {
  DmaDir dir = DmaDir::In;
  Addr bus_addr = 0;
  std::uint32_t len = 0;
  std::uint32_t bursts = 0;
  Cycle submit = 0;
  Cycle start = 0;
  Cycle done = 0;
  Cycle translate_stall = 0;
};

struct DmaStats {
  std::uint64_t bytes_in = 0;
  std::uint64_t bytes_out = 0;
  std::uint64_t bursts = 0;
  std::uint64_t transfers = 0;
  Cycle translate_stall = 0;
  std::vector<TransferRecord> records;
};

/// The cluster's single DMA engine. Transfers are served in submission
/// order; each burst is translated (stalling the engine on a walk) and then
/// moved as one DRAM-direct transaction. Data really moves between
/// simulated memory and the TCDM array.
class DmaEngine {
 public:
  using OnDone = std::function<void(Cycle)>;

  /// `iommu` may be null (no translation).
  DmaEngine(DmaConfig cfg, MemorySystem& mem, Iommu* iommu, EventQueue& eq);

  /// Queues a transfer at eq.now(). `on_done` runs at its completion time.
  void submit(const DmaTransfer& t, OnDone on_done = {});

  /// Blocking wrapper: submits at `now`, drains the queue, returns the
  /// completion time.
  Cycle execute_transfer(const DmaTransfer& t, Cycle now);

  bool idle() const { return !active_ && queue_.empty(); }
  std::span<std::uint8_t> tcdm() { return tcdm_; }
  std::span<const std::uint8_t> tcdm() const { return tcdm_; }

  const DmaConfig& config() const { return cfg_; }
  const DmaStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }
  void set_keep_records(bool on) { keep_records_ = on; }

 private:
  struct Pending {
    DmaTransfer xfer;
    OnDone on_done;
    TransferRecord rec;
    std::vector<Burst> bursts;
    std::size_t next = 0;
    std::uint32_t moved = 0;
  };

  void start_next();
  void issue_burst();
  void move_data(Addr phys, Cycle issued);
  void burst_done();

  DmaConfig cfg_;
  MemorySystem& mem_;
  Iommu* iommu_;
  EventQueue& eq_;
  std::vector<std::uint8_t> tcdm_;
  std::deque<Pending> queue_;
  bool active_ = false;
  bool keep_records_ = true;
  DmaStats stats_;
};

/// Cycles the cores spent waiting on DMA: total - compute, clamped at 0.
inline Cycle dma_idle_wait_accounting(Cycle total, Cycle compute) {
  return total > compute ? total - compute : 0;
}

}  // namespace svasim
