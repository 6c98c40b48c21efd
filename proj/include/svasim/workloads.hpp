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
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "svasim/cache.hpp"
#include "svasim/dma.hpp"
#include "svasim/iommu.hpp"
#include "svasim/pagetable.hpp"
#include "svasim/simcore.hpp"

namespace svasim {

inline constexpr std::uint32_t kElemBytes = 4;  // single precision

enum class KernelKind : std::uint8_t { Gemm, Gesummv, Heat3d, Axpy, Mergesort };

KernelKind parse_kernel(const std::string& name);
const char* to_string(KernelKind k);
/// Default problem size.
std::uint64_t default_size(KernelKind k);
/// Per-kernel tile parameter: gemm output-tile edge, gesummv row-segment
/// width, heat3d rows per block, axpy chunk, mergesort local-sort chunk.
std::uint64_t default_tile(KernelKind k);

struct KernelSpec {
  KernelKind kind = KernelKind::Gemm;
  std::uint64_t size = 0;  // 0 = default_size
  std::uint64_t tile = 0;  // 0 = default_tile
  double eta = 1.0;        // compute efficiency, (0, 1]

  std::uint64_t n() const { return size ? size : default_size(kind); }
  std::uint64_t t() const { return tile ? tile : default_tile(kind); }
};

struct BufferSpec {
  std::string name;
  std::uint64_t bytes = 0;
  bool input = false;  // initialised by the host and shipped to the device
};

struct TileXfer {
  DmaDir dir = DmaDir::In;
  unsigned buffer = 0;
  std::uint64_t offset = 0;
  std::uint32_t len = 0;
  std::uint32_t tcdm = 0;
};

struct Tile {
  std::vector<TileXfer> ins;
  std::vector<TileXfer> outs;
  std::uint64_t compute = 0;  // cluster cycles
};

/// Tile schedule for one kernel execution. Resident data lives at the
/// bottom of the TCDM, followed by two equally sized double-buffer slots.
struct KernelPlan {
  KernelSpec spec;
  std::vector<BufferSpec> buffers;
  std::vector<Tile> tiles;
  std::uint32_t resident_bytes = 0;
  std::uint32_t slot_bytes = 0;
  double host_flops = 0;  // for the single-core host baseline

  std::uint32_t tcdm_used() const { return resident_bytes + 2 * slot_bytes; }
  std::uint64_t bytes_in() const;
  std::uint64_t bytes_out() const;
  std::uint64_t compute_cycles() const;  // cluster domain
};

/// Builds the tile plan. Throws ConfigError if a tile does not fit double
/// buffered in `tcdm_bytes`, if the size/tile combination is not divisible,
/// or if eta is outside (0, 1].
KernelPlan make_plan(const KernelSpec& spec, std::uint32_t tcdm_bytes = 128 * 1024);

// -------------------------------------------------------------- platform

struct PlatformConfig {
  MemoryConfig mem;
  IommuConfig iommu;
  DmaConfig dma;
  ClockRatio clock;
  Addr ddt_page = 0x8000'1000;
  Addr pt_region = 0x8010'0000;
  Addr pt_region_size = Addr{4} << 20;
  Addr linux_pool = 0x8100'0000;  // host page pool for user buffers
  Addr linux_pool_size = Addr{256} << 20;
  Cycle host_cycles_per_flop = 2;

  void validate() const;
};

/// One isolated simulated SoC.
class Platform {
 public:
  explicit Platform(const PlatformConfig& cfg);

  const PlatformConfig& config() const { return cfg_; }

 private:
  PlatformConfig cfg_;

 public:
  EventQueue eq;
  MemorySystem mem;
  PageTableSet pt;
  Iommu iommu;
  DmaEngine dma;
};

/// Where each plan buffer lives: host (Linux-half) pages, device bus base,
/// and, for copies, the reserved-half destination.
struct BufferPlacement {
  std::vector<std::uint64_t> host_pages;  // physical page numbers
  Addr bus_base = 0;                      // address the DMA engine uses
  Addr reserved_base = 0;                 // 0 unless copied
  std::uint64_t bytes = 0;
};

/// Allocates `bytes` worth of distinct pages from the host pool in a seeded
/// random order (paged, not physically contiguous).
class PageAllocator {
 public:
  PageAllocator(Addr pool, Addr size, std::uint64_t seed);
  std::vector<std::uint64_t> allocate(std::uint64_t bytes);

 private:
  Addr pool_;
  std::uint64_t pages_;
  std::mt19937_64 rng_;
  std::vector<bool> used_;
};

/// Untimed contents initialisation through the host cached path semantics
/// (dirty lines end up in the LLC when it is on). Returns the timed
/// completion so the caller can start the measured phases afterwards.
Cycle host_fill(Platform& p, const std::vector<std::uint64_t>& pages, std::uint64_t bytes,
                std::uint64_t seed, Cycle now);

// -------------------------------------------------------------- host side

/// Copies `bytes` from host pages (cached reads, line by line) to a
/// physically contiguous reserved-half destination (uncached 8-byte stores).
Cycle host_copy(Platform& p, const std::vector<std::uint64_t>& src_pages, Addr dst, std::uint64_t bytes,
                Cycle now);

/// One mapping ioctl: fixed syscall overhead, then timed PTE stores.
MappingRecord host_map(Platform& p, std::uint64_t iova, const std::vector<std::uint64_t>& ppns,
                       Cycle ioctl_cycles, Cycle now);

struct FlushTimes {
  Cycle start = 0;
  Cycle flushed = 0;  // after D-cache + LLC flush
  Cycle mapped = 0;   // after the mapping ioctls
  Cycle done = 0;     // after the second D-cache flush
  std::uint64_t ptes_written = 0;
};

/// The pre-offload sequence: flush L1, flush LLC, map every buffer, flush
/// L1 again. `flush_first=false` swaps the order (map, then flush), which
/// is the wrong order and evicts the freshly written PTE lines.
FlushTimes flush_protocol(Platform& p, const std::vector<std::pair<std::uint64_t, std::vector<std::uint64_t>>>& maps,
                          Cycle ioctl_cycles, Cycle now, bool flush_first = true);

/// Single-core host execution: per-flop compute plus timed streaming of the
/// footprint through the D-cache/LLC path. Returns elapsed cycles.
Cycle run_host_kernel(Platform& p, const KernelPlan& plan, const std::vector<BufferPlacement>& where, Cycle now);

// ------------------------------------------------------------ interference

struct InterferenceSpec {
  bool enabled = false;
  Cycle period = 50;  // think time between a read's completion and the next
  std::uint64_t seed = 1;
};

/// Closed-loop host traffic generator: cacheable 8-byte reads to uniformly
/// random lines of the Linux half, one outstanding at a time.
class Interference {
 public:
  Interference(InterferenceSpec spec, Platform& p);
  void start(Cycle at);
  void stop() { running_ = false; }
  std::uint64_t reads() const { return reads_; }
  const std::vector<Addr>& history() const { return history_; }
  void set_keep_history(bool on) { keep_history_ = on; }

 private:
  void fire();

  InterferenceSpec spec_;
  Platform& p_;
  std::mt19937_64 rng_;
  bool running_ = false;
  bool keep_history_ = false;
  std::uint64_t reads_ = 0;
  std::vector<Addr> history_;
};

// ----------------------------------------------------------- device side

struct DeviceSegment {
  Cycle start = 0;
  Cycle end = 0;
  Cycle total = 0;
  Cycle compute = 0;   // host-domain cycles the cores were busy
  Cycle dma_wait = 0;  // total - compute
  Cycle dma_busy = 0;  // sum of transfer service spans (start..done)
  std::uint64_t bytes_in = 0;
  std::uint64_t bytes_out = 0;
  double pct_dma() const { return total ? 100.0 * double(dma_wait) / double(total) : 0.0; }
};

/// Runs the double-buffered tile pipeline once, starting at `start`. The
/// DMA program order is in(0), in(1), then after compute(i): out(i),
/// in(i+2). compute(i) waits for its inputs and for out(i-2) (slot reuse).
/// An active interference generator is stopped when the kernel finishes.
DeviceSegment run_device_kernel(Platform& p, const KernelPlan& plan, const std::vector<BufferPlacement>& where,
                                Cycle start, Interference* intf = nullptr);

std::uint64_t splitmix64(std::uint64_t x);
inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 0x9e3779b97f4a7c15ULL));
}

}  // namespace svasim
