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

#include "svasim/workloads.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "svasim/error.hpp"

namespace svasim {

KernelKind parse_kernel(const std::string& name) {
  if (name == "gemm") return KernelKind::Gemm;
  if (name == "gesummv") return KernelKind::Gesummv;
  if (name == "heat3d") return KernelKind::Heat3d;
  if (name == "axpy") return KernelKind::Axpy;
  if (name == "mergesort") return KernelKind::Mergesort;
  throw ConfigError("unknown kernel '" + name + "'");
}

const char* to_string(KernelKind k) {
  switch (k) {
    case KernelKind::Gemm: return "gemm";
    case KernelKind::Gesummv: return "gesummv";
    case KernelKind::Heat3d: return "heat3d";
    case KernelKind::Axpy: return "axpy";
    case KernelKind::Mergesort: return "mergesort";
  }
  return "?";
}

std::uint64_t default_size(KernelKind k) {
  switch (k) {
    case KernelKind::Gemm: return 128;
    case KernelKind::Gesummv: return 512;
    case KernelKind::Heat3d: return 64;
    case KernelKind::Axpy: return 32768;
    case KernelKind::Mergesort: return 65536;
  }
  return 0;
}

std::uint64_t default_tile(KernelKind k) {
  switch (k) {
    case KernelKind::Gemm: return 32;
    case KernelKind::Gesummv: return 256;
    case KernelKind::Heat3d: return 4;
    case KernelKind::Axpy: return 8192;
    case KernelKind::Mergesort: return 8192;
  }
  return 0;
}

std::uint64_t KernelPlan::bytes_in() const {
  std::uint64_t n = 0;
  for (const auto& t : tiles)
    for (const auto& x : t.ins) n += x.len;
  return n;
}

std::uint64_t KernelPlan::bytes_out() const {
  std::uint64_t n = 0;
  for (const auto& t : tiles)
    for (const auto& x : t.outs) n += x.len;
  return n;
}

std::uint64_t KernelPlan::compute_cycles() const {
  std::uint64_t n = 0;
  for (const auto& t : tiles) n += t.compute;
  return n;
}

namespace {

constexpr std::uint64_t kMergeStep = 512;  // elements per merge refill (one 2 KiB burst)

std::uint64_t cycles(double c) { return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(c))); }

std::uint32_t u32(std::uint64_t v) {
  if (v > UINT32_MAX) throw ConfigError("transfer too large");
  return static_cast<std::uint32_t>(v);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void plan_gemm(KernelPlan& p) {
  const std::uint64_t n = p.spec.n(), t = p.spec.t();
  require(t > 0 && n % t == 0, "gemm: size must be a multiple of the tile edge");
  const std::uint64_t mat = n * n * kElemBytes, row = n * kElemBytes;
  p.buffers = {{"A", mat, true}, {"B", mat, true}, {"C", mat, false}};
  // B stays resident; A is streamed per row block, C per output tile.
  p.resident_bytes = u32(mat);
  const std::uint64_t a_panel = t * row;
  p.slot_bytes = u32(a_panel + t * t * kElemBytes);
  const std::uint64_t c = cycles(2.0 * double(t * t * n) / (16.0 * p.spec.eta));
  for (std::uint64_t i = 0; i < n / t; ++i)
    for (std::uint64_t j = 0; j < n / t; ++j) {
      Tile tile;
      const std::uint32_t slot = p.resident_bytes + u32(p.tiles.size() % 2) * p.slot_bytes;
      if (p.tiles.empty())
        for (std::uint64_t k = 0; k < n; ++k) tile.ins.push_back({DmaDir::In, 1, k * row, u32(row), u32(k * row)});
      if (j == 0)
        for (std::uint64_t r = 0; r < t; ++r)
          tile.ins.push_back({DmaDir::In, 0, (i * t + r) * row, u32(row), slot + u32(r * row)});
      for (std::uint64_t r = 0; r < t; ++r)
        tile.outs.push_back({DmaDir::Out, 2, ((i * t + r) * n + j * t) * kElemBytes, u32(t * kElemBytes),
                             slot + u32(a_panel + r * t * kElemBytes)});
      tile.compute = c;
      p.tiles.push_back(std::move(tile));
    }
  p.host_flops = 2.0 * double(n * n * n);
}

void plan_gesummv(KernelPlan& p) {
  const std::uint64_t n = p.spec.n(), w = p.spec.t();
  require(w > 0 && n % w == 0, "gesummv: size must be a multiple of the segment width");
  const std::uint64_t mat = n * n * kElemBytes, vec = n * kElemBytes, seg = w * kElemBytes;
  p.buffers = {{"A", mat, true}, {"B", mat, true}, {"x", vec, true}, {"y", vec, false}};
  // x and y stay resident; A and B stream as row segments.
  p.resident_bytes = u32(2 * vec);
  p.slot_bytes = u32(2 * seg);
  const std::uint64_t c = cycles(4.0 * double(w) / (16.0 * p.spec.eta));
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t s = 0; s < n / w; ++s) {
      Tile tile;
      const std::uint32_t slot = p.resident_bytes + u32(p.tiles.size() % 2) * p.slot_bytes;
      if (p.tiles.empty()) tile.ins.push_back({DmaDir::In, 2, 0, u32(vec), 0});
      const std::uint64_t off = (i * n + s * w) * kElemBytes;
      tile.ins.push_back({DmaDir::In, 0, off, u32(seg), slot});
      tile.ins.push_back({DmaDir::In, 1, off, u32(seg), slot + u32(seg)});
      tile.compute = c;
      p.tiles.push_back(std::move(tile));
    }
  p.tiles.back().outs.push_back({DmaDir::Out, 3, 0, u32(vec), u32(vec)});
  p.host_flops = 4.0 * double(n * n);
}

void plan_heat3d(KernelPlan& p) {
  const std::uint64_t n = p.spec.n(), rows = p.spec.t();
  require(rows > 0 && (n * n) % rows == 0, "heat3d: rows per block must divide size^2");
  const std::uint64_t vol = n * n * n * kElemBytes, blk = rows * n * kElemBytes;
  p.buffers = {{"A", vol, true}, {"B", vol, false}};
  // Rolling window: the two neighbouring planes stay resident, so every
  // input point crosses the bus once.
  p.resident_bytes = u32(2 * n * n * kElemBytes);
  p.slot_bytes = u32(2 * blk);
  const std::uint64_t c = cycles(10.0 * double(rows * n) / (16.0 * p.spec.eta));
  for (std::uint64_t b = 0; b < vol / blk; ++b) {
    Tile tile;
    const std::uint32_t slot = p.resident_bytes + u32(b % 2) * p.slot_bytes;
    tile.ins.push_back({DmaDir::In, 0, b * blk, u32(blk), slot});
    tile.outs.push_back({DmaDir::Out, 1, b * blk, u32(blk), slot + u32(blk)});
    tile.compute = c;
    p.tiles.push_back(std::move(tile));
  }
  p.host_flops = 10.0 * double(n * n * n);
}

void plan_axpy(KernelPlan& p) {
  const std::uint64_t n = p.spec.n(), chunk = std::min(p.spec.t(), n);
  const std::uint64_t vec = n * kElemBytes;
  p.buffers = {{"x", vec, true}, {"y", vec, true}};
  p.slot_bytes = u32(2 * chunk * kElemBytes);
  for (std::uint64_t e0 = 0; e0 < n; e0 += chunk) {
    const std::uint64_t e = std::min(chunk, n - e0);
    const std::uint32_t slot = u32((p.tiles.size() % 2) * p.slot_bytes);
    Tile tile;
    tile.ins.push_back({DmaDir::In, 0, e0 * kElemBytes, u32(e * kElemBytes), slot});
    tile.ins.push_back({DmaDir::In, 1, e0 * kElemBytes, u32(e * kElemBytes), slot + u32(chunk * kElemBytes)});
    tile.outs.push_back({DmaDir::Out, 1, e0 * kElemBytes, u32(e * kElemBytes), slot + u32(chunk * kElemBytes)});
    tile.compute = cycles(2.0 * double(e) / (16.0 * p.spec.eta));
    p.tiles.push_back(std::move(tile));
  }
  p.host_flops = 2.0 * double(n);
}

void plan_mergesort(KernelPlan& p) {
  const std::uint64_t n = p.spec.n(), chunk = std::min(p.spec.t(), n);
  require(chunk > 0 && n % chunk == 0 && std::has_single_bit(n / chunk),
          "mergesort: size/chunk must be a power of two");
  const std::uint64_t step = std::min(kMergeStep, chunk);
  require(chunk % step == 0, "mergesort: chunk must be a multiple of the merge step");
  const std::uint64_t vec = n * kElemBytes;
  p.buffers = {{"A", vec, true}, {"B", vec, false}};
  p.slot_bytes = u32(chunk * kElemBytes);
  const double c_sort = 0.25 / p.spec.eta;  // cluster cycles per element per merge level
  auto slot = [&] { return u32((p.tiles.size() % 2) * p.slot_bytes); };
  // Local sort of each chunk in the TCDM (A -> B).
  for (std::uint64_t c = 0; c < n / chunk; ++c) {
    Tile tile;
    const std::uint32_t s = slot();
    tile.ins.push_back({DmaDir::In, 0, c * chunk * kElemBytes, u32(chunk * kElemBytes), s});
    tile.outs.push_back({DmaDir::Out, 1, c * chunk * kElemBytes, u32(chunk * kElemBytes), s});
    tile.compute = cycles(c_sort * double(chunk) * std::log2(double(chunk)));
    p.tiles.push_back(std::move(tile));
  }
  // Pairwise merge passes, ping-ponging between B and A. Each step refills
  // `step` elements from one of the two runs and emits `step` results.
  unsigned src = 1, dst = 0;
  for (std::uint64_t run = chunk; run < n; run *= 2) {
    for (std::uint64_t base = 0; base < n; base += 2 * run)
      for (std::uint64_t s = 0; s < run / step; ++s)
        for (std::uint64_t h = 0; h < 2; ++h) {
          Tile tile;
          const std::uint32_t sl = slot();
          const std::uint64_t in = (base + h * run + s * step) * kElemBytes;
          const std::uint64_t out = (base + (2 * s + h) * step) * kElemBytes;
          tile.ins.push_back({DmaDir::In, src, in, u32(step * kElemBytes), sl});
          tile.outs.push_back({DmaDir::Out, dst, out, u32(step * kElemBytes), sl});
          tile.compute = cycles(c_sort * double(step));
          p.tiles.push_back(std::move(tile));
        }
    std::swap(src, dst);
  }
  p.host_flops = double(n) * std::log2(double(std::max<std::uint64_t>(n, 2)));
}

}  // namespace

KernelPlan make_plan(const KernelSpec& spec, std::uint32_t tcdm_bytes) {
  if (!(spec.eta > 0.0 && spec.eta <= 1.0)) throw ConfigError("eta must lie in (0, 1]");
  KernelPlan p;
  p.spec = spec;
  if (spec.n() == 0) {
    p.spec.size = 0;
    return p;  // degenerate: nothing to move or compute
  }
  switch (spec.kind) {
    case KernelKind::Gemm: plan_gemm(p); break;
    case KernelKind::Gesummv: plan_gesummv(p); break;
    case KernelKind::Heat3d: plan_heat3d(p); break;
    case KernelKind::Axpy: plan_axpy(p); break;
    case KernelKind::Mergesort: plan_mergesort(p); break;
  }
  if (p.tcdm_used() > tcdm_bytes)
    throw ConfigError(std::string(to_string(spec.kind)) + ": tile needs " + std::to_string(p.tcdm_used()) +
                      " B of TCDM double buffered, only " + std::to_string(tcdm_bytes) + " available");
  return p;
}

// -------------------------------------------------------------- platform

void PlatformConfig::validate() const {
  mem.map.validate();
  const AddressMap& m = mem.map;
  if (!m.in_linux_half(ddt_page) || !m.in_linux_half(pt_region) || !m.in_linux_half(linux_pool) ||
      !m.in_linux_half(linux_pool + linux_pool_size - 1))
    throw ConfigError("platform regions must lie in the Linux half");
  if (host_cycles_per_flop == 0) throw ConfigError("host.cycles_per_flop must be positive");
}

namespace {
PlatformConfig with_ddt(PlatformConfig c) {
  c.validate();
  c.iommu.ddt_base = c.ddt_page;
  return c;
}
}  // namespace

Platform::Platform(const PlatformConfig& cfg)
    : cfg_(with_ddt(cfg)),
      mem(cfg_.mem),
      pt(mem, cfg_.pt_region, cfg_.pt_region_size),
      iommu(cfg_.iommu, mem, eq),
      dma(cfg_.dma, mem, &iommu, eq) {}

PageAllocator::PageAllocator(Addr pool, Addr size, std::uint64_t seed)
    : pool_(pool), pages_(size / kPageSize), rng_(seed), used_(pages_, false) {}

std::vector<std::uint64_t> PageAllocator::allocate(std::uint64_t bytes) {
  const std::uint64_t count = (bytes + kPageSize - 1) / kPageSize;
  std::vector<std::uint64_t> out;
  out.reserve(count);
  std::uint64_t free_pages = std::count(used_.begin(), used_.end(), false);
  if (count > free_pages) throw SimFault("host page pool exhausted");
  while (out.size() < count) {
    const std::uint64_t i = rng_() % pages_;
    if (used_[i]) continue;
    used_[i] = true;
    out.push_back((pool_ >> kPageShift) + i);
  }
  return out;
}

Cycle host_fill(Platform& p, const std::vector<std::uint64_t>& pages, std::uint64_t bytes, std::uint64_t seed,
                Cycle now) {
  std::mt19937_64 rng(seed);
  std::array<std::uint8_t, 64> line{};
  std::uint64_t left = bytes;
  for (std::uint64_t ppn : pages) {
    const Addr base = ppn << kPageShift;
    for (Addr off = 0; off < kPageSize && left > 0; off += line.size()) {
      for (std::size_t i = 0; i < line.size(); i += 8) {
        const std::uint64_t v = rng();
        for (int b = 0; b < 8; ++b) line[i + b] = static_cast<std::uint8_t>(v >> (8 * b));
      }
      const std::size_t n = std::min<std::uint64_t>(line.size(), left);
      now = p.mem.host_write(base + off, std::span<const std::uint8_t>(line.data(), n), now);
      left -= n;
    }
  }
  return now;
}

// -------------------------------------------------------------- host side

Cycle host_copy(Platform& p, const std::vector<std::uint64_t>& src_pages, Addr dst, std::uint64_t bytes, Cycle now) {
  if (bytes == 0) return now;
  if (!p.mem.map().in_reserved_half(dst) || !p.mem.map().in_reserved_half(dst + bytes - 1))
    throw ConfigError("copy destination must lie in the reserved half");
  std::array<std::uint8_t, 8> word{};
  for (std::uint64_t off = 0; off < bytes; off += 8) {
    const Addr src = (src_pages.at(off / kPageSize) << kPageShift) + page_offset(off);
    const std::size_t n = std::min<std::uint64_t>(8, bytes - off);
    std::span<std::uint8_t> w(word.data(), n);
    now = p.mem.host_read(src, w, now);
    now = p.mem.host_write(dst + off, w, now);
  }
  return now;
}

MappingRecord host_map(Platform& p, std::uint64_t iova, const std::vector<std::uint64_t>& ppns, Cycle ioctl_cycles,
                       Cycle now) {
  MappingRecord rec = p.pt.map_pages(iova, ppns, now + ioctl_cycles);
  rec.start = now;
  return rec;
}

FlushTimes flush_protocol(Platform& p, const std::vector<std::pair<std::uint64_t, std::vector<std::uint64_t>>>& maps,
                          Cycle ioctl_cycles, Cycle now, bool flush_first) {
  FlushTimes f;
  f.start = now;
  auto flush = [&](Cycle t) { return p.mem.flush_llc(p.mem.flush_dcache(t)); };
  auto map_all = [&](Cycle t) {
    for (const auto& [iova, ppns] : maps) {
      const MappingRecord r = host_map(p, iova, ppns, ioctl_cycles, t);
      f.ptes_written += r.ptes_written;
      t = r.done;
    }
    return t;
  };
  if (flush_first) {
    f.flushed = flush(now);
    f.mapped = map_all(f.flushed);
  } else {
    f.mapped = map_all(now);
    f.flushed = flush(f.mapped);
  }
  f.done = p.mem.flush_dcache(std::max(f.flushed, f.mapped));
  return f;
}

Cycle run_host_kernel(Platform& p, const KernelPlan& plan, const std::vector<BufferPlacement>& where, Cycle now) {
  const Cycle start = now;
  std::array<std::uint8_t, 8> word{};
  for (std::size_t b = 0; b < plan.buffers.size(); ++b) {
    const BufferPlacement& w = where.at(b);
    for (std::uint64_t off = 0; off < plan.buffers[b].bytes; off += 8) {
      const Addr a = (w.host_pages.at(off / kPageSize) << kPageShift) + page_offset(off);
      if (plan.buffers[b].input)
        now = p.mem.host_read(a, word, now);
      else
        now = p.mem.host_write(a, word, now);
    }
  }
  // Outputs that are also inputs (in-place kernels) are written back too.
  if (plan.spec.kind == KernelKind::Axpy && !plan.buffers.empty()) {
    const BufferPlacement& y = where.at(1);
    for (std::uint64_t off = 0; off < plan.buffers[1].bytes; off += 8)
      now = p.mem.host_write((y.host_pages.at(off / kPageSize) << kPageShift) + page_offset(off), word, now);
  }
  now += static_cast<Cycle>(std::ceil(plan.host_flops)) * p.config().host_cycles_per_flop;
  return now - start;
}

// ------------------------------------------------------------ interference

Interference::Interference(InterferenceSpec spec, Platform& p) : spec_(spec), p_(p), rng_(spec.seed) {}

void Interference::start(Cycle at) {
  if (!spec_.enabled || spec_.period == kNever) return;
  running_ = true;
  p_.eq.schedule(at + spec_.period, [this] { fire(); });
}

void Interference::fire() {
  if (!running_) return;
  const AddressMap& m = p_.mem.map();
  const std::uint64_t lines = (m.linux_end() - m.linux_begin()) / 64;
  const Addr a = m.linux_begin() + (rng_() % lines) * 64;
  if (keep_history_) history_.push_back(a);
  std::array<std::uint8_t, 8> b{};
  const Cycle c = p_.mem.host_read(a, b, p_.eq.now());
  ++reads_;
  if (c > kNever - spec_.period) return;
  p_.eq.schedule(c + spec_.period, [this] { fire(); });
}

// ----------------------------------------------------------- device side

DeviceSegment run_device_kernel(Platform& p, const KernelPlan& plan, const std::vector<BufferPlacement>& where,
                                Cycle start, Interference* intf) {
  struct State {
    std::vector<unsigned> ins_left, outs_left;
    std::size_t next = 0;
    bool computing = false;
    Cycle compute = 0;
    Cycle last = 0;
    std::size_t pending_dma = 0;
    bool finished = false;
  };
  const std::size_t n = plan.tiles.size();
  auto st = std::make_shared<State>();
  st->ins_left.resize(n);
  st->outs_left.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    st->ins_left[i] = static_cast<unsigned>(plan.tiles[i].ins.size());
    st->outs_left[i] = static_cast<unsigned>(plan.tiles[i].outs.size());
  }
  const DmaStats before = p.dma.stats();
  const std::size_t rec0 = before.records.size();

  DeviceSegment seg;
  seg.start = std::max(start, p.eq.now());
  st->last = seg.start;

  std::function<void()> try_compute;
  auto check_done = [&, st] {
    if (!st->finished && st->next == n && !st->computing && st->pending_dma == 0) {
      st->finished = true;
      if (intf) intf->stop();
    }
  };
  auto submit = [&, st](const TileXfer& x, std::function<void()> then) {
    const BufferPlacement& w = where.at(x.buffer);
    ++st->pending_dma;
    p.dma.submit({x.dir, w.bus_base + x.offset, x.tcdm, x.len}, [&, st, then](Cycle c) {
      --st->pending_dma;
      st->last = std::max(st->last, c);
      then();
      check_done();
    });
  };
  auto submit_ins = [&, st](std::size_t i) {
    for (const auto& x : plan.tiles[i].ins)
      submit(x, [&, st, i] {
        --st->ins_left[i];
        try_compute();
      });
  };
  try_compute = [&, st] {
    if (st->computing || st->next >= n) return;
    const std::size_t i = st->next;
    if (st->ins_left[i] != 0 || (i >= 2 && st->outs_left[i - 2] != 0)) return;
    st->computing = true;
    const Cycle c = p.config().clock.cluster_to_host(plan.tiles[i].compute);
    st->compute += c;
    p.eq.schedule_in(c, [&, st, i] {
      st->computing = false;
      st->last = std::max(st->last, p.eq.now());
      ++st->next;
      for (const auto& x : plan.tiles[i].outs)
        submit(x, [&, st, i] {
          --st->outs_left[i];
          try_compute();
        });
      if (i + 2 < n) submit_ins(i + 2);
      try_compute();
      check_done();
    });
  };

  p.eq.schedule(seg.start, [&, st] {
    if (intf) intf->start(p.eq.now());
    for (std::size_t i = 0; i < std::min<std::size_t>(2, n); ++i) submit_ins(i);
    try_compute();
    check_done();
  });
  while (!st->finished && p.eq.step()) {
  }
  if (!st->finished) throw std::logic_error("device pipeline stalled");
  p.eq.run_until_idle();  // drain the stopped interference generator

  seg.end = st->last;
  seg.total = seg.end - seg.start;
  seg.compute = st->compute;
  seg.dma_wait = dma_idle_wait_accounting(seg.total, seg.compute);
  const DmaStats& after = p.dma.stats();
  seg.bytes_in = after.bytes_in - before.bytes_in;
  seg.bytes_out = after.bytes_out - before.bytes_out;
  for (std::size_t r = rec0; r < after.records.size(); ++r) seg.dma_busy += after.records[r].done - after.records[r].start;
  return seg;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133cb111ULL;
  return x ^ (x >> 31);
}

}  // namespace svasim
