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

#include "svasim/dma.hpp"

#include <algorithm>

#include "svasim/error.hpp"

namespace svasim {

std::vector<Burst> split_bursts(Addr addr, std::uint64_t len, std::uint32_t max_burst_bytes) {
  if (len == 0) throw EmptyTransfer();
  if (max_burst_bytes == 0) throw std::invalid_argument("max_burst_bytes must be positive");
  std::vector<Burst> out;
  out.reserve(len / max_burst_bytes + 2);
  while (len > 0) {
    const std::uint64_t n = std::min<std::uint64_t>({len, kPageSize - page_offset(addr), max_burst_bytes});
    out.push_back({addr, static_cast<std::uint32_t>(n)});
    addr += n;
    len -= n;
  }
  return out;
}

void DmaConfig::validate() const {
  if (max_burst_bytes == 0 || max_burst_bytes > kPageSize)
    throw ConfigError("dma.max_burst_bytes must be in [1, 4096]");
  if (tcdm_bytes == 0) throw ConfigError("TCDM size must be positive");
}

DmaEngine::DmaEngine(DmaConfig cfg, MemorySystem& mem, Iommu* iommu, EventQueue& eq)
    : cfg_((cfg.validate(), cfg)), mem_(mem), iommu_(iommu), eq_(eq), tcdm_(cfg_.tcdm_bytes, 0) {}

void DmaEngine::submit(const DmaTransfer& t, OnDone on_done) {
  if (t.len == 0) throw EmptyTransfer();
  if (std::uint64_t{t.tcdm_addr} + t.len > tcdm_.size())
    throw std::out_of_range("DMA transfer exceeds the TCDM window");
  Pending p;
  p.xfer = t;
  p.on_done = std::move(on_done);
  p.rec.dir = t.dir;
  p.rec.bus_addr = t.bus_addr;
  p.rec.len = t.len;
  p.rec.submit = eq_.now();
  p.bursts = split_bursts(t.bus_addr, t.len, cfg_.max_burst_bytes);
  p.rec.bursts = static_cast<std::uint32_t>(p.bursts.size());
  queue_.push_back(std::move(p));
  if (!active_) start_next();
}

void DmaEngine::start_next() {
  if (queue_.empty()) {
    active_ = false;
    return;
  }
  active_ = true;
  queue_.front().rec.start = eq_.now();
  issue_burst();
}

void DmaEngine::issue_burst() {
  Pending& p = queue_.front();
  const Burst b = p.bursts[p.next];
  const Cycle issued = eq_.now();
  if (iommu_ && iommu_->config().enabled) {
    iommu_->translate_async(cfg_.device_id, b.addr, b.len,
                            [this, issued](Addr phys, Cycle) { move_data(phys, issued); });
  } else {
    move_data(b.addr, issued);
  }
}

void DmaEngine::move_data(Addr phys, Cycle issued) {
  Pending& p = queue_.front();
  const Burst b = p.bursts[p.next];
  const Cycle now = eq_.now();
  p.rec.translate_stall += now - issued;
  auto window = std::span<std::uint8_t>(tcdm_).subspan(p.xfer.tcdm_addr + p.moved, b.len);
  const Cycle c = p.xfer.dir == DmaDir::In ? mem_.dma_read(phys, window, now) : mem_.dma_write(phys, window, now);
  p.moved += b.len;
  ++p.next;
  eq_.schedule(c, [this] { burst_done(); });
}

void DmaEngine::burst_done() {
  Pending& p = queue_.front();
  if (p.next < p.bursts.size()) {
    issue_burst();
    return;
  }
  Pending done = std::move(p);
  queue_.pop_front();
  done.rec.done = eq_.now();
  (done.xfer.dir == DmaDir::In ? stats_.bytes_in : stats_.bytes_out) += done.xfer.len;
  stats_.bursts += done.bursts.size();
  ++stats_.transfers;
  stats_.translate_stall += done.rec.translate_stall;
  if (keep_records_) stats_.records.push_back(done.rec);
  start_next();
  if (done.on_done) done.on_done(done.rec.done);
}

Cycle DmaEngine::execute_transfer(const DmaTransfer& t, Cycle now) {
  Cycle out = 0;
  eq_.schedule(std::max(now, eq_.now()), [&] { submit(t, [&](Cycle c) { out = c; }); });
  eq_.run_until_idle();
  return out;
}

}  // namespace svasim
