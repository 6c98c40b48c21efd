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

#include "svasim/iommu.hpp"

#include <algorithm>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "svasim/pagetable.hpp"

namespace svasim {

void IommuConfig::validate() const {
  if (iotlb_entries == 0) throw ConfigError("iommu.iotlb_entries must be positive");
}

TranslationFault::TranslationFault(std::uint64_t iova, int level)
    : SimFault("translation fault at IOVA " + hex(iova) + " (level " + std::to_string(level) + ")"),
      iova_(iova),
      level_(level) {}

double IommuStats::ptw_mean() const {
  if (samples.empty()) return 0.0;
  const double sum = std::accumulate(samples.begin(), samples.end(), 0.0,
                                     [](double a, const PtwSample& s) { return a + double(s.latency()); });
  return sum / double(samples.size());
}

Cycle IommuStats::ptw_max() const {
  Cycle m = 0;
  for (const auto& s : samples) m = std::max(m, s.latency());
  return m;
}

Cycle IommuStats::ptw_min() const {
  if (samples.empty()) return 0;
  Cycle m = samples.front().latency();
  for (const auto& s : samples) m = std::min(m, s.latency());
  return m;
}

Iommu::Iommu(IommuConfig cfg, MemorySystem& mem, EventQueue& eq)
    : cfg_((cfg.validate(), cfg)),
      mem_(mem),
      eq_(eq),
      iotlb_(1, cfg_.iotlb_entries, cfg_.iotlb_policy),
      iotlb_ppn_(cfg_.iotlb_entries, 0) {}

void Iommu::configure_ddt(std::uint32_t device_id, std::uint64_t root_ppn) {
  mem_.poke(cfg_.ddt_base + 8ull * device_id, [&] {
    std::array<std::uint8_t, 8> b{};
    const std::uint64_t raw = pte_encode(root_ppn, pte::V);
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(raw >> (8 * i));
    return b;
  }());
  ddtc_valid_ = true;
  ddtc_device_ = device_id;
  ddtc_root_ = root_ppn;
}

void Iommu::iotlb_invalidate_all() { iotlb_.invalidate_all(); }

std::vector<std::uint64_t> Iommu::iotlb_contents() const {
  std::vector<std::pair<unsigned, std::uint64_t>> v;
  for (unsigned w = 0; w < iotlb_.ways(); ++w)
    if (iotlb_.at(0, w).valid) v.emplace_back(iotlb_.at(0, w).rank, iotlb_.at(0, w).tag);
  std::sort(v.begin(), v.end());
  std::vector<std::uint64_t> out;
  for (auto& [r, vpn] : v) out.push_back(vpn);
  return out;
}

void Iommu::translate_async(std::uint32_t device_id, Addr iova, std::uint32_t len, Done done) {
  if (!cfg_.enabled) {
    done(iova, eq_.now());
    return;
  }
  if (len == 0 || page_base(iova) != page_base(iova + len - 1))
    throw std::logic_error("translation request crosses a page at " + hex(iova));
  if (busy_) throw std::logic_error("IOMMU already has a translation in flight");

  const std::uint64_t vpn = IoVirtAddr{iova}.vpn_full();
  const Cycle t = eq_.now() + cfg_.hit_latency;
  if (auto way = iotlb_.find(0, vpn)) {
    ++stats_.iotlb_hits;
    iotlb_.touch(0, *way);
    const Addr phys = (iotlb_ppn_[*way] << kPageShift) | page_offset(iova);
    busy_ = true;
    eq_.schedule(t, [this, phys, done = std::move(done)] {
      busy_ = false;
      done(phys, eq_.now());
    });
    return;
  }
  ++stats_.iotlb_misses;
  busy_ = true;
  auto w = std::make_shared<Walk>();
  w->device = device_id;
  w->iova = iova;
  w->done = std::move(done);
  if (ddtc_valid_ && ddtc_device_ == device_id) {
    ++stats_.ddtc_hits;
    w->table = ddtc_root_ << kPageShift;
    eq_.schedule(t, [this, w] { walk_step(w); });
  } else {
    ++stats_.ddtc_misses;
    eq_.schedule(t, [this, w] { fetch_ddt(w); });
  }
}

void Iommu::fetch_ddt(std::shared_ptr<Walk> w) {
  std::uint64_t raw = 0;
  const Cycle c = mem_.ptw_read64(cfg_.ddt_base + 8ull * w->device, raw, eq_.now());
  ++stats_.ddt_reads;
  const Pte e{raw};
  if (!e.valid()) fault(*w, 3);
  ddtc_valid_ = true;
  ddtc_device_ = w->device;
  ddtc_root_ = e.ppn();
  w->table = e.ppn() << kPageShift;
  eq_.schedule(c, [this, w] { walk_step(w); });
}

void Iommu::walk_step(std::shared_ptr<Walk> w) {
  const Cycle now = eq_.now();
  if (w->level == 2) w->sample.start = now;
  std::uint64_t raw = 0;
  const Cycle c = mem_.ptw_read64(w->table + 8 * IoVirtAddr{w->iova}.vpn(w->level), raw, now);
  ++w->sample.memory_reads;
  ++stats_.ptw_reads;
  const Pte e{raw};
  if (!e.valid() || (e.leaf() != (w->level == 0))) fault(*w, w->level);
  if (w->level == 0) {
    w->sample.end = c;
    eq_.schedule(c, [this, w, ppn = e.ppn()] { finish(w, ppn); });
    return;
  }
  w->table = e.ppn() << kPageShift;
  --w->level;
  eq_.schedule(c, [this, w] { walk_step(w); });
}

void Iommu::finish(std::shared_ptr<Walk> w, std::uint64_t ppn) {
  const std::uint64_t vpn = IoVirtAddr{w->iova}.vpn_full();
  const unsigned way = iotlb_.victim(0);
  iotlb_.install(0, way, vpn);
  iotlb_ppn_[way] = ppn;
  stats_.samples.push_back(w->sample);
  busy_ = false;
  w->done((ppn << kPageShift) | page_offset(w->iova), eq_.now());
}

void Iommu::fault(const Walk& w, int level) {
  ++stats_.faults;
  busy_ = false;
  throw TranslationFault(w.iova, level);
}

std::pair<Addr, Cycle> Iommu::translate(std::uint32_t device_id, Addr iova, std::uint32_t len, Cycle now) {
  std::pair<Addr, Cycle> out{0, 0};
  bool fired = false;
  eq_.schedule(std::max(now, eq_.now()), [&] {
    translate_async(device_id, iova, len, [&](Addr phys, Cycle done) {
      out = {phys, done};
      fired = true;
    });
  });
  eq_.run_until_idle();
  if (!fired) throw std::logic_error("translation did not complete");
  return out;
}

}  // namespace svasim
