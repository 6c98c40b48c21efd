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

#include "svasim/cache.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <string>

#include "svasim/error.hpp"

namespace svasim {

namespace {
bool pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }
}  // namespace

// ---------------------------------------------------------------- TagArray

TagArray::TagArray(std::size_t sets, unsigned ways, ReplPolicy policy)
    : nsets_(sets), nways_(ways), policy_(policy), ways_(sets * ways) {
  if (sets == 0 || ways == 0) throw std::logic_error("empty tag array");
  for (std::size_t s = 0; s < sets; ++s)
    for (unsigned w = 0; w < ways; ++w) at(s, w).rank = w;
}

std::optional<unsigned> TagArray::find(std::size_t set, std::uint64_t tag) const {
  for (unsigned w = 0; w < nways_; ++w) {
    const Way& e = at(set, w);
    if (e.valid && e.tag == tag) return w;
  }
  return std::nullopt;
}

void TagArray::promote(std::size_t set, unsigned way) {
  const unsigned old = at(set, way).rank;
  for (unsigned w = 0; w < nways_; ++w) {
    Way& e = at(set, w);
    if (e.rank < old) ++e.rank;
  }
  at(set, way).rank = 0;
}

void TagArray::touch(std::size_t set, unsigned way) {
  if (policy_ == ReplPolicy::Lru) promote(set, way);
}

unsigned TagArray::victim(std::size_t set) const {
  // Prefer the lowest-numbered invalid way; otherwise the oldest rank.
  unsigned best = 0;
  for (unsigned w = 0; w < nways_; ++w) {
    if (!at(set, w).valid) return w;
    if (at(set, w).rank > at(set, best).rank) best = w;
  }
  return best;
}

void TagArray::install(std::size_t set, unsigned way, std::uint64_t tag) {
  Way& e = at(set, way);
  e.tag = tag;
  e.valid = true;
  e.dirty = false;
  promote(set, way);
}

void TagArray::invalidate(std::size_t set, unsigned way) {
  at(set, way).valid = false;
  at(set, way).dirty = false;
}

void TagArray::invalidate_all() {
  for (auto& w : ways_) {
    w.valid = false;
    w.dirty = false;
  }
}

// ------------------------------------------------------------- CacheConfig

void CacheConfig::validate(const char* what) const {
  const std::string w(what);
  if (!pow2(line) || line < 8) throw ConfigError(w + ".line must be a power of two >= 8");
  if (ways == 0) throw ConfigError(w + ".ways must be positive");
  if (capacity == 0 || capacity % (std::uint64_t{line} * ways) != 0 || !pow2(sets()))
    throw ConfigError(w + ".capacity must equal sets*ways*line with sets a power of two");
}

// --------------------------------------------------------------------- Llc

Llc::Llc(CacheConfig cfg, DramPort& dram, SimMemory& mem)
    : cfg_(cfg), dram_(dram), mem_(mem), tags_((cfg.validate("llc"), cfg.sets()), cfg.ways) {
  data_.assign(cfg_.capacity, 0);
}

Cycle Llc::writeback(std::size_t set, unsigned way, Source src, Cycle now) {
  const Addr base = line_addr(set, tags_.at(set, way).tag);
  mem_.write(base, {line_data(set, way), cfg_.line});
  MemTransaction wb{Kind::Write, base, cfg_.line, src, false};
  ++stats_.writebacks[static_cast<std::size_t>(src)];
  tags_.at(set, way).dirty = false;
  return dram_.access(wb, now);
}

Cycle Llc::access(MemTransaction& txn, std::span<std::uint8_t> data, Cycle now) {
  if (txn.source == Source::Dma)
    throw std::logic_error("DMA transaction presented to the LLC at " + hex(txn.addr));
  const Addr line_base = txn.addr & ~Addr{cfg_.line - 1};
  if (txn.len == 0 || txn.addr + txn.len > line_base + cfg_.line)
    throw std::logic_error("LLC request not contained in one line at " + hex(txn.addr));
  if (!data.empty() && data.size() != txn.len) throw std::logic_error("LLC data size mismatch");

  const auto src = static_cast<std::size_t>(txn.source);
  const std::size_t set = set_of(txn.addr);
  const std::uint64_t tag = tag_of(txn.addr);
  const Cycle h = cfg_.hit_latency;
  Cycle done = reserve(now, h) + h;

  unsigned way;
  if (auto hit = tags_.find(set, tag)) {
    way = *hit;
    ++stats_.hits[src];
    tags_.touch(set, way);
  } else {
    ++stats_.misses[src];
    way = tags_.victim(set);
    Cycle t = done;
    if (tags_.at(set, way).valid) {
      ++stats_.evictions[src];
      if (tags_.at(set, way).dirty) t = writeback(set, way, txn.source, t);
    }
    MemTransaction fill{Kind::Read, line_base, cfg_.line, txn.source, false};
    const Cycle filled = dram_.access(fill, t);
    const Cycle beats = dram_.service_time(cfg_.line) - dram_.config().access_latency;
    done = reserve(filled - std::min(beats, filled), beats + h) + beats + h;
    mem_.read(line_base, {line_data(set, way), cfg_.line});
    tags_.install(set, way, tag);
  }

  std::uint8_t* bytes = line_data(set, way) + (txn.addr - line_base);
  if (txn.kind == Kind::Write) {
    if (!data.empty()) std::memcpy(bytes, data.data(), txn.len);
    tags_.at(set, way).dirty = true;
  } else if (!data.empty()) {
    std::memcpy(data.data(), bytes, txn.len);
  }
  txn.issue_time = now;
  txn.complete_time = done;
  return done;
}

Cycle Llc::reserve(Cycle at, Cycle len) {
  // Forget intervals that ended before the caller's time; calls arrive in
  // event order, so nothing earlier can be asked for again.
  while (!busy_.empty() && busy_.begin()->second <= at) busy_.erase(busy_.begin());
  Cycle start = at;
  for (auto it = busy_.begin(); it != busy_.end() && it->first < start + len; ++it)
    if (it->second > start) start = it->second;
  if (len > 0) busy_.emplace(start, start + len);
  port_cycles_ += len;
  return start;
}

Cycle Llc::flush(Cycle now) {
  Cycle last = now;
  for (std::size_t s = 0; s < tags_.sets(); ++s)
    for (unsigned w = 0; w < tags_.ways(); ++w) {
      if (tags_.at(s, w).valid && tags_.at(s, w).dirty)
        last = std::max(last, writeback(s, w, Source::Host, now));
      tags_.invalidate(s, w);
    }
  return last;
}

bool Llc::peek(Addr addr, std::span<std::uint8_t> out) const {
  auto way = tags_.find(set_of(addr), tag_of(addr));
  if (!way) return false;
  const Addr off = addr % cfg_.line;
  if (off + out.size() > cfg_.line) throw std::logic_error("LLC peek crosses a line");
  std::memcpy(out.data(), line_data(set_of(addr), *way) + off, out.size());
  return true;
}

void Llc::patch(Addr addr, std::span<const std::uint8_t> bytes) {
  auto way = tags_.find(set_of(addr), tag_of(addr));
  if (!way) return;
  const Addr off = addr % cfg_.line;
  if (off + bytes.size() > cfg_.line) throw std::logic_error("LLC patch crosses a line");
  std::memcpy(line_data(set_of(addr), *way) + off, bytes.data(), bytes.size());
}

bool Llc::contains(Addr addr) const { return tags_.find(set_of(addr), tag_of(addr)).has_value(); }

bool Llc::dirty(Addr addr) const {
  auto way = tags_.find(set_of(addr), tag_of(addr));
  return way && tags_.at(set_of(addr), *way).dirty;
}

std::size_t Llc::resident_lines() const {
  std::size_t n = 0;
  for (std::size_t s = 0; s < tags_.sets(); ++s)
    for (unsigned w = 0; w < tags_.ways(); ++w) n += tags_.at(s, w).valid;
  return n;
}

// ------------------------------------------------------------------ DCache

DCache::DCache(CacheConfig cfg) : cfg_(cfg), tags_((cfg.validate("dcache"), cfg.sets()), cfg.ways) {}

bool DCache::read_lookup(Addr addr) {
  const std::size_t set = (addr / cfg_.line) & (tags_.sets() - 1);
  const std::uint64_t tag = addr / cfg_.line / tags_.sets();
  if (auto w = tags_.find(set, tag)) {
    tags_.touch(set, *w);
    ++hits_;
    return true;
  }
  ++misses_;
  tags_.install(set, tags_.victim(set), tag);
  return false;
}

bool DCache::write_lookup(Addr addr) {
  const std::size_t set = (addr / cfg_.line) & (tags_.sets() - 1);
  const std::uint64_t tag = addr / cfg_.line / tags_.sets();
  if (auto w = tags_.find(set, tag)) {
    tags_.touch(set, *w);
    ++hits_;
    return true;
  }
  ++misses_;
  return false;
}

std::size_t DCache::invalidate_all() {
  std::size_t n = 0;
  for (std::size_t s = 0; s < tags_.sets(); ++s)
    for (unsigned w = 0; w < tags_.ways(); ++w) n += tags_.at(s, w).valid;
  tags_.invalidate_all();
  return n;
}

// ------------------------------------------------------------ MemorySystem

const char* to_string(Route r) {
  switch (r) {
    case Route::DCacheLlc: return "dcache>llc>dram";
    case Route::DCacheDram: return "dcache>dram";
    case Route::Llc: return "llc>dram";
    case Route::Dram: return "dram";
    case Route::Spm: return "spm";
  }
  return "?";
}

MemorySystem::MemorySystem(MemoryConfig cfg)
    : cfg_((cfg.map.validate(), cfg)),
      mem_(cfg_.map),
      dram_(cfg_.dram),
      spm_(cfg_.spm_latency),
      llc_(cfg_.llc, dram_, mem_),
      dcache_(cfg_.dcache) {
  if (cfg_.dcache.line != cfg_.llc.line) throw ConfigError("dcache and llc line sizes must match");
}

Route MemorySystem::route(Addr addr, Source source) const {
  const AddressMap& m = cfg_.map;
  if (m.in_spm(addr)) return Route::Spm;
  if (!m.in_dram(addr) && !m.in_bypass_alias(addr))
    throw MemoryFault(addr, "no route for address");
  if (source == Source::Dma || m.in_bypass_alias(addr) || m.in_reserved_half(addr)) return Route::Dram;
  if (source == Source::Ptw) return cfg_.llc.enabled ? Route::Llc : Route::Dram;
  return cfg_.llc.enabled ? Route::DCacheLlc : Route::DCacheDram;
}

bool MemorySystem::cacheable(Addr addr, Source source) const {
  const Route r = route(addr, source);
  return r == Route::DCacheLlc || r == Route::DCacheDram || r == Route::Llc;
}

Cycle MemorySystem::direct(Kind kind, Addr addr, std::span<std::uint8_t> data, Source src, Cycle now) {
  MemTransaction txn{kind, addr, static_cast<std::uint32_t>(data.size()), src, false};
  const Addr phys = cfg_.map.canonical(addr);
  Cycle done;
  if (cfg_.map.in_spm(addr)) {
    done = spm_.access(txn, now);
  } else {
    txn.addr = phys;
    done = dram_.access(txn, now);
  }
  if (kind == Kind::Read)
    mem_.read(phys, data);
  else
    mem_.write(phys, data);
  return done;
}

Cycle MemorySystem::line_access(Kind kind, Addr addr, std::span<std::uint8_t> data, Source src, Cycle now) {
  const Route r = route(addr, src);
  const Addr line = cfg_.dcache.line;
  const Addr base = addr & ~(line - 1);
  const auto len = static_cast<std::uint32_t>(data.size());
  switch (r) {
    case Route::Spm:
    case Route::Dram:
      return direct(kind, addr, data, src, now);
    case Route::Llc: {
      MemTransaction txn{kind, addr, len, src, true};
      return llc_.access(txn, data, now);
    }
    case Route::DCacheLlc:
    case Route::DCacheDram: {
      const bool via_llc = r == Route::DCacheLlc;
      if (kind == Kind::Read) {
        const bool hit = dcache_.read_lookup(addr);
        Cycle done = now + cfg_.dcache.hit_latency;
        if (!hit) {
          if (via_llc) {
            MemTransaction fill{Kind::Read, base, static_cast<std::uint32_t>(line), src, true};
            done = llc_.access(fill, {}, done);
          } else {
            MemTransaction fill{Kind::Read, base, static_cast<std::uint32_t>(line), src, true};
            done = dram_.access(fill, done);
          }
        }
        peek(addr, data);
        return done;
      }
      dcache_.write_lookup(addr);
      const Cycle t = now + cfg_.dcache.hit_latency;
      if (via_llc) {
        MemTransaction txn{Kind::Write, addr, len, src, true};
        return llc_.access(txn, data, t);
      }
      MemTransaction txn{Kind::Write, addr, len, src, true};
      mem_.write(addr, data);
      return dram_.access(txn, t);
    }
  }
  return now;
}

Cycle MemorySystem::host_read(Addr addr, std::span<std::uint8_t> out, Cycle now) {
  const Addr line = cfg_.dcache.line;
  std::size_t done = 0;
  while (done < out.size()) {
    const Addr a = addr + done;
    const std::size_t n = std::min<std::size_t>(line - a % line, out.size() - done);
    now = line_access(Kind::Read, a, out.subspan(done, n), Source::Host, now);
    done += n;
  }
  return now;
}

Cycle MemorySystem::host_write(Addr addr, std::span<const std::uint8_t> bytes, Cycle now) {
  const Addr line = cfg_.dcache.line;
  std::size_t done = 0;
  while (done < bytes.size()) {
    const Addr a = addr + done;
    const std::size_t n = std::min<std::size_t>(line - a % line, bytes.size() - done);
    // line_access only reads from `data` on writes.
    auto chunk = bytes.subspan(done, n);
    now = line_access(Kind::Write, a, {const_cast<std::uint8_t*>(chunk.data()), n}, Source::Host, now);
    done += n;
  }
  return now;
}

namespace {
std::array<std::uint8_t, 8> le_bytes(std::uint64_t v) {
  std::array<std::uint8_t, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return b;
}
std::uint64_t from_le(const std::array<std::uint8_t, 8>& b) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}
}  // namespace

Cycle MemorySystem::host_read64(Addr addr, std::uint64_t& value, Cycle now) {
  std::array<std::uint8_t, 8> b{};
  now = host_read(addr, b, now);
  value = from_le(b);
  return now;
}

Cycle MemorySystem::host_write64(Addr addr, std::uint64_t value, Cycle now) {
  auto b = le_bytes(value);
  return host_write(addr, b, now);
}

Cycle MemorySystem::ptw_read64(Addr addr, std::uint64_t& value, Cycle now) {
  if (addr % 8 != 0) throw MemoryFault(addr, "misaligned page-table read");
  std::array<std::uint8_t, 8> b{};
  now = line_access(Kind::Read, addr, b, Source::Ptw, now);
  value = from_le(b);
  return now;
}

Cycle MemorySystem::dma_read(Addr addr, std::span<std::uint8_t> out, Cycle now) {
  return direct(Kind::Read, addr, out, Source::Dma, now);
}

Cycle MemorySystem::dma_write(Addr addr, std::span<const std::uint8_t> bytes, Cycle now) {
  return direct(Kind::Write, addr, {const_cast<std::uint8_t*>(bytes.data()), bytes.size()}, Source::Dma, now);
}

Cycle MemorySystem::flush_llc(Cycle now) {
  if (!cfg_.llc.enabled) return now;
  return llc_.flush(now);
}

Cycle MemorySystem::flush_dcache(Cycle now) {
  dcache_.invalidate_all();
  return now + dcache_.config().capacity / dcache_.config().line;
}

void MemorySystem::peek(Addr addr, std::span<std::uint8_t> out) const {
  mem_.read(addr, out);
  if (!cfg_.llc.enabled || !cfg_.map.in_dram(addr)) return;
  const Addr line = cfg_.llc.line;
  std::size_t done = 0;
  while (done < out.size()) {
    const Addr a = addr + done;
    const std::size_t n = std::min<std::size_t>(line - a % line, out.size() - done);
    llc_.peek(a, out.subspan(done, n));
    done += n;
  }
}

std::uint64_t MemorySystem::peek64(Addr addr) const {
  std::array<std::uint8_t, 8> b{};
  peek(addr, b);
  return from_le(b);
}

void MemorySystem::poke(Addr addr, std::span<const std::uint8_t> bytes) {
  mem_.write(addr, bytes);
  if (!cfg_.llc.enabled || !cfg_.map.in_dram(addr)) return;
  const Addr line = cfg_.llc.line;
  std::size_t done = 0;
  while (done < bytes.size()) {
    const Addr a = addr + done;
    const std::size_t n = std::min<std::size_t>(line - a % line, bytes.size() - done);
    llc_.patch(a, bytes.subspan(done, n));
    done += n;
  }
}

}  // namespace svasim
