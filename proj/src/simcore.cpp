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

#include "svasim/simcore.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "svasim/error.hpp"

namespace svasim {

EventId EventQueue::schedule(Cycle at, Action action) {
  if (at < now_)
    throw std::logic_error("event scheduled in the past: at=" + std::to_string(at) +
                           " now=" + std::to_string(now_));
  const std::uint64_t seq = next_seq_++;
  heap_.push(Entry{at, seq, std::move(action)});
  return seq;
}

bool EventQueue::step() {
  if (heap_.empty()) return false;
  // priority_queue::top is const; the action is moved out via a copy of the
  // entry so the heap can be popped before the action runs (actions may
  // schedule further events).
  Entry e = std::move(const_cast<Entry&>(heap_.top()));
  heap_.pop();
  now_ = e.due;
  ++fired_;
  for (std::uint64_t v : {e.due, e.seq}) {
    for (int i = 0; i < 8; ++i) {
      digest_ ^= (v >> (8 * i)) & 0xff;
      digest_ *= 0x100000001b3ULL;
    }
  }
  if (tracing_) trace_.emplace_back(e.due, e.seq);
  e.action();
  return true;
}

Cycle EventQueue::run_until_idle() {
  while (step()) {
  }
  return now_;
}

ClockRatio::ClockRatio(std::uint64_t host_hz, std::uint64_t cluster_hz)
    : host_hz_(host_hz), cluster_hz_(cluster_hz) {
  if (cluster_hz == 0 || host_hz < cluster_hz)
    throw ConfigError("clock ratio requires host_hz >= cluster_hz > 0");
  const std::uint64_t g = std::gcd(host_hz, cluster_hz);
  num_ = host_hz / g;
  den_ = cluster_hz / g;
}

Cycle ClockRatio::cluster_to_host(std::uint64_t cluster_cycles) const {
  return (cluster_cycles * num_ + den_ - 1) / den_;
}

}  // namespace svasim
