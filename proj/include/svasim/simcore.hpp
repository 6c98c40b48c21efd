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
#include <queue>
#include <utility>
#include <vector>

namespace svasim {

/// Host-domain clock cycles. All timed components share this time base.
using Cycle = std::uint64_t;

using EventId = std::uint64_t;

/// "Never" sentinel for periods and deadlines.
inline constexpr Cycle kNever = ~Cycle{0};

/// Deterministic discrete-event queue. Events are ordered by (due, seq);
/// seq is the insertion counter, so same-time events fire in the order
/// they were scheduled.
class EventQueue {
 public:
  using Action = std::function<void()>;

  /// Schedules `action` at absolute time `at`. Throws std::logic_error if
  /// `at` lies in the past.
  EventId schedule(Cycle at, Action action);

  /// Schedules `action` `delay` cycles from now.
  EventId schedule_in(Cycle delay, Action action) { return schedule(now_ + delay, std::move(action)); }

  /// Fires events until the queue is empty and returns the time of the last
  /// fired event (or the current time if nothing fired).
  Cycle run_until_idle();

  /// Fires the next event. Returns false if the queue was empty.
  bool step();

  Cycle now() const { return now_; }
  std::size_t pending() const { return heap_.size(); }
  std::uint64_t fired() const { return fired_; }

  /// Running FNV-1a digest over the fired (due, seq) sequence.
  std::uint64_t trace_digest() const { return digest_; }

  void set_trace(bool on) { tracing_ = on; }
  const std::vector<std::pair<Cycle, std::uint64_t>>& trace() const { return trace_; }

 private:
  struct Entry {
    Cycle due;
    std::uint64_t seq;
    Action action;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      return a.due != b.due ? a.due > b.due : a.seq > b.seq;
    }
  };

  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  Cycle now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t fired_ = 0;
  std::uint64_t digest_ = 0xcbf29ce484222325ULL;
  bool tracing_ = false;
  std::vector<std::pair<Cycle, std::uint64_t>> trace_;
};

/// Host/cluster frequency pair. Cluster durations are converted to host
/// cycles with ceiling division on the exact rational host_hz/cluster_hz.
class ClockRatio {
 public:
  ClockRatio() : ClockRatio(50'000'000, 20'000'000) {}
  ClockRatio(std::uint64_t host_hz, std::uint64_t cluster_hz);

  Cycle cluster_to_host(std::uint64_t cluster_cycles) const;

  std::uint64_t host_hz() const { return host_hz_; }
  std::uint64_t cluster_hz() const { return cluster_hz_; }

 private:
  std::uint64_t host_hz_;
  std::uint64_t cluster_hz_;
  std::uint64_t num_;  // reduced host_hz / cluster_hz
  std::uint64_t den_;
};

}  // namespace svasim
