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

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "svasim/error.hpp"
#include "svasim/harness.hpp"

using namespace svasim;

namespace {

ScenarioConfig small(KernelKind k, Mode m, Cycle lat = 200) {
  ScenarioConfig c;
  c.kernel.kind = k;
  if (k == KernelKind::Gemm) {
    c.kernel.size = 64;
    c.kernel.tile = 16;
  } else if (k == KernelKind::Axpy) {
    c.kernel.size = 4096;
    c.kernel.tile = 1024;
  } else if (k == KernelKind::Heat3d) {
    c.kernel.size = 32;
  } else if (k == KernelKind::Gesummv) {
    c.kernel.size = 256;
  } else {
    c.kernel.size = 16384;
  }
  c.mode = m;
  c.offload = default_offload(m);
  c.latency = lat;
  return c;
}

}  // namespace

TEST(Config, ParsesCommentsAndWhitespace) {
  const auto c = KeyValueConfig::parse("# top\n dram.latency_cycles = 600 \n\nllc.enabled=false # inline\n");
  EXPECT_EQ(c.get_u64("dram.latency_cycles", 0), 600u);
  EXPECT_FALSE(c.get_bool("llc.enabled", true));
  EXPECT_EQ(c.get_u64("llc.ways", 8), 8u);
}

TEST(Config, Errors) {
  EXPECT_THROW(KeyValueConfig::parse("dram.latncy_cycles = 1"), ConfigError);
  EXPECT_THROW(KeyValueConfig::parse("just text"), ConfigError);
  EXPECT_THROW(KeyValueConfig::load("/nonexistent/file.cfg"), ConfigError);
  const auto c = KeyValueConfig::parse("dram.latency_cycles = -3\nllc.enabled = maybe\ncalib.eta_gemm = x");
  EXPECT_THROW(c.get_u64("dram.latency_cycles", 0), ConfigError);
  EXPECT_THROW(c.get_bool("llc.enabled", true), ConfigError);
  EXPECT_THROW(c.get_double("calib.eta_gemm", 1), ConfigError);
  try {
    KeyValueConfig::parse("\n\nbogus = 1", "f.cfg");
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("f.cfg:3"), std::string::npos);
  }
}

TEST(Config, ListsAndNumbers) {
  EXPECT_EQ(split_list(" a, b ,,c "), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(parse_u64("0x10", "x"), 16u);
  EXPECT_DOUBLE_EQ(parse_double("0.25", "x"), 0.25);
  const auto c = KeyValueConfig::parse("sweep.latencies = 200,600");
  EXPECT_EQ(c.get_u64_list("sweep.latencies", {}), (std::vector<std::uint64_t>{200, 600}));
}

TEST(Config, DumpRoundTrips) {
  const auto c = KeyValueConfig::parse("llc.ways = 4\nsim.mode = iommu\n");
  const auto d = KeyValueConfig::parse(c.dump());
  EXPECT_EQ(c.entries(), d.entries());
}

TEST(Scenario, FromConfig) {
  const auto s = ScenarioConfig::from_config(KeyValueConfig::parse(
      "kernel.name = heat3d\nsim.mode = iommu-llc\ndram.latency_cycles = 1000\ncalib.eta_heat3d = 0.5\n"));
  EXPECT_EQ(s.kernel.kind, KernelKind::Heat3d);
  EXPECT_EQ(s.mode, Mode::IommuLlc);
  EXPECT_EQ(s.offload, Offload::ZeroCopy);
  EXPECT_EQ(s.latency, 1000u);
  EXPECT_DOUBLE_EQ(s.effective_kernel().eta, 0.5);
  const PlatformConfig p = s.effective_platform();
  EXPECT_TRUE(p.iommu.enabled);
  EXPECT_TRUE(p.mem.llc.enabled);
}

TEST(Scenario, ModeOffloadCombinations) {
  for (Mode m : {Mode::Baseline, Mode::Iommu, Mode::IommuLlc})
    for (Offload o : {Offload::HostOnly, Offload::Copy, Offload::ZeroCopy}) {
      ScenarioConfig c = small(KernelKind::Axpy, m);
      c.offload = o;
      const bool ok = o == Offload::HostOnly || (o == Offload::Copy) == (m == Mode::Baseline);
      if (ok)
        EXPECT_NO_THROW(c.validate());
      else
        EXPECT_THROW(c.validate(), ConfigError);
    }
  EXPECT_THROW(parse_mode("iommu+llc"), ConfigError);
  EXPECT_EQ(parse_offload("zero-copy"), Offload::ZeroCopy);
  EXPECT_STREQ(to_string(Mode::IommuLlc), "iommu-llc");
}

TEST(Report, GoldenCsvHeader) {
  EXPECT_EQ(csv_header(),
            "kernel,size,latency,mode,offload,seed,total_cycles,compute_cycles,dma_wait_cycles,pct_dma,"
            "copy_or_map_cycles,sync_cycles,iotlb_hits,iotlb_misses,ptw_mean,ptw_max,llc_hits,llc_misses");
  const RunReport r = run_scenario(small(KernelKind::Axpy, Mode::Iommu));
  const std::string row = r.csv_row();
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(csv_header().begin(), csv_header().end(), ','));
  EXPECT_EQ(row.rfind("axpy,4096,200,iommu,zero-copy,", 0), 0u);
  const auto j = r.to_json();
  EXPECT_EQ(j.at("schema_version").get<int>(), kSchemaVersion);
  EXPECT_EQ(j.at("config").at("kernel").get<std::string>(), "axpy");
}

TEST(Report, DeterministicAcrossRuns) {
  for (Mode m : {Mode::Baseline, Mode::Iommu, Mode::IommuLlc}) {
    ScenarioConfig c = small(KernelKind::Gemm, m, 600);
    c.interference.enabled = true;
    EXPECT_EQ(run_scenario(c).csv_row(), run_scenario(c).csv_row());
  }
}

TEST(Report, ModeSemantics) {
  const RunReport base = run_scenario(small(KernelKind::Gemm, Mode::Baseline, 1000));
  const RunReport io = run_scenario(small(KernelKind::Gemm, Mode::Iommu, 1000));
  const RunReport iollc = run_scenario(small(KernelKind::Gemm, Mode::IommuLlc, 1000));
  EXPECT_EQ(base.iotlb_hits + base.iotlb_misses, 0u);
  EXPECT_GT(io.iotlb_misses, 0u);
  EXPECT_EQ(io.llc_hits + io.llc_misses, 0u);
  EXPECT_GT(iollc.llc_ptw_hits + iollc.llc_ptw_misses, 0u);
  EXPECT_GE(io.total_cycles(), base.total_cycles());
  EXPECT_LE(iollc.total_cycles(), io.total_cycles());
  for (const auto* r : {&base, &io, &iollc}) {
    EXPECT_EQ(r->llc_dma_lookups, 0u);
    EXPECT_EQ(r->device.total, r->device.compute + r->device.dma_wait);
    EXPECT_EQ(r->end_to_end(), r->copy_or_map + r->sync + r->total_cycles());
  }
  EXPECT_GT(base.copy_or_map, 0u);
  EXPECT_GT(io.ptes_written, 0u);
  // The reported run is warm: no more misses than the first.
  EXPECT_LE(io.device.total, io.first_run.total);
}

TEST(Report, HostOnly) {
  ScenarioConfig c = small(KernelKind::Axpy, Mode::Baseline);
  c.offload = Offload::HostOnly;
  const RunReport r = run_scenario(c);
  EXPECT_EQ(r.copy_or_map, 0u);
  EXPECT_EQ(r.sync, 0u);
  EXPECT_GT(r.host_cycles, 0u);
  EXPECT_EQ(r.total_cycles(), r.host_cycles);
  EXPECT_EQ(r.device.total, 0u);
}

TEST(Report, PtwSamplesAreConsistent) {
  const RunReport r = run_scenario(small(KernelKind::Heat3d, Mode::Iommu, 600));
  EXPECT_EQ(r.ptw_samples, r.iotlb_misses);
  EXPECT_EQ(r.ptw_reads, 3 * r.iotlb_misses);
  EXPECT_LE(double(r.ptw_min), r.ptw_mean);
  EXPECT_LE(r.ptw_mean, double(r.ptw_max));
  EXPECT_GE(r.ptw_min, 3 * (600 + 1));
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
  SweepSpec s;
  s.base = small(KernelKind::Gemm, Mode::Baseline);
  s.kernels = {KernelKind::Gemm, KernelKind::Axpy};
  s.base.kernel.size = 0;
  s.base.kernel.tile = 0;
  s.base.kernel.kind = KernelKind::Axpy;
  s.latencies = {200, 1000};
  s.threads = 1;
  const std::string one = run_sweep(s).csv();
  s.threads = 4;
  EXPECT_EQ(run_sweep(s).csv(), one);
}

TEST(Sweep, CellResultsIndependentOfOrder) {
  SweepSpec a;
  a.base.kernel.kind = KernelKind::Axpy;
  a.kernels = {KernelKind::Axpy, KernelKind::Gesummv};
  a.latencies = {600, 200};
  a.modes = {Mode::Iommu, Mode::Baseline};
  SweepSpec b = a;
  b.kernels = {KernelKind::Gesummv, KernelKind::Axpy};
  b.latencies = {200, 600};
  b.modes = {Mode::Baseline, Mode::Iommu};
  auto rows = [](const SweepResult& r) {
    std::map<std::string, std::string> m;
    for (const auto& c : r.cells) m[c.kernel + std::to_string(c.latency) + to_string(c.mode)] = c.csv_row();
    return m;
  };
  EXPECT_EQ(rows(run_sweep(a)), rows(run_sweep(b)));
}

TEST(Sweep, SeedsAreCellSpecific) {
  EXPECT_NE(cell_seed(1, KernelKind::Gemm, 128, 200, Mode::Iommu), cell_seed(1, KernelKind::Gemm, 128, 600, Mode::Iommu));
  EXPECT_NE(cell_seed(1, KernelKind::Gemm, 128, 200, Mode::Iommu), cell_seed(2, KernelKind::Gemm, 128, 200, Mode::Iommu));
  EXPECT_EQ(cell_seed(7, KernelKind::Axpy, 5, 6, Mode::Baseline), cell_seed(7, KernelKind::Axpy, 5, 6, Mode::Baseline));
}

TEST(Sweep, SummaryShape) {
  SweepSpec s;
  s.kernels = {KernelKind::Axpy};
  s.latencies = {200};
  const auto j = run_sweep(s).summary();
  EXPECT_TRUE(j.contains("cells"));
  EXPECT_TRUE(j.at("overhead_vs_baseline").contains("iommu"));
}

TEST(Calibration, DefaultsAreInRange) {
  const Calibration c = Calibration::defaults();
  for (double e : c.eta) {
    EXPECT_GT(e, 0.0);
    EXPECT_LE(e, 1.0);
  }
  EXPECT_GT(c.ioctl_cycles, 0u);
  Calibration d;
  d.apply(c.to_config());
  EXPECT_EQ(d.eta, c.eta);
  EXPECT_EQ(d.ioctl_cycles, c.ioctl_cycles);
}
