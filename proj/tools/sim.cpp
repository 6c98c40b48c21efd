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

// Command-line front end: run, sweep, offload, ptw, calibrate.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "svasim/error.hpp"
#include "svasim/harness.hpp"

using namespace svasim;

namespace {

struct Common {
  std::string config_file;
  std::vector<std::string> sets;
  std::string seed;
  std::string out;
};

void add_common(CLI::App* app, Common& c, bool out_required = true) {
  app->add_option("--config", c.config_file, "flat key=value configuration file");
  app->add_option("--set", c.sets, "override a configuration key (key=value), repeatable");
  app->add_option("--seed", c.seed, "base seed (falls back to SIM_SEED)");
  auto* o = app->add_option("--out", c.out, "output directory (file for calibrate)");
  if (out_required) o->required();
}

KeyValueConfig load(const Common& c) {
  KeyValueConfig cfg;
  if (!c.config_file.empty()) cfg = KeyValueConfig::load(c.config_file);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (!c.seed.empty())
    cfg.set("sim.seed", c.seed);
  else if (!cfg.has("sim.seed"))
    if (const char* env = std::getenv("SIM_SEED")) cfg.set("sim.seed", env);
  return cfg;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"svasim: IOMMU / shared-virtual-memory SoC memory-path simulator"};
  app.require_subcommand(1);

  Common run_c, sweep_c, off_c, ptw_c, cal_c;
  std::string kernel, mode, offload;
  std::uint64_t size = 0, latency = 0;
  bool interference = false;
  auto* run = app.add_subcommand("run", "simulate one scenario");
  add_common(run, run_c);
  run->add_option("--kernel", kernel, "gemm|gesummv|heat3d|axpy|mergesort");
  run->add_option("--size", size, "problem size (0 = kernel default)");
  run->add_option("--latency", latency, "DRAM latency in host cycles");
  run->add_option("--mode", mode, "baseline|iommu|iommu-llc");
  run->add_option("--offload", offload, "host-only|copy|zero-copy");
  run->add_flag("--interference", interference, "enable host interference traffic");

  auto* sweep = app.add_subcommand("sweep", "kernels x latencies x modes");
  add_common(sweep, sweep_c);

  std::vector<std::string> sizes, lats;
  std::string off_kernel = "axpy";
  auto* off = app.add_subcommand("offload", "host-only vs copy vs zero-copy breakdown");
  add_common(off, off_c);
  off->add_option("--kernel", off_kernel, "kernel (axpy)");
  off->add_option("--sizes", sizes, "comma-separated sizes")->delimiter(',');
  off->add_option("--latencies", lats, "comma-separated latencies")->delimiter(',');

  std::vector<std::string> ptw_lats;
  auto* ptw = app.add_subcommand("ptw", "page-table-walk latency study");
  add_common(ptw, ptw_c);
  ptw->add_option("--latencies", ptw_lats, "comma-separated latencies")->delimiter(',');

  double tol = 5.0;
  auto* cal = app.add_subcommand("calibrate", "fit eta per kernel and the ioctl cost");
  add_common(cal, cal_c);
  cal->add_option("--tolerance", tol, "allowed |%DMA - target| in percentage points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      KeyValueConfig cfg = load(run_c);
      if (!kernel.empty()) cfg.set("kernel.name", kernel);
      if (size) cfg.set("kernel.size", std::to_string(size));
      if (latency) cfg.set("dram.latency_cycles", std::to_string(latency));
      if (!mode.empty()) cfg.set("sim.mode", mode);
      if (!offload.empty()) cfg.set("sim.offload", offload);
      if (interference) cfg.set("interference.enabled", "true");
      const RunReport r = run_scenario(ScenarioConfig::from_config(cfg));
      const std::filesystem::path dir(run_c.out);
      write_text(dir / "run.csv", csv_header() + "\n" + r.csv_row() + "\n");
      write_text(dir / "report.json", r.to_json().dump(2) + "\n");
      std::cout << csv_header() << "\n" << r.csv_row() << "\n";
    } else if (*sweep) {
      const SweepResult r = run_sweep(SweepSpec::from_config(load(sweep_c)));
      write_sweep(r, sweep_c.out);
      std::cout << r.csv();
    } else if (*off) {
      if (off_kernel != "axpy") throw ConfigError("the offload comparison is defined for axpy only");
      KeyValueConfig cfg = load(off_c);
      const ScenarioConfig base = ScenarioConfig::from_config(cfg);
      std::vector<std::uint64_t> sz, la;
      for (const auto& s : sizes.empty() ? std::vector<std::string>{"8192", "32768", "131072"} : sizes)
        sz.push_back(parse_u64(s, "--sizes"));
      for (const auto& s : lats.empty() ? std::vector<std::string>{"200", "600", "1000"} : lats)
        la.push_back(parse_u64(s, "--latencies"));
      const std::string csv = offload_csv(run_offload_comparison(base, sz, la));
      write_text(std::filesystem::path(off_c.out) / "offload.csv", csv);
      std::cout << csv;
    } else if (*ptw) {
      const ScenarioConfig base = ScenarioConfig::from_config(load(ptw_c));
      std::vector<Cycle> la;
      for (const auto& s : ptw_lats.empty() ? std::vector<std::string>{"200", "600", "1000"} : ptw_lats)
        la.push_back(parse_u64(s, "--latencies"));
      const std::string csv = ptw_csv(run_ptw_study(base, la));
      write_text(std::filesystem::path(ptw_c.out) / "ptw.csv", csv);
      std::cout << csv;
    } else if (*cal) {
      const ScenarioConfig base = ScenarioConfig::from_config(load(cal_c));
      const CalibrationResult res = calibrate(base, tol);
      std::string text = "# fitted by `sim calibrate`\n" + res.calib.to_config().dump();
      write_text(cal_c.out, text);
      for (const auto& [k, v] : res.achieved) std::printf("%-10s eta=%.6f pct_dma@200=%.2f\n", to_string(k), res.calib.eta_for(k), v);
      std::printf("ioctl_cycles=%llu map_ratio(1000/200)=%.3f\n", (unsigned long long)res.calib.ioctl_cycles, res.map_ratio);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SimFault& e) {
    std::cerr << "simulation fault: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
