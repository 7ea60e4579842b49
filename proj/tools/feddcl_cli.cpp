/*
 * Copyright 2026 The FedDCL Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "feddcl/bench.hpp"

namespace bench = feddcl::bench;
namespace fs = std::filesystem;

namespace {

std::vector<bench::Method> parse_methods(const std::string& list) {
  std::vector<bench::Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto m = bench::parse_method(item);
    if (!m) throw feddcl::ConfigError("--methods", "unknown method '" + item + "'");
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  return out;
}

void print_summary(const bench::ExperimentResult& r) {
  const auto metric = feddcl::nnet::to_string(feddcl::nnet::metric_for(r.task));
  std::printf("%s  seed=%llu  train=%zu  holdout=%zu\n", r.name.c_str(), static_cast<unsigned long long>(r.seed),
              r.train_rows, r.holdout_rows);
  for (const auto& m : r.methods) {
    if (!m.ok()) {
      std::printf("  %-12s FAILED  %s\n", bench::to_string(m.method).c_str(), m.error.c_str());
      continue;
    }
    std::printf("  %-12s %s=%.4f [%.4f, %.4f]  %zu snapshots  %.1fs\n", bench::to_string(m.method).c_str(),
                metric.c_str(), m.final_value(), m.last() ? m.last()->min : NAN, m.last() ? m.last()->max : NAN,
                m.history.points.size(), m.wall_seconds);
  }
}

int cmd_run(const std::string& config, const std::string& methods, const std::string& out,
            std::optional<std::uint64_t> seed) {
  auto c = bench::load_run_config(config);
  if (seed) c.seed = *seed;
  if (!methods.empty()) c.methods = parse_methods(methods);
  if (!out.empty()) c.out_dir = out;
  auto res = bench::run_experiment(c);
  bench::emit_artifacts(res, c.out_dir, c.checkpoints);
  print_summary(res);
  std::printf("artifacts: %s\n", c.out_dir.c_str());
  return res.ok() ? 0 : 1;
}

int cmd_theorem1(const std::string& config, std::optional<std::uint64_t> seed) {
  auto c = bench::load_run_config(config);
  if (seed) c.seed = *seed;
  const auto table = bench::load_table(c.dataset);
  const auto parts = bench::make_partition(c, table);
  feddcl::numkit::RngStream rng(feddcl::numkit::derive_seed(c.seed, {9}));
  feddcl::numkit::Mat f0(parts.num_features(), c.m_tilde);
  for (double& v : f0.data()) v = rng.normal();
  auto pc = c.protocol_config(parts.target_dim());
  auto rep = feddcl::protocol::verify_theorem1(parts, f0, pc);
  std::cout << feddcl::protocol::theorem1_json(rep).dump(2) << '\n';
  const bool ok = rep.max_residual < 1e-8 && rep.fit_error < 1e-8 && rep.max_angle < 1e-7;
  std::printf("%s\n", ok ? "exact recovery holds" : "exact recovery violated");
  return ok ? 0 : 1;
}

int cmd_sweep(const std::string& config, std::size_t d_max, const std::string& methods, const std::string& out,
              std::optional<std::uint64_t> seed) {
  auto c = bench::load_run_config(config);
  if (seed) c.seed = *seed;
  if (!methods.empty()) c.methods = parse_methods(methods);
  if (!out.empty()) c.out_dir = out;
  std::vector<std::size_t> ds;
  for (std::size_t d = 1; d <= d_max; ++d) ds.push_back(d);
  auto pts = bench::sweep_groups(c, ds, c.out_dir);
  bool ok = true;
  for (const auto& p : pts) {
    std::printf("d=%-3zu %-12s %.4f\n", p.groups, bench::to_string(p.method).c_str(), p.value);
    ok = ok && p.ok;
  }
  std::printf("artifacts: %s\n", c.out_dir.c_str());
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FedDCL experiment runner"};
  app.require_subcommand(1);

  std::string config, methods, out;
  std::optional<std::uint64_t> seed;
  std::size_t d_max = 10;

  auto* run = app.add_subcommand("run", "run the configured methods and write artifacts");
  run->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--methods", methods, "comma-separated subset of centralized,local,fedavg,dc,feddcl");
  run->add_option("--out", out, "output directory");
  run->add_option("--seed", seed, "master seed");

  auto* th = app.add_subcommand("verify-theorem1", "check exact recovery for common-range linear maps");
  th->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
  th->add_option("--seed", seed, "master seed");

  auto* sw = app.add_subcommand("sweep-groups", "repeat the run for d = 1 .. d-max groups");
  sw->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
  sw->add_option("--d-max", d_max, "largest group count")->check(CLI::PositiveNumber);
  sw->add_option("--methods", methods, "comma-separated method subset");
  sw->add_option("--out", out, "output directory");
  sw->add_option("--seed", seed, "master seed");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, methods, out, seed);
    if (*th) return cmd_theorem1(config, seed);
    return cmd_sweep(config, d_max, methods, out, seed);
  } catch (const feddcl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
