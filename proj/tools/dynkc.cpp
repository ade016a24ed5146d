/*
 * Copyright 2026 The dynkc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "dynkc/harness.hpp"
#include "dynkc/stream.hpp"

using namespace dynkc;

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

MetricKind metric_from_string(const std::string& name) {
  if (name == "lp") return MetricKind::Lp;
  if (name == "hamming") return MetricKind::Hamming;
  if (name == "jaccard") return MetricKind::Jaccard;
  throw ConfigError("unknown metric '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fully dynamic k-centers over threshold-graph LFMIS ladders"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Replay a stream and write a JSON report");
  std::string stream_path, engine = "lfmis", report_path = "-";
  RunOptions ropt;
  run->add_option("--stream", stream_path, "Stream file")->required();
  run->add_option("--engine", engine, "lfmis, lsh or det")->check(CLI::IsMember({"lfmis", "lsh", "det"}));
  run->add_option("--k", ropt.ladder.k, "Number of centers")->required()->check(CLI::PositiveNumber);
  run->add_option("--eps", ropt.ladder.eps, "Grid ratio is 1 + eps/2")->check(CLI::PositiveNumber);
  run->add_option("--seed", ropt.ladder.seed, "Master seed");
  run->add_option("--c", ropt.ladder.lsh.c, "LSH approximation factor");
  run->add_option("--delta", ropt.ladder.lsh.delta, "LSH failure probability");
  run->add_option("--lsh-n", ropt.ladder.lsh_n_bound, "Fixed LSH parameter n (default: doubling schedule)");
  run->add_option("--restart-budget", ropt.ladder.restart_budget_factor, "Restart budget factor (0 disables)");
  run->add_option("--restart-baseline", ropt.ladder.restart_baseline, "Work units per update in the budget");
  run->add_flag("--det-stop-the-world", ropt.ladder.det_stop_the_world, "Rebuild deterministic trees in one step");
  run->add_flag("--verify", ropt.verify, "Check oracles and invariants after every step");
  run->add_flag("--timing", ropt.timing, "Record wall time");
  run->add_flag("--k-all", ropt.k_all, "LSH: report the chosen scale for every k");
  run->add_option("--report", report_path, "Report path, '-' for stdout");

  auto* gen = app.add_subcommand("gen", "Generate a stream file");
  StreamSpec spec;
  std::string kind = "uniform-churn", metric = "lp", out_path = "-";
  gen->add_option("--kind", kind, "uniform-churn, sliding-window, planted-clusters, adversarial-cluster-deletion");
  gen->add_option("--n", spec.n, "Active-point bound")->required();
  gen->add_option("--m", spec.m, "Stream length (default 4n)");
  gen->add_option("--k", spec.k, "Cluster count");
  gen->add_option("--seed", spec.seed, "Seed");
  gen->add_option("--metric", metric, "lp, hamming or jaccard");
  gen->add_option("--dim", spec.dim, "Dimension, bits or universe size");
  gen->add_option("--p", spec.p, "lp exponent");
  gen->add_option("--side", spec.side, "lp coordinate range");
  gen->add_option("--window", spec.window, "Sliding-window length");
  gen->add_option("--out", out_path, "Output path, '-' for stdout");

  auto* bench = app.add_subcommand("bench", "Sweep a configuration matrix and write CSV");
  std::string config_path, csv_path = "-";
  unsigned jobs = 0;
  bench->add_option("--config", config_path, "Plain 'key: values' file")->required();
  bench->add_option("--out", csv_path, "CSV path, '-' for stdout");
  bench->add_option("--jobs", jobs, "Parallel cells (overrides the config)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ropt.ladder.engine = engine_from_string(engine);
      const auto stream = load_stream(stream_path);
      const auto rep = run_stream(stream, ropt);
      write_text(report_path, to_json(rep).dump(2) + "\n");
      if (rep.violations > 0) {
        std::cerr << "verification failed: " << rep.first_violation << "\n";
        return 2;
      }
    } else if (*gen) {
      spec.kind = generator_from_string(kind);
      spec.metric = metric_from_string(metric);
      std::ostringstream out;
      write_stream(out, generate(spec));
      write_text(out_path, out.str());
    } else if (*bench) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot open " + config_path);
      std::stringstream text;
      text << in.rdbuf();
      auto cfg = parse_bench_config(text.str());
      if (jobs) cfg.jobs = jobs;
      write_text(csv_path, bench_csv(run_bench(cfg)));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
