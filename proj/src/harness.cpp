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


#include "dynkc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <sstream>
#include <thread>

#include "dynkc/oracles.hpp"

namespace dynkc {

namespace {

constexpr std::size_t kVerifyMaxActive = 50;
constexpr std::size_t kBruteMaxActive = 12;
constexpr std::size_t kKAllCap = 64;

// Empty string when the engine agrees with the from-scratch LFMIS of its graph.
std::string check_lfmis_scale(const LfmisEngine& engine, const oracle::PointSnapshot& points, double r,
                              std::size_t k_user) {
  std::map<PointId, Rank> ranks;
  for (PointId v : points.ids) ranks[v] = engine.rank_of(v);
  oracle::GraphSnapshot g;
  if (const auto* buckets = dynamic_cast<const BucketIndex*>(&engine.index())) {
    for (PointId v : points.ids) g.vertices.push_back(ranks.at(v));
    const double far = buckets->far_radius();
    g.edge = [buckets, &points, far](PointId u, PointId v) {
      const auto& a = buckets->bucket_keys(u);
      const auto& b = buckets->bucket_keys(v);
      bool shared = false;
      for (std::size_t i = 0; i < a.size() && !shared; ++i) shared = a[i] == b[i];
      if (!shared) return false;
      const auto iu = std::lower_bound(points.ids.begin(), points.ids.end(), u) - points.ids.begin();
      const auto iv = std::lower_bound(points.ids.begin(), points.ids.end(), v) - points.ids.begin();
      return points.distance(static_cast<std::size_t>(iu), static_cast<std::size_t>(iv)) <= far;
    };
  } else {
    g = oracle::threshold_graph(points, ranks, r);
  }
  const auto expect = oracle::lfmis_bruteforce(g, engine.k());
  if (engine.top_set() != expect.top) return "top set differs from the from-scratch LFMIS";
  if ((expect.mis.size() <= k_user) != (engine.top_size() <= k_user)) return "validity differs from the oracle";
  for (PointId v : points.ids) {
    const auto leader = engine.leader_of(v);
    if (!leader) continue;
    if (!g.edge(v, *leader)) return "leader of " + std::to_string(v) + " is not adjacent";
  }
  return {};
}

double true_cost(DynamicKCenters& dk) {
  double worst = 0.0;
  for (PointId p : dk.space().ids()) worst = std::max(worst, dk.space().distance_uncounted(p, dk.membership(p)));
  return worst;
}

}  // namespace

RunReport run_stream(const Stream& stream, const RunOptions& opt) {
  validate_stream(stream);
  const auto t0 = std::chrono::steady_clock::now();
  DynamicKCenters dk(stream.config, opt.ladder);
  const auto& lad = opt.ladder;
  const double eps = lad.eps;

  RunReport rep;
  rep.engine = to_string(lad.engine);
  rep.k = lad.k;
  rep.eps = eps;
  rep.seed = lad.seed;
  rep.metric_header = header_line(stream.config);
  rep.scales = dk.ladder().scales();
  rep.verified = opt.verify;

  std::size_t n_max = 0;
  for (const auto& op : stream.ops) {
    const auto q0 = dk.space().queries();
    const auto c0 = dk.counters();
    if (op.kind == UpdateKind::Insert)
      dk.insert(op.id, op.payload);
    else
      dk.erase(op.id);
    const auto c1 = dk.counters();

    StepRecord rec;
    rec.step = dk.steps();
    rec.kind = op.kind;
    rec.id = op.id;
    rec.active = dk.space().size();
    rec.leader_changes = c1.leader_changes - c0.leader_changes;
    rec.wasted_collisions = c1.wasted_collisions - c0.wasted_collisions;
    rec.restarts = dk.restarts();
    n_max = std::max(n_max, rec.active);

    if (rec.active > 0) {
      const auto& s = dk.solution();
      rec.scale = s.scale;
      rec.centers = s.centers.size();
      rec.cost_upper = s.cost_upper;
      rec.opt_lower = s.opt_lower;
      rec.fallback = s.fallback;
      if (opt.k_all && lad.engine == EngineKind::Lsh) {
        std::vector<std::size_t> sizes;
        for (std::size_t i = 0; i < dk.ladder().size(); ++i) sizes.push_back(dk.ladder().engine(i).centers().size());
        for (std::size_t k = 1; k <= std::min(rec.active, kKAllCap); ++k) {
          double chosen = std::numeric_limits<double>::quiet_NaN();
          for (std::size_t i = 0; i < sizes.size(); ++i)
            if (sizes[i] <= k) {
              chosen = dk.ladder().scale(i);
              break;
            }
          rec.k_all.push_back(chosen);
        }
      }
    }

    if (opt.verify) {
      if (rec.active > kVerifyMaxActive)
        throw ConfigError("verification supports at most " + std::to_string(kVerifyMaxActive) + " active points");
      const auto fail = [&](const std::string& what) {
        if (rep.violations++ == 0) rep.first_violation = "step " + std::to_string(rec.step) + ": " + what;
      };
      ++rep.checks;
      if (auto msg = dk.check_invariants(); !msg.empty()) fail(msg);
      if (lad.engine != EngineKind::Det) {
        const auto points = oracle::snapshot_of(dk.space());
        for (std::size_t i = 0; i < dk.ladder().size(); ++i) {
          auto msg = check_lfmis_scale(*dk.ladder().engine(i).lfmis(), points, dk.ladder().scale(i), lad.k);
          if (!msg.empty()) fail("scale " + std::to_string(dk.ladder().scale(i)) + ": " + msg);
        }
      }
      if (rec.active > 0) {
        const double cost = true_cost(dk);
        rec.cost_true = cost;
        if (cost > rec.cost_upper + 1e-9) fail("true cost exceeds cost_upper");
        if (rec.active <= kBruteMaxActive) {
          const double opt_cost = oracle::kcenters_bruteforce(oracle::snapshot_of(dk.space()), lad.k).cost;
          rec.opt = opt_cost;
          double factor = 2.0 + eps;
          if (lad.engine == EngineKind::Det)
            factor *= std::max(1.0, std::ceil(std::log2(static_cast<double>(n_max) * (1.0 + eps))));
          if (lad.engine == EngineKind::Lsh) {
            const bool capped = stream.config.kind == MetricKind::Jaccard;
            const double bound = lad.lsh.c * ((capped ? 4.0 : 2.0) + eps) * opt_cost;
            if (cost > bound + 1e-9) ++rep.bound_misses;
          } else {
            if (cost > factor * opt_cost + 1e-9) fail("true cost exceeds the approximation bound");
            if (rec.opt_lower > opt_cost + 1e-9) fail("opt_lower exceeds the optimum");
          }
        }
      }
      if (rep.violations > 0) {
        rec.queries = dk.space().queries() - q0;
        rep.steps.push_back(std::move(rec));
        break;
      }
    }
    rec.queries = dk.space().queries() - q0;
    rep.steps.push_back(std::move(rec));
  }

  rep.updates = rep.steps.size();
  std::uint64_t changes = 0;
  for (const auto& r : rep.steps) {
    rep.total_queries += r.queries;
    changes += r.leader_changes;
    rep.wasted_collisions += r.wasted_collisions;
  }
  if (rep.updates) {
    rep.queries_per_update = static_cast<double>(rep.total_queries) / static_cast<double>(rep.updates);
    rep.leader_changes_per_update = static_cast<double>(changes) / static_cast<double>(rep.updates);
  }
  rep.restarts = dk.restarts();
  rep.size_rebuilds = dk.size_rebuilds();
  rep.checkpoint_rebuilds = dk.checkpoint_rebuilds();
  if (lad.engine == EngineKind::Lsh) {
    for (std::size_t i = 0; i < dk.ladder().size(); ++i) {
      const auto* b = dynamic_cast<const BucketIndex*>(&dk.ladder().engine(i).lfmis()->index());
      const auto& info = b->info();
      rep.lsh_builds.push_back({{"family", to_string(info.family)},
                                {"r", info.r},
                                {"c", info.c},
                                {"width", info.width},
                                {"p1", info.params.p1},
                                {"p2", info.params.p2},
                                {"rho", info.params.rho},
                                {"s", info.params.s},
                                {"t", info.params.t},
                                {"n_bound", info.n_bound},
                                {"seed", info.seed}});
    }
  }
  if (opt.timing)
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

nlohmann::json to_json(const RunReport& r) {
  using nlohmann::json;
  json steps = json::array();
  for (const auto& s : r.steps) {
    json j{{"step", s.step},
           {"op", s.kind == UpdateKind::Insert ? "+" : "-"},
           {"id", s.id},
           {"active", s.active},
           {"r", s.scale ? json(*s.scale) : json(nullptr)},
           {"centers", s.centers},
           {"cost_upper", s.cost_upper},
           {"opt_lower", s.opt_lower},
           {"queries", s.queries},
           {"leader_changes", s.leader_changes},
           {"restarts", s.restarts}};
    if (s.fallback) j["fallback"] = true;
    if (s.wasted_collisions) j["wasted_collisions"] = s.wasted_collisions;
    if (s.cost_true) j["cost_true"] = *s.cost_true;
    if (s.opt) j["opt"] = *s.opt;
    if (!s.k_all.empty()) j["k_all"] = s.k_all;
    steps.push_back(std::move(j));
  }
  json out{{"schema", kReportSchema},
           {"engine", r.engine},
           {"k", r.k},
           {"eps", r.eps},
           {"seed", r.seed},
           {"metric", r.metric_header},
           {"scales", r.scales},
           {"steps", std::move(steps)},
           {"aggregate",
            {{"updates", r.updates},
             {"total_queries", r.total_queries},
             {"queries_per_update", r.queries_per_update},
             {"leader_changes_per_update", r.leader_changes_per_update},
             {"restarts", r.restarts},
             {"wasted_collisions", r.wasted_collisions},
             {"size_rebuilds", r.size_rebuilds},
             {"checkpoint_rebuilds", r.checkpoint_rebuilds}}}};
  if (r.wall_seconds) out["aggregate"]["wall_seconds"] = *r.wall_seconds;
  if (r.verified)
    out["verification"] = {{"checks", r.checks},
                           {"violations", r.violations},
                           {"first_violation", r.first_violation},
                           {"bound_misses", r.bound_misses}};
  if (!r.lsh_builds.empty()) out["lsh_builds"] = r.lsh_builds;
  return out;
}

BenchConfig parse_bench_config(const std::string& text) {
  BenchConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  const auto list = [](const std::string& v) {
    std::vector<std::string> out;
    std::istringstream s(v);
    for (std::string item; std::getline(s, item, ',');) {
      const auto a = item.find_first_not_of(" \t");
      const auto b = item.find_last_not_of(" \t");
      if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
    }
    return out;
  };
  while (std::getline(in, line)) {
    ++no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw ConfigError("bench config line " + std::to_string(no) + ": expected 'key: value'");
    auto key = list(line.substr(0, colon));
    const auto values = list(line.substr(colon + 1));
    if (key.size() != 1 || values.empty())
      throw ConfigError("bench config line " + std::to_string(no) + ": malformed entry");
    const auto& k = key.front();
    try {
      if (k == "engine" || k == "engines") {
        cfg.engines = values;
        for (const auto& e : values) engine_from_string(e);
      } else if (k == "n") {
        cfg.ns.clear();
        for (const auto& v : values) cfg.ns.push_back(std::stoull(v));
      } else if (k == "k") {
        cfg.ks.clear();
        for (const auto& v : values) cfg.ks.push_back(std::stoull(v));
      } else if (k == "seed" || k == "seeds") {
        cfg.seeds.clear();
        for (const auto& v : values) cfg.seeds.push_back(std::stoull(v));
      } else if (k == "generator") {
        cfg.generator = generator_from_string(values.front());
      } else if (k == "metric") {
        const auto& m = values.front();
        if (m == "lp") cfg.metric = MetricKind::Lp;
        else if (m == "hamming") cfg.metric = MetricKind::Hamming;
        else if (m == "jaccard") cfg.metric = MetricKind::Jaccard;
        else throw ConfigError("unknown metric '" + m + "'");
      } else if (k == "dim") {
        cfg.dim = std::stoull(values.front());
      } else if (k == "length") {
        cfg.length_factor = std::stod(values.front());
      } else if (k == "eps") {
        cfg.eps = std::stod(values.front());
      } else if (k == "c") {
        cfg.lsh_c = std::stod(values.front());
      } else if (k == "jobs") {
        cfg.jobs = static_cast<unsigned>(std::stoul(values.front()));
      } else {
        throw ConfigError("unknown key '" + k + "'");
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("bench config line " + std::to_string(no) + ": bad number");
    }
  }
  return cfg;
}

std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
  struct Cell {
    std::string engine;
    std::size_t n, k;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& e : cfg.engines)
    for (auto n : cfg.ns)
      for (auto k : cfg.ks)
        for (auto seed : cfg.seeds) cells.push_back({e, n, k, seed});

  const auto run_cell = [&cfg](const Cell& c) {
    StreamSpec spec;
    spec.kind = cfg.generator;
    spec.metric = cfg.metric;
    spec.dim = cfg.dim;
    spec.n = c.n;
    spec.k = std::min(c.k, c.n);
    spec.m = static_cast<std::size_t>(cfg.length_factor * static_cast<double>(c.n));
    spec.seed = c.seed;
    const auto stream = generate(spec);
    RunOptions opt;
    opt.ladder.engine = engine_from_string(c.engine);
    opt.ladder.k = c.k;
    opt.ladder.eps = cfg.eps;
    opt.ladder.seed = c.seed;
    opt.ladder.lsh.c = cfg.lsh_c;
    opt.timing = true;
    const auto rep = run_stream(stream, opt);
    BenchRow row;
    row.engine = c.engine;
    row.n = c.n;
    row.k = c.k;
    row.seed = c.seed;
    row.m = stream.ops.size();
    row.queries_per_update = rep.queries_per_update;
    row.leader_changes_per_update = rep.leader_changes_per_update;
    row.restarts = rep.restarts;
    row.wasted_collisions = rep.wasted_collisions;
    row.wall_ms = rep.wall_seconds.value_or(0.0) * 1000.0;
    return row;
  };

  const unsigned jobs = cfg.jobs ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
  std::vector<BenchRow> rows;
  for (std::size_t i = 0; i < cells.size(); i += jobs) {
    std::vector<std::future<BenchRow>> batch;
    for (std::size_t j = i; j < std::min(cells.size(), i + jobs); ++j)
      batch.push_back(std::async(std::launch::async, run_cell, cells[j]));
    for (auto& f : batch) rows.push_back(f.get());
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "# schema " << kReportSchema << "\n";
  out << "engine,n,k,seed,m,queries_per_update,leader_changes_per_update,restarts,wasted_collisions,wall_ms\n";
  for (const auto& r : rows)
    out << r.engine << ',' << r.n << ',' << r.k << ',' << r.seed << ',' << r.m << ',' << r.queries_per_update << ','
        << r.leader_changes_per_update << ',' << r.restarts << ',' << r.wasted_collisions << ',' << r.wall_ms << '\n';
  return out.str();
}

}  // namespace dynkc
