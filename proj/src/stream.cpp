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


#include "dynkc/stream.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

namespace dynkc {

namespace {

std::string fmt(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, std::size_t line) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw StreamError("line " + std::to_string(line) + ": bad number '" + s + "'");
  return x;
}

std::uint64_t parse_uint(const std::string& s, std::size_t line) {
  std::uint64_t x = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw StreamError("line " + std::to_string(line) + ": bad integer '" + s + "'");
  return x;
}

MetricConfig parse_header(const std::vector<std::string>& tok, const std::string& base_dir, std::size_t line) {
  if (tok.size() < 2) throw StreamError("line " + std::to_string(line) + ": header names no metric");
  std::map<std::string, std::string> kv;
  for (std::size_t i = 2; i < tok.size(); ++i) {
    const auto eq = tok[i].find('=');
    if (eq == std::string::npos) throw StreamError("line " + std::to_string(line) + ": expected key=value, got '" + tok[i] + "'");
    kv[tok[i].substr(0, eq)] = tok[i].substr(eq + 1);
  }
  const auto need = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw StreamError("line " + std::to_string(line) + ": header lacks " + key + "=");
    return it->second;
  };
  const std::string& metric = tok[1];
  try {
    if (metric == "lp") {
      return MetricConfig::lp(parse_uint(need("dim"), line), parse_double(need("p"), line),
                              parse_double(need("rmin"), line), parse_double(need("rmax"), line));
    }
    if (metric == "hamming") {
      return MetricConfig::hamming(parse_uint(need("bits"), line), parse_double(need("rmin"), line),
                                   parse_double(need("rmax"), line));
    }
    if (metric == "jaccard") {
      return MetricConfig::jaccard(parse_uint(need("universe"), line), parse_double(need("rmin"), line),
                                   parse_double(need("rmax"), line));
    }
    if (metric == "matrix") {
      std::filesystem::path path = need("file");
      if (path.is_relative() && !base_dir.empty()) path = std::filesystem::path(base_dir) / path;
      auto m = std::make_shared<const DistanceMatrix>(DistanceMatrix::load(path.string()));
      double lo = std::numeric_limits<double>::infinity();
      double hi = 0.0;
      for (std::size_t i = 0; i < m->size(); ++i)
        for (std::size_t j = i + 1; j < m->size(); ++j) {
          const double d = m->at(i, j);
          if (d > 0.0) lo = std::min(lo, d);
          hi = std::max(hi, d);
        }
      if (!std::isfinite(lo)) lo = hi = 1.0;
      const double rmin = kv.contains("rmin") ? parse_double(kv["rmin"], line) : lo / 2.0;
      const double rmax = kv.contains("rmax") ? parse_double(kv["rmax"], line) : hi;
      auto cfg = MetricConfig::explicit_matrix(std::move(m), rmin, rmax);
      cfg.matrix_path = need("file");
      return cfg;
    }
  } catch (const ConfigError& e) {
    throw StreamError("line " + std::to_string(line) + ": " + e.what());
  }
  throw StreamError("line " + std::to_string(line) + ": unknown metric '" + metric + "'");
}

Payload parse_payload(const MetricConfig& cfg, const std::vector<std::string>& tok, PointId id, std::size_t line) {
  switch (cfg.kind) {
    case MetricKind::Lp: {
      DenseVector v;
      for (std::size_t i = 2; i < tok.size(); ++i) v.values.push_back(parse_double(tok[i], line));
      return v;
    }
    case MetricKind::Hamming: {
      if (tok.size() != 3) throw StreamError("line " + std::to_string(line) + ": expected one bit string");
      BitVector v;
      for (char ch : tok[2]) {
        if (ch != '0' && ch != '1') throw StreamError("line " + std::to_string(line) + ": bit string holds '" + ch + "'");
        v.bits.push_back(static_cast<std::uint8_t>(ch - '0'));
      }
      return v;
    }
    case MetricKind::Jaccard: {
      std::vector<std::uint32_t> e;
      for (std::size_t i = 2; i < tok.size(); ++i) e.push_back(static_cast<std::uint32_t>(parse_uint(tok[i], line)));
      return ElementSet::from_unsorted(std::move(e));
    }
    case MetricKind::Matrix:
      if (tok.size() > 3) throw StreamError("line " + std::to_string(line) + ": expected at most a row index");
      return MatrixRow{tok.size() == 3 ? parse_uint(tok[2], line) : id};
  }
  throw StreamError("unreachable");
}

std::string payload_text(const Payload& payload, PointId id) {
  std::string out;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DenseVector>) {
          for (double x : v.values) out += " " + fmt(x);
        } else if constexpr (std::is_same_v<T, BitVector>) {
          out += ' ';
          for (auto b : v.bits) out += static_cast<char>('0' + b);
        } else if constexpr (std::is_same_v<T, ElementSet>) {
          for (auto e : v.elements) out += " " + std::to_string(e);
        } else {
          if (v.index != id) out += " " + std::to_string(v.index);
        }
      },
      payload);
  return out;
}

}  // namespace

Stream parse_stream(std::istream& in, const std::string& base_dir) {
  Stream s;
  bool have_header = false;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    std::istringstream ls(text);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (tok[0] == "H") {
      if (have_header) throw StreamError("line " + std::to_string(line) + ": second header");
      s.config = parse_header(tok, base_dir, line);
      have_header = true;
      continue;
    }
    if (!have_header) throw StreamError("line " + std::to_string(line) + ": operation before the header");
    if (tok[0] != "+" && tok[0] != "-") throw StreamError("line " + std::to_string(line) + ": unknown record '" + tok[0] + "'");
    if (tok.size() < 2) throw StreamError("line " + std::to_string(line) + ": missing id");
    StreamOp op;
    op.id = parse_uint(tok[1], line);
    if (tok[0] == "-") {
      if (tok.size() != 2) throw StreamError("line " + std::to_string(line) + ": delete takes only an id");
      op.kind = UpdateKind::Delete;
    } else {
      op.kind = UpdateKind::Insert;
      op.payload = parse_payload(s.config, tok, op.id, line);
      try {
        s.config.check_payload(op.payload);
      } catch (const ConfigError& e) {
        throw StreamError("line " + std::to_string(line) + ": " + e.what());
      }
    }
    s.ops.push_back(std::move(op));
  }
  if (!have_header) throw StreamError("stream has no header");
  return s;
}

Stream load_stream(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StreamError("cannot open stream file " + path);
  return parse_stream(in, std::filesystem::path(path).parent_path().string());
}

std::string header_line(const MetricConfig& cfg) {
  std::string h = "H ";
  switch (cfg.kind) {
    case MetricKind::Lp: h += "lp dim=" + std::to_string(cfg.dim) + " p=" + fmt(cfg.p); break;
    case MetricKind::Hamming: h += "hamming bits=" + std::to_string(cfg.dim); break;
    case MetricKind::Jaccard: h += "jaccard universe=" + std::to_string(cfg.dim); break;
    case MetricKind::Matrix: h += "matrix file=" + cfg.matrix_path; break;
  }
  return h + " rmin=" + fmt(cfg.r_min) + " rmax=" + fmt(cfg.r_max);
}

void write_stream(std::ostream& out, const Stream& stream) {
  out << header_line(stream.config) << '\n';
  for (const auto& op : stream.ops) {
    if (op.kind == UpdateKind::Delete)
      out << "- " << op.id << '\n';
    else
      out << "+ " << op.id << payload_text(op.payload, op.id) << '\n';
  }
}

void save_stream(const std::string& path, const Stream& stream) {
  std::ofstream out(path);
  if (!out) throw StreamError("cannot write stream file " + path);
  write_stream(out, stream);
}

void validate_stream(const Stream& stream) {
  std::set<PointId> active;
  for (std::size_t i = 0; i < stream.ops.size(); ++i) {
    const auto& op = stream.ops[i];
    if (op.kind == UpdateKind::Insert) {
      if (!active.insert(op.id).second)
        throw StreamError("op " + std::to_string(i) + ": insert of active id " + std::to_string(op.id));
      try {
        stream.config.check_payload(op.payload);
      } catch (const ConfigError& e) {
        throw StreamError("op " + std::to_string(i) + ": " + e.what());
      }
    } else if (!active.erase(op.id)) {
      throw StreamError("op " + std::to_string(i) + ": delete of inactive id " + std::to_string(op.id));
    }
  }
}

std::size_t max_active(const Stream& stream) {
  std::size_t cur = 0;
  std::size_t best = 0;
  for (const auto& op : stream.ops) {
    cur = op.kind == UpdateKind::Insert ? cur + 1 : cur - 1;
    best = std::max(best, cur);
  }
  return best;
}

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::UniformChurn: return "uniform-churn";
    case GeneratorKind::SlidingWindow: return "sliding-window";
    case GeneratorKind::PlantedClusters: return "planted-clusters";
    case GeneratorKind::AdversarialClusterDeletion: return "adversarial-cluster-deletion";
  }
  return "?";
}

GeneratorKind generator_from_string(const std::string& name) {
  for (auto k : {GeneratorKind::UniformChurn, GeneratorKind::SlidingWindow, GeneratorKind::PlantedClusters,
                 GeneratorKind::AdversarialClusterDeletion})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown generator '" + name + "'");
}

namespace {

class PayloadSource {
 public:
  PayloadSource(const StreamSpec& spec, std::mt19937_64& rng) : spec_(spec), rng_(rng) {}

  MetricConfig config() const {
    switch (spec_.metric) {
      case MetricKind::Lp:
        return MetricConfig::lp(spec_.dim, spec_.p, 0.5,
                                spec_.side * std::pow(static_cast<double>(spec_.dim), 1.0 / spec_.p));
      case MetricKind::Hamming:
        return MetricConfig::hamming(spec_.dim, 0.5, static_cast<double>(spec_.dim));
      case MetricKind::Jaccard:
        return MetricConfig::jaccard(spec_.dim, 0.5 / static_cast<double>(spec_.dim), 1.0);
      case MetricKind::Matrix:
        break;
    }
    throw ConfigError("generators do not produce matrix streams");
  }

  Payload uniform() {
    switch (spec_.metric) {
      case MetricKind::Lp: {
        std::uniform_int_distribution<std::uint32_t> c(0, spec_.side);
        DenseVector v;
        for (std::size_t i = 0; i < spec_.dim; ++i) v.values.push_back(c(rng_));
        return v;
      }
      case MetricKind::Hamming: {
        BitVector v;
        for (std::size_t i = 0; i < spec_.dim; ++i) v.bits.push_back(static_cast<std::uint8_t>(rng_() & 1));
        return v;
      }
      default: {
        std::vector<std::uint32_t> e;
        for (std::uint32_t x = 0; x < spec_.dim; ++x)
          if (rng_() % 3 == 0) e.push_back(x);
        if (e.empty()) e.push_back(static_cast<std::uint32_t>(rng_() % spec_.dim));
        return ElementSet::from_unsorted(std::move(e));
      }
    }
  }

  /// A point of cluster `c` out of `k`; cluster cores are drawn lazily.
  Payload clustered(std::size_t c, std::size_t k) {
    while (cores_.size() <= c) cores_.push_back(uniform());
    const Payload& core = cores_[c];
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (spec_.metric) {
      case MetricKind::Lp: {
        const double spread = std::max(1.0, spec_.side / (10.0 * std::sqrt(static_cast<double>(k))));
        std::uniform_int_distribution<int> off(-static_cast<int>(spread), static_cast<int>(spread));
        DenseVector v = std::get<DenseVector>(core);
        for (double& x : v.values) x = std::clamp<double>(x + off(rng_), 0.0, spec_.side);
        return v;
      }
      case MetricKind::Hamming: {
        BitVector v = std::get<BitVector>(core);
        for (auto& b : v.bits)
          if (unit(rng_) < 0.05) b ^= 1;
        return v;
      }
      default: {
        const auto& base = std::get<ElementSet>(core).elements;
        std::vector<std::uint32_t> e;
        for (std::uint32_t x = 0; x < spec_.dim; ++x) {
          const bool in_core = std::binary_search(base.begin(), base.end(), x);
          if ((in_core && unit(rng_) < 0.8) || (!in_core && unit(rng_) < 0.03)) e.push_back(x);
        }
        if (e.empty()) e.push_back(base.empty() ? 0 : base.front());
        return ElementSet::from_unsorted(std::move(e));
      }
    }
  }

  void reset_clusters() { cores_.clear(); }

 private:
  const StreamSpec& spec_;
  std::mt19937_64& rng_;
  std::vector<Payload> cores_;
};

}  // namespace

Stream generate(const StreamSpec& spec) {
  if (spec.n == 0) throw ConfigError("generator needs n >= 1");
  if (spec.dim == 0) throw ConfigError("generator needs dim >= 1");
  const bool clustered =
      spec.kind == GeneratorKind::PlantedClusters || spec.kind == GeneratorKind::AdversarialClusterDeletion;
  if (clustered && (spec.k == 0 || spec.k > spec.n)) throw ConfigError("generator needs 1 <= k <= n");
  const std::size_t m = spec.m ? spec.m : 4 * spec.n;

  std::mt19937_64 rng(derive_seed(spec.seed, SeedDomain::Generator, 0));
  PayloadSource source(spec, rng);
  Stream s;
  s.config = source.config();

  PointId next = 0;
  std::vector<PointId> active;
  const auto insert = [&](Payload p) {
    s.ops.push_back({UpdateKind::Insert, next, std::move(p)});
    active.push_back(next++);
  };
  const auto erase_at = [&](std::size_t i) {
    s.ops.push_back({UpdateKind::Delete, active[i], {}});
    active[i] = active.back();
    active.pop_back();
  };

  switch (spec.kind) {
    case GeneratorKind::UniformChurn:
    case GeneratorKind::PlantedClusters: {
      // fill to n, then a fair coin between a fresh insert and a uniform delete
      while (s.ops.size() < m) {
        const bool fill = active.size() < spec.n && s.ops.size() < spec.n;
        const bool do_insert = active.empty() || fill || (active.size() < spec.n && (rng() & 1));
        if (do_insert)
          insert(spec.kind == GeneratorKind::UniformChurn ? source.uniform()
                                                          : source.clustered(rng() % spec.k, spec.k));
        else
          erase_at(rng() % active.size());
      }
      break;
    }
    case GeneratorKind::SlidingWindow: {
      const std::size_t w = spec.window ? spec.window : spec.n;
      // op j deletes the point inserted by op j - w, if that op was an insert
      std::vector<std::optional<PointId>> inserted;
      while (s.ops.size() < m) {
        const std::size_t j = s.ops.size();
        if (j >= w && inserted[j - w]) {
          const PointId victim = *inserted[j - w];
          erase_at(static_cast<std::size_t>(std::find(active.begin(), active.end(), victim) - active.begin()));
          inserted.push_back(std::nullopt);
        } else {
          inserted.push_back(next);
          insert(source.uniform());
        }
      }
      break;
    }
    case GeneratorKind::AdversarialClusterDeletion: {
      // k clusters of n/k points inserted cluster by cluster, then deleted cluster
      // by cluster in reverse order, uniformly at random inside each cluster
      const std::size_t per = spec.n / spec.k;
      while (s.ops.size() < m) {
        std::vector<std::vector<PointId>> members(spec.k);
        source.reset_clusters();
        for (std::size_t c = 0; c < spec.k && s.ops.size() < m; ++c)
          for (std::size_t j = 0; j < per && s.ops.size() < m; ++j) {
            members[c].push_back(next);
            insert(source.clustered(c, spec.k));
          }
        for (std::size_t c = spec.k; c-- > 0;) {
          auto& pts = members[c];
          std::shuffle(pts.begin(), pts.end(), rng);
          for (PointId p : pts) {
            if (s.ops.size() >= m) break;
            erase_at(static_cast<std::size_t>(std::find(active.begin(), active.end(), p) - active.begin()));
          }
        }
        if (per == 0) break;
      }
      break;
    }
  }
  return s;
}

}  // namespace dynkc
