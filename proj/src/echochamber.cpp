// Copyright 2026 The creodrift Authors
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

#include "creodrift/echochamber.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "creodrift/csv.hpp"
#include "creodrift/error.hpp"

namespace creodrift {

GraphSpec GraphSpec::complete(std::size_t n) {
  GraphSpec s;
  s.kind = GraphKind::complete;
  s.n = n;
  return s;
}

GraphSpec GraphSpec::ring(std::size_t n) {
  GraphSpec s;
  s.kind = GraphKind::ring;
  s.n = n;
  return s;
}

GraphSpec GraphSpec::erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
  GraphSpec s;
  s.kind = GraphKind::erdos_renyi;
  s.n = n;
  s.p = p;
  s.seed = seed;
  return s;
}

GraphSpec GraphSpec::two_cliques(std::size_t a, std::size_t b, std::size_t bridges, std::uint64_t seed) {
  GraphSpec s;
  s.kind = GraphKind::two_cliques;
  s.clique_a = a;
  s.clique_b = b;
  s.n = a + b;
  s.bridges = bridges;
  s.seed = seed;
  return s;
}

GraphSpec GraphSpec::custom(std::size_t n, std::vector<Edge> edges) {
  GraphSpec s;
  s.kind = GraphKind::custom;
  s.n = n;
  s.edges = std::move(edges);
  return s;
}

std::vector<std::size_t> PopulationGraph::degrees() const {
  std::vector<std::size_t> deg(n, 0);
  for (const auto& e : edges) {
    ++deg[e.i];
    ++deg[e.j];
  }
  return deg;
}

std::vector<std::size_t> PopulationGraph::components() const {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : edges) {
    auto a = find(e.i), b = find(e.j);
    if (a > b) std::swap(a, b);
    if (a != b) parent[b] = a;
  }
  std::vector<std::size_t> comp(n);
  for (std::size_t v = 0; v < n; ++v) comp[v] = find(v);
  return comp;
}

bool PopulationGraph::connected() const {
  const auto comp = components();
  return std::all_of(comp.begin(), comp.end(), [](std::size_t c) { return c == 0; });
}

namespace {

PopulationGraph finish(std::size_t n, std::vector<Edge> edges, GraphKind kind) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (auto& e : edges) {
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.i == e.j) throw Error(ErrorCode::invalid_input, "population graph: self-loop");
    if (e.j >= n) throw Error(ErrorCode::invalid_input, "population graph: vertex out of range");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw Error(ErrorCode::invalid_input, "population graph: weights must be positive");
    if (!seen.emplace(e.i, e.j).second)
      throw Error(ErrorCode::invalid_input, "population graph: duplicate edge");
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  return PopulationGraph{n, std::move(edges), kind};
}

void add_clique(std::vector<Edge>& edges, std::size_t first, std::size_t size) {
  for (std::size_t i = first; i < first + size; ++i)
    for (std::size_t j = i + 1; j < first + size; ++j) edges.push_back({i, j, 1.0});
}

}  // namespace

PopulationGraph make_graph(const GraphSpec& spec) {
  std::vector<Edge> edges;
  switch (spec.kind) {
    case GraphKind::complete:
      if (spec.n < 2) throw Error(ErrorCode::invalid_input, "complete graph needs n >= 2");
      add_clique(edges, 0, spec.n);
      break;
    case GraphKind::ring:
      if (spec.n < 3) throw Error(ErrorCode::invalid_input, "ring needs n >= 3");
      for (std::size_t i = 0; i < spec.n; ++i) edges.push_back({i, (i + 1) % spec.n, 1.0});
      break;
    case GraphKind::erdos_renyi: {
      if (spec.n < 2 || !(spec.p > 0.0) || spec.p > 1.0)
        throw Error(ErrorCode::invalid_input, "erdos_renyi needs n >= 2 and 0 < p <= 1");
      Rng rng(derive_seed(spec.seed, "erdos_renyi"));
      for (std::size_t attempt = 0; attempt <= spec.max_retries; ++attempt) {
        edges.clear();
        for (std::size_t i = 0; i < spec.n; ++i)
          for (std::size_t j = i + 1; j < spec.n; ++j)
            if (rng.uniform() < spec.p) edges.push_back({i, j, 1.0});
        auto g = finish(spec.n, edges, GraphKind::erdos_renyi);
        if (g.connected()) return g;
      }
      throw Error(ErrorCode::generation, "erdos_renyi: no connected graph within " +
                                             std::to_string(spec.max_retries) + " retries");
    }
    case GraphKind::two_cliques: {
      const std::size_t a = spec.clique_a, b = spec.clique_b;
      if (a < 2 || b < 2) throw Error(ErrorCode::invalid_input, "two_cliques needs cliques of size >= 2");
      if (spec.bridges > a * b) throw Error(ErrorCode::invalid_input, "two_cliques: too many bridges");
      add_clique(edges, 0, a);
      add_clique(edges, a, b);
      // Bridges: a seeded sample without replacement of the a*b cross pairs.
      std::vector<std::size_t> cross(a * b);
      std::iota(cross.begin(), cross.end(), std::size_t{0});
      Rng rng(derive_seed(spec.seed, "bridges"));
      for (std::size_t r = 0; r < spec.bridges; ++r) {
        std::swap(cross[r], cross[r + rng.below(cross.size() - r)]);
        edges.push_back({cross[r] / b, a + cross[r] % b, 1.0});
      }
      return finish(a + b, std::move(edges), GraphKind::two_cliques);
    }
    case GraphKind::custom:
      return finish(spec.n, spec.edges, GraphKind::custom);
  }
  return finish(spec.n, std::move(edges), spec.kind);
}

void SimParams::validate() const {
  if (vocab_size < 2) throw Error(ErrorCode::invalid_input, "vocab_size must be >= 2");
  if (dim < 2) throw Error(ErrorCode::invalid_input, "dim must be >= 2");
  if (utterance_length < 1 || utterance_length > vocab_size)
    throw Error(ErrorCode::invalid_input, "utterance_length must be in [1, vocab_size]");
  if (!(beta > 0.0)) throw Error(ErrorCode::invalid_input, "beta must be > 0");
  if (!(eta >= 0.0) || eta > 1.0) throw Error(ErrorCode::invalid_input, "eta must be in [0, 1]");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::invalid_input, "sigma must be >= 0");
  if (sample_interval < 1) throw Error(ErrorCode::invalid_input, "sample_interval must be >= 1");
}

namespace {

void normalize_rows(Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    if (!normalize(m.row(r))) m(r, 0) = 1.0;  // measure-zero draw of an all-zero row
}

}  // namespace

std::vector<LearnerState> init_population(const PopulationGraph& g, const SimParams& p) {
  p.validate();
  Matrix base;
  if (p.init == InitKind::shared_perturbed) {
    Rng rng(derive_seed(p.seed, "base"));
    base = Matrix(p.vocab_size, p.dim);
    for (double& x : base.data()) x = rng.normal();
    normalize_rows(base);
  }
  std::vector<LearnerState> pop;
  pop.reserve(g.n);
  for (std::size_t id = 0; id < g.n; ++id) {
    LearnerState s{id, Matrix(p.vocab_size, p.dim), Rng(derive_seed(p.seed, std::uint64_t{id}))};
    if (p.init == InitKind::shared_perturbed) {
      s.representation = base;
      if (p.sigma > 0.0) {
        for (double& x : s.representation.data()) x += p.sigma * s.rng.normal();
        normalize_rows(s.representation);
      }
    } else {
      for (double& x : s.representation.data()) x = s.rng.normal();
      normalize_rows(s.representation);
    }
    pop.push_back(std::move(s));
  }
  return pop;
}

double representation_distance(const Matrix& a, const Matrix& b) {
  // 2 atan2(|a-b|, |a+b|) is the angle between unit vectors, and unlike acos
  // of the dot product it stays exact near zero.
  double total = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto x = a.row(r), y = b.row(r);
    double diff = 0.0, sum = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      diff += (x[k] - y[k]) * (x[k] - y[k]);
      sum += (x[k] + y[k]) * (x[k] + y[k]);
    }
    total += 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum)) / std::numbers::pi;
  }
  return total / static_cast<double>(a.rows());
}

double mean_pairwise_distance(const std::vector<LearnerState>& pop) {
  if (pop.size() < 2) return 0.0;
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < pop.size(); ++i)
    for (std::size_t j = i + 1; j < pop.size(); ++j) {
      total += representation_distance(pop[i].representation, pop[j].representation);
      ++pairs;
    }
  return total / static_cast<double>(pairs);
}

std::vector<std::size_t> sample_utterance(const Matrix& rep, std::size_t topic, std::size_t k,
                                          double beta, Rng& rng) {
  const std::size_t v = rep.rows();
  std::vector<double> weight(v);
  const auto t = rep.row(topic);
  // Subtracting beta (the largest possible exponent) keeps exp() in range.
  for (std::size_t w = 0; w < v; ++w) weight[w] = std::exp(beta * (dot(rep.row(w), t) - 1.0));
  std::vector<std::size_t> words;
  words.reserve(k);
  for (std::size_t draw = 0; draw < k; ++draw) {
    double total = 0.0;
    for (double x : weight) total += x;
    double u = rng.uniform() * total;
    std::size_t pick = v;
    for (std::size_t w = 0; w < v; ++w) {
      if (weight[w] == 0.0) continue;
      pick = w;
      if (u < weight[w]) break;
      u -= weight[w];
    }
    words.push_back(pick);
    weight[pick] = 0.0;
  }
  return words;
}

void listener_update(Matrix& listener, const Matrix& speaker, const std::vector<std::size_t>& words,
                     std::size_t topic, double eta) {
  if (eta == 0.0) return;
  auto move_row = [&](std::size_t w) {
    auto l = listener.row(w);
    const auto s = speaker.row(w);
    if (std::equal(l.begin(), l.end(), s.begin())) return;
    std::vector<double> next(l.begin(), l.end());
    for (std::size_t k = 0; k < next.size(); ++k) next[k] += eta * (s[k] - l[k]);
    if (normalize(next)) std::copy(next.begin(), next.end(), l.begin());
  };
  std::vector<std::size_t> touched = words;
  touched.push_back(topic);
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  for (std::size_t w : touched) move_row(w);
}

Simulation::Simulation(PopulationGraph graph, SimParams params)
    : graph_(std::move(graph)), params_(std::move(params)) {
  pop_ = init_population(graph_, params_);
  const std::uint64_t edge_root = derive_seed(params_.seed, "edges");
  edge_rng_.reserve(graph_.edges.size());
  for (std::size_t e = 0; e < graph_.edges.size(); ++e) {
    const auto& ed = graph_.edges[e];
    edge_rng_.emplace_back(derive_seed(edge_root, (std::uint64_t{ed.i} << 32) | std::uint64_t{ed.j}));
    clocks_.push({-std::log(edge_rng_[e].uniform_pos()) / ed.weight, e});
  }
}

ConversationEvent Simulation::step() {
  ConversationEvent ev;
  ev.step = ++steps_;
  if (clocks_.empty()) return ev;
  const Clock c = clocks_.top();
  clocks_.pop();
  const auto& ed = graph_.edges[c.edge];
  Rng& erng = edge_rng_[c.edge];
  const bool flip = erng.coin();
  clocks_.push({c.time - std::log(erng.uniform_pos()) / ed.weight, c.edge});

  ev.speaker = flip ? ed.j : ed.i;
  ev.listener = flip ? ed.i : ed.j;
  LearnerState& speaker = pop_[ev.speaker];
  ev.topic = speaker.rng.below(params_.vocab_size);
  ev.words = sample_utterance(speaker.representation, ev.topic, params_.utterance_length, params_.beta,
                              speaker.rng);
  listener_update(pop_[ev.listener].representation, speaker.representation, ev.words, ev.topic,
                  params_.eta);
  return ev;
}

SimulationResult simulate(const PopulationGraph& g, const SimParams& p,
                          const std::vector<std::size_t>& checkpoints, const CheckpointFn& on_checkpoint) {
  Simulation sim(g, p);
  SimulationResult r;
  auto checkpoint = [&](std::size_t s) {
    if (on_checkpoint && std::find(checkpoints.begin(), checkpoints.end(), s) != checkpoints.end())
      on_checkpoint(s, sim.population());
  };
  checkpoint(0);
  r.events.reserve(p.steps);
  r.drift.steps.push_back(0);
  r.drift.mean_distance.push_back(mean_pairwise_distance(sim.population()));
  for (std::size_t s = 1; s <= p.steps; ++s) {
    r.events.push_back(sim.step());
    checkpoint(s);
    if (s % p.sample_interval == 0 || s == p.steps) {
      r.drift.steps.push_back(s);
      r.drift.mean_distance.push_back(mean_pairwise_distance(sim.population()));
    }
  }
  r.final_population = sim.population();
  return r;
}

std::vector<PersistenceDiagram> snapshot_diagrams(const std::vector<LearnerState>& pop,
                                                  std::size_t top_n, int max_dim, double max_eps) {
  std::vector<PersistenceDiagram> out;
  out.reserve(pop.size());
  for (const auto& learner : pop) {
    const std::size_t n = std::min(top_n, learner.representation.rows());
    std::vector<std::string> labels;
    Matrix pts(n, learner.representation.cols());
    for (std::size_t r = 0; r < n; ++r) {
      labels.push_back("w" + std::to_string(r));
      std::copy_n(learner.representation.row(r).begin(), pts.cols(), pts.row(r).begin());
    }
    const auto cloud = make_point_cloud(std::move(labels), std::move(pts), Metric::angular);
    const auto f = build_vr_filtration(pairwise_distances(cloud), max_dim, max_eps);
    out.push_back(compute_persistence(f, {.generators = false}));
  }
  return out;
}

void write_drift_csv(const DriftSeries& s, std::ostream& out) {
  out << "step,mean_distance\n";
  for (std::size_t i = 0; i < s.steps.size(); ++i) out << s.steps[i] << ',' << csv::format_double(s.mean_distance[i]) << '\n';
}

void write_events_csv(const std::vector<ConversationEvent>& events, std::ostream& out) {
  out << "step,speaker,listener,topic,words\n";
  for (const auto& e : events) {
    out << e.step << ',' << e.speaker << ',' << e.listener << ',' << e.topic << ',';
    for (std::size_t i = 0; i < e.words.size(); ++i) out << (i ? " " : "") << e.words[i];
    out << '\n';
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw Error(ErrorCode::validation, "config: bad value for '" + key + "': " + v);
  return out;
}

std::vector<std::string> split_list(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

}  // namespace

SimConfig parse_sim_config(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::validation, "config line " + std::to_string(lineno) + ": expected key = value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  SimConfig c;
  auto take = [&](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto size = [&](const char* key, std::size_t& dst) {
    if (auto v = take(key)) dst = parse_number<std::size_t>(key, *v);
  };
  auto real = [&](const char* key, double& dst) {
    if (auto v = take(key)) dst = parse_number<double>(key, *v);
  };

  if (auto v = take("name")) c.name = *v;
  std::string graph = take("graph").value_or("complete");
  auto& g = c.graph;
  size("n", g.n);
  real("p", g.p);
  size("clique_a", g.clique_a);
  size("clique_b", g.clique_b);
  size("bridges", g.bridges);
  size("max_retries", g.max_retries);
  if (graph == "complete") {
    g.kind = GraphKind::complete;
  } else if (graph == "ring") {
    g.kind = GraphKind::ring;
  } else if (graph == "erdos_renyi") {
    g.kind = GraphKind::erdos_renyi;
  } else if (graph == "two_cliques") {
    g.kind = GraphKind::two_cliques;
    g.n = g.clique_a + g.clique_b;
  } else if (graph == "custom") {
    g.kind = GraphKind::custom;
    // edges = 0-1:1.0, 1-2, ...
    for (const auto& item : split_list(take("edges").value_or(""), ',')) {
      Edge e;
      const auto colon = item.find(':');
      const std::string ends = item.substr(0, colon);
      if (colon != std::string::npos) e.weight = parse_number<double>("edges", trim(item.substr(colon + 1)));
      const auto dash = ends.find('-');
      if (dash == std::string::npos) throw Error(ErrorCode::validation, "config: bad edge '" + item + "'");
      e.i = parse_number<std::size_t>("edges", trim(ends.substr(0, dash)));
      e.j = parse_number<std::size_t>("edges", trim(ends.substr(dash + 1)));
      g.edges.push_back(e);
    }
  } else {
    throw Error(ErrorCode::validation, "config: unknown graph '" + graph + "'");
  }

  auto& p = c.params;
  size("vocab_size", p.vocab_size);
  size("dim", p.dim);
  size("steps", p.steps);
  size("utterance_length", p.utterance_length);
  real("beta", p.beta);
  real("eta", p.eta);
  real("sigma", p.sigma);
  size("sample_interval", p.sample_interval);
  if (auto v = take("seed")) {
    p.seed = parse_number<std::uint64_t>("seed", *v);
    g.seed = p.seed;
  }
  if (auto v = take("graph_seed")) g.seed = parse_number<std::uint64_t>("graph_seed", *v);
  if (auto v = take("init")) {
    if (*v == "independent")
      p.init = InitKind::independent;
    else if (*v == "shared_perturbed")
      p.init = InitKind::shared_perturbed;
    else
      throw Error(ErrorCode::validation, "config: unknown init '" + *v + "'");
  }
  if (auto v = take("checkpoints"))
    for (const auto& item : split_list(*v, ',')) c.checkpoints.push_back(parse_number<std::size_t>("checkpoints", item));
  std::sort(c.checkpoints.begin(), c.checkpoints.end());
  size("snapshot_top_n", c.snapshot_top_n);
  if (auto v = take("snapshot_max_dim")) c.snapshot_max_dim = parse_number<int>("snapshot_max_dim", *v);
  real("snapshot_max_eps", c.snapshot_max_eps);

  if (!kv.empty()) throw Error(ErrorCode::validation, "config: unknown key '" + kv.begin()->first + "'");
  p.validate();
  return c;
}

}  // namespace creodrift
