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

// Acceptance suite: one line per criterion, non-zero exit if any fails.
// Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "creodrift/csv.hpp"
#include "creodrift/diagram_distance.hpp"
#include "creodrift/echochamber.hpp"
#include "creodrift/embedding.hpp"
#include "creodrift/io.hpp"
#include "creodrift/pipeline.hpp"
#include "creodrift/projection.hpp"
#include "creodrift/topology.hpp"
#include "oracles.hpp"
#include "synth.hpp"

namespace fs = std::filesystem;
using namespace creodrift;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;
  std::function<Outcome()> run;
};

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

PersistenceDiagram diagram_of(const DistanceMatrix& dm, int max_dim, double max_eps, bool generators = false) {
  return compute_persistence(build_vr_filtration(dm, max_dim, max_eps), {.generators = generators});
}

std::vector<double> persistences(const PersistenceDiagram& d, int dim) {
  std::vector<double> p;
  for (const auto& pair : d.view(dim)) p.push_back(pair.persistence());
  std::sort(p.rbegin(), p.rend());
  return p;
}

// 1
Outcome persistence_oracle() {
  Rng rng(101);
  int mismatches = 0;
  std::string first;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng.below(6);
    const std::size_t d = 1 + rng.below(3);
    const Metric metric = trial % 2 ? Metric::euclidean : Metric::angular;
    const auto cloud = synth::random_cloud(n, metric == Metric::angular ? std::max<std::size_t>(d, 2) : d, metric, rng);
    const auto dm = pairwise_distances(cloud);
    const int max_dim = static_cast<int>(rng.below(3));
    // Half the trials truncate the filtration below the diameter.
    double max_eps = kInfinity;
    if (trial % 4 >= 2) {
      std::vector<double> e(dm.entries().begin(), dm.entries().end());
      std::sort(e.begin(), e.end());
      max_eps = e[e.size() / 2 + rng.below(e.size() / 2)];
      if (max_eps <= 0.0) max_eps = kInfinity;
    }
    const auto got = oracle::bars_of(diagram_of(dm, max_dim, max_eps));
    const auto want = oracle::rips_barcode(dm, max_dim, max_eps);
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) {
      same = got[i].dim == want[i].dim && std::abs(got[i].birth - want[i].birth) <= 1e-12 &&
             (got[i].death == want[i].death || std::abs(got[i].death - want[i].death) <= 1e-12);
    }
    if (!same && mismatches++ == 0) first = "trial " + std::to_string(trial);
  }
  return {mismatches == 0, "200 clouds, " + std::to_string(mismatches) + " mismatches" + (first.empty() ? "" : " (first: " + first + ")")};
}

// 2
Outcome unit_square() {
  Matrix pts(4, 2);
  const double xy[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  for (std::size_t i = 0; i < 4; ++i) pts(i, 0) = xy[i][0], pts(i, 1) = xy[i][1];
  const auto cloud = make_point_cloud({"a", "b", "c", "d"}, pts, Metric::euclidean);
  const auto diag = diagram_of(pairwise_distances(cloud), 2, 2.0);
  const auto h1 = diag.view(1);
  const bool bar_ok = h1.size() == 1 && std::abs(h1[0].birth - 1.0) <= 1e-9 && std::abs(h1[0].death - std::sqrt(2.0)) <= 1e-9;
  const int b0 = betti_numbers(diag, 1.5)[0];
  const int b1 = betti_numbers(diag, 1.2)[1];
  std::string bars;
  for (const auto& p : h1) bars += "(" + fmt(p.birth, 17) + ", " + fmt(p.death, 17) + ")";
  return {bar_ok && b0 == 1 && b1 == 1, "H1 = {" + bars + "}, beta0(1.5) = " + std::to_string(b0) + ", beta1(1.2) = " + std::to_string(b1)};
}

// 3
Outcome circle() {
  const auto cloud = synth::uniform_circle(100, 2024);
  const auto p = persistences(diagram_of(pairwise_distances(cloud), 1, 2.0), 1);
  const double second = p.size() > 1 ? p[1] : 0.0;
  const bool ok = !p.empty() && p[0] >= 3.0 * second;
  return {ok, std::to_string(p.size()) + " H1 bars, longest " + fmt(p.empty() ? 0 : p[0]) + ", second " + fmt(second)};
}

// 4
Outcome sphere_audit() {
  const auto dir = synth::scratch_dir("sphere_audit");
  const auto cloud = synth::uniform_sphere(150, 3, 7);
  std::ostringstream csv;
  write_point_cloud_csv(cloud, csv);
  write_file(dir / "sphere.csv", csv.str());
  const nlohmann::json manifest = {{"experiment", "isotropy-audit"},
                                   {"seed", 7},
                                   {"output_dir", "out"},
                                   {"inputs", {{"cloud", "sphere.csv"}, {"cloud_metric", "euclidean"}}},
                                   {"persistence", {{"max_dim", 2}, {"max_eps", 2.0}}},
                                   {"audit", {{"min_persistence", 0.1}, {"dominance_ratio", 3.0}}}};
  write_file(dir / "manifest.json", manifest.dump(2));
  run_experiment(load_manifest(dir / "manifest.json"));
  const auto summary = nlohmann::json::parse(read_file(dir / "out" / "audit_summary.json"));
  const auto& h2 = summary["dims"]["2"];
  const bool ok = h2["dominant"].get<bool>();
  std::string ratio = h2["dominance_ratio"].is_null() ? "unbounded" : fmt(h2["dominance_ratio"].get<double>());
  fs::remove_all(dir);
  return {ok, "dim-2: " + std::to_string(h2["bars"].get<int>()) + " bars, top " + fmt(h2["top_persistence"].get<double>()) +
                  ", dominance ratio " + ratio};
}

std::vector<DiagramPoint> random_points(Rng& rng, std::size_t max_points) {
  std::vector<DiagramPoint> pts(rng.below(max_points + 1));
  for (auto& p : pts) {
    // Coarse grid so that ties and equal costs actually occur.
    p.birth = static_cast<double>(rng.below(20)) / 8.0;
    p.death = p.birth + static_cast<double>(1 + rng.below(20)) / 8.0;
  }
  return pts;
}

// 5
Outcome bottleneck_axioms() {
  Rng rng(55);
  int sym = 0, self = 0, tri = 0, brute = 0;
  for (int t = 0; t < 200; ++t) {
    const auto a = random_points(rng, 5), b = random_points(rng, 5), c = random_points(rng, 5);
    const double ab = bottleneck_finite(a, b), ba = bottleneck_finite(b, a);
    const double bc = bottleneck_finite(b, c), ac = bottleneck_finite(a, c);
    sym += ab != ba;
    self += bottleneck_finite(a, a) != 0.0;
    tri += ac > ab + bc + 1e-9;
    brute += ab != oracle::brute_bottleneck(a, b);
  }
  const bool ok = sym + self + tri + brute == 0;
  return {ok, "200 triples: symmetry " + std::to_string(sym) + ", identity " + std::to_string(self) + ", triangle " +
                  std::to_string(tri) + ", brute-force " + std::to_string(brute) + " violations"};
}

// 6
Outcome stability() {
  Rng rng(66);
  const double delta = 0.05;
  double worst_slack = std::numeric_limits<double>::infinity();
  int violations = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 6 + rng.below(7);
    const auto base = pairwise_distances(synth::random_cloud(n, 3, Metric::euclidean, rng));
    std::vector<double> e(base.entries().begin(), base.entries().end());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double v = std::max(0.0, e[i * n + j] + rng.uniform(-delta, delta));
        e[i * n + j] = e[j * n + i] = v;
      }
    const DistanceMatrix moved(n, std::move(e));
    const auto d0 = diagram_of(base, 2, kInfinity), d1 = diagram_of(moved, 2, kInfinity);
    for (int dim = 0; dim <= 2; ++dim) {
      const double b = bottleneck_distance(d0, d1, dim);
      worst_slack = std::min(worst_slack, delta - b);
      violations += b > delta + 1e-9;
    }
  }
  return {violations == 0, "100 trials x 3 dims, " + std::to_string(violations) + " violations, min slack " + fmt(worst_slack)};
}

// 7
Outcome sgns_gradient() {
  Rng rng(77);
  double worst = 0.0;
  auto rel = [](const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      diff = std::max(diff, std::abs(a[i] - b[i]));
      scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
    }
    return diff / std::max(scale, 1e-12);
  };
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 4 + rng.below(29);
    const std::size_t k = 1 + rng.below(8);
    auto vec = [&] {
      std::vector<double> v(d);
      for (double& x : v) x = rng.normal() * 0.7;
      return v;
    };
    const auto center = vec(), context = vec();
    std::vector<std::vector<double>> negs;
    for (std::size_t j = 0; j < k; ++j) negs.push_back(vec());
    std::vector<std::span<const double>> views(negs.begin(), negs.end());
    const auto g = sgns::pair_gradient(center, context, views);
    const auto fd = oracle::sgns_numeric_gradient(center, context, negs);
    worst = std::max({worst, rel(g.center, fd.center), rel(g.context, fd.context)});
    for (std::size_t j = 0; j < k; ++j) worst = std::max(worst, rel(g.negatives[j], fd.negatives[j]));
  }
  return {worst < 1e-4, "100 instances, max relative error " + fmt(worst, 3)};
}

// 8
Outcome convergence() {
  int converged = 0, plateaued = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimParams p;
    p.seed = seed;
    p.steps = 20000;
    const auto r = simulate(make_graph(GraphSpec::complete(20)), p);
    const auto& m = r.drift.mean_distance;
    const double initial = m.front();
    // Smoothed final value: mean of the last five samples (500 steps).
    double tail = 0.0;
    for (std::size_t i = m.size() - 5; i < m.size(); ++i) tail += m[i];
    tail /= 5.0;
    const std::size_t last_quarter = static_cast<std::size_t>(0.75 * static_cast<double>(p.steps));
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (r.drift.steps[i] >= last_quarter) lo = std::min(lo, m[i]), hi = std::max(hi, m[i]);
    converged += tail < 0.5 * initial;
    plateaued += (hi - lo) < 0.1 * initial;
    if (seed == 1) detail = "seed 1: initial " + fmt(initial) + ", final " + fmt(tail) + ", tail range " + fmt(hi - lo);
  }
  return {converged >= 9 && plateaued >= 9,
          std::to_string(converged) + "/10 converged, " + std::to_string(plateaued) + "/10 plateaued; " + detail};
}

// 9
Outcome locality() {
  SimParams p;
  p.seed = 9;
  p.steps = 6000;
  const auto joint = make_graph(GraphSpec::two_cliques(10, 10, 0));
  Simulation sim(joint, p);
  std::vector<ConversationEvent> events_a, events_b;
  for (std::size_t s = 0; s < p.steps; ++s) {
    auto e = sim.step();
    (e.speaker < 10 ? events_a : events_b).push_back(e);
  }
  auto standalone = [&](std::size_t first) {
    std::vector<Edge> edges;
    for (std::size_t i = first; i < first + 10; ++i)
      for (std::size_t j = i + 1; j < first + 10; ++j) edges.push_back({i, j, 1.0});
    return make_graph(GraphSpec::custom(20, edges));
  };
  bool same = true;
  for (std::size_t first : {std::size_t{0}, std::size_t{10}}) {
    const auto& joint_events = first == 0 ? events_a : events_b;
    Simulation alone(standalone(first), p);
    for (const auto& e : joint_events) {
      auto solo = alone.step();
      solo.step = e.step;  // global step counters differ by construction
      same = same && solo == e;
    }
    for (std::size_t v = first; v < first + 10; ++v)
      same = same && alone.population()[v].representation == sim.population()[v].representation;
  }
  return {same, std::to_string(events_a.size()) + " + " + std::to_string(events_b.size()) +
                    " events; trajectories and final states " + (same ? "bit-identical" : "differ")};
}

// 10
Outcome tsne_clusters() {
  std::vector<std::size_t> truth;
  const auto dm = synth::block_matrix({10, 10, 10}, 0.1, 0.9, &truth);
  int good = 0;
  double worst = 1.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    TsneParams p;
    p.seed = seed;
    const auto proj = tsne_precomputed(dm, p);
    const double agree = synth::best_agreement(synth::kmeans(proj.coordinates, 3, seed), truth, 3);
    good += agree >= 0.95;
    worst = std::min(worst, agree);
  }
  return {good >= 9, std::to_string(good) + "/10 seeds with >= 95% agreement (worst " + fmt(worst) + ")"};
}

std::vector<double> divergence_series(const fs::path& dir, bool identical) {
  const auto corpora = synth::diverging_communities(6, 200, identical, 11);
  write_file(dir / "first.jsonl", corpora.first);
  write_file(dir / "second.jsonl", corpora.second);
  const nlohmann::json manifest = {
      {"experiment", "subreddit-divergence"},
      {"seed", 11},
      {"output_dir", "out"},
      {"inputs", {{"communities", {{"first", "first.jsonl"}, {"second", "second.jsonl"}}}}},
      {"embedding", {{"dim", 16}, {"window", 4}, {"epochs", 5}, {"min_count", 3}}},
      {"cloud", {{"top_n", 40}, {"metric", "angular"}}},
      {"persistence", {{"max_dim", 0}, {"max_eps", 1.0}}},
      {"distance", {{"kind", "bottleneck"}, {"dims", {0}}}}};
  write_file(dir / "manifest.json", manifest.dump(2));
  run_experiment(load_manifest(dir / "manifest.json"));
  std::vector<double> series;
  for (const auto& row : csv::read_file((dir / "out" / "divergence.csv").string()))
    if (row[0] != "month") series.push_back(csv::parse_double(row[3]));
  return series;
}

// 11
Outcome divergence() {
  const auto dir = synth::scratch_dir("divergence");
  const auto series = divergence_series(dir / "diverging", false);
  const auto control = divergence_series(dir / "control", true);
  std::vector<double> t(series.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
  const double rho = synth::spearman(t, series);
  const bool zero = !control.empty() && std::all_of(control.begin(), control.end(), [](double v) { return v == 0.0; });
  std::string s;
  for (double v : series) s += (s.empty() ? "" : " ") + fmt(v, 3);
  fs::remove_all(dir);
  return {series.size() == 6 && rho >= 0.7 && zero,
          "dim-0 series [" + s + "], Spearman " + fmt(rho, 3) + ", control " + (zero ? "all zero" : "NOT zero")};
}

// 12
Outcome determinism() {
  const fs::path manifest = fs::path(CREODRIFT_SOURCE_DIR) / "data" / "toy" / "manifest.json";
  const auto dir = synth::scratch_dir("determinism");
  ManifestOverrides a, b;
  a.output_dir = dir / "a";
  b.output_dir = dir / "b";
  const auto ra = run_experiment(load_manifest(manifest, a));
  const auto rb = run_experiment(load_manifest(manifest, b));
  const auto pa = read_provenance(dir / "a" / "provenance.json");
  const auto pb = read_provenance(dir / "b" / "provenance.json");
  std::size_t artifacts = 0;
  for (const auto& s : pa.stages) artifacts += s.outputs.size();
  const bool ok = pa.content_digest() == pb.content_digest() && ra.content_digest() == pa.content_digest() &&
                  artifacts > 0;
  fs::remove_all(dir);
  return {ok, std::to_string(pa.stages.size()) + " stages, " + std::to_string(artifacts) + " hashed artifacts, digest " +
                  pa.content_digest().substr(0, 12) + (ok ? " on both runs" : " differs")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "persistence matches rank-nullity oracle", 60, persistence_oracle},
      {2, "unit-square fixture", 1, unit_square},
      {3, "circle has one dominant loop", 10, circle},
      {4, "sphere audit finds one dominant void", 120, sphere_audit},
      {5, "bottleneck metric axioms and brute force", 60, bottleneck_axioms},
      {6, "stability under 0.05 perturbation", 120, stability},
      {7, "SGNS gradient check", 10, sgns_gradient},
      {8, "echo-chamber convergence", 300, convergence},
      {9, "echo-chamber locality", 60, locality},
      {10, "t-SNE cluster recovery", 30, tsne_clusters},
      {11, "divergence pipeline sanity", 300, divergence},
      {12, "end-to-end determinism", 120, determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.contains(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.time_limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": " << o.detail << " ("
              << fmt(secs, 3) << " s, limit " << fmt(c.time_limit_s) << " s" << (in_time ? "" : ", TOO SLOW") << ")"
              << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criterion(s) failed" : "all criteria passed") << std::endl;
  return failed ? 1 : 0;
}
