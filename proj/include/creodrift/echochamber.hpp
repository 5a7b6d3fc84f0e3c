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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "creodrift/matrix.hpp"
#include "creodrift/rng.hpp"
#include "creodrift/topology.hpp"

namespace creodrift {

struct Edge {
  std::size_t i = 0;  // i < j
  std::size_t j = 0;
  double weight = 1.0;

  bool operator==(const Edge&) const = default;
};

enum class GraphKind { complete, ring, erdos_renyi, two_cliques, custom };

struct GraphSpec {
  GraphKind kind = GraphKind::complete;
  std::size_t n = 0;             // complete, ring, erdos_renyi, custom
  double p = 0.5;                // erdos_renyi
  std::size_t clique_a = 0;      // two_cliques
  std::size_t clique_b = 0;
  std::size_t bridges = 0;
  std::vector<Edge> edges;       // custom
  std::uint64_t seed = 1;        // erdos_renyi, two_cliques bridge placement
  std::size_t max_retries = 100;

  static GraphSpec complete(std::size_t n);
  static GraphSpec ring(std::size_t n);
  static GraphSpec erdos_renyi(std::size_t n, double p, std::uint64_t seed);
  static GraphSpec two_cliques(std::size_t a, std::size_t b, std::size_t bridges, std::uint64_t seed = 1);
  static GraphSpec custom(std::size_t n, std::vector<Edge> edges);
};

struct PopulationGraph {
  std::size_t n = 0;
  std::vector<Edge> edges;  // sorted by (i, j)
  GraphKind kind = GraphKind::custom;

  std::vector<std::size_t> degrees() const;
  /// Component id per vertex, numbered by smallest member.
  std::vector<std::size_t> components() const;
  bool connected() const;
};

/// Deterministic given the spec. Erdos-Renyi graphs are redrawn until
/// connected; throws a generation error when the retry budget runs out.
PopulationGraph make_graph(const GraphSpec& spec);

enum class InitKind { shared_perturbed, independent };

struct SimParams {
  std::size_t vocab_size = 50;
  std::size_t dim = 16;
  std::size_t steps = 20000;
  std::size_t utterance_length = 8;
  double beta = 5.0;
  double eta = 0.05;
  InitKind init = InitKind::independent;
  double sigma = 0.1;  // shared_perturbed noise scale
  std::uint64_t seed = 1;
  std::size_t sample_interval = 100;

  void validate() const;
};

struct LearnerState {
  std::size_t id = 0;
  Matrix representation;  // vocab_size x dim, unit rows
  Rng rng;                // seeded from (seed, id)
};

std::vector<LearnerState> init_population(const PopulationGraph& g, const SimParams& p);

struct ConversationEvent {
  std::size_t step = 0;  // 1 for the first conversation
  std::size_t speaker = 0;
  std::size_t listener = 0;
  std::size_t topic = 0;
  std::vector<std::size_t> words;

  bool operator==(const ConversationEvent&) const = default;
};

/// Mean over rows of the angle between a_r and b_r, divided by pi.
double representation_distance(const Matrix& a, const Matrix& b);
/// Mean of representation_distance over all learner pairs (0 for n < 2).
double mean_pairwise_distance(const std::vector<LearnerState>& pop);

/// Speaker utterance: k words drawn without replacement with probability
/// proportional to exp(beta * cos(R[w], R[topic])).
std::vector<std::size_t> sample_utterance(const Matrix& rep, std::size_t topic, std::size_t k,
                                          double beta, Rng& rng);

/// Moves the listener's rows for the uttered words and the topic toward the
/// speaker's: R_l[w] <- normalize(R_l[w] + eta (R_s[w] - R_l[w])).
void listener_update(Matrix& listener, const Matrix& speaker, const std::vector<std::size_t>& words,
                     std::size_t topic, double eta);

/// Sequential conversation process. Each edge owns a stream keyed by its
/// endpoints and an exponential clock with rate equal to its weight; the
/// earliest clock fires next, so an edge is chosen with probability
/// proportional to its weight and components evolve independently.
class Simulation {
 public:
  Simulation(PopulationGraph graph, SimParams params);

  ConversationEvent step();
  std::size_t steps_done() const noexcept { return steps_; }

  const PopulationGraph& graph() const noexcept { return graph_; }
  const SimParams& params() const noexcept { return params_; }
  const std::vector<LearnerState>& population() const noexcept { return pop_; }

 private:
  struct Clock {
    double time;
    std::size_t edge;
    bool operator>(const Clock& o) const {
      return time != o.time ? time > o.time : edge > o.edge;
    }
  };

  PopulationGraph graph_;
  SimParams params_;
  std::vector<LearnerState> pop_;
  std::vector<Rng> edge_rng_;
  std::priority_queue<Clock, std::vector<Clock>, std::greater<Clock>> clocks_;
  std::size_t steps_ = 0;
};

struct DriftSeries {
  std::vector<std::size_t> steps;
  std::vector<double> mean_distance;
};

struct SimulationResult {
  DriftSeries drift;
  std::vector<ConversationEvent> events;
  std::vector<LearnerState> final_population;
};

using CheckpointFn = std::function<void(std::size_t step, const std::vector<LearnerState>&)>;

/// Runs params.steps events, sampling the mean pairwise distance at step 0,
/// every sample_interval steps and at the end. `on_checkpoint` sees the
/// population after each listed step (0 = initial state).
SimulationResult simulate(const PopulationGraph& g, const SimParams& p,
                          const std::vector<std::size_t>& checkpoints = {},
                          const CheckpointFn& on_checkpoint = {});

/// One angular point cloud per learner (first top_n rows, labels w0, w1, ...)
/// and its persistence diagram.
std::vector<PersistenceDiagram> snapshot_diagrams(const std::vector<LearnerState>& pop,
                                                  std::size_t top_n, int max_dim, double max_eps);

void write_drift_csv(const DriftSeries& s, std::ostream& out);
/// `step,speaker,listener,topic,words` with words joined by spaces.
void write_events_csv(const std::vector<ConversationEvent>& events, std::ostream& out);

/// A run configuration read from a flat `key = value` text file.
struct SimConfig {
  std::string name;
  GraphSpec graph;
  SimParams params;
  std::vector<std::size_t> checkpoints;
  std::size_t snapshot_top_n = 50;
  int snapshot_max_dim = 1;
  double snapshot_max_eps = 1.0;
};

SimConfig parse_sim_config(std::string_view text);

}  // namespace creodrift
