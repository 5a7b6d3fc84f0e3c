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
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "creodrift/topology.hpp"

namespace creodrift {

/// A finite diagram point (birth, death).
struct DiagramPoint {
  double birth;
  double death;
};

/// l-infinity distance between two diagram points.
double point_cost(const DiagramPoint& a, const DiagramPoint& b) noexcept;
/// l-infinity distance of a point to the diagonal: (death - birth) / 2.
double diagonal_cost(const DiagramPoint& p) noexcept;

/// Bottleneck distance between finite point sets, by binary search over the
/// candidate costs with a maximum-matching feasibility test.
double bottleneck_finite(const std::vector<DiagramPoint>& a, const std::vector<DiagramPoint>& b);

/// q-Wasserstein distance between finite point sets, by exact assignment on
/// the diagonal-augmented problem.
double wasserstein_finite(const std::vector<DiagramPoint>& a, const std::vector<DiagramPoint>& b,
                          double q);

/// Minimum-cost perfect assignment on a square cost matrix (row-major).
/// Returns the column assigned to each row.
std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n);

/// Throws IncomparableDiagrams when the infinite-bar counts differ in `dim`.
double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim);
double wasserstein_distance(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim,
                            double q);

struct DistanceKind {
  enum class Type { bottleneck, wasserstein } type = Type::bottleneck;
  double q = 1.0;

  static DistanceKind bottleneck() { return {}; }
  static DistanceKind wasserstein(double q) { return {Type::wasserstein, q}; }
  std::string name() const;
};

double diagram_distance(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim,
                        const DistanceKind& kind);

struct DiagramDistanceMatrix {
  std::vector<std::string> labels;
  int dim = 0;
  DistanceKind kind;
  std::vector<double> entries;  // row-major, symmetric, zero diagonal

  std::size_t size() const noexcept { return labels.size(); }
  double operator()(std::size_t i, std::size_t j) const { return entries[i * labels.size() + j]; }
  DistanceMatrix as_distance_matrix() const;
};

struct LabeledDiagram {
  std::string label;
  const PersistenceDiagram* diagram;
};

/// All unordered pairs. If any pair is incomparable, throws an Error listing
/// every such pair and no matrix is produced.
DiagramDistanceMatrix distance_matrix(const std::vector<LabeledDiagram>& diagrams, int dim,
                                      const DistanceKind& kind, unsigned threads = 1);

/// Matrix CSV: first row and column hold the labels.
void write_diagram_matrix_csv(const DiagramDistanceMatrix& dm, std::ostream& out);
DiagramDistanceMatrix read_diagram_matrix_csv(std::istream& in);

/// Pair report rows `label_a,label_b,dim,kind,value`.
void write_pair_report_csv(const DiagramDistanceMatrix& dm, std::ostream& out);

enum class GroupPairs { within, across, all };

struct GroupMean {
  std::string group_a;  // group_a <= group_b
  std::string group_b;
  double mean = 0.0;
  std::size_t count = 0;
};

/// Mean of d(u, v) over u in G, v in H, u != v, for each requested group pair.
/// A singleton group has no within-group mean and raises undefined-mean.
std::vector<GroupMean> mean_group_distance(const DiagramDistanceMatrix& dm,
                                           const std::map<std::string, std::string>& groups,
                                           GroupPairs which = GroupPairs::all);

}  // namespace creodrift
