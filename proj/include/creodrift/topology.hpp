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
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "creodrift/point_cloud.hpp"

namespace creodrift {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Symmetric, non-negative, zero-diagonal matrix of point distances.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  /// Validates symmetry, zero diagonal, non-negativity and finiteness.
  DistanceMatrix(std::size_t n, std::vector<double> entries, std::vector<std::string> labels = {});

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  const std::vector<double>& entries() const noexcept { return entries_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> entries_;
  std::vector<std::string> labels_;
};

/// Angular: arccos(clamp(<p,q>))/pi in [0,1]; Euclidean: L2.
DistanceMatrix pairwise_distances(const PointCloud& cloud);

/// Square CSV whose first row holds the labels.
void write_distance_matrix_csv(const DistanceMatrix& dm, std::ostream& out);
DistanceMatrix read_distance_matrix_csv(std::istream& in);

struct Simplex {
  std::vector<int> vertices;  // sorted, distinct
  double value = 0.0;         // max pairwise distance, 0 for vertices

  int dim() const noexcept { return static_cast<int>(vertices.size()) - 1; }
  bool operator==(const Simplex&) const = default;
};

/// Vietoris-Rips filtration, totally ordered by (value, dimension, lexicographic
/// vertices). Simplices are stored compactly as (value, dim, lexicographic rank)
/// and decoded on demand.
class Filtration {
 public:
  struct Entry {
    double value;
    std::int64_t key;  // lexicographic rank among simplices of the same dimension
    int dim;
  };

  const DistanceMatrix& distances() const noexcept { return dm_; }
  int max_dim() const noexcept { return max_dim_; }
  double max_eps() const noexcept { return max_eps_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t count(int dim) const;

  const Entry& entry(std::size_t i) const { return entries_[i]; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  Simplex simplex(std::size_t i) const;

  /// Lexicographic rank of a sorted vertex set, and its inverse.
  std::int64_t rank_of(const std::vector<int>& sorted_vertices) const;
  std::vector<int> vertices_of(int dim, std::int64_t key) const;

 private:
  friend Filtration build_vr_filtration(const DistanceMatrix&, int, double, std::size_t);
  Filtration(DistanceMatrix dm, int max_dim, double max_eps);

  DistanceMatrix dm_;
  int max_dim_ = 0;
  double max_eps_ = 0.0;
  std::vector<std::vector<std::int64_t>> binom_;  // binom_[i][j] = C(i, j)
  std::vector<Entry> entries_;
};

inline constexpr std::size_t kDefaultSimplexBudget = 50'000'000;

/// All simplices up to dimension max_dim+1 with value <= max_eps (closed
/// filtration). Throws BudgetExceeded naming the smallest edge length at
/// which the complex outgrows `budget`.
Filtration build_vr_filtration(const DistanceMatrix& dm, int max_dim, double max_eps,
                               std::size_t budget = kDefaultSimplexBudget);

struct PersistencePair {
  int dim = 0;
  double birth = 0.0;
  double death = kInfinity;
  /// Representative cycle (simplices of dimension `dim`), when computed.
  std::optional<std::vector<Simplex>> generator;

  double persistence() const noexcept { return death - birth; }
  bool infinite() const noexcept { return death == kInfinity; }
};

struct PersistenceDiagram {
  /// Every pair, including zero-persistence ones.
  std::vector<PersistencePair> pairs;
  int max_dim = 0;
  double max_eps = 0.0;
  bool has_generators = false;

  /// Default view: positive-persistence pairs (all dims when dim < 0),
  /// sorted by (dim, birth, death).
  std::vector<PersistencePair> view(int dim = -1) const;
  std::size_t infinite_count(int dim) const;
};

struct PersistenceOptions {
  bool generators = true;
};

/// Persistence pairs over the two-element field. Pairs are found by reducing
/// the coboundary matrix with clearing; generators come from reducing the
/// boundary columns of the death simplices in filtration order.
PersistenceDiagram compute_persistence(const Filtration& f, const PersistenceOptions& opts = {});

/// beta_k(eps) = #{pairs of dim k : birth <= eps < death}.
std::vector<int> betti_numbers(const PersistenceDiagram& diag, double eps);

/// `dim,birth,death` CSV of the default view, `inf` for infinite deaths.
void write_barcode_csv(const PersistenceDiagram& diag, std::ostream& out);
PersistenceDiagram read_barcode_csv(std::istream& in);

struct Hole {
  std::size_t pair_id = 0;  // index into diag.view()
  int dim = 0;
  double birth = 0.0;
  double death = 0.0;
  std::vector<std::string> words;  // sorted, distinct
};

/// Bars of dimension >= 1 with death - birth >= min_persistence (infinite
/// bars always qualify), each labelled with its generator's vertex words.
std::vector<Hole> hole_report(const PersistenceDiagram& diag, double min_persistence,
                              const PointCloud& cloud);

/// Sidecar CSV: `pair_id,dim,vertex_words...`.
void write_generator_csv(const std::vector<Hole>& holes, std::ostream& out);

}  // namespace creodrift
