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

// Slow, independent reference computations used only by the tests.

#include <cstddef>
#include <vector>

#include "creodrift/diagram_distance.hpp"
#include "creodrift/topology.hpp"

namespace oracle {

struct Bar {
  int dim;
  double birth;
  double death;  // +inf for essential classes

  bool operator==(const Bar&) const = default;
  auto operator<=>(const Bar&) const = default;
};

/// Persistence barcode (positive-persistence bars only, sorted) of the
/// Vietoris-Rips filtration of a matrix with n <= 10 points, from persistent
/// Betti numbers beta_k^{a,b} = dim Z_k(K_a) - dim(Z_k(K_a) & B_k(K_b)) and
/// inclusion-exclusion over the grid of filtration values.
std::vector<Bar> rips_barcode(const creodrift::DistanceMatrix& dm, int max_dim, double max_eps);

/// Bars of a diagram in the same form.
std::vector<Bar> bars_of(const creodrift::PersistenceDiagram& d);

/// Exhaustive search over partial matchings (points left unmatched go to the
/// diagonal). Exponential; keep each side to a handful of points.
double brute_bottleneck(const std::vector<creodrift::DiagramPoint>& a, const std::vector<creodrift::DiagramPoint>& b);
double brute_wasserstein(const std::vector<creodrift::DiagramPoint>& a, const std::vector<creodrift::DiagramPoint>& b,
                         double q);

/// Negative-sampling loss written out independently of the library.
double sgns_loss(const std::vector<double>& center, const std::vector<double>& context,
                 const std::vector<std::vector<double>>& negatives);

struct SgnsGradient {
  std::vector<double> center;
  std::vector<double> context;
  std::vector<std::vector<double>> negatives;
};

/// Central finite differences of sgns_loss with step h.
SgnsGradient sgns_numeric_gradient(const std::vector<double>& center, const std::vector<double>& context,
                                   const std::vector<std::vector<double>>& negatives, double h = 1e-5);

}  // namespace oracle
