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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "creodrift/diagram_distance.hpp"
#include "creodrift/matrix.hpp"
#include "creodrift/topology.hpp"

namespace creodrift {

struct TsneParams {
  double perplexity = 10.0;
  std::size_t iterations = 1000;
  double early_exaggeration = 12.0;
  std::size_t exaggeration_iterations = 250;
  double learning_rate = 200.0;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::uint64_t seed = 1;

  void validate(std::size_t n) const;
};

struct Projection2D {
  std::vector<std::string> labels;
  Matrix coordinates;  // n x 2, rows aligned with labels
  double kl = 0.0;
  std::vector<double> kl_history;  // one value per iteration, without exaggeration
};

/// Joint affinities P (n x n, zero diagonal, sums to 1) from per-point
/// Gaussian kernels exp(-beta_i d_ij^2) tuned to the requested perplexity.
Matrix tsne_affinities(const DistanceMatrix& dm, double perplexity);

/// Exact t-SNE on a precomputed distance matrix. Rows are processed in label
/// order and each point's start position is drawn from a stream keyed by its
/// label, so permuting the input permutes the output identically. Labels must
/// be unique; an unlabeled matrix gets labels "0", "1", ...
Projection2D tsne_precomputed(const DistanceMatrix& dm, const TsneParams& p);
Projection2D tsne_precomputed(const DiagramDistanceMatrix& dm, const TsneParams& p);

struct ScatterArtifacts {
  std::string csv;  // label,group,x,y
  std::string svg;
};

/// Every projected label must appear in `groups`.
ScatterArtifacts export_scatter(const Projection2D& proj, const std::map<std::string, std::string>& groups);

}  // namespace creodrift
