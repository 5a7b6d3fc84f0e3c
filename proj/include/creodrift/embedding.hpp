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
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "creodrift/corpus.hpp"
#include "creodrift/matrix.hpp"
#include "creodrift/point_cloud.hpp"

namespace creodrift {

/// Words ordered by count (desc) then lexicographically.
struct Vocabulary {
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  std::unordered_map<std::string, std::size_t> index;

  std::size_t size() const noexcept { return words.size(); }
  std::optional<std::size_t> find(const std::string& word) const;

  /// Keeps entries with count >= min_count and orders them.
  static Vocabulary from_counts(const std::unordered_map<std::string, std::uint64_t>& counts,
                                std::uint64_t min_count);

  bool operator==(const Vocabulary& o) const { return words == o.words && counts == o.counts; }
};

struct TrainParams {
  std::size_t dim = 64;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;  // decays linearly to min_learning_rate
  std::uint64_t min_count = 5;
  double subsample_threshold = 1e-3;  // <= 0 disables subsampling
  std::uint64_t seed = 1;

  static constexpr double min_learning_rate = 1e-4;

  void validate() const;
  bool operator==(const TrainParams&) const = default;
};

/// Skip-gram model: `input` holds word vectors, `output` context vectors.
struct EmbeddingModel {
  Vocabulary vocab;
  Matrix input;
  Matrix output;
  TrainParams params;
  std::uint64_t rng_seed = 0;
  /// Number of incremental windows applied after the initial training.
  std::uint32_t generation = 0;

  std::size_t dim() const noexcept { return input.cols(); }
  bool operator==(const EmbeddingModel&) const = default;
};

Vocabulary build_vocab(const Corpus& corpus, std::uint64_t min_count);

EmbeddingModel train_skipgram(const Corpus& corpus, const TrainParams& params);

/// Warm-start continuation on the next window: the vocabulary is extended
/// with new words reaching min_count there, then training runs on
/// `next_corpus` only. An empty corpus returns the model unchanged.
EmbeddingModel train_incremental(const EmbeddingModel& model, const Corpus& next_corpus);

/// First top_n vocabulary rows of the input matrix (clamped to |V|).
PointCloud point_cloud(const EmbeddingModel& model, std::size_t top_n, Metric metric);

// Binary model file, little-endian: magic "CREO-EMB", version, |V|, d, seed,
// params, vocabulary block, then the input and output matrices row-major.
void save_model(const EmbeddingModel& model, std::ostream& out);
EmbeddingModel load_model(std::istream& in);

namespace sgns {

double sigmoid(double x);

/// Loss for one (center, context) pair with the given negative context
/// vectors: -log s(u_o.v_c) - sum_j log s(-u_j.v_c).
double pair_loss(std::span<const double> center, std::span<const double> context,
                 const std::vector<std::span<const double>>& negatives);

struct PairGradient {
  std::vector<double> center;
  std::vector<double> context;
  std::vector<std::vector<double>> negatives;
};

PairGradient pair_gradient(std::span<const double> center, std::span<const double> context,
                           const std::vector<std::span<const double>>& negatives);

/// One SGD update on a (center, context, negatives) instance; this is the
/// step the trainer applies. `scratch` must have the vector dimension.
void apply_pair_update(std::span<double> center, std::span<double> context,
                       const std::vector<std::span<double>>& negatives, double lr,
                       std::span<double> scratch);

}  // namespace sgns

}  // namespace creodrift
