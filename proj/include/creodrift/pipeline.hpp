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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "creodrift/corpus.hpp"
#include "creodrift/diagram_distance.hpp"
#include "creodrift/echochamber.hpp"
#include "creodrift/embedding.hpp"
#include "creodrift/point_cloud.hpp"
#include "creodrift/projection.hpp"

namespace creodrift {

inline constexpr const char* kToolVersion = "0.3.1";

enum class Experiment { user_clusters, subreddit_divergence, isotropy_audit, user_drift, simulate };

const char* to_string(Experiment e) noexcept;
/// Accepts `user-clusters` and `user_clusters` spellings; throws a validation error otherwise.
Experiment parse_experiment(std::string_view s);

struct CloudSettings {
  std::size_t top_n = 200;
  Metric metric = Metric::angular;
};

struct PersistenceSettings {
  int max_dim = 2;
  double max_eps = 1.0;
  std::size_t budget = kDefaultSimplexBudget;
};

struct DistanceSettings {
  DistanceKind kind;
  std::vector<int> dims;  // empty: 0..max_dim
};

struct AuditSettings {
  std::optional<std::string> community;  // defaults to the only community
  double min_persistence = 0.1;
  double dominance_ratio = 3.0;
};

/// Parsed run manifest. Relative paths in the file resolve against the
/// manifest's directory.
struct Manifest {
  Experiment experiment = Experiment::user_clusters;
  std::uint64_t seed = 0;
  std::filesystem::path path;
  std::filesystem::path output_dir;
  std::string sha256;

  std::map<std::string, std::filesystem::path> communities;
  std::optional<std::filesystem::path> cloud;  // isotropy audit on a ready-made point cloud
  Metric cloud_metric = Metric::euclidean;

  CorpusFilter filter;
  TrainParams train;
  std::size_t top_users = 3;
  CloudSettings cloud_settings;
  PersistenceSettings persistence;
  DistanceSettings distance;
  TsneParams tsne;
  int projection_dim = 0;
  AuditSettings audit;
  std::vector<SimConfig> sim_configs;

  std::vector<int> distance_dims() const;
};

struct ManifestOverrides {
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
};

/// Throws ErrorCode::validation for anything wrong with the manifest itself,
/// including referenced inputs that do not exist.
Manifest load_manifest(const std::filesystem::path& path, const ManifestOverrides& overrides = {});
Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                        const ManifestOverrides& overrides = {});

struct StageRecord {
  std::string name;
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // path relative to the output dir -> sha256
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
};

struct ProvenanceRecord {
  std::string tool_version;
  std::string experiment;
  std::string manifest_sha256;
  std::uint64_t seed = 0;
  std::vector<StageRecord> stages;

  /// Everything except wall-clock times, so reruns can be compared.
  std::string content_digest() const;
};

std::string provenance_json(const ProvenanceRecord& rec);
ProvenanceRecord read_provenance(const std::filesystem::path& path);

struct RunOptions {
  unsigned threads = 1;
  /// Run a single stage against the files earlier stages left behind.
  std::optional<std::string> stage;
};

std::vector<std::string> stage_names(const Manifest& m);

/// Runs the manifest's experiment and writes provenance.json into the output
/// directory. A failing stage is reported by name; files already written stay.
ProvenanceRecord run_experiment(const Manifest& m, const RunOptions& opts = {});

}  // namespace creodrift
