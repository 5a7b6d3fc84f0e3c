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

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "creodrift/matrix.hpp"

namespace creodrift {

enum class Metric { angular, euclidean };

const char* to_string(Metric m) noexcept;
Metric parse_metric(std::string_view s);

/// Labeled points. For Metric::angular every row has unit norm.
struct PointCloud {
  std::vector<std::string> labels;
  Matrix points;
  Metric metric = Metric::angular;
  /// Set when fewer points than requested were available.
  bool clamped = false;

  std::size_t size() const noexcept { return labels.size(); }
};

/// Checks label/row agreement and finiteness; normalizes rows for angular clouds.
PointCloud make_point_cloud(std::vector<std::string> labels, Matrix points, Metric metric);

/// CSV with header `word,x1,...,xd`.
void write_point_cloud_csv(const PointCloud& cloud, std::ostream& out);
PointCloud read_point_cloud_csv(std::istream& in, Metric metric);

}  // namespace creodrift
