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

#include "creodrift/point_cloud.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "creodrift/csv.hpp"
#include "creodrift/error.hpp"

namespace creodrift {

const char* to_string(Metric m) noexcept {
  return m == Metric::angular ? "angular" : "euclidean";
}

Metric parse_metric(std::string_view s) {
  if (s == "angular") return Metric::angular;
  if (s == "euclidean") return Metric::euclidean;
  throw Error(ErrorCode::invalid_input, "unknown metric '" + std::string(s) + "'");
}

PointCloud make_point_cloud(std::vector<std::string> labels, Matrix points, Metric metric) {
  if (labels.size() != points.rows())
    throw Error(ErrorCode::invalid_input, "point cloud: label count differs from row count");
  if (!all_finite(points.data()))
    throw Error(ErrorCode::invalid_input, "point cloud: non-finite coordinate");
  if (metric == Metric::angular) {
    for (std::size_t i = 0; i < points.rows(); ++i)
      if (!normalize(points.row(i)))
        throw Error(ErrorCode::invalid_input,
                    "point cloud: zero vector '" + labels[i] + "' has no direction");
  }
  PointCloud c;
  c.labels = std::move(labels);
  c.points = std::move(points);
  c.metric = metric;
  return c;
}

void write_point_cloud_csv(const PointCloud& cloud, std::ostream& out) {
  csv::Row header{"word"};
  for (std::size_t j = 0; j < cloud.points.cols(); ++j) header.push_back("x" + std::to_string(j + 1));
  out << csv::join(header) << '\n';
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    csv::Row row{cloud.labels[i]};
    for (double x : cloud.points.row(i)) row.push_back(csv::format_double(x));
    out << csv::join(row) << '\n';
  }
}

PointCloud read_point_cloud_csv(std::istream& in, Metric metric) {
  auto rows = csv::read(in);
  if (rows.empty()) throw Error(ErrorCode::format, "point cloud CSV: missing header");
  const std::size_t d = rows.front().size() - 1;
  if (d == 0) throw Error(ErrorCode::format, "point cloud CSV: no coordinate columns");
  std::vector<std::string> labels;
  Matrix pts(0, d);
  std::vector<double> buf(d);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != d + 1)
      throw Error(ErrorCode::format, "point cloud CSV: ragged row " + std::to_string(r + 1));
    labels.push_back(rows[r][0]);
    for (std::size_t j = 0; j < d; ++j) buf[j] = csv::parse_double(rows[r][j + 1]);
    pts.append_row(buf);
  }
  return make_point_cloud(std::move(labels), std::move(pts), metric);
}

}  // namespace creodrift
