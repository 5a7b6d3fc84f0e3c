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

#include "creodrift/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "creodrift/csv.hpp"
#include "creodrift/error.hpp"
#include "creodrift/rng.hpp"

namespace creodrift {

void TsneParams::validate(std::size_t n) const {
  if (n < 3) throw Error(ErrorCode::invalid_input, "t-SNE needs at least 3 points");
  // With n - 1 neighbours the entropy can never exceed log(n - 1).
  if (!(perplexity >= 1.0) || perplexity > static_cast<double>(n - 1))
    throw Error(ErrorCode::invalid_input, "perplexity must lie in [1, n - 1] (n = " + std::to_string(n) + ")");
  if (iterations < 250 || iterations < exaggeration_iterations)
    throw Error(ErrorCode::invalid_input, "t-SNE needs at least 250 iterations and no fewer than the exaggeration phase");
  if (!(learning_rate > 0.0) || !(early_exaggeration >= 1.0))
    throw Error(ErrorCode::invalid_input, "t-SNE learning rate must be positive and exaggeration >= 1");
}

namespace {

// Conditional row p_{j|i} for squared distances d2 (self entry ignored).
// Binary search on beta until the Shannon entropy (nats) matches log(perplexity).
void conditional_row(const std::vector<double>& d2, std::size_t self, double perplexity, double* out) {
  const std::size_t n = d2.size();
  const double target = std::log(perplexity);
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j)
    if (j != self) dmin = std::min(dmin, d2[j]);

  double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 200; ++iter) {
    double sum = 0.0, weighted = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == self) {
        out[j] = 0.0;
        continue;
      }
      out[j] = std::exp(-beta * (d2[j] - dmin));
      sum += out[j];
      weighted += (d2[j] - dmin) * out[j];
    }
    const double entropy = std::log(sum) + beta * weighted / sum;
    for (std::size_t j = 0; j < n; ++j) out[j] /= sum;
    const double diff = entropy - target;
    if (std::abs(diff) < 1e-10) break;
    if (diff > 0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
    } else {
      hi = beta;
      beta = 0.5 * (beta + lo);
    }
  }
}

std::vector<std::string> effective_labels(const DistanceMatrix& dm) {
  std::vector<std::string> labels = dm.labels();
  if (labels.empty())
    for (std::size_t i = 0; i < dm.size(); ++i) labels.push_back(std::to_string(i));
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size()) throw Error(ErrorCode::invalid_input, "t-SNE labels must be unique");
  return labels;
}

}  // namespace

Matrix tsne_affinities(const DistanceMatrix& dm, double perplexity) {
  const std::size_t n = dm.size();
  TsneParams check;
  check.perplexity = perplexity;
  check.validate(n);

  Matrix cond(n, n);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d2[j] = dm(i, j) * dm(i, j);
    conditional_row(d2, i, perplexity, &cond(i, 0));
  }
  Matrix p(n, n);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p(i, j) = (cond(i, j) + cond(j, i)) * scale;
  return p;
}

Projection2D tsne_precomputed(const DistanceMatrix& dm, const TsneParams& params) {
  const std::size_t n = dm.size();
  params.validate(n);
  const auto labels = effective_labels(dm);

  // Work in label order so the result does not depend on input row order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
  std::vector<double> sorted(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sorted[i * n + j] = dm(order[i], order[j]);
  const Matrix P = tsne_affinities(DistanceMatrix(n, std::move(sorted)), params.perplexity);

  Matrix y(n, 2), update(n, 2), gains(n, 2, 1.0), grad(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(params.seed, labels[order[i]]));
    y(i, 0) = 1e-4 * rng.normal();
    y(i, 1) = 1e-4 * rng.normal();
  }

  Matrix num(n, n);
  // Last accepted iterate after the exaggeration phase. A step that raises
  // the KL divergence is undone and retried at half the step size, so the
  // recorded KL never increases once exaggeration is off.
  Matrix y_prev, grad_prev;
  double kl_prev = std::numeric_limits<double>::infinity();
  double scale = 1.0;
  Projection2D out;
  out.kl_history.reserve(params.iterations);
  for (std::size_t it = 0; it < params.iterations; ++it) {
    const double exag = it < params.exaggeration_iterations ? params.early_exaggeration : 1.0;
    const double momentum = it < params.exaggeration_iterations ? params.initial_momentum : params.final_momentum;

    double zsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num(i, i) = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = y(i, 0) - y(j, 0), dy = y(i, 1) - y(j, 1);
        const double v = 1.0 / (1.0 + dx * dx + dy * dy);
        num(i, j) = num(j, i) = v;
        zsum += 2.0 * v;
      }
    }

    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double gx = 0.0, gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double q = num(i, j) / zsum;
        const double pij = P(i, j);
        if (pij > 0.0) kl += pij * std::log(pij / std::max(q, std::numeric_limits<double>::min()));
        const double f = (exag * pij - q) * num(i, j);
        gx += f * (y(i, 0) - y(j, 0));
        gy += f * (y(i, 1) - y(j, 1));
      }
      grad(i, 0) = 4.0 * gx;
      grad(i, 1) = 4.0 * gy;
    }
    kl = std::max(kl, 0.0);
    if (it >= params.exaggeration_iterations) {
      if (kl > kl_prev) {
        y = y_prev;
        grad = grad_prev;
        kl = kl_prev;
        std::fill(update.data().begin(), update.data().end(), 0.0);
        scale *= 0.5;
      } else {
        y_prev = y;
        grad_prev = grad;
        kl_prev = kl;
        scale = std::min(1.0, scale * 1.1);
      }
    }
    out.kl_history.push_back(kl);

    for (std::size_t k = 0; k < n * 2; ++k) {
      double& g = gains.data()[k];
      double& u = update.data()[k];
      const double d = grad.data()[k];
      g = (d > 0.0) != (u > 0.0) ? g + 0.2 : g * 0.8;
      g = std::max(g, 0.01);
      u = momentum * u - scale * params.learning_rate * g * d;
      y.data()[k] += u;
    }
    for (std::size_t c = 0; c < 2; ++c) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += y(i, c);
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) y(i, c) -= mean;
    }
  }
  if (!all_finite(y.data())) throw Error(ErrorCode::invalid_input, "t-SNE diverged to non-finite coordinates");

  out.labels = labels;
  out.coordinates = Matrix(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    out.coordinates(order[i], 0) = y(i, 0);
    out.coordinates(order[i], 1) = y(i, 1);
  }
  out.kl = out.kl_history.empty() ? 0.0 : out.kl_history.back();
  return out;
}

Projection2D tsne_precomputed(const DiagramDistanceMatrix& dm, const TsneParams& p) {
  return tsne_precomputed(dm.as_distance_matrix(), p);
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

ScatterArtifacts export_scatter(const Projection2D& proj, const std::map<std::string, std::string>& groups) {
  if (groups.empty()) throw Error(ErrorCode::invalid_input, "scatter export needs a group map");
  std::vector<std::string> row_group;
  for (const auto& label : proj.labels) {
    auto it = groups.find(label);
    if (it == groups.end()) throw Error(ErrorCode::invalid_input, "label '" + label + "' has no group");
    row_group.push_back(it->second);
  }
  const std::set<std::string> present(row_group.begin(), row_group.end());
  std::map<std::string, std::size_t> color;
  for (const auto& g : present) color.emplace(g, color.size());

  ScatterArtifacts art;
  std::ostringstream csv;
  csv << "label,group,x,y\n";
  for (std::size_t i = 0; i < proj.labels.size(); ++i)
    csv << csv::join({proj.labels[i], row_group[i], csv::format_double(proj.coordinates(i, 0)),
                      csv::format_double(proj.coordinates(i, 1))})
        << '\n';
  art.csv = csv.str();

  constexpr double width = 640, height = 480, margin = 40, legend_w = 140;
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  for (std::size_t i = 0; i < proj.labels.size(); ++i) {
    const double x = proj.coordinates(i, 0), y = proj.coordinates(i, 1);
    if (i == 0 || x < xmin) xmin = x;
    if (i == 0 || x > xmax) xmax = x;
    if (i == 0 || y < ymin) ymin = y;
    if (i == 0 || y > ymax) ymax = y;
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  const double plot = std::min(width - legend_w, height) - 2 * margin;
  auto px = [&](double x) { return margin + (x - xmin) / span * plot; };
  auto py = [&](double y) { return height - margin - (y - ymin) / span * plot; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < proj.labels.size(); ++i) {
    const auto* fill = kPalette[color.at(row_group[i]) % std::size(kPalette)];
    svg << "<circle class=\"marker\" cx=\"" << fixed(px(proj.coordinates(i, 0))) << "\" cy=\""
        << fixed(py(proj.coordinates(i, 1))) << "\" r=\"4\" fill=\"" << fill << "\"><title>"
        << xml_escape(proj.labels[i]) << "</title></circle>\n";
  }
  double ly = margin;
  for (const auto& [group, idx] : color) {
    const double lx = width - legend_w + 10;
    svg << "<rect class=\"legend-swatch\" x=\"" << fixed(lx) << "\" y=\"" << fixed(ly - 9)
        << "\" width=\"10\" height=\"10\" fill=\"" << kPalette[idx % std::size(kPalette)] << "\"/>"
        << "<text x=\"" << fixed(lx + 16) << "\" y=\"" << fixed(ly) << "\" font-size=\"12\">"
        << xml_escape(group) << "</text>\n";
    ly += 18;
  }
  svg << "</svg>\n";
  art.svg = svg.str();
  return art;
}

}  // namespace creodrift
