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

#include "creodrift/diagram_distance.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>

#include "creodrift/csv.hpp"
#include "creodrift/error.hpp"
#include "creodrift/parallel.hpp"

namespace creodrift {

double point_cost(const DiagramPoint& a, const DiagramPoint& b) noexcept {
  return std::max(std::abs(a.birth - b.birth), std::abs(a.death - b.death));
}

double diagonal_cost(const DiagramPoint& p) noexcept { return (p.death - p.birth) / 2.0; }

namespace {

// Hopcroft-Karp on a bipartite graph with equal-sized sides.
class BipartiteMatcher {
 public:
  explicit BipartiteMatcher(std::size_t n) : n_(n), adj_(n) {}

  void add_edge(std::size_t left, std::size_t right) { adj_[left].push_back(right); }

  std::size_t max_matching() {
    match_l_.assign(n_, kNone);
    match_r_.assign(n_, kNone);
    std::size_t matched = 0;
    while (bfs()) {
      for (std::size_t u = 0; u < n_; ++u)
        if (match_l_[u] == kNone && dfs(u)) ++matched;
    }
    return matched;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  bool bfs() {
    dist_.assign(n_, kNone);
    std::queue<std::size_t> q;
    for (std::size_t u = 0; u < n_; ++u)
      if (match_l_[u] == kNone) {
        dist_[u] = 0;
        q.push(u);
      }
    bool found = false;
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t v : adj_[u]) {
        const std::size_t w = match_r_[v];
        if (w == kNone) {
          found = true;
        } else if (dist_[w] == kNone) {
          dist_[w] = dist_[u] + 1;
          q.push(w);
        }
      }
    }
    return found;
  }

  bool dfs(std::size_t u) {
    for (std::size_t v : adj_[u]) {
      const std::size_t w = match_r_[v];
      if (w == kNone || (dist_[w] == dist_[u] + 1 && dfs(w))) {
        match_l_[u] = v;
        match_r_[v] = u;
        return true;
      }
    }
    dist_[u] = kNone;
    return false;
  }

  std::size_t n_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> match_l_, match_r_, dist_;
};

// Left side: a_0..a_{m-1}, then diagonal copies of b. Right side: b_0..b_{k-1},
// then diagonal copies of a.
bool perfect_matching_within(const std::vector<DiagramPoint>& a, const std::vector<DiagramPoint>& b,
                             double t) {
  const std::size_t m = a.size(), k = b.size();
  BipartiteMatcher g(m + k);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j)
      if (point_cost(a[i], b[j]) <= t) g.add_edge(i, j);
    if (diagonal_cost(a[i]) <= t) g.add_edge(i, k + i);
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (diagonal_cost(b[j]) <= t) g.add_edge(m + j, j);
    for (std::size_t i = 0; i < m; ++i) g.add_edge(m + j, k + i);
  }
  return g.max_matching() == m + k;
}

}  // namespace

double bottleneck_finite(const std::vector<DiagramPoint>& a, const std::vector<DiagramPoint>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::vector<double> cands{0.0};
  cands.reserve(a.size() * b.size() + a.size() + b.size() + 1);
  for (const auto& p : a) {
    cands.push_back(diagonal_cost(p));
    for (const auto& q : b) cands.push_back(point_cost(p, q));
  }
  for (const auto& q : b) cands.push_back(diagonal_cost(q));
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

  // The largest candidate is always feasible (everything to the diagonal).
  std::size_t lo = 0, hi = cands.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (perfect_matching_within(a, b, cands[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return cands[lo];
}

std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n) {
  // Shortest augmenting path with potentials (1-based internally).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j)
    if (p[j] != 0) assignment[p[j] - 1] = j - 1;
  return assignment;
}

namespace {

double wasserstein_sum(const std::vector<DiagramPoint>& a, const std::vector<DiagramPoint>& b,
                       double q) {
  const std::size_t m = a.size(), k = b.size(), n = m + k;
  if (n == 0) return 0.0;
  auto pw = [q](double c) { return std::pow(c, q); };
  double finite_total = 0.0;
  std::vector<double> cost(n * n, 0.0);
  std::vector<char> forbidden(n * n, 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) finite_total += cost[i * n + j] = pw(point_cost(a[i], b[j]));
    for (std::size_t l = 0; l < m; ++l) {
      if (l == i)
        finite_total += cost[i * n + k + l] = pw(diagonal_cost(a[i]));
      else
        forbidden[i * n + k + l] = 1;
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t l = 0; l < k; ++l) {
      if (l == j)
        finite_total += cost[(m + j) * n + l] = pw(diagonal_cost(b[j]));
      else
        forbidden[(m + j) * n + l] = 1;
    }
  }
  const double big = 2.0 * finite_total + 1.0;
  for (std::size_t i = 0; i < n * n; ++i)
    if (forbidden[i]) cost[i] = big;
  const auto assignment = solve_assignment(cost, n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += cost[i * n + assignment[i]];
  return total;
}

struct SplitDiagram {
  std::vector<DiagramPoint> finite;
  std::vector<double> infinite_births;
};

SplitDiagram split(const PersistenceDiagram& d, int dim) {
  if (dim < 0 || dim > d.max_dim)
    throw Error(ErrorCode::invalid_input,
                "diagram not computed to dimension " + std::to_string(dim));
  SplitDiagram s;
  for (const auto& p : d.view(dim)) {
    if (p.infinite())
      s.infinite_births.push_back(p.birth);
    else
      s.finite.push_back({p.birth, p.death});
  }
  std::sort(s.infinite_births.begin(), s.infinite_births.end());
  return s;
}

void check_comparable(const SplitDiagram& a, const SplitDiagram& b, int dim) {
  if (a.infinite_births.size() != b.infinite_births.size())
    throw IncomparableDiagrams(dim, a.infinite_births.size(), b.infinite_births.size());
}

}  // namespace

double wasserstein_finite(const std::vector<DiagramPoint>& a, const std::vector<DiagramPoint>& b,
                          double q) {
  if (!(q >= 1.0)) throw Error(ErrorCode::invalid_input, "wasserstein: q must be >= 1");
  return std::pow(wasserstein_sum(a, b, q), 1.0 / q);
}

double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim) {
  const auto sa = split(a, dim), sb = split(b, dim);
  check_comparable(sa, sb, dim);
  double d = bottleneck_finite(sa.finite, sb.finite);
  // Sorted order is an optimal matching of infinite bars on the line.
  for (std::size_t i = 0; i < sa.infinite_births.size(); ++i)
    d = std::max(d, std::abs(sa.infinite_births[i] - sb.infinite_births[i]));
  return d;
}

double wasserstein_distance(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim,
                            double q) {
  if (!(q >= 1.0)) throw Error(ErrorCode::invalid_input, "wasserstein: q must be >= 1");
  const auto sa = split(a, dim), sb = split(b, dim);
  check_comparable(sa, sb, dim);
  double total = wasserstein_sum(sa.finite, sb.finite, q);
  for (std::size_t i = 0; i < sa.infinite_births.size(); ++i)
    total += std::pow(std::abs(sa.infinite_births[i] - sb.infinite_births[i]), q);
  return std::pow(total, 1.0 / q);
}

std::string DistanceKind::name() const {
  if (type == Type::bottleneck) return "bottleneck";
  std::ostringstream os;
  os << "wasserstein" << q;
  return os.str();
}

double diagram_distance(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim,
                        const DistanceKind& kind) {
  return kind.type == DistanceKind::Type::bottleneck ? bottleneck_distance(a, b, dim)
                                                     : wasserstein_distance(a, b, dim, kind.q);
}

DistanceMatrix DiagramDistanceMatrix::as_distance_matrix() const {
  return DistanceMatrix(labels.size(), entries, labels);
}

DiagramDistanceMatrix distance_matrix(const std::vector<LabeledDiagram>& diagrams, int dim,
                                      const DistanceKind& kind, unsigned threads) {
  const std::size_t n = diagrams.size();
  if (n < 2) throw Error(ErrorCode::invalid_input, "distance_matrix needs at least two diagrams");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  DiagramDistanceMatrix out;
  out.dim = dim;
  out.kind = kind;
  for (const auto& d : diagrams) out.labels.push_back(d.label);
  out.entries.assign(n * n, 0.0);
  std::vector<std::string> failures(pairs.size());

  parallel_for(pairs.size(), threads, [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    try {
      const double v = diagram_distance(*diagrams[i].diagram, *diagrams[j].diagram, dim, kind);
      out.entries[i * n + j] = v;
      out.entries[j * n + i] = v;
    } catch (const IncomparableDiagrams& e) {
      failures[p] = diagrams[i].label + " vs " + diagrams[j].label + " (" +
                    std::to_string(e.left_infinite()) + " vs " + std::to_string(e.right_infinite()) +
                    " infinite bars)";
    }
  });

  std::string msg;
  std::size_t missing = 0;
  for (const auto& f : failures)
    if (!f.empty()) {
      msg += "\n  " + f;
      ++missing;
    }
  if (missing)
    throw Error(ErrorCode::incomparable_diagrams,
                std::to_string(missing) + " incomparable pair(s) in dimension " + std::to_string(dim) + ":" + msg);
  return out;
}

void write_diagram_matrix_csv(const DiagramDistanceMatrix& dm, std::ostream& out) {
  const std::size_t n = dm.size();
  csv::Row header{""};
  header.insert(header.end(), dm.labels.begin(), dm.labels.end());
  out << csv::join(header) << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    csv::Row row{dm.labels[i]};
    for (std::size_t j = 0; j < n; ++j) row.push_back(csv::format_double(dm(i, j)));
    out << csv::join(row) << '\n';
  }
}

DiagramDistanceMatrix read_diagram_matrix_csv(std::istream& in) {
  const DistanceMatrix dm = read_distance_matrix_csv(in);
  DiagramDistanceMatrix out;
  out.labels = dm.labels();
  out.entries = dm.entries();
  return out;
}

void write_pair_report_csv(const DiagramDistanceMatrix& dm, std::ostream& out) {
  out << "label_a,label_b,dim,kind,value\n";
  for (std::size_t i = 0; i < dm.size(); ++i)
    for (std::size_t j = i + 1; j < dm.size(); ++j)
      out << csv::join({dm.labels[i], dm.labels[j], std::to_string(dm.dim), dm.kind.name(),
                        csv::format_double(dm(i, j))})
          << '\n';
}

std::vector<GroupMean> mean_group_distance(const DiagramDistanceMatrix& dm,
                                           const std::map<std::string, std::string>& groups,
                                           GroupPairs which) {
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < dm.size(); ++i) {
    auto it = groups.find(dm.labels[i]);
    if (it == groups.end())
      throw Error(ErrorCode::invalid_input, "mean_group_distance: label '" + dm.labels[i] + "' has no group");
    members[it->second].push_back(i);
  }
  std::vector<GroupMean> out;
  for (auto g = members.begin(); g != members.end(); ++g) {
    for (auto h = g; h != members.end(); ++h) {
      const bool within = g == h;
      if (within && which == GroupPairs::across) continue;
      if (!within && which == GroupPairs::within) continue;
      if (within && g->second.size() < 2)
        throw Error(ErrorCode::undefined_mean, "group '" + g->first + "' has a single member");
      // Running mean: exact when all entries are equal.
      double mean = 0.0;
      std::size_t count = 0;
      for (std::size_t u : g->second)
        for (std::size_t v : h->second)
          if (u != v) {
            ++count;
            mean += (dm(u, v) - mean) / static_cast<double>(count);
          }
      out.push_back(GroupMean{g->first, h->first, mean, count});
    }
  }
  return out;
}

}  // namespace creodrift
