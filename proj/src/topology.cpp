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

#include "creodrift/topology.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <istream>
#include <numbers>
#include <ostream>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "creodrift/csv.hpp"
#include "creodrift/error.hpp"

namespace creodrift {

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> entries,
                               std::vector<std::string> labels)
    : n_(n), entries_(std::move(entries)), labels_(std::move(labels)) {
  if (entries_.size() != n_ * n_)
    throw Error(ErrorCode::invalid_input, "distance matrix: expected n*n entries");
  if (!labels_.empty() && labels_.size() != n_)
    throw Error(ErrorCode::invalid_input, "distance matrix: label count differs from n");
  for (std::size_t i = 0; i < n_; ++i) {
    if (entries_[i * n_ + i] != 0.0)
      throw Error(ErrorCode::invalid_input, "distance matrix: non-zero diagonal");
    for (std::size_t j = 0; j < n_; ++j) {
      const double v = entries_[i * n_ + j];
      if (!std::isfinite(v) || v < 0.0)
        throw Error(ErrorCode::invalid_input, "distance matrix: entries must be finite and >= 0");
      if (v != entries_[j * n_ + i])
        throw Error(ErrorCode::invalid_input, "distance matrix: not symmetric");
    }
  }
}

DistanceMatrix pairwise_distances(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  if (n == 0) throw Error(ErrorCode::invalid_input, "pairwise_distances: empty cloud");
  if (!all_finite(cloud.points.data()))
    throw Error(ErrorCode::invalid_input, "pairwise_distances: non-finite coordinate");
  std::vector<double> e(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = cloud.points.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto b = cloud.points.row(j);
      double d;
      if (cloud.metric == Metric::angular) {
        d = std::acos(std::clamp(dot(a, b), -1.0, 1.0)) / std::numbers::pi;
      } else {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
        d = std::sqrt(s);
      }
      e[i * n + j] = e[j * n + i] = d;
    }
  }
  return DistanceMatrix(n, std::move(e), cloud.labels);
}

void write_distance_matrix_csv(const DistanceMatrix& dm, std::ostream& out) {
  const std::size_t n = dm.size();
  csv::Row header{""};
  for (std::size_t i = 0; i < n; ++i)
    header.push_back(dm.labels().empty() ? std::to_string(i) : dm.labels()[i]);
  out << csv::join(header) << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    csv::Row row{header[i + 1]};
    for (std::size_t j = 0; j < n; ++j) row.push_back(csv::format_double(dm(i, j)));
    out << csv::join(row) << '\n';
  }
}

DistanceMatrix read_distance_matrix_csv(std::istream& in) {
  auto rows = csv::read(in);
  if (rows.empty()) throw Error(ErrorCode::format, "distance matrix CSV: empty");
  const std::size_t n = rows.front().size() - 1;
  if (rows.size() != n + 1) throw Error(ErrorCode::format, "distance matrix CSV: not square");
  std::vector<std::string> labels(rows.front().begin() + 1, rows.front().end());
  std::vector<double> e(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = rows[i + 1];
    if (r.size() != n + 1) throw Error(ErrorCode::format, "distance matrix CSV: ragged row");
    if (r[0] != labels[i]) throw Error(ErrorCode::format, "distance matrix CSV: row/column labels differ");
    for (std::size_t j = 0; j < n; ++j) e[i * n + j] = csv::parse_double(r[j + 1]);
  }
  return DistanceMatrix(n, std::move(e), std::move(labels));
}

// ---------------------------------------------------------------------------
// Filtration

Filtration::Filtration(DistanceMatrix dm, int max_dim, double max_eps)
    : dm_(std::move(dm)), max_dim_(max_dim), max_eps_(max_eps) {
  const std::size_t n = dm_.size();
  const int k = max_dim + 2;
  binom_.assign(n + 1, std::vector<std::int64_t>(static_cast<std::size_t>(k) + 1, 0));
  constexpr std::int64_t kLimit = std::int64_t{1} << 62;
  for (std::size_t i = 0; i <= n; ++i) {
    binom_[i][0] = 1;
    for (int j = 1; j <= k && static_cast<std::size_t>(j) <= i; ++j) {
      const std::int64_t v = binom_[i - 1][j - 1] + (static_cast<std::size_t>(j) <= i - 1 ? binom_[i - 1][j] : 0);
      if (v < 0 || v > kLimit)
        throw Error(ErrorCode::invalid_input, "too many points to index simplices of this dimension");
      binom_[i][j] = v;
    }
  }
}

std::size_t Filtration::count(int dim) const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [dim](const Entry& e) { return e.dim == dim; }));
}

std::int64_t Filtration::rank_of(const std::vector<int>& v) const {
  const std::size_t n = dm_.size();
  const std::size_t k1 = v.size();
  // Colex index of the complemented set {n-1-v}, read backwards, is the
  // lexicographic rank of v.
  std::int64_t colex = 0;
  for (std::size_t i = 0; i < k1; ++i) colex += binom_[n - 1 - static_cast<std::size_t>(v[i])][k1 - i];
  return binom_[n][k1] - 1 - colex;
}

std::vector<int> Filtration::vertices_of(int dim, std::int64_t key) const {
  const std::size_t n = dm_.size();
  const std::size_t k1 = static_cast<std::size_t>(dim) + 1;
  std::int64_t colex = binom_[n][k1] - 1 - key;
  std::vector<int> v(k1);
  std::size_t w = n;
  for (std::size_t j = k1; j >= 1; --j) {
    // Largest w with C(w, j) <= colex.
    do {
      --w;
    } while (binom_[w][j] > colex);
    colex -= binom_[w][j];
    v[k1 - j] = static_cast<int>(n - 1 - w);
  }
  return v;
}

Simplex Filtration::simplex(std::size_t i) const {
  const auto& e = entries_[i];
  return Simplex{vertices_of(e.dim, e.key), e.value};
}

namespace {

// Depth-first clique enumeration in lexicographic order. visit(vertices, value)
// returns false to stop early.
template <class Visit>
bool enumerate_cliques(const DistanceMatrix& dm, int top_dim, double eps, Visit&& visit) {
  const int n = static_cast<int>(dm.size());
  std::vector<int> stack;
  stack.reserve(static_cast<std::size_t>(top_dim) + 1);
  std::function<bool(double)> extend = [&](double value) -> bool {
    if (!visit(stack, value)) return false;
    if (static_cast<int>(stack.size()) > top_dim) return true;
    for (int w = stack.back() + 1; w < n; ++w) {
      double v = value;
      bool ok = true;
      for (int u : stack) {
        const double d = dm(static_cast<std::size_t>(u), static_cast<std::size_t>(w));
        if (d > eps) {
          ok = false;
          break;
        }
        v = std::max(v, d);
      }
      if (!ok) continue;
      stack.push_back(w);
      const bool go_on = extend(v);
      stack.pop_back();
      if (!go_on) return false;
    }
    return true;
  };
  for (int v = 0; v < n; ++v) {
    stack.assign(1, v);
    if (!extend(0.0)) return false;
  }
  return true;
}

std::size_t count_capped(const DistanceMatrix& dm, int top_dim, double eps, std::size_t cap) {
  std::size_t count = 0;
  enumerate_cliques(dm, top_dim, eps, [&](const std::vector<int>&, double) { return ++count <= cap; });
  return count;
}

}  // namespace

Filtration build_vr_filtration(const DistanceMatrix& dm, int max_dim, double max_eps,
                               std::size_t budget) {
  if (max_dim < 0) throw Error(ErrorCode::invalid_input, "max_dim must be >= 0");
  if (!(max_eps > 0.0)) throw Error(ErrorCode::invalid_input, "max_eps must be > 0");
  if (dm.size() == 0) throw Error(ErrorCode::invalid_input, "empty distance matrix");
  const int top = max_dim + 1;

  const std::size_t total = count_capped(dm, top, max_eps, budget);
  if (total > budget) {
    // Locate the smallest edge length at which the budget is crossed.
    std::vector<double> cands;
    for (std::size_t i = 0; i < dm.size(); ++i)
      for (std::size_t j = i + 1; j < dm.size(); ++j)
        if (dm(i, j) <= max_eps) cands.push_back(dm(i, j));
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    std::size_t lo = 0, hi = cands.size() - 1;  // cands[hi] exceeds the budget
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (count_capped(dm, top, cands[mid], budget) > budget)
        hi = mid;
      else
        lo = mid + 1;
    }
    throw BudgetExceeded(budget, cands[hi]);
  }

  Filtration f(dm, max_dim, max_eps);
  f.entries_.reserve(total);
  enumerate_cliques(dm, top, max_eps, [&](const std::vector<int>& v, double value) {
    f.entries_.push_back({value, f.rank_of(v), static_cast<int>(v.size()) - 1});
    return true;
  });
  std::sort(f.entries_.begin(), f.entries_.end(), [](const Filtration::Entry& a, const Filtration::Entry& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.dim != b.dim) return a.dim < b.dim;
    return a.key < b.key;
  });
  return f;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

// A simplex of known dimension, ordered as in the filtration.
struct Cell {
  double value;
  std::int64_t key;

  friend bool operator<(const Cell& a, const Cell& b) {
    return a.value != b.value ? a.value < b.value : a.key < b.key;
  }
  friend bool operator>(const Cell& a, const Cell& b) { return b < a; }
  friend bool operator==(const Cell& a, const Cell& b) { return a.key == b.key; }
};

using Chain = std::vector<Cell>;  // sorted ascending, F2 coefficients

Chain add_chains(const Chain& a, const Chain& b) {
  Chain out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      out.push_back(a[i++]);
    } else if (b[j] < a[i]) {
      out.push_back(b[j++]);
    } else {
      ++i;
      ++j;
    }
  }
  out.insert(out.end(), a.begin() + static_cast<std::ptrdiff_t>(i), a.end());
  out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(j), b.end());
  return out;
}

class Reducer {
 public:
  explicit Reducer(const Filtration& f) : f_(f), dm_(f.distances()), n_(static_cast<int>(dm_.size())) {}

  double value_of(const std::vector<int>& v) const {
    double m = 0.0;
    for (std::size_t a = 0; a < v.size(); ++a)
      for (std::size_t b = a + 1; b < v.size(); ++b)
        m = std::max(m, dm_(static_cast<std::size_t>(v[a]), static_cast<std::size_t>(v[b])));
    return m;
  }

  // Cofacets of a dim-k simplex present in the filtration.
  template <class Out>
  void coboundary(int dim, const Cell& s, Out&& out) const {
    const auto v = f_.vertices_of(dim, s.key);
    std::vector<int> t(v.size() + 1);
    for (int w = 0; w < n_; ++w) {
      if (std::binary_search(v.begin(), v.end(), w)) continue;
      double value = s.value;
      bool ok = true;
      for (int u : v) {
        const double d = dm_(static_cast<std::size_t>(u), static_cast<std::size_t>(w));
        if (d > f_.max_eps()) {
          ok = false;
          break;
        }
        value = std::max(value, d);
      }
      if (!ok) continue;
      auto pos = std::lower_bound(v.begin(), v.end(), w);
      std::copy(v.begin(), pos, t.begin());
      t[static_cast<std::size_t>(pos - v.begin())] = w;
      std::copy(pos, v.end(), t.begin() + (pos - v.begin()) + 1);
      out(Cell{value, f_.rank_of(t)});
    }
  }

  Chain boundary(int dim, const Cell& s) const {
    Chain out;
    if (dim == 0) return out;
    const auto v = f_.vertices_of(dim, s.key);
    std::vector<int> face(v.size() - 1);
    for (std::size_t drop = 0; drop < v.size(); ++drop) {
      std::size_t j = 0;
      for (std::size_t i = 0; i < v.size(); ++i)
        if (i != drop) face[j++] = v[i];
      out.push_back(Cell{value_of(face), f_.rank_of(face)});
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  const Filtration& f_;
  const DistanceMatrix& dm_;
  int n_;
};

using MinHeap = std::priority_queue<Cell, std::vector<Cell>, std::greater<Cell>>;

std::optional<Cell> pop_pivot(MinHeap& heap) {
  while (!heap.empty()) {
    Cell top = heap.top();
    heap.pop();
    if (heap.empty() || !(heap.top() == top)) return top;
    heap.pop();  // the pair cancels over F2
  }
  return std::nullopt;
}

std::optional<Cell> get_pivot(MinHeap& heap) {
  auto p = pop_pivot(heap);
  if (p) heap.push(*p);
  return p;
}

struct RawPair {
  int dim;
  Cell birth;
  std::optional<Cell> death;
};

struct KeyHash {
  std::size_t operator()(std::int64_t k) const noexcept {
    return static_cast<std::size_t>(static_cast<std::uint64_t>(k) * 0x9e3779b97f4a7c15ULL >> 7);
  }
};

}  // namespace

PersistenceDiagram compute_persistence(const Filtration& f, const PersistenceOptions& opts) {
  const Reducer red(f);
  const int n = static_cast<int>(f.distances().size());
  const int max_dim = f.max_dim();

  std::vector<std::vector<Cell>> by_dim(static_cast<std::size_t>(max_dim) + 2);
  for (const auto& e : f.entries()) by_dim[static_cast<std::size_t>(e.dim)].push_back({e.value, e.key});

  std::vector<RawPair> raw;
  // Keys of the simplices killing a class in the previous dimension.
  std::unordered_set<std::int64_t, KeyHash> cleared;

  // Dimension 0: union-find over edges in filtration order; the older
  // (lower-index) vertex survives a merge.
  {
    std::vector<int> parent(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
    std::function<int(int)> find = [&](int x) {
      while (parent[static_cast<std::size_t>(x)] != x) {
        parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        x = parent[static_cast<std::size_t>(x)];
      }
      return x;
    };
    for (const auto& e : by_dim[1]) {
      const auto v = f.vertices_of(1, e.key);
      int a = find(v[0]), b = find(v[1]);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      parent[static_cast<std::size_t>(b)] = a;
      raw.push_back({0, Cell{0.0, b}, e});
      cleared.insert(e.key);
    }
    for (int i = 0; i < n; ++i)
      if (find(i) == i) raw.push_back({0, Cell{0.0, i}, std::nullopt});
  }

  // Dimensions >= 1: coboundary reduction with clearing.
  for (int k = 1; k <= max_dim; ++k) {
    std::unordered_map<std::int64_t, std::size_t, KeyHash> pivot_of;  // coface key -> column slot
    std::vector<std::vector<Cell>> columns;  // V-columns (cochains of k-simplices)
    std::unordered_set<std::int64_t, KeyHash> next_cleared;
    const auto& simplices = by_dim[static_cast<std::size_t>(k)];
    for (auto it = simplices.rbegin(); it != simplices.rend(); ++it) {
      const Cell sigma = *it;
      if (cleared.contains(sigma.key)) continue;
      MinHeap heap;
      red.coboundary(k, sigma, [&](const Cell& c) { heap.push(c); });
      std::vector<Cell> cochain{sigma};
      auto pivot = get_pivot(heap);
      while (pivot) {
        auto found = pivot_of.find(pivot->key);
        if (found == pivot_of.end()) break;
        for (const Cell& s : columns[found->second]) {
          cochain.push_back(s);
          red.coboundary(k, s, [&](const Cell& c) { heap.push(c); });
        }
        pivot = get_pivot(heap);
      }
      if (pivot) {
        pivot_of.emplace(pivot->key, columns.size());
        // Only distinct simplices matter in an F2 cochain.
        std::sort(cochain.begin(), cochain.end());
        std::vector<Cell> reduced;
        for (std::size_t i = 0; i < cochain.size();) {
          std::size_t j = i;
          while (j < cochain.size() && cochain[j] == cochain[i]) ++j;
          if ((j - i) % 2 == 1) reduced.push_back(cochain[i]);
          i = j;
        }
        columns.push_back(std::move(reduced));
        raw.push_back({k, sigma, *pivot});
        if (k < max_dim) next_cleared.insert(pivot->key);
      } else {
        raw.push_back({k, sigma, std::nullopt});
      }
    }
    cleared = std::move(next_cleared);
  }

  PersistenceDiagram diag;
  diag.max_dim = max_dim;
  diag.max_eps = f.max_eps();
  diag.has_generators = opts.generators;
  diag.pairs.reserve(raw.size());
  for (const auto& r : raw)
    diag.pairs.push_back(PersistencePair{r.dim, r.birth.value, r.death ? r.death->value : kInfinity, std::nullopt});

  if (!opts.generators) return diag;

  auto to_simplices = [&](int dim, const Chain& chain) {
    std::vector<Simplex> out;
    out.reserve(chain.size());
    for (const Cell& c : chain) out.push_back(Simplex{f.vertices_of(dim, c.key), c.value});
    return out;
  };

  // Which infinite bars need a cycle, by dimension.
  std::vector<std::vector<std::size_t>> infinite_by_dim(static_cast<std::size_t>(max_dim) + 1);
  for (std::size_t i = 0; i < raw.size(); ++i)
    if (!raw[i].death) infinite_by_dim[static_cast<std::size_t>(raw[i].dim)].push_back(i);
  for (std::size_t i : infinite_by_dim[0])
    diag.pairs[i].generator = to_simplices(0, Chain{raw[i].birth});

  // Boundary reduction restricted to the death simplices of dimension k+1.
  // Columns that reduce to zero never take part in later additions, so
  // skipping the positive columns leaves every reduced death column as in
  // the full reduction.
  for (int k = 0; k <= max_dim; ++k) {
    std::vector<std::pair<Cell, std::size_t>> deaths;  // (death simplex, raw index)
    for (std::size_t i = 0; i < raw.size(); ++i)
      if (raw[i].dim == k && raw[i].death) deaths.emplace_back(*raw[i].death, i);
    std::sort(deaths.begin(), deaths.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    const bool track_v = k + 1 <= max_dim && !infinite_by_dim[static_cast<std::size_t>(k) + 1].empty();
    std::unordered_map<std::int64_t, std::size_t, KeyHash> pivot_of;  // face key -> column
    std::vector<Chain> reduced;
    std::vector<Chain> vcols;
    reduced.reserve(deaths.size());

    for (const auto& [tau, idx] : deaths) {
      Chain col = red.boundary(k + 1, tau);
      Chain v{tau};
      while (!col.empty()) {
        auto found = pivot_of.find(col.back().key);
        if (found == pivot_of.end()) break;
        col = add_chains(col, reduced[found->second]);
        if (track_v) v = add_chains(v, vcols[found->second]);
      }
      assert(!col.empty());
      assert(col.back().key == raw[idx].birth.key || k == 0);
      pivot_of.emplace(col.back().key, reduced.size());
      if (raw[idx].birth.value < tau.value) diag.pairs[idx].generator = to_simplices(k, col);
      reduced.push_back(std::move(col));
      if (track_v) vcols.push_back(std::move(v));
    }

    if (track_v) {
      // A positive (k+1)-simplex plus the chains that cancel its boundary
      // is a cycle born with it.
      for (std::size_t i : infinite_by_dim[static_cast<std::size_t>(k) + 1]) {
        const Cell sigma = raw[i].birth;
        Chain col = red.boundary(k + 1, sigma);
        Chain cycle{sigma};
        while (!col.empty()) {
          auto found = pivot_of.find(col.back().key);
          assert(found != pivot_of.end());
          if (found == pivot_of.end()) break;
          col = add_chains(col, reduced[found->second]);
          cycle = add_chains(cycle, vcols[found->second]);
        }
        diag.pairs[i].generator = to_simplices(k + 1, cycle);
      }
    }
  }
  return diag;
}

std::vector<PersistencePair> PersistenceDiagram::view(int dim) const {
  std::vector<PersistencePair> out;
  for (const auto& p : pairs)
    if ((dim < 0 || p.dim == dim) && p.death > p.birth) out.push_back(p);
  std::stable_sort(out.begin(), out.end(), [](const PersistencePair& a, const PersistencePair& b) {
    if (a.dim != b.dim) return a.dim < b.dim;
    if (a.birth != b.birth) return a.birth < b.birth;
    return a.death < b.death;
  });
  return out;
}

std::size_t PersistenceDiagram::infinite_count(int dim) const {
  return static_cast<std::size_t>(std::count_if(
      pairs.begin(), pairs.end(), [dim](const PersistencePair& p) { return p.dim == dim && p.infinite(); }));
}

std::vector<int> betti_numbers(const PersistenceDiagram& diag, double eps) {
  if (!(eps >= 0.0) || eps > diag.max_eps)
    throw Error(ErrorCode::invalid_input, "betti_numbers: eps outside [0, max_eps]");
  std::vector<int> betti(static_cast<std::size_t>(diag.max_dim) + 1, 0);
  for (const auto& p : diag.pairs)
    if (p.birth <= eps && eps < p.death) ++betti[static_cast<std::size_t>(p.dim)];
  return betti;
}

void write_barcode_csv(const PersistenceDiagram& diag, std::ostream& out) {
  out << "dim,birth,death\n";
  for (const auto& p : diag.view())
    out << p.dim << ',' << csv::format_double(p.birth) << ',' << csv::format_double(p.death) << '\n';
}

PersistenceDiagram read_barcode_csv(std::istream& in) {
  auto rows = csv::read(in);
  if (rows.empty() || rows.front() != csv::Row{"dim", "birth", "death"})
    throw Error(ErrorCode::format, "barcode CSV: expected header dim,birth,death");
  PersistenceDiagram d;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 3) throw Error(ErrorCode::format, "barcode CSV: expected 3 fields");
    PersistencePair p;
    p.dim = static_cast<int>(csv::parse_double(r[0]));
    p.birth = csv::parse_double(r[1]);
    p.death = csv::parse_double(r[2]);
    if (p.dim < 0 || !(p.birth <= p.death))
      throw Error(ErrorCode::format, "barcode CSV: invalid pair on row " + std::to_string(i + 1));
    d.max_dim = std::max(d.max_dim, p.dim);
    if (std::isfinite(p.death)) d.max_eps = std::max(d.max_eps, p.death);
    d.pairs.push_back(p);
  }
  return d;
}

std::vector<Hole> hole_report(const PersistenceDiagram& diag, double min_persistence,
                              const PointCloud& cloud) {
  if (!diag.has_generators)
    throw Error(ErrorCode::unsupported_request, "hole_report needs a diagram computed with generators");
  std::vector<Hole> holes;
  const auto pairs = diag.view();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (p.dim < 1) continue;
    if (!p.infinite() && p.persistence() < min_persistence) continue;
    if (!p.generator)
      throw Error(ErrorCode::unsupported_request, "hole_report: pair without a generator");
    std::set<int> verts;
    for (const auto& s : *p.generator) verts.insert(s.vertices.begin(), s.vertices.end());
    std::vector<std::string> words;
    for (int v : verts) {
      if (static_cast<std::size_t>(v) >= cloud.size())
        throw Error(ErrorCode::invalid_input, "hole_report: cloud does not match the diagram");
      words.push_back(cloud.labels[static_cast<std::size_t>(v)]);
    }
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    holes.push_back(Hole{i, p.dim, p.birth, p.death, std::move(words)});
  }
  return holes;
}

void write_generator_csv(const std::vector<Hole>& holes, std::ostream& out) {
  out << "pair_id,dim,vertex_words...\n";
  for (const auto& h : holes) {
    csv::Row row{std::to_string(h.pair_id), std::to_string(h.dim)};
    row.insert(row.end(), h.words.begin(), h.words.end());
    out << csv::join(row) << '\n';
  }
}

}  // namespace creodrift
