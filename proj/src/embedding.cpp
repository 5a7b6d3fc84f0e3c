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

#include "creodrift/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "creodrift/error.hpp"
#include "creodrift/rng.hpp"

namespace creodrift {

std::optional<std::size_t> Vocabulary::find(const std::string& word) const {
  auto it = index.find(word);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

Vocabulary Vocabulary::from_counts(const std::unordered_map<std::string, std::uint64_t>& counts,
                                   std::uint64_t min_count) {
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (const auto& [w, c] : counts)
    if (c >= min_count) kept.emplace_back(w, c);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Vocabulary v;
  v.words.reserve(kept.size());
  v.counts.reserve(kept.size());
  for (auto& [w, c] : kept) {
    v.index.emplace(w, v.words.size());
    v.words.push_back(std::move(w));
    v.counts.push_back(c);
  }
  return v;
}

void TrainParams::validate() const {
  if (dim < 2) throw Error(ErrorCode::invalid_input, "dim must be >= 2");
  if (window < 1) throw Error(ErrorCode::invalid_input, "window must be >= 1");
  if (negatives < 1) throw Error(ErrorCode::invalid_input, "negatives must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::invalid_input, "learning_rate must be > 0");
}

namespace {

std::unordered_map<std::string, std::uint64_t> count_tokens(const Corpus& corpus) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& d : corpus.documents)
    for (const auto& t : d.tokens) ++counts[t];
  return counts;
}

}  // namespace

Vocabulary build_vocab(const Corpus& corpus, std::uint64_t min_count) {
  if (corpus.empty()) throw Error(ErrorCode::empty_corpus, "build_vocab: empty corpus");
  auto v = Vocabulary::from_counts(count_tokens(corpus), min_count);
  if (v.size() == 0)
    throw Error(ErrorCode::empty_vocabulary,
                "no token reaches min_count=" + std::to_string(min_count));
  return v;
}

namespace sgns {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

// -log s(x), stable for large |x|.
double neg_log_sigmoid(double x) {
  return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

// Gradient of the loss w.r.t. the score u.v for label 1 (positive) or 0.
inline double score_gradient(double score, double label) { return sigmoid(score) - label; }

inline void update_target(std::span<double> target, std::span<const double> center, double label,
                          double lr, std::span<double> center_grad) {
  const double g = score_gradient(dot(target, center), label);
  for (std::size_t k = 0; k < center.size(); ++k) {
    center_grad[k] += g * target[k];
    target[k] -= lr * g * center[k];
  }
}

}  // namespace

double pair_loss(std::span<const double> center, std::span<const double> context,
                 const std::vector<std::span<const double>>& negatives) {
  double loss = neg_log_sigmoid(dot(context, center));
  for (const auto& u : negatives) loss += neg_log_sigmoid(-dot(u, center));
  return loss;
}

PairGradient pair_gradient(std::span<const double> center, std::span<const double> context,
                           const std::vector<std::span<const double>>& negatives) {
  const std::size_t d = center.size();
  PairGradient g;
  g.center.assign(d, 0.0);
  const double gp = score_gradient(dot(context, center), 1.0);
  g.context.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    g.center[k] += gp * context[k];
    g.context[k] = gp * center[k];
  }
  for (const auto& u : negatives) {
    const double gn = score_gradient(dot(u, center), 0.0);
    std::vector<double> gu(d);
    for (std::size_t k = 0; k < d; ++k) {
      g.center[k] += gn * u[k];
      gu[k] = gn * center[k];
    }
    g.negatives.push_back(std::move(gu));
  }
  return g;
}

void apply_pair_update(std::span<double> center, std::span<double> context,
                       const std::vector<std::span<double>>& negatives, double lr,
                       std::span<double> scratch) {
  std::fill(scratch.begin(), scratch.end(), 0.0);
  update_target(context, center, 1.0, lr, scratch);
  for (const auto& u : negatives) update_target(u, center, 0.0, lr, scratch);
  for (std::size_t k = 0; k < center.size(); ++k) center[k] -= lr * scratch[k];
}

}  // namespace sgns

namespace {

constexpr std::uint64_t kTrainStream = 0x7472616e;  // "tran"

void init_input_rows(Matrix& input, std::size_t first_row, Rng& rng) {
  const double half = 0.5 / static_cast<double>(input.cols());
  for (std::size_t r = first_row; r < input.rows(); ++r)
    for (double& x : input.row(r)) x = rng.uniform(-half, half);
}

class NegativeSampler {
 public:
  explicit NegativeSampler(const std::vector<std::uint64_t>& counts) {
    cumulative_.reserve(counts.size());
    double acc = 0.0;
    for (auto c : counts) {
      acc += std::pow(static_cast<double>(c), 0.75);
      cumulative_.push_back(acc);
    }
  }

  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                 cumulative_.size() - 1);
  }

 private:
  std::vector<double> cumulative_;
};

// Runs params.epochs passes of SGNS over `corpus` against the model's vocabulary.
void train_epochs(EmbeddingModel& model, const Corpus& corpus, Rng& rng) {
  const auto& p = model.params;
  const auto& vocab = model.vocab;
  const std::size_t d = model.dim();

  std::vector<std::vector<std::uint32_t>> sentences;
  sentences.reserve(corpus.documents.size());
  std::uint64_t total_words = 0;
  for (const auto& doc : corpus.documents) {
    std::vector<std::uint32_t> ids;
    for (const auto& t : doc.tokens)
      if (auto i = vocab.find(t)) ids.push_back(static_cast<std::uint32_t>(*i));
    if (ids.size() >= 2) {
      total_words += ids.size();
      sentences.push_back(std::move(ids));
    }
  }
  if (sentences.empty() || p.epochs == 0) return;

  const double vocab_total = static_cast<double>(
      std::accumulate(vocab.counts.begin(), vocab.counts.end(), std::uint64_t{0}));
  std::vector<double> keep_prob(vocab.size(), 1.0);
  if (p.subsample_threshold > 0.0) {
    const double t = p.subsample_threshold * vocab_total;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      const double f = static_cast<double>(vocab.counts[i]);
      keep_prob[i] = std::min(1.0, (std::sqrt(f / t) + 1.0) * t / f);
    }
  }

  const NegativeSampler sampler(vocab.counts);
  const double planned = static_cast<double>(total_words) * static_cast<double>(p.epochs);
  const double lr0 = p.learning_rate;
  const double lr_min = std::min(TrainParams::min_learning_rate, lr0);
  std::uint64_t processed = 0;

  std::vector<std::size_t> order(sentences.size());
  std::vector<std::uint32_t> kept;
  std::vector<double> scratch(d);

  for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    for (std::size_t s : order) {
      const auto& sent = sentences[s];
      kept.clear();
      for (auto w : sent)
        if (keep_prob[w] >= 1.0 || rng.uniform() < keep_prob[w]) kept.push_back(w);
      for (std::size_t pos = 0; pos < kept.size(); ++pos) {
        const double progress = static_cast<double>(processed) / planned;
        const double lr = std::max(lr_min, lr0 - (lr0 - lr_min) * progress);
        const std::size_t reach = p.window - rng.below(p.window);
        const std::size_t lo = pos >= reach ? pos - reach : 0;
        const std::size_t hi = std::min(kept.size() - 1, pos + reach);
        auto center = model.input.row(kept[pos]);
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          const std::uint32_t ctx = kept[c];
          std::fill(scratch.begin(), scratch.end(), 0.0);
          sgns::update_target(model.output.row(ctx), center, 1.0, lr, scratch);
          for (std::size_t n = 0; n < p.negatives; ++n) {
            const std::size_t neg = sampler.draw(rng);
            if (neg == ctx) continue;
            sgns::update_target(model.output.row(neg), center, 0.0, lr, scratch);
          }
          for (std::size_t k = 0; k < d; ++k) center[k] -= lr * scratch[k];
        }
      }
      processed += sent.size();
    }
  }
}

}  // namespace

EmbeddingModel train_skipgram(const Corpus& corpus, const TrainParams& params) {
  params.validate();
  EmbeddingModel m;
  m.vocab = build_vocab(corpus, params.min_count);
  m.params = params;
  m.rng_seed = params.seed;
  m.generation = 0;
  m.input = Matrix(m.vocab.size(), params.dim);
  m.output = Matrix(m.vocab.size(), params.dim);
  Rng init_rng(derive_seed(m.rng_seed, std::uint64_t{0}));
  init_input_rows(m.input, 0, init_rng);
  Rng train_rng(derive_seed(derive_seed(m.rng_seed, std::uint64_t{0}), kTrainStream));
  train_epochs(m, corpus, train_rng);
  return m;
}

EmbeddingModel train_incremental(const EmbeddingModel& model, const Corpus& next_corpus) {
  if (next_corpus.empty()) return model;

  const auto next_counts = count_tokens(next_corpus);
  std::unordered_map<std::string, std::uint64_t> merged;
  for (std::size_t i = 0; i < model.vocab.size(); ++i) merged[model.vocab.words[i]] = model.vocab.counts[i];
  std::vector<std::string> fresh;
  for (const auto& [w, c] : next_counts) {
    auto it = merged.find(w);
    if (it != merged.end()) {
      it->second += c;
    } else if (c >= model.params.min_count) {
      merged.emplace(w, c);
      fresh.push_back(w);
    }
  }

  EmbeddingModel m;
  m.params = model.params;
  m.rng_seed = model.rng_seed;
  m.generation = model.generation + 1;
  m.vocab = Vocabulary::from_counts(merged, 0);
  const std::size_t d = model.dim();
  m.input = Matrix(m.vocab.size(), d);
  m.output = Matrix(m.vocab.size(), d);

  // Old rows move to their new ranks; new rows are drawn in vocabulary order.
  Rng init_rng(derive_seed(m.rng_seed, std::uint64_t{m.generation}));
  const double half = 0.5 / static_cast<double>(d);
  for (std::size_t r = 0; r < m.vocab.size(); ++r) {
    if (auto old = model.vocab.find(m.vocab.words[r])) {
      std::copy_n(model.input.row(*old).begin(), d, m.input.row(r).begin());
      std::copy_n(model.output.row(*old).begin(), d, m.output.row(r).begin());
    } else {
      for (double& x : m.input.row(r)) x = init_rng.uniform(-half, half);
    }
  }
  Rng train_rng(derive_seed(derive_seed(m.rng_seed, std::uint64_t{m.generation}), kTrainStream));
  train_epochs(m, next_corpus, train_rng);
  return m;
}

PointCloud point_cloud(const EmbeddingModel& model, std::size_t top_n, Metric metric) {
  if (top_n < 2) throw Error(ErrorCode::invalid_input, "point_cloud: top_n must be >= 2");
  const std::size_t n = std::min(top_n, model.vocab.size());
  std::vector<std::string> labels(model.vocab.words.begin(), model.vocab.words.begin() + static_cast<std::ptrdiff_t>(n));
  Matrix pts(n, model.dim());
  for (std::size_t i = 0; i < n; ++i)
    std::copy_n(model.input.row(i).begin(), model.dim(), pts.row(i).begin());
  auto cloud = make_point_cloud(std::move(labels), std::move(pts), metric);
  cloud.clamped = n < top_n;
  return cloud;
}

namespace {

constexpr char kMagic[8] = {'C', 'R', 'E', 'O', '-', 'E', 'M', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}
void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}
void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error(ErrorCode::format, "model file truncated");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}
std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error(ErrorCode::format, "model file truncated");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void save_model(const EmbeddingModel& m, std::ostream& out) {
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kVersion);
  put_u64(out, m.vocab.size());
  put_u64(out, m.dim());
  put_u64(out, m.rng_seed);
  put_u32(out, m.generation);
  const auto& p = m.params;
  put_u64(out, p.dim);
  put_u64(out, p.window);
  put_u64(out, p.negatives);
  put_u64(out, p.epochs);
  put_f64(out, p.learning_rate);
  put_u64(out, p.min_count);
  put_f64(out, p.subsample_threshold);
  put_u64(out, p.seed);
  for (std::size_t i = 0; i < m.vocab.size(); ++i) {
    const auto& w = m.vocab.words[i];
    put_u32(out, static_cast<std::uint32_t>(w.size()));
    out.write(w.data(), static_cast<std::streamsize>(w.size()));
    put_u64(out, m.vocab.counts[i]);
  }
  for (double x : m.input.data()) put_f64(out, x);
  for (double x : m.output.data()) put_f64(out, x);
  if (!out) throw Error(ErrorCode::io, "failed writing model");
}

EmbeddingModel load_model(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || !std::equal(magic, magic + 8, kMagic))
    throw Error(ErrorCode::format, "not a CREO-EMB model file");
  if (const auto v = get_u32(in); v != kVersion)
    throw Error(ErrorCode::format, "unsupported model version " + std::to_string(v));
  EmbeddingModel m;
  const auto nwords = get_u64(in);
  const auto d = get_u64(in);
  m.rng_seed = get_u64(in);
  m.generation = get_u32(in);
  auto& p = m.params;
  p.dim = get_u64(in);
  p.window = get_u64(in);
  p.negatives = get_u64(in);
  p.epochs = get_u64(in);
  p.learning_rate = get_f64(in);
  p.min_count = get_u64(in);
  p.subsample_threshold = get_f64(in);
  p.seed = get_u64(in);
  if (d == 0 || nwords > (std::uint64_t{1} << 32)) throw Error(ErrorCode::format, "bad model header");
  for (std::uint64_t i = 0; i < nwords; ++i) {
    const auto len = get_u32(in);
    std::string w(len, '\0');
    if (!in.read(w.data(), len)) throw Error(ErrorCode::format, "model file truncated");
    m.vocab.index.emplace(w, m.vocab.words.size());
    m.vocab.words.push_back(std::move(w));
    m.vocab.counts.push_back(get_u64(in));
  }
  m.input = Matrix(nwords, d);
  m.output = Matrix(nwords, d);
  for (double& x : m.input.data()) x = get_f64(in);
  for (double& x : m.output.data()) x = get_f64(in);
  return m;
}

}  // namespace creodrift
