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

#include "creodrift/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "creodrift/csv.hpp"
#include "creodrift/error.hpp"
#include "creodrift/io.hpp"
#include "creodrift/parallel.hpp"

namespace creodrift {

namespace fs = std::filesystem;
using json = nlohmann::json;

const char* to_string(Experiment e) noexcept {
  switch (e) {
    case Experiment::user_clusters: return "user-clusters";
    case Experiment::subreddit_divergence: return "subreddit-divergence";
    case Experiment::isotropy_audit: return "isotropy-audit";
    case Experiment::user_drift: return "user-drift";
    case Experiment::simulate: return "simulate";
  }
  return "?";
}

Experiment parse_experiment(std::string_view s) {
  std::string norm(s);
  std::replace(norm.begin(), norm.end(), '_', '-');
  for (auto e : {Experiment::user_clusters, Experiment::subreddit_divergence, Experiment::isotropy_audit,
                 Experiment::user_drift, Experiment::simulate})
    if (norm == to_string(e)) return e;
  throw Error(ErrorCode::validation, "unknown experiment '" + std::string(s) + "'");
}

std::vector<int> Manifest::distance_dims() const {
  if (!distance.dims.empty()) return distance.dims;
  std::vector<int> dims;
  for (int k = 0; k <= persistence.max_dim; ++k) dims.push_back(k);
  return dims;
}

// ---------------------------------------------------------------------------
// Manifest parsing

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::validation, "manifest: " + msg); }

// Reads the keys of one JSON object and rejects any it did not consume.
class Block {
 public:
  Block(const json& j, std::string where) : where_(std::move(where)) {
    if (j.is_null()) return;
    if (!j.is_object()) invalid("'" + where_ + "' must be an object");
    obj_ = &j;
  }
  ~Block() noexcept(false) {
    if (!obj_ || std::uncaught_exceptions()) return;
    for (const auto& [k, v] : obj_->items())
      if (!used_.contains(k)) invalid("unknown key '" + k + "' in '" + where_ + "'");
  }

  const json* get(const std::string& key) {
    used_.insert(key);
    if (!obj_) return nullptr;
    auto it = obj_->find(key);
    return it == obj_->end() ? nullptr : &*it;
  }
  const json& sub(const std::string& key) {
    const json* j = get(key);
    static const json null_json;
    return j ? *j : null_json;
  }

  template <class T>
  void read(const std::string& key, T& dst) {
    const json* j = get(key);
    if (!j) return;
    try {
      if constexpr (std::is_unsigned_v<T>) {
        if (!j->is_number_unsigned()) invalid("'" + where_ + "." + key + "' must be a non-negative integer");
      } else if constexpr (std::is_integral_v<T>) {
        if (!j->is_number_integer()) invalid("'" + where_ + "." + key + "' must be an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!j->is_number()) invalid("'" + where_ + "." + key + "' must be a number");
      }
      dst = j->get<T>();
    } catch (const json::exception&) {
      invalid("bad value for '" + where_ + "." + key + "'");
    }
  }

 private:
  const json* obj_ = nullptr;
  std::string where_;
  std::set<std::string> used_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

Metric metric_field(Block& b, const std::string& key, Metric def) {
  const json* j = b.get(key);
  if (!j) return def;
  if (!j->is_string()) invalid("'" + key + "' must be a string");
  try {
    return parse_metric(j->get<std::string>());
  } catch (const Error& e) {
    invalid(e.what());
  }
}

std::string config_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (const auto& item : v) out += (out.empty() ? "" : ",") + config_value(item);
    return out;
  }
  return v.dump();
}

SimConfig sim_config_from(const json& entry, const fs::path& base, std::uint64_t seed, std::size_t index) {
  std::string text = "seed = " + std::to_string(seed) + "\n";
  if (entry.is_string()) {
    const fs::path p = resolve(base, entry.get<std::string>());
    if (!fs::is_regular_file(p)) invalid("simulation config '" + p.string() + "' does not exist");
    text += read_file(p);
  } else if (entry.is_object()) {
    for (const auto& [k, v] : entry.items()) text += k + " = " + config_value(v) + "\n";
  } else {
    invalid("simulate.configs entries must be paths or objects");
  }
  SimConfig c;
  try {
    c = parse_sim_config(text);
  } catch (const Error& e) {
    invalid(std::string("simulation config ") + std::to_string(index + 1) + ": " + e.what());
  }
  if (c.name.empty()) c.name = "run" + std::to_string(index + 1);
  for (std::size_t s : c.checkpoints)
    if (s > c.params.steps) invalid("checkpoint " + std::to_string(s) + " is past the last step in '" + c.name + "'");
  return c;
}

template <class F>
void as_validation(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::validation) throw;
    invalid(e.what());
  }
}

}  // namespace

Manifest parse_manifest(std::string_view text, const fs::path& base_dir, const ManifestOverrides& ov) {
  json root = json::parse(text.begin(), text.end(), nullptr, false);
  if (root.is_discarded()) invalid("not valid JSON");
  if (!root.is_object()) invalid("top level must be an object");

  Manifest m;
  m.sha256 = sha256_hex(text);
  Block top(root, "manifest");

  const json* exp = top.get("experiment");
  if (!exp || !exp->is_string()) invalid("'experiment' is required");
  m.experiment = parse_experiment(exp->get<std::string>());

  std::optional<std::uint64_t> seed;
  if (top.get("seed")) {
    std::uint64_t s = 0;
    top.read("seed", s);
    seed = s;
  }
  if (ov.seed) seed = ov.seed;
  if (!seed) invalid("'seed' is required");
  m.seed = *seed;

  std::string out;
  top.read("output_dir", out);
  if (ov.output_dir)
    m.output_dir = *ov.output_dir;
  else if (!out.empty())
    m.output_dir = resolve(base_dir, out);
  else
    invalid("'output_dir' is required (or pass --out)");

  {
    Block in(top.sub("inputs"), "inputs");
    if (const json* c = in.get("communities")) {
      if (!c->is_object()) invalid("'inputs.communities' must map names to files");
      for (const auto& [name, path] : c->items()) {
        if (!path.is_string()) invalid("community '" + name + "' needs a file path");
        const fs::path p = resolve(base_dir, path.get<std::string>());
        if (!fs::is_regular_file(p)) invalid("input '" + p.string() + "' does not exist");
        m.communities.emplace(name, p);
      }
    }
    if (const json* c = in.get("cloud")) {
      if (!c->is_string()) invalid("'inputs.cloud' must be a path");
      const fs::path p = resolve(base_dir, c->get<std::string>());
      if (!fs::is_regular_file(p)) invalid("input '" + p.string() + "' does not exist");
      m.cloud = p;
    }
    m.cloud_metric = metric_field(in, "cloud_metric", Metric::euclidean);
  }
  {
    Block b(top.sub("ingest"), "ingest");
    b.read("min_doc_tokens", m.filter.min_doc_tokens);
    if (b.get("min_timestamp")) {
      std::int64_t v = 0;
      b.read("min_timestamp", v);
      m.filter.min_timestamp = v;
    }
    if (b.get("max_timestamp")) {
      std::int64_t v = 0;
      b.read("max_timestamp", v);
      m.filter.max_timestamp = v;
    }
    as_validation([&] { m.filter.validate(); });
  }
  {
    Block b(top.sub("embedding"), "embedding");
    b.read("dim", m.train.dim);
    b.read("window", m.train.window);
    b.read("negatives", m.train.negatives);
    b.read("epochs", m.train.epochs);
    b.read("learning_rate", m.train.learning_rate);
    b.read("min_count", m.train.min_count);
    b.read("subsample_threshold", m.train.subsample_threshold);
    m.train.seed = m.seed;
    as_validation([&] { m.train.validate(); });
  }
  {
    Block b(top.sub("users"), "users");
    b.read("top_k", m.top_users);
    if (m.top_users == 0) invalid("'users.top_k' must be positive");
  }
  {
    Block b(top.sub("cloud"), "cloud");
    b.read("top_n", m.cloud_settings.top_n);
    m.cloud_settings.metric = metric_field(b, "metric", Metric::angular);
    if (m.cloud_settings.top_n < 2) invalid("'cloud.top_n' must be at least 2");
  }
  {
    Block b(top.sub("persistence"), "persistence");
    b.read("max_dim", m.persistence.max_dim);
    b.read("max_eps", m.persistence.max_eps);
    b.read("budget", m.persistence.budget);
    if (m.persistence.max_dim < 0) invalid("'persistence.max_dim' must be >= 0");
    if (!(m.persistence.max_eps > 0.0) && !std::isinf(m.persistence.max_eps))
      invalid("'persistence.max_eps' must be positive");
  }
  {
    Block b(top.sub("distance"), "distance");
    std::string kind = "bottleneck";
    b.read("kind", kind);
    double q = 1.0;
    b.read("q", q);
    if (kind == "bottleneck")
      m.distance.kind = DistanceKind::bottleneck();
    else if (kind == "wasserstein" && q >= 1.0)
      m.distance.kind = DistanceKind::wasserstein(q);
    else
      invalid("'distance.kind' must be bottleneck or wasserstein (q >= 1)");
    b.read("dims", m.distance.dims);
    for (int d : m.distance.dims)
      if (d < 0 || d > m.persistence.max_dim) invalid("'distance.dims' entries must lie in [0, max_dim]");
  }
  {
    Block b(top.sub("projection"), "projection");
    b.read("dim", m.projection_dim);
    b.read("perplexity", m.tsne.perplexity);
    b.read("iterations", m.tsne.iterations);
    b.read("learning_rate", m.tsne.learning_rate);
    m.tsne.seed = m.seed;
    if (m.projection_dim < 0 || m.projection_dim > m.persistence.max_dim)
      invalid("'projection.dim' must lie in [0, max_dim]");
    if (!(m.tsne.perplexity >= 1.0)) invalid("'projection.perplexity' must be >= 1");
    if (m.tsne.iterations < m.tsne.exaggeration_iterations) invalid("'projection.iterations' must be >= 250");
    if (!(m.tsne.learning_rate > 0.0)) invalid("'projection.learning_rate' must be positive");
  }
  {
    Block b(top.sub("audit"), "audit");
    std::string community;
    b.read("community", community);
    if (!community.empty()) m.audit.community = community;
    b.read("min_persistence", m.audit.min_persistence);
    b.read("dominance_ratio", m.audit.dominance_ratio);
    if (!(m.audit.min_persistence >= 0.0)) invalid("'audit.min_persistence' must be >= 0");
  }
  {
    Block b(top.sub("simulate"), "simulate");
    if (const json* c = b.get("configs")) {
      if (!c->is_array()) invalid("'simulate.configs' must be a list");
      std::set<std::string> names;
      for (std::size_t i = 0; i < c->size(); ++i) {
        m.sim_configs.push_back(sim_config_from((*c)[i], base_dir, m.seed, i));
        if (!names.insert(m.sim_configs.back().name).second)
          invalid("duplicate simulation name '" + m.sim_configs.back().name + "'");
      }
    }
  }

  switch (m.experiment) {
    case Experiment::user_clusters:
    case Experiment::subreddit_divergence:
    case Experiment::user_drift:
      if (m.communities.empty()) invalid("'inputs.communities' is required for this experiment");
      break;
    case Experiment::isotropy_audit:
      if (!m.cloud && m.communities.empty()) invalid("the audit needs 'inputs.cloud' or a community");
      if (!m.cloud && !m.audit.community && m.communities.size() != 1)
        invalid("several communities given; choose one with 'audit.community'");
      if (m.audit.community && !m.communities.contains(*m.audit.community))
        invalid("'audit.community' names an unknown community");
      break;
    case Experiment::simulate:
      if (m.sim_configs.empty()) invalid("'simulate.configs' must list at least one run");
      break;
  }
  return m;
}

Manifest load_manifest(const fs::path& path, const ManifestOverrides& ov) {
  if (!fs::is_regular_file(path)) throw Error(ErrorCode::validation, "manifest '" + path.string() + "' not found");
  const std::string text = read_file(path);
  Manifest m = parse_manifest(text, fs::absolute(path).parent_path(), ov);
  m.path = path;
  return m;
}

// ---------------------------------------------------------------------------
// Provenance

namespace {

json record_json(const ProvenanceRecord& rec, bool with_time) {
  json stages = json::array();
  for (const auto& s : rec.stages) {
    json st = {{"name", s.name}, {"inputs", s.inputs}, {"outputs", s.outputs}, {"warnings", s.warnings}};
    if (with_time) st["wall_seconds"] = s.wall_seconds;
    stages.push_back(std::move(st));
  }
  return {{"tool_version", rec.tool_version},
          {"experiment", rec.experiment},
          {"manifest_sha256", rec.manifest_sha256},
          {"seed", rec.seed},
          {"stages", std::move(stages)}};
}

}  // namespace

std::string ProvenanceRecord::content_digest() const { return sha256_hex(record_json(*this, false).dump()); }

std::string provenance_json(const ProvenanceRecord& rec) { return record_json(rec, true).dump(2) + "\n"; }

ProvenanceRecord read_provenance(const fs::path& path) {
  const json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::format, "provenance: not a JSON object");
  ProvenanceRecord rec;
  try {
    rec.tool_version = j.at("tool_version").get<std::string>();
    rec.experiment = j.at("experiment").get<std::string>();
    rec.manifest_sha256 = j.at("manifest_sha256").get<std::string>();
    rec.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& st : j.at("stages")) {
      StageRecord s;
      s.name = st.at("name").get<std::string>();
      s.inputs = st.at("inputs").get<std::map<std::string, std::string>>();
      s.outputs = st.at("outputs").get<std::map<std::string, std::string>>();
      s.warnings = st.at("warnings").get<std::vector<std::string>>();
      s.wall_seconds = st.value("wall_seconds", 0.0);
      rec.stages.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::format, std::string("provenance: ") + e.what());
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Stage runner

namespace {

std::string file_stem(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

class Run {
 public:
  Run(const Manifest& m, const RunOptions& o) : m_(m), opts_(o) {
    rec_.tool_version = kToolVersion;
    rec_.experiment = to_string(m.experiment);
    rec_.manifest_sha256 = m.sha256;
    rec_.seed = m.seed;
    threads_ = o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency());
  }

  const Manifest& manifest() const { return m_; }
  unsigned threads() const { return threads_; }

  template <class F>
  void stage(const std::string& name, F&& fn) {
    if (opts_.stage && *opts_.stage != name) return;
    current_ = StageRecord{};
    current_.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const Error& e) {
      write_provenance();
      throw Error(e.code(), "stage '" + name + "': " + e.what());
    }
    current_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec_.stages.push_back(std::move(current_));
  }

  std::string input(const std::string& rel) {
    const fs::path p = m_.output_dir / rel;
    if (!fs::is_regular_file(p))
      throw Error(ErrorCode::io, "missing input '" + rel + "'; run the stage that produces it first");
    std::string data = read_file(p);
    current_.inputs[rel] = sha256_hex(data);
    return data;
  }

  std::string external(const fs::path& p) {
    std::string data = read_file(p);
    const fs::path base = m_.path.empty() ? fs::path{} : fs::absolute(m_.path).parent_path();
    std::string key = p.lexically_relative(base).generic_string();
    if (key.empty() || key.starts_with("..")) key = p.filename().generic_string();
    current_.inputs["input:" + key] = sha256_hex(data);
    return data;
  }

  void output(const std::string& rel, const std::string& content) {
    write_file(m_.output_dir / rel, content);
    current_.outputs[rel] = sha256_hex(content);
  }

  void warn(const std::string& msg) {
    std::cerr << "warning: " << msg << '\n';
    current_.warnings.push_back(msg);
  }

  ProvenanceRecord finish() {
    write_provenance();
    return rec_;
  }

 private:
  void write_provenance() {
    ProvenanceRecord out = rec_;
    const fs::path path = m_.output_dir / "provenance.json";
    if (opts_.stage && fs::is_regular_file(path)) {
      // A single-stage rerun updates its own entry and keeps the others.
      try {
        ProvenanceRecord old = read_provenance(path);
        if (old.manifest_sha256 == rec_.manifest_sha256) {
          const auto order = stage_names(m_);
          for (auto& s : old.stages)
            if (std::none_of(out.stages.begin(), out.stages.end(), [&](const StageRecord& r) { return r.name == s.name; }))
              out.stages.push_back(std::move(s));
          auto pos = [&](const std::string& n) { return std::find(order.begin(), order.end(), n) - order.begin(); };
          std::stable_sort(out.stages.begin(), out.stages.end(),
                           [&](const StageRecord& a, const StageRecord& b) { return pos(a.name) < pos(b.name); });
        }
      } catch (const Error&) {
      }
    }
    write_file(path, provenance_json(out));
  }

  const Manifest& m_;
  RunOptions opts_;
  unsigned threads_ = 1;
  ProvenanceRecord rec_;
  StageRecord current_;
};

std::string model_bytes(const EmbeddingModel& model) {
  std::ostringstream out(std::ios::binary);
  save_model(model, out);
  return std::move(out).str();
}

EmbeddingModel model_from(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return load_model(in);
}

Corpus corpus_from(const std::string& text) {
  std::istringstream in(text);
  return read_corpus_jsonl(in);
}

std::string barcode_text(const PersistenceDiagram& d) {
  std::ostringstream out;
  write_barcode_csv(d, out);
  return out.str();
}

PersistenceDiagram barcode_from(const std::string& text, const Manifest& m) {
  std::istringstream in(text);
  PersistenceDiagram d = read_barcode_csv(in);
  d.max_dim = m.persistence.max_dim;
  d.max_eps = m.persistence.max_eps;
  return d;
}

std::vector<csv::Row> table_from(const std::string& text, const csv::Row& header) {
  std::istringstream in(text);
  auto rows = csv::read(in);
  if (rows.empty() || rows.front() != header) throw Error(ErrorCode::format, "unexpected table header");
  rows.erase(rows.begin());
  for (const auto& r : rows)
    if (r.size() != header.size()) throw Error(ErrorCode::format, "ragged table row");
  return rows;
}

// Diagram of the first top_n words of a model; returns the warning text when
// the vocabulary was smaller than requested.
PersistenceDiagram model_diagram(const EmbeddingModel& model, const Manifest& m, std::string* warning,
                                 const std::string& who) {
  const PointCloud cloud = point_cloud(model, m.cloud_settings.top_n, m.cloud_settings.metric);
  if (cloud.clamped && warning)
    *warning = who + ": cloud clamped to " + std::to_string(cloud.size()) + " words";
  const Filtration f =
      build_vr_filtration(pairwise_distances(cloud), m.persistence.max_dim, m.persistence.max_eps, m.persistence.budget);
  return compute_persistence(f, {.generators = false});
}

void ingest_stage(Run& run, const std::vector<std::string>& names) {
  const Manifest& m = run.manifest();
  for (const auto& name : names) {
    std::istringstream in(run.external(m.communities.at(name)));
    IngestResult r;
    try {
      r = ingest_jsonl(in, m.filter);
    } catch (const Error& e) {
      throw Error(e.code(), "community '" + name + "': " + e.what());
    }
    for (auto& d : r.corpus.documents) d.community = name;
    if (r.stats.malformed) run.warn(name + ": skipped " + std::to_string(r.stats.malformed) + " malformed lines");
    std::ostringstream out;
    write_corpus_jsonl(r.corpus, out);
    run.output("corpus/" + file_stem(name) + ".jsonl", out.str());
  }
}

std::vector<std::string> community_names(const Manifest& m) {
  std::vector<std::string> names;
  for (const auto& [name, path] : m.communities) names.push_back(name);
  return names;
}

// An entity is a community or a user whose model is tracked.
struct Entity {
  std::string label;
  std::string group;
  std::string stem;
  Corpus corpus;
};

std::vector<Entity> user_entities(Run& run) {
  const Manifest& m = run.manifest();
  std::vector<Entity> users;
  std::set<std::string> stems;
  for (const auto& name : community_names(m)) {
    const Corpus corpus = corpus_from(run.input("corpus/" + file_stem(name) + ".jsonl"));
    auto top = top_users(corpus, m.top_users);
    if (top.size() < m.top_users)
      run.warn(name + ": only " + std::to_string(top.size()) + " users available (asked for " +
               std::to_string(m.top_users) + ")");
    for (auto& [author, c] : top) {
      Entity e{name + "/" + author, name, file_stem(name) + "__" + file_stem(author), std::move(c)};
      if (!stems.insert(e.stem).second) throw Error(ErrorCode::invalid_input, "file name clash for user " + e.label);
      users.push_back(std::move(e));
    }
  }
  return users;
}

const csv::Row kUsersHeader = {"label", "group", "stem"};
const csv::Row kWindowsHeader = {"month", "label", "group", "stem", "status"};

// ---------------------------------------------------------------------------
// user-clusters

void run_user_clusters(Run& run) {
  const Manifest& m = run.manifest();
  run.stage("ingest", [&] { ingest_stage(run, community_names(m)); });

  run.stage("embed", [&] {
    const auto users = user_entities(run);
    std::vector<std::string> bytes(users.size());
    parallel_for(users.size(), run.threads(), [&](std::size_t i) {
      try {
        bytes[i] = model_bytes(train_skipgram(users[i].corpus, m.train));
      } catch (const Error& e) {
        throw Error(e.code(), "user '" + users[i].label + "': " + e.what());
      }
    });
    std::string table = csv::join(kUsersHeader) + "\n";
    for (std::size_t i = 0; i < users.size(); ++i) {
      run.output("models/" + users[i].stem + ".bin", bytes[i]);
      table += csv::join({users[i].label, users[i].group, users[i].stem}) + "\n";
    }
    run.output("users.csv", table);
  });

  run.stage("persistence", [&] {
    const auto users = table_from(run.input("users.csv"), kUsersHeader);
    std::vector<std::string> models;
    for (const auto& u : users) models.push_back(run.input("models/" + u[2] + ".bin"));
    std::vector<std::string> bars(users.size()), warnings(users.size());
    parallel_for(users.size(), run.threads(), [&](std::size_t i) {
      bars[i] = barcode_text(model_diagram(model_from(models[i]), m, &warnings[i], users[i][0]));
    });
    for (std::size_t i = 0; i < users.size(); ++i) {
      if (!warnings[i].empty()) run.warn(warnings[i]);
      run.output("diagrams/" + users[i][2] + ".csv", bars[i]);
    }
  });

  run.stage("distances", [&] {
    const auto users = table_from(run.input("users.csv"), kUsersHeader);
    std::vector<PersistenceDiagram> diagrams;
    for (const auto& u : users) diagrams.push_back(barcode_from(run.input("diagrams/" + u[2] + ".csv"), m));
    std::vector<LabeledDiagram> labeled;
    for (std::size_t i = 0; i < users.size(); ++i) labeled.push_back({users[i][0], &diagrams[i]});
    for (int dim : m.distance_dims()) {
      const auto dm = distance_matrix(labeled, dim, m.distance.kind, run.threads());
      std::ostringstream mat, pairs;
      write_diagram_matrix_csv(dm, mat);
      write_pair_report_csv(dm, pairs);
      run.output("distances/dim" + std::to_string(dim) + ".csv", mat.str());
      run.output("distances/pairs_dim" + std::to_string(dim) + ".csv", pairs.str());
    }
  });

  run.stage("projection", [&] {
    const auto users = table_from(run.input("users.csv"), kUsersHeader);
    std::istringstream in(run.input("distances/dim" + std::to_string(m.projection_dim) + ".csv"));
    const auto dm = read_diagram_matrix_csv(in);
    TsneParams p = m.tsne;
    const double max_perplexity = static_cast<double>(dm.size()) - 1.0;
    if (p.perplexity > max_perplexity && dm.size() >= 3) {
      run.warn("perplexity lowered to " + csv::format_double(max_perplexity) + " for " +
               std::to_string(dm.size()) + " points");
      p.perplexity = max_perplexity;
    }
    const auto proj = tsne_precomputed(dm, p);
    std::map<std::string, std::string> groups;
    for (const auto& u : users) groups[u[0]] = u[1];
    const auto art = export_scatter(proj, groups);
    run.output("proj.csv", art.csv);
    run.output("proj.svg", art.svg);
  });
}

// ---------------------------------------------------------------------------
// Monthly chains shared by subreddit-divergence and user-drift

void train_chain_stage(Run& run, const std::vector<Entity>& entities) {
  const Manifest& m = run.manifest();
  std::vector<std::vector<MonthWindow>> windows(entities.size());
  std::set<std::string> month_set;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    windows[i] = window_by_month(entities[i].corpus);
    for (const auto& w : windows[i]) month_set.insert(w.label());
  }
  const std::vector<std::string> months(month_set.begin(), month_set.end());

  struct Cell {
    std::string status;  // trained, carried_forward, absent
    std::string bytes;
  };
  std::vector<std::vector<Cell>> cells(entities.size(), std::vector<Cell>(months.size()));
  parallel_for(entities.size(), run.threads(), [&](std::size_t i) {
    std::map<std::string, const Corpus*> by_month;
    for (const auto& w : windows[i]) by_month[w.label()] = &w.corpus;
    std::optional<EmbeddingModel> model;
    for (std::size_t t = 0; t < months.size(); ++t) {
      auto it = by_month.find(months[t]);
      Cell& cell = cells[i][t];
      try {
        if (it != by_month.end()) {
          model = model ? train_incremental(*model, *it->second) : train_skipgram(*it->second, m.train);
          cell.status = "trained";
        } else {
          cell.status = model ? "carried_forward" : "absent";
        }
      } catch (const Error& e) {
        throw Error(e.code(), entities[i].label + " " + months[t] + ": " + e.what());
      }
      if (model) cell.bytes = model_bytes(*model);
    }
  });

  std::string table = csv::join(kWindowsHeader) + "\n";
  for (std::size_t t = 0; t < months.size(); ++t)
    for (std::size_t i = 0; i < entities.size(); ++i) {
      const auto& e = entities[i];
      const Cell& cell = cells[i][t];
      table += csv::join({months[t], e.label, e.group, e.stem, cell.status}) + "\n";
      if (cell.status == "absent") {
        run.warn(e.label + " has no data before " + months[t] + "; left out of that month");
        continue;
      }
      if (cell.status == "carried_forward") run.warn(e.label + " has no data in " + months[t] + "; model carried forward");
      run.output("models/" + e.stem + "/" + months[t] + ".bin", cell.bytes);
    }
  run.output("windows.csv", table);
}

void chain_persistence_stage(Run& run) {
  const Manifest& m = run.manifest();
  auto rows = table_from(run.input("windows.csv"), kWindowsHeader);
  std::erase_if(rows, [](const csv::Row& r) { return r[4] == "absent"; });
  std::vector<std::string> models;
  for (const auto& r : rows) models.push_back(run.input("models/" + r[3] + "/" + r[0] + ".bin"));
  std::vector<std::string> bars(rows.size()), warnings(rows.size());
  parallel_for(rows.size(), run.threads(), [&](std::size_t i) {
    bars[i] = barcode_text(model_diagram(model_from(models[i]), m, &warnings[i], rows[i][1] + " " + rows[i][0]));
  });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!warnings[i].empty()) run.warn(warnings[i]);
    run.output("diagrams/" + rows[i][3] + "/" + rows[i][0] + ".csv", bars[i]);
  }
}

struct MonthSlice {
  std::string month;
  std::vector<csv::Row> rows;  // present entities, in label order
  std::vector<PersistenceDiagram> diagrams;
};

std::vector<MonthSlice> load_months(Run& run) {
  const Manifest& m = run.manifest();
  const auto rows = table_from(run.input("windows.csv"), kWindowsHeader);
  std::vector<MonthSlice> months;
  for (const auto& r : rows) {
    if (months.empty() || months.back().month != r[0]) months.push_back({r[0], {}, {}});
    if (r[4] == "absent") continue;
    months.back().rows.push_back(r);
  }
  for (auto& s : months) {
    std::sort(s.rows.begin(), s.rows.end(), [](const csv::Row& a, const csv::Row& b) { return a[1] < b[1]; });
    for (const auto& r : s.rows) s.diagrams.push_back(barcode_from(run.input("diagrams/" + r[3] + "/" + r[0] + ".csv"), m));
  }
  return months;
}

std::vector<LabeledDiagram> labeled(const MonthSlice& s) {
  std::vector<LabeledDiagram> out;
  for (std::size_t i = 0; i < s.rows.size(); ++i) out.push_back({s.rows[i][1], &s.diagrams[i]});
  return out;
}

// ---------------------------------------------------------------------------
// subreddit-divergence

void run_subreddit_divergence(Run& run) {
  const Manifest& m = run.manifest();
  run.stage("ingest", [&] { ingest_stage(run, community_names(m)); });

  run.stage("train", [&] {
    std::vector<Entity> communities;
    for (const auto& name : community_names(m))
      communities.push_back({name, name, file_stem(name), corpus_from(run.input("corpus/" + file_stem(name) + ".jsonl"))});
    train_chain_stage(run, communities);
  });

  run.stage("persistence", [&] { chain_persistence_stage(run); });

  run.stage("distances", [&] {
    std::string out = csv::join({"month", "pair", "dim", "distance", "flag"}) + "\n";
    for (const auto& s : load_months(run)) {
      if (s.rows.size() < 2) {
        run.warn(s.month + ": fewer than two communities have a model; no rows");
        continue;
      }
      const auto diags = labeled(s);
      for (std::size_t i = 0; i < s.rows.size(); ++i)
        for (std::size_t j = i + 1; j < s.rows.size(); ++j) {
          const bool carried = s.rows[i][4] == "carried_forward" || s.rows[j][4] == "carried_forward";
          for (int dim : m.distance_dims()) {
            double d = 0.0;
            try {
              d = diagram_distance(s.diagrams[i], s.diagrams[j], dim, m.distance.kind);
            } catch (const Error& e) {
              throw Error(e.code(), s.month + " " + diags[i].label + "|" + diags[j].label + ": " + e.what());
            }
            out += csv::join({s.month, diags[i].label + "|" + diags[j].label, std::to_string(dim),
                              csv::format_double(d), carried ? "carried_forward" : "ok"}) +
                   "\n";
          }
        }
    }
    run.output("divergence.csv", out);
  });
}

// ---------------------------------------------------------------------------
// user-drift

void run_user_drift(Run& run) {
  const Manifest& m = run.manifest();
  run.stage("ingest", [&] { ingest_stage(run, community_names(m)); });
  run.stage("train", [&] { train_chain_stage(run, user_entities(run)); });
  run.stage("persistence", [&] { chain_persistence_stage(run); });

  run.stage("distances", [&] {
    std::string out = csv::join({"month", "dim", "group_a", "group_b", "scope", "mean", "count", "flag"}) + "\n";
    for (const auto& s : load_months(run)) {
      if (s.rows.size() < 2) {
        run.warn(s.month + ": fewer than two users have a model; no rows");
        continue;
      }
      std::map<std::string, std::string> groups;
      std::map<std::string, bool> carried;
      std::map<std::string, std::size_t> sizes;
      for (const auto& r : s.rows) {
        groups[r[1]] = r[2];
        carried[r[2]] = carried[r[2]] || r[4] == "carried_forward";
        ++sizes[r[2]];
      }
      for (int dim : m.distance_dims()) {
        const auto dm = distance_matrix(labeled(s), dim, m.distance.kind, run.threads());
        const std::string d = std::to_string(dim);
        for (const auto& [g, n] : sizes) {
          const std::string flag = carried[g] ? "carried_forward" : "ok";
          if (n < 2) {
            out += csv::join({s.month, d, g, g, "within", "nan", "0", "undefined"}) + "\n";
            continue;
          }
          // Restrict to the group's members so singleton groups elsewhere do not matter.
          DiagramDistanceMatrix sub;
          sub.dim = dm.dim;
          sub.kind = dm.kind;
          std::vector<std::size_t> idx;
          for (std::size_t i = 0; i < dm.size(); ++i)
            if (groups[dm.labels[i]] == g) idx.push_back(i);
          for (std::size_t a : idx) {
            sub.labels.push_back(dm.labels[a]);
            for (std::size_t b : idx) sub.entries.push_back(dm(a, b));
          }
          std::map<std::string, std::string> one;
          for (const auto& l : sub.labels) one[l] = g;
          const auto gm = mean_group_distance(sub, one, GroupPairs::within).front();
          out += csv::join({s.month, d, g, g, "within", csv::format_double(gm.mean), std::to_string(gm.count), flag}) + "\n";
        }
        if (sizes.size() >= 2)
          for (const auto& gm : mean_group_distance(dm, groups, GroupPairs::across)) {
            const bool c = carried[gm.group_a] || carried[gm.group_b];
            out += csv::join({s.month, d, gm.group_a, gm.group_b, "across", csv::format_double(gm.mean),
                              std::to_string(gm.count), c ? "carried_forward" : "ok"}) +
                   "\n";
          }
      }
    }
    run.output("drift_users.csv", out);
  });
}

// ---------------------------------------------------------------------------
// isotropy-audit

json persistence_value(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void run_isotropy_audit(Run& run) {
  const Manifest& m = run.manifest();
  const std::string community =
      m.audit.community ? *m.audit.community : (m.communities.empty() ? "" : m.communities.begin()->first);
  const Metric metric = m.cloud ? m.cloud_metric : m.cloud_settings.metric;

  if (m.cloud) {
    run.stage("cloud", [&] {
      std::istringstream in(run.external(*m.cloud));
      const auto cloud = read_point_cloud_csv(in, metric);
      std::ostringstream out;
      write_point_cloud_csv(cloud, out);
      run.output("cloud.csv", out.str());
    });
  } else {
    run.stage("ingest", [&] { ingest_stage(run, {community}); });
    run.stage("embed", [&] {
      const Corpus corpus = corpus_from(run.input("corpus/" + file_stem(community) + ".jsonl"));
      run.output("models/" + file_stem(community) + ".bin", model_bytes(train_skipgram(corpus, m.train)));
    });
    run.stage("cloud", [&] {
      const auto model = model_from(run.input("models/" + file_stem(community) + ".bin"));
      const auto cloud = point_cloud(model, m.cloud_settings.top_n, metric);
      if (cloud.clamped) run.warn("cloud clamped to " + std::to_string(cloud.size()) + " words");
      std::ostringstream out;
      write_point_cloud_csv(cloud, out);
      run.output("cloud.csv", out.str());
    });
  }

  run.stage("persistence", [&] {
    std::istringstream in(run.input("cloud.csv"));
    const auto cloud = read_point_cloud_csv(in, metric);
    const auto f = build_vr_filtration(pairwise_distances(cloud), m.persistence.max_dim, m.persistence.max_eps,
                                       m.persistence.budget);
    const auto diag = compute_persistence(f);
    const auto holes = hole_report(diag, m.audit.min_persistence, cloud);

    std::string table = csv::join({"pair_id", "dim", "birth", "death", "persistence"}) + "\n";
    for (const auto& h : holes)
      table += csv::join({std::to_string(h.pair_id), std::to_string(h.dim), csv::format_double(h.birth),
                          csv::format_double(h.death), csv::format_double(h.death - h.birth)}) +
               "\n";
    std::ostringstream gens;
    write_generator_csv(holes, gens);

    json dims = json::object();
    for (int k = 1; k <= m.persistence.max_dim; ++k) {
      std::vector<double> pers;
      for (const auto& p : diag.view(k)) pers.push_back(p.persistence());
      std::sort(pers.rbegin(), pers.rend());
      const auto large = std::count_if(holes.begin(), holes.end(), [&](const Hole& h) { return h.dim == k; });
      json entry = {{"bars", pers.size()}, {"large", large}};
      entry["top_persistence"] = pers.empty() ? json(nullptr) : persistence_value(pers[0]);
      entry["second_persistence"] = pers.size() < 2 ? json(nullptr) : persistence_value(pers[1]);
      bool dominant = false;
      json ratio = nullptr;
      if (!pers.empty() && pers[0] > 0.0) {
        if (pers.size() < 2 || pers[1] == 0.0) {
          dominant = true;
        } else if (std::isfinite(pers[1])) {
          ratio = pers[0] / pers[1];
          dominant = pers[0] >= m.audit.dominance_ratio * pers[1];
        }
      }
      entry["dominance_ratio"] = std::isinf(pers.empty() ? 0.0 : pers[0]) ? json(nullptr) : ratio;
      entry["dominant"] = dominant;
      dims[std::to_string(k)] = std::move(entry);
    }
    const json summary = {{"points", cloud.size()},
                          {"metric", to_string(metric)},
                          {"max_dim", m.persistence.max_dim},
                          {"max_eps", persistence_value(m.persistence.max_eps)},
                          {"min_persistence", m.audit.min_persistence},
                          {"dominance_threshold", m.audit.dominance_ratio},
                          {"dims", std::move(dims)}};

    run.output("barcode.csv", barcode_text(diag));
    run.output("holes.csv", table);
    run.output("generators.csv", gens.str());
    run.output("audit_summary.json", summary.dump(2) + "\n");
  });
}

// ---------------------------------------------------------------------------
// simulate

void run_simulate(Run& run) {
  for (const auto& c : run.manifest().sim_configs) {
    run.stage(c.name, [&] {
      const std::string dir = file_stem(c.name) + "/";
      const auto graph = make_graph(c.graph);
      const auto result = simulate(graph, c.params, c.checkpoints, [&](std::size_t step, const auto& pop) {
        const auto diagrams = snapshot_diagrams(pop, c.snapshot_top_n, c.snapshot_max_dim, c.snapshot_max_eps);
        for (std::size_t id = 0; id < diagrams.size(); ++id)
          run.output(dir + "checkpoints/step_" + std::to_string(step) + "/learner_" + std::to_string(id) + ".csv",
                     barcode_text(diagrams[id]));
      });
      std::ostringstream drift, events;
      write_drift_csv(result.drift, drift);
      write_events_csv(result.events, events);
      run.output(dir + "drift.csv", drift.str());
      run.output(dir + "events.csv", events.str());
    });
  }
}

}  // namespace

std::vector<std::string> stage_names(const Manifest& m) {
  switch (m.experiment) {
    case Experiment::user_clusters: return {"ingest", "embed", "persistence", "distances", "projection"};
    case Experiment::subreddit_divergence:
    case Experiment::user_drift: return {"ingest", "train", "persistence", "distances"};
    case Experiment::isotropy_audit:
      if (m.cloud) return {"cloud", "persistence"};
      return {"ingest", "embed", "cloud", "persistence"};
    case Experiment::simulate: {
      std::vector<std::string> names;
      for (const auto& c : m.sim_configs) names.push_back(c.name);
      return names;
    }
  }
  return {};
}

ProvenanceRecord run_experiment(const Manifest& m, const RunOptions& opts) {
  if (opts.stage) {
    const auto names = stage_names(m);
    if (std::find(names.begin(), names.end(), *opts.stage) == names.end())
      throw Error(ErrorCode::validation, "unknown stage '" + *opts.stage + "' for " + to_string(m.experiment));
  }
  fs::create_directories(m.output_dir);
  Run run(m, opts);
  switch (m.experiment) {
    case Experiment::user_clusters: run_user_clusters(run); break;
    case Experiment::subreddit_divergence: run_subreddit_divergence(run); break;
    case Experiment::isotropy_audit: run_isotropy_audit(run); break;
    case Experiment::user_drift: run_user_drift(run); break;
    case Experiment::simulate: run_simulate(run); break;
  }
  return run.finish();
}

}  // namespace creodrift
