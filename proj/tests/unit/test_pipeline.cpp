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

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <json.hpp>

#include "creodrift/csv.hpp"
#include "creodrift/error.hpp"
#include "creodrift/pipeline.hpp"
#include "synth.hpp"

using namespace creodrift;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kToy = fs::path(CREODRIFT_SOURCE_DIR) / "data/toy";

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<csv::Row> rows_of(const fs::path& p) {
  std::istringstream in(slurp(p));
  auto rows = csv::read(in);
  REQUIRE(!rows.empty());
  rows.erase(rows.begin());
  return rows;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::io;
}

const json kSmallEmbedding = {{"dim", 8}, {"window", 2}, {"negatives", 2}, {"epochs", 2}, {"min_count", 1}};

Manifest manifest_in(const fs::path& dir, const json& j) {
  write(dir / "manifest.json", j.dump(2));
  return load_manifest(dir / "manifest.json");
}

// `communities` communities, each posting `docs` comments a month from its own
// word pool plus a shared one.
void write_communities(const fs::path& dir, std::size_t communities, std::size_t months, std::size_t docs) {
  for (std::size_t c = 0; c < communities; ++c) {
    Rng rng(derive_seed(77, c));
    std::string text;
    for (std::size_t t = 0; t < months; ++t)
      for (std::size_t d = 0; d < docs; ++d) {
        std::string body;
        for (int w = 0; w < 8; ++w)
          body += (w ? " " : "") + (rng.coin() ? "shared" + std::to_string(rng.below(10))
                                               : "c" + std::to_string(c) + "word" + std::to_string(rng.below(10)));
        const int year = 2015 + static_cast<int>((t + 5) / 12);
        const auto month = static_cast<unsigned>((t + 5) % 12 + 1);
        text += synth::comment_line("user" + std::to_string(d % 3), synth::mid_month(year, month) + static_cast<std::int64_t>(d),
                                    "c" + std::to_string(c), body);
      }
    write(dir / ("c" + std::to_string(c) + ".jsonl"), text);
  }
}

json community_inputs(std::size_t n) {
  json c = json::object();
  for (std::size_t i = 0; i < n; ++i) c["c" + std::to_string(i)] = "c" + std::to_string(i) + ".jsonl";
  return c;
}

json divergence_manifest(std::size_t communities) {
  return {{"experiment", "subreddit-divergence"},
          {"seed", 3},
          {"output_dir", "out"},
          {"inputs", {{"communities", community_inputs(communities)}}},
          {"embedding", kSmallEmbedding},
          {"cloud", {{"top_n", 12}, {"metric", "angular"}}},
          {"persistence", {{"max_dim", 1}, {"max_eps", 1.0}}},
          {"distance", {{"kind", "bottleneck"}}}};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CREODRIFT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("experiment names") {
  CHECK(parse_experiment("user-clusters") == Experiment::user_clusters);
  CHECK(parse_experiment("isotropy_audit") == Experiment::isotropy_audit);
  CHECK(std::string(to_string(Experiment::user_drift)) == "user-drift");
  CHECK(code_of([] { parse_experiment("clusters"); }) == ErrorCode::validation);
}

TEST_CASE("manifest validation") {
  const auto dir = synth::scratch_dir("manifest");
  write(dir / "a.jsonl", synth::comment_line("u", 1433160000, "a", "some words here"));
  const json good = {{"experiment", "user-clusters"},
                     {"seed", 5},
                     {"output_dir", "results"},
                     {"inputs", {{"communities", {{"a", "a.jsonl"}}}}}};
  const auto m = parse_manifest(good.dump(), dir);
  CHECK(m.seed == 5);
  CHECK(m.output_dir == dir / "results");
  CHECK(m.communities.at("a") == dir / "a.jsonl");
  CHECK(m.sha256.size() == 64);
  CHECK(m.persistence.max_dim == 2);
  CHECK(m.distance_dims() == std::vector<int>{0, 1, 2});

  const auto over = parse_manifest(good.dump(), dir, {fs::path("elsewhere"), 9});
  CHECK(over.seed == 9);
  CHECK(over.output_dir == fs::path("elsewhere"));

  auto broken = [&](const std::function<void(json&)>& edit) {
    json j = good;
    edit(j);
    return code_of([&] { parse_manifest(j.dump(), dir); });
  };
  CHECK(broken([](json& j) { j.erase("seed"); }) == ErrorCode::validation);
  CHECK(broken([](json& j) { j["seed"] = "seven"; }) == ErrorCode::validation);
  CHECK(broken([](json& j) { j["colour"] = 1; }) == ErrorCode::validation);
  CHECK(broken([](json& j) { j["experiment"] = "clustering"; }) == ErrorCode::validation);
  CHECK(broken([](json& j) { j["inputs"]["communities"]["b"] = "missing.jsonl"; }) == ErrorCode::validation);
  CHECK(broken([](json& j) { j.erase("inputs"); }) == ErrorCode::validation);
  CHECK(broken([](json& j) { j["embedding"] = {{"dim", 0}}; }) == ErrorCode::validation);
  CHECK(broken([](json& j) { j["embedding"] = {{"dimension", 8}}; }) == ErrorCode::validation);
  CHECK(broken([](json& j) { j["persistence"] = {{"max_dim", 1}}, j["distance"] = {{"dims", {2}}}; }) ==
        ErrorCode::validation);
  CHECK(broken([](json& j) { j["distance"] = {{"kind", "wasserstein"}, {"q", 0.5}}; }) == ErrorCode::validation);
  CHECK(broken([](json& j) { j["cloud"] = {{"metric", "cosine"}}; }) == ErrorCode::validation);
  CHECK(code_of([&] { parse_manifest("{not json", dir); }) == ErrorCode::validation);
  CHECK(code_of([&] { load_manifest(dir / "nope.json"); }) == ErrorCode::validation);
}

TEST_CASE("toy user clusters") {
  const auto out = synth::scratch_dir("toy");
  const auto m = load_manifest(kToy / "manifest.json", {out, std::nullopt});
  CHECK(stage_names(m) == std::vector<std::string>{"ingest", "embed", "persistence", "distances", "projection"});
  const auto rec = run_experiment(m);
  REQUIRE(rec.stages.size() == 5);
  CHECK(rec.tool_version == kToolVersion);

  for (int dim : {0, 1}) {
    std::ifstream in(out / ("distances/dim" + std::to_string(dim) + ".csv"));
    const auto dm = read_diagram_matrix_csv(in);
    CHECK(dm.size() == 9);
  }
  CHECK(rows_of(out / "proj.csv").size() == 9);
  const std::string svg = slurp(out / "proj.svg");
  std::size_t markers = 0;
  for (auto pos = svg.find("class=\"marker\""); pos != std::string::npos; pos = svg.find("class=\"marker\"", pos + 1)) ++markers;
  CHECK(markers == 9);
  CHECK(rows_of(out / "distances/pairs_dim0.csv").size() == 36);

  const auto prov = read_provenance(out / "provenance.json");
  CHECK(prov.content_digest() == rec.content_digest());
  for (const auto& s : prov.stages)
    for (const auto& [path, hash] : s.outputs) {
      CHECK(fs::exists(out / path));
      CHECK(hash.size() == 64);
    }
}

TEST_CASE("asking for more users than exist clamps with a warning") {
  const auto dir = synth::scratch_dir("clamp");
  for (const auto& f : fs::directory_iterator(kToy))
    if (f.path().extension() == ".jsonl") fs::copy_file(f.path(), dir / f.path().filename());
  auto j = json::parse(slurp(kToy / "manifest.json"));
  j["users"]["top_k"] = 10;
  j["projection"]["perplexity"] = 30;
  const auto rec = run_experiment(manifest_in(dir, j));
  const auto& embed = rec.stages[1];
  CHECK(std::any_of(embed.warnings.begin(), embed.warnings.end(),
                    [](const std::string& w) { return w.find("only 4 users available") != std::string::npos; }));
  CHECK(rows_of(dir / "out/users.csv").size() == 12);
  const auto& proj = rec.stages.back();
  CHECK(std::any_of(proj.warnings.begin(), proj.warnings.end(),
                    [](const std::string& w) { return w.find("perplexity lowered") != std::string::npos; }));
}

TEST_CASE("divergence over thirty months for three communities") {
  const auto dir = synth::scratch_dir("divergence30");
  write_communities(dir, 3, 30, 12);
  run_experiment(manifest_in(dir, divergence_manifest(3)));
  const auto rows = rows_of(dir / "out/divergence.csv");
  std::map<std::string, std::size_t> per_dim;
  std::set<std::string> months, pairs;
  for (const auto& r : rows) {
    REQUIRE(r.size() == 5);
    ++per_dim[r[2]];
    months.insert(r[0]);
    pairs.insert(r[1]);
    CHECK(r[4] == "ok");
  }
  CHECK(per_dim["0"] == 90);
  CHECK(per_dim["1"] == 90);
  CHECK(months.size() == 30);
  CHECK(pairs == std::set<std::string>{"c0|c1", "c0|c2", "c1|c2"});
  CHECK(rows_of(dir / "out/windows.csv").size() == 90);
}

TEST_CASE("identical communities never diverge") {
  const auto dir = synth::scratch_dir("identical");
  const auto two = synth::diverging_communities(3, 30, true, 4);
  write(dir / "c0.jsonl", two.first);
  write(dir / "c1.jsonl", two.second);
  run_experiment(manifest_in(dir, divergence_manifest(2)));
  const auto rows = rows_of(dir / "out/divergence.csv");
  CHECK(rows.size() == 6);
  for (const auto& r : rows) CHECK(std::stod(r[3]) == 0.0);
}

TEST_CASE("a single month gives one row per pair") {
  const auto dir = synth::scratch_dir("single");
  write_communities(dir, 3, 1, 20);
  auto j = divergence_manifest(3);
  j["distance"]["dims"] = {0};
  run_experiment(manifest_in(dir, j));
  CHECK(rows_of(dir / "out/divergence.csv").size() == 3);
}

TEST_CASE("empty months carry the model forward") {
  const auto dir = synth::scratch_dir("gap");
  std::string a, b;
  for (unsigned month : {1u, 2u, 3u})
    for (int d = 0; d < 20; ++d) {
      const auto ts = synth::mid_month(2016, month) + d;
      a += synth::comment_line("x", ts, "c0", "alpha beta gamma delta epsilon zeta eta theta");
      if (month != 2) b += synth::comment_line("y", ts, "c1", "alpha beta gamma iota kappa lambda mu nu");
    }
  write(dir / "c0.jsonl", a);
  write(dir / "c1.jsonl", b);
  auto j = divergence_manifest(2);
  j["distance"]["dims"] = {0};
  const auto rec = run_experiment(manifest_in(dir, j));
  const auto rows = rows_of(dir / "out/divergence.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0][4] == "ok");
  CHECK(rows[1][0] == "2016-02");
  CHECK(rows[1][4] == "carried_forward");
  CHECK(rows[2][4] == "ok");
  const auto& train = rec.stages[1];
  CHECK(std::any_of(train.warnings.begin(), train.warnings.end(),
                    [](const std::string& w) { return w.find("carried forward") != std::string::npos; }));
}

TEST_CASE("user drift") {
  const auto dir = synth::scratch_dir("drift");
  std::string a, b;
  Rng rng(5);
  for (unsigned month : {3u, 4u})
    for (int d = 0; d < 30; ++d) {
      const auto ts = synth::mid_month(2017, month) + d * 10;
      std::string body;
      for (int w = 0; w < 8; ++w) body += (w ? " " : "") + ("word" + std::to_string(rng.below(12)));
      // u1 and u2 post the same text at the same moments.
      a += synth::comment_line("u1", ts, "c0", body);
      a += synth::comment_line("u2", ts, "c0", body);
      std::string other;
      for (int w = 0; w < 8; ++w) other += (w ? " " : "") + ("term" + std::to_string(rng.below(12)));
      b += synth::comment_line(d % 2 ? "v1" : "v2", ts, "c1", other);
    }
  write(dir / "c0.jsonl", a);
  write(dir / "c1.jsonl", b);
  json j = {{"experiment", "user-drift"},
            {"seed", 8},
            {"output_dir", "out"},
            {"inputs", {{"communities", community_inputs(2)}}},
            {"embedding", kSmallEmbedding},
            {"users", {{"top_k", 2}}},
            {"cloud", {{"top_n", 10}, {"metric", "angular"}}},
            {"persistence", {{"max_dim", 1}, {"max_eps", 1.0}}},
            {"distance", {{"kind", "wasserstein"}, {"q", 1}}}};
  run_experiment(manifest_in(dir, j));
  const auto rows = rows_of(dir / "out/drift_users.csv");
  CHECK(rows.size() == 2 * 2 * 3);
  std::size_t within = 0, across = 0;
  for (const auto& r : rows) {
    REQUIRE(r.size() == 8);
    if (r[4] == "within") {
      ++within;
      if (r[2] == "c0") CHECK(std::stod(r[5]) == 0.0);
    } else {
      ++across;
      CHECK(r[2] == "c0");
      CHECK(r[3] == "c1");
    }
  }
  CHECK(within == 8);
  CHECK(across == 4);
}

TEST_CASE("isotropy audit on a dense ball finds no large loops") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto dir = synth::scratch_dir("ball" + std::to_string(seed));
    const auto cloud = synth::uniform_ball(80, 3, seed);
    const auto dm = pairwise_distances(cloud);
    const double diameter = *std::max_element(dm.entries().begin(), dm.entries().end());
    std::ostringstream pts;
    write_point_cloud_csv(cloud, pts);
    write(dir / "ball.csv", pts.str());
    const json j = {{"experiment", "isotropy-audit"},
                    {"seed", 1},
                    {"output_dir", "out"},
                    {"inputs", {{"cloud", "ball.csv"}, {"cloud_metric", "euclidean"}}},
                    {"persistence", {{"max_dim", 1}, {"max_eps", 2.0}}},
                    {"audit", {{"min_persistence", 0.3 * diameter}}}};
    run_experiment(manifest_in(dir, j));
    CHECK(rows_of(dir / "out/holes.csv").empty());
    const auto summary = json::parse(slurp(dir / "out/audit_summary.json"));
    CHECK(summary["points"] == 80);
    CHECK(summary["dims"]["1"]["large"] == 0);
    CHECK(summary["dims"]["1"]["top_persistence"].get<double>() < 0.3 * diameter);
  }
}

TEST_CASE("audit threshold above the diameter gives an empty report") {
  const auto dir = synth::scratch_dir("circle_audit");
  std::ostringstream pts;
  write_point_cloud_csv(synth::uniform_circle(30, 2), pts);
  write(dir / "circle.csv", pts.str());
  json j = {{"experiment", "isotropy-audit"},
            {"seed", 1},
            {"output_dir", "out"},
            {"inputs", {{"cloud", "circle.csv"}}},
            {"persistence", {{"max_dim", 1}, {"max_eps", 2.5}}},
            {"audit", {{"min_persistence", 3.0}}}};
  run_experiment(manifest_in(dir, j));
  CHECK(rows_of(dir / "out/holes.csv").empty());
  CHECK(!rows_of(dir / "out/barcode.csv").empty());

  j["audit"]["min_persistence"] = 0.5;
  j["output_dir"] = "out2";
  run_experiment(manifest_in(dir, j));
  const auto holes = rows_of(dir / "out2/holes.csv");
  REQUIRE(holes.size() == 1);
  CHECK(holes[0][1] == "1");
  CHECK(rows_of(dir / "out2/generators.csv").size() == 1);
}

TEST_CASE("simulation manifests") {
  const auto dir = synth::scratch_dir("simulate");
  write(dir / "ring.cfg", "graph = ring\nn = 5\nsteps = 60\nvocab_size = 12\ndim = 4\nutterance_length = 3\n");
  json configs = json::array();
  configs.push_back("ring.cfg");
  configs.push_back({{"graph", "complete"}, {"n", 4}, {"steps", 50}, {"vocab_size", 10}, {"dim", 4}});
  configs.push_back({{"name", "bridged"}, {"graph", "two_cliques"}, {"clique_a", 3}, {"clique_b", 3}, {"bridges", 1},
                     {"steps", 40}, {"vocab_size", 10}, {"dim", 4}, {"checkpoints", {0, 40}},
                     {"snapshot_top_n", 8}, {"snapshot_max_dim", 0}});
  configs.push_back({{"graph", "erdos_renyi"}, {"n", 6}, {"p", 0.6}, {"steps", 30}, {"vocab_size", 10}, {"dim", 4},
                     {"sample_interval", 10}});
  const json j = {{"experiment", "simulate"}, {"seed", 4}, {"output_dir", "out"}, {"simulate", {{"configs", configs}}}};
  const auto m = manifest_in(dir, j);
  CHECK(stage_names(m) == std::vector<std::string>{"run1", "run2", "bridged", "run4"});
  run_experiment(m);

  std::size_t subdirs = 0;
  for (const auto& e : fs::directory_iterator(dir / "out")) subdirs += e.is_directory();
  CHECK(subdirs == 4);
  for (const char* name : {"run1", "run2", "bridged", "run4"}) {
    CHECK(fs::exists(dir / "out" / name / "drift.csv"));
    CHECK(fs::exists(dir / "out" / name / "events.csv"));
  }
  CHECK(!fs::exists(dir / "out/run1/checkpoints"));
  CHECK(rows_of(dir / "out/run1/events.csv").size() == 60);
  CHECK(rows_of(dir / "out/run4/drift.csv").size() == 4);
  for (int step : {0, 40})
    for (int id = 0; id < 6; ++id)
      CHECK(fs::exists(dir / "out/bridged/checkpoints" / ("step_" + std::to_string(step)) / ("learner_" + std::to_string(id) + ".csv")));

  json late = j;
  late["simulate"]["configs"] = json::array({{{"steps", 10}, {"checkpoints", {20}}}});
  CHECK(code_of([&] { manifest_in(dir, late); }) == ErrorCode::validation);
}

TEST_CASE("a later stage without its inputs fails fast") {
  const auto out = synth::scratch_dir("stage");
  const auto m = load_manifest(kToy / "manifest.json", {out, std::nullopt});
  try {
    run_experiment(m, {1, std::string("persistence")});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
    CHECK(std::string(e.what()).find("stage 'persistence'") != std::string::npos);
  }
  CHECK(!fs::exists(out / "diagrams"));
  CHECK(code_of([&] { run_experiment(m, {1, std::string("nonsense")}); }) == ErrorCode::validation);

  run_experiment(m, {1, std::string("ingest")});
  run_experiment(m, {1, std::string("embed")});
  fs::remove_all(out / "models");
  CHECK(code_of([&] { run_experiment(m, {1, std::string("persistence")}); }) == ErrorCode::io);
}

TEST_CASE("command line exit codes") {
  const auto dir = synth::scratch_dir("cli");
  const std::string toy = (kToy / "manifest.json").string();
  CHECK(run_cli("--version") == 0);
  CHECK(run_cli("user-clusters --manifest " + toy + " --out " + (dir / "ok").string() + " --threads 2") == 0);
  CHECK(fs::exists(dir / "ok/provenance.json"));
  CHECK(run_cli("user-clusters --manifest " + (dir / "missing.json").string()) == 2);
  CHECK(run_cli("subreddit-divergence --manifest " + toy + " --out " + (dir / "x").string()) == 2);
  CHECK(run_cli("user-clusters") == 2);
  CHECK(run_cli("no-such-experiment --manifest " + toy) == 2);

  // A community whose dump holds no usable comment is a runtime failure.
  write(dir / "bad/c0.jsonl", "{\"broken\": \n");
  write(dir / "bad/manifest.json", json{{"experiment", "user-clusters"},
                                        {"seed", 1},
                                        {"output_dir", "out"},
                                        {"inputs", {{"communities", {{"c0", "c0.jsonl"}}}}}}
                                       .dump());
  CHECK(run_cli("user-clusters --manifest " + (dir / "bad/manifest.json").string()) == 1);
}
