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

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "creodrift/error.hpp"
#include "creodrift/pipeline.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topological drift analysis of community language"};
  app.set_version_flag("--version", std::string(creodrift::kToolVersion));
  app.require_subcommand(1);

  std::string manifest_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::optional<std::string> stage;

  for (const char* name : {"user-clusters", "subreddit-divergence", "isotropy-audit", "user-drift", "simulate"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--manifest", manifest_path, "Run manifest (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides the manifest)");
    sub->add_option("--seed", seed, "Global seed (overrides the manifest)");
    sub->add_option("--threads", threads, "Worker threads, 0 = all cores")->capture_default_str();
    sub->add_option("--stage", stage, "Run only this stage on existing artifacts");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    const std::string experiment = app.get_subcommands().front()->get_name();
    creodrift::ManifestOverrides ov;
    if (out_dir) ov.output_dir = *out_dir;
    ov.seed = seed;
    const auto manifest = creodrift::load_manifest(manifest_path, ov);
    if (manifest.experiment != creodrift::parse_experiment(experiment))
      throw creodrift::Error(creodrift::ErrorCode::validation,
                             "manifest describes '" + std::string(to_string(manifest.experiment)) +
                                 "', not '" + experiment + "'");
    const auto rec = creodrift::run_experiment(manifest, {threads, stage});
    std::size_t artifacts = 0;
    for (const auto& s : rec.stages) artifacts += s.outputs.size();
    std::cout << experiment << ": " << rec.stages.size() << " stage(s), " << artifacts << " artifact(s) in "
              << manifest.output_dir.string() << '\n';
    return 0;
  } catch (const creodrift::Error& e) {
    std::cerr << "error [" << creodrift::to_string(e.code()) << "]: " << e.what() << '\n';
    return e.code() == creodrift::ErrorCode::validation ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
