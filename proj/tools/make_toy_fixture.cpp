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

// Writes the bundled toy fixture: three small synthetic communities with
// three active users each, plus a user-clusters manifest.
//
//   make_toy_fixture <dir>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "creodrift/rng.hpp"

namespace {

struct Community {
  std::string name;
  std::vector<std::string> topic;
};

const std::vector<std::string> kShared = {"the",  "and",   "with", "this", "that",  "really", "think",
                                          "just", "about", "some", "good", "great", "time",   "today",
                                          "also", "like",  "more", "much", "very",  "first"};

const std::vector<Community> kCommunities = {
    {"gardening",
     {"soil",    "compost", "tomato",  "seedling", "mulch",  "prune",  "roses",   "basil",   "trellis", "weeds",
      "watering", "sunlight", "pepper", "harvest",  "beds",   "clay",   "worms",   "manure",  "shade",   "bloom",
      "perennial", "annual", "garlic",  "onion",    "squash", "beans",  "fence",   "aphids",  "hose",    "shovel"}},
    {"astronomy",
     {"telescope", "nebula",  "galaxy", "orbit",   "eyepiece", "jupiter", "saturn",  "moon",    "comet",  "meteor",
      "aperture",  "mount",   "stars",  "cluster", "exposure", "tracking", "filter", "mars",    "eclipse", "planet",
      "dobsonian", "refractor", "seeing", "focus", "coma",     "sky",     "darkness", "zenith", "horizon", "light"}},
    {"cooking",
     {"recipe", "oven",    "butter",  "garlic", "simmer", "knife",   "skillet", "flour",  "sauce",  "onion",
      "roast",  "bake",    "pasta",   "salt",   "pepper", "stock",   "braise",  "dough",  "yeast",  "sugar",
      "whisk",  "chicken", "vinegar", "olive",  "cumin",  "lemon",   "broth",   "crust",  "fry",    "grill"}},
};

std::string sentence(const Community& c, const std::string& voice, creodrift::Rng& rng) {
  // A theme is a window of six topic words; each user leans on a few themes.
  const std::size_t theme = (rng.below(3) + creodrift::hash_label(voice) % 5) % 5 * 6;
  const std::size_t length = 8 + rng.below(7);
  std::string out;
  for (std::size_t i = 0; i < length; ++i) {
    const bool topical = rng.uniform() < 0.7;
    const std::string& w = topical ? c.topic[theme + rng.below(6)] : kShared[rng.below(kShared.size())];
    out += (i ? " " : "") + w;
  }
  return out;
}

std::string line(const std::string& author, long ts, const std::string& sub, const std::string& body) {
  return nlohmann::json{{"author", author}, {"created_utc", ts}, {"subreddit", sub}, {"body", body}}.dump() + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2 || argv[1][0] == '-') {
    std::cerr << "usage: make_toy_fixture <dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  constexpr long kStart = 1433160000;  // 2015-06-01T12:00:00Z
  nlohmann::json communities = nlohmann::json::object();

  for (const auto& c : kCommunities) {
    creodrift::Rng rng(creodrift::derive_seed(2015, c.name));
    std::string text;
    const std::vector<std::pair<std::string, std::size_t>> users = {
        {c.name.substr(0, 4) + "_ada", 90}, {c.name.substr(0, 4) + "_bo", 80}, {c.name.substr(0, 4) + "_cy", 70},
        {c.name.substr(0, 4) + "_dee", 6}};
    long ts = kStart;
    for (const auto& [user, posts] : users)
      for (std::size_t p = 0; p < posts; ++p) {
        ts += 3600 + static_cast<long>(rng.below(7200));
        text += line(user, ts, c.name, sentence(c, user, rng));
      }
    text += line(users[0].first, ts + 10, c.name, "[deleted]");
    text += line(users[1].first, ts + 20, c.name, "see https://example.org/" + c.name + " for " + c.topic[0]);
    text += "{\"author\": \"broken\", \"body\": \n";
    std::ofstream(dir / (c.name + ".jsonl")) << text;
    communities[c.name] = c.name + ".jsonl";
  }

  const nlohmann::json manifest = {
      {"experiment", "user-clusters"},
      {"seed", 7},
      {"output_dir", "out"},
      {"inputs", {{"communities", communities}}},
      {"embedding", {{"dim", 16}, {"window", 3}, {"negatives", 5}, {"epochs", 5}, {"min_count", 2}}},
      {"users", {{"top_k", 3}}},
      {"cloud", {{"top_n", 25}, {"metric", "angular"}}},
      {"persistence", {{"max_dim", 1}, {"max_eps", 1.0}}},
      {"distance", {{"kind", "bottleneck"}, {"dims", {0, 1}}}},
      {"projection", {{"dim", 0}, {"perplexity", 3}, {"iterations", 500}}},
  };
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
  return 0;
}
