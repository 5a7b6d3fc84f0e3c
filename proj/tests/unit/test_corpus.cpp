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
#include <set>
#include <sstream>

#include "creodrift/corpus.hpp"
#include "creodrift/error.hpp"
#include "creodrift/rng.hpp"
#include "synth.hpp"

using namespace creodrift;

namespace {

IngestResult ingest_text(const std::string& text, const CorpusFilter& f = {}) {
  std::istringstream in(text);
  return ingest_jsonl(in, f);
}

Document doc(std::string author, std::int64_t ts, std::size_t ntokens, std::string community = "s") {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < ntokens; ++i) tokens.push_back("tok" + std::to_string(i));
  return Document{std::move(author), ts, std::move(community), std::move(tokens)};
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

}  // namespace

TEST_CASE("ingest maps fields directly") {
  const auto r = ingest_text(R"({"author":"a","created_utc":100,"subreddit":"s","body":"the cat sat"})" "\n");
  REQUIRE(r.corpus.documents.size() == 1);
  const auto& d = r.corpus.documents[0];
  CHECK(d.author == "a");
  CHECK(d.timestamp == 100);
  CHECK(d.community == "s");
  CHECK(d.tokens == std::vector<std::string>{"the", "cat", "sat"});
  CHECK(r.corpus.start == 100);
  CHECK(r.corpus.end == 100);
}

TEST_CASE("community filter excluding everything is an empty corpus") {
  CorpusFilter f;
  f.communities = std::set<std::string>{"other"};
  CHECK(code_of([&] { ingest_text(R"({"author":"a","created_utc":100,"subreddit":"s","body":"the cat sat"})", f); }) ==
        ErrorCode::empty_corpus);
}

TEST_CASE("malformed lines are counted and skipped") {
  const std::string text = R"({"author":"a","created_utc":1,"subreddit":"s","body":"one two three"})" "\n"
                           R"({"author":"b","created_utc":2,"subreddit":"s","body":)" "\n"
                           R"({"author":"c","created_utc":"3","subreddit":"s","body":"four five six"})" "\n";
  const auto r = ingest_text(text);
  CHECK(r.corpus.documents.size() == 2);
  CHECK(r.stats.malformed == 1);
  CHECK(r.stats.lines == 3);
}

TEST_CASE("deleted and removed bodies are skipped") {
  const std::string text = R"({"author":"a","created_utc":1,"subreddit":"s","body":"[deleted]"})" "\n"
                           R"({"author":"a","created_utc":1,"subreddit":"s","body":"[removed]"})" "\n"
                           R"({"author":"a","created_utc":1,"subreddit":"s","body":"kept words here"})" "\n";
  const auto r = ingest_text(text);
  CHECK(r.corpus.documents.size() == 1);
  CHECK(r.stats.deleted == 2);
}

TEST_CASE("missing or mistyped fields count as malformed") {
  const std::string text = R"({"author":"a","subreddit":"s","body":"no time here"})" "\n"
                           R"({"author":5,"created_utc":1,"subreddit":"s","body":"bad author field"})" "\n"
                           R"({"author":"a","created_utc":-4,"subreddit":"s","body":"negative time here"})" "\n"
                           R"([1,2,3])" "\n"
                           R"({"author":"a","created_utc":1.5e2,"subreddit":"s","body":"float time works","extra":1})" "\n";
  const auto r = ingest_text(text);
  CHECK(r.stats.malformed == 4);
  REQUIRE(r.corpus.documents.size() == 1);
  CHECK(r.corpus.documents[0].timestamp == 150);
}

TEST_CASE("filter bounds and minimum length") {
  const std::string text = R"({"author":"a","created_utc":10,"subreddit":"s","body":"one two three"})" "\n"
                           R"({"author":"a","created_utc":20,"subreddit":"s","body":"one two three"})" "\n"
                           R"({"author":"a","created_utc":30,"subreddit":"s","body":"one two"})" "\n";
  CorpusFilter f;
  f.min_timestamp = 15;
  const auto r = ingest_text(text, f);
  CHECK(r.corpus.documents.size() == 1);
  CHECK(r.stats.filtered == 2);

  CorpusFilter bad;
  bad.min_timestamp = 5;
  bad.max_timestamp = 4;
  CHECK(code_of([&] { ingest_text(text, bad); }) == ErrorCode::invalid_input);
}

TEST_CASE("documents come out sorted by timestamp") {
  const std::string text = R"({"author":"a","created_utc":30,"subreddit":"s","body":"one two three"})" "\n"
                           R"({"author":"b","created_utc":10,"subreddit":"s","body":"one two three"})" "\n"
                           R"({"author":"c","created_utc":20,"subreddit":"s","body":"one two three"})" "\n";
  const auto c = ingest_text(text).corpus;
  CHECK(c.documents[0].author == "b");
  CHECK(c.documents[2].author == "a");
  CHECK(c.start == 10);
  CHECK(c.end == 30);
}

TEST_CASE("tokenize rules") {
  CHECK(tokenize("The Cat, the cat!") == std::vector<std::string>{"the", "cat", "the", "cat"});
  CHECK(tokenize("see https://x.y/z now") == std::vector<std::string>{"see", "now"});
  CHECK(tokenize("a I x").empty());
  CHECK(tokenize("visit www.example.com/page today") == std::vector<std::string>{"visit", "today"});
  CHECK(tokenize("xhttp://y") == std::vector<std::string>{"xhttp"});
  CHECK(tokenize(std::string(51, 'q')).empty());
  CHECK(tokenize(std::string(50, 'q')).size() == 1);
  CHECK(tokenize("").empty());
}

TEST_CASE("tokenize is idempotent on its own output") {
  Rng rng(3);
  const std::string alphabet = "abcXYZ019 .,:/!?-_wht";
  for (int t = 0; t < 300; ++t) {
    std::string s;
    const auto len = rng.below(60);
    for (std::uint64_t i = 0; i < len; ++i) s += alphabet[rng.below(alphabet.size())];
    if (rng.coin()) s += " http://a.b/c d";
    const auto once = tokenize(s);
    std::string joined;
    for (const auto& tok : once) joined += tok + " ";
    CHECK(tokenize(joined) == once);
  }
}

TEST_CASE("internal corpus format round-trips") {
  const auto corpus = Corpus::from_documents({doc("x", 5, 3, "one"), doc("y,\"q\"", 1, 4, "two"), doc("z", 9, 1)});
  std::ostringstream out;
  write_corpus_jsonl(corpus, out);
  std::istringstream in(out.str());
  CHECK(read_corpus_jsonl(in) == corpus);
}

TEST_CASE("window_by_month examples") {
  const std::int64_t jun1 = 1433116800, jun15 = 1434326400, jul2 = 1435795200;
  auto w = window_by_month(Corpus::from_documents({doc("a", jun1, 3), doc("a", jun15, 3), doc("a", jul2, 3)}));
  REQUIRE(w.size() == 2);
  CHECK(w[0].label() == "2015-06");
  CHECK(w[0].corpus.documents.size() == 2);
  CHECK(w[1].label() == "2015-07");
  CHECK(w[1].corpus.documents.size() == 1);

  const auto single = Corpus::from_documents({doc("a", jul2, 3)});
  w = window_by_month(single);
  REQUIRE(w.size() == 1);
  CHECK(w[0].corpus == single);

  const auto june = Corpus::from_documents({doc("a", jun1, 3), doc("b", jun15, 2)});
  w = window_by_month(june);
  REQUIRE(w.size() == 1);
  CHECK(w[0].corpus == june);
}

TEST_CASE("month windows partition the corpus") {
  Rng rng(8);
  std::vector<Document> docs;
  for (int i = 0; i < 200; ++i)
    docs.push_back(doc("u" + std::to_string(rng.below(5)), static_cast<std::int64_t>(rng.below(100'000'000)), 3));
  const auto corpus = Corpus::from_documents(docs);
  const auto windows = window_by_month(corpus);
  std::vector<Document> joined;
  std::string prev;
  for (const auto& w : windows) {
    CHECK(!w.corpus.empty());
    CHECK(w.label() > prev);
    prev = w.label();
    for (const auto& d : w.corpus.documents) {
      CHECK(d.timestamp >= w.corpus.start);
      CHECK(d.timestamp <= w.corpus.end);
    }
    joined.insert(joined.end(), w.corpus.documents.begin(), w.corpus.documents.end());
  }
  CHECK(Corpus::from_documents(joined) == corpus);
}

TEST_CASE("top_users ranking") {
  const auto c = Corpus::from_documents({doc("a", 1, 10), doc("b", 2, 5), doc("c", 3, 1)});
  const auto top = top_users(c, 2);
  REQUIRE(top.size() == 2);
  CHECK(top[0].first == "a");
  CHECK(top[1].first == "b");
  CHECK(top[0].second.token_count() == 10);

  const auto tie = Corpus::from_documents({doc("b", 1, 4), doc("a", 2, 4)});
  const auto one = top_users(tie, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].first == "a");

  CHECK(top_users(c, 50).size() == 3);
  CHECK(code_of([&] { top_users(Corpus{}, 1); }) == ErrorCode::empty_corpus);
  CHECK(code_of([&] { top_users(c, 0); }) == ErrorCode::invalid_input);
}

TEST_CASE("top_users(k) is a prefix of top_users(k+1)") {
  Rng rng(21);
  std::vector<Document> docs;
  for (int i = 0; i < 120; ++i)
    docs.push_back(doc("u" + std::to_string(rng.below(15)), i, 1 + rng.below(4)));
  const auto c = Corpus::from_documents(docs);
  for (std::size_t k = 1; k < 16; ++k) {
    const auto a = top_users(c, k), b = top_users(c, k + 1);
    REQUIRE(a.size() <= b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].first == b[i].first);
  }
}

TEST_CASE("fifty users per community when enough authors exist") {
  std::vector<Document> docs;
  for (int u = 0; u < 80; ++u) docs.push_back(doc("user" + std::to_string(u), u, 3 + static_cast<std::size_t>(u % 7)));
  CHECK(top_users(Corpus::from_documents(docs), 50).size() == 50);
}

TEST_CASE("raw dump written by the test helper ingests") {
  const auto two = synth::diverging_communities(2, 10, false, 1);
  const auto c = ingest_text(two.first).corpus;
  CHECK(c.documents.size() == 20);
  CHECK(window_by_month(c).size() == 2);
}
