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

#include "creodrift/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "creodrift/error.hpp"

namespace creodrift {

using nlohmann::json;

std::size_t Corpus::token_count() const noexcept {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.tokens.size();
  return n;
}

Corpus Corpus::from_documents(std::vector<Document> docs) {
  std::stable_sort(docs.begin(), docs.end(),
                   [](const Document& a, const Document& b) { return a.timestamp < b.timestamp; });
  Corpus c;
  c.documents = std::move(docs);
  if (!c.documents.empty()) {
    c.start = c.documents.front().timestamp;
    c.end = c.documents.back().timestamp;
  }
  return c;
}

void CorpusFilter::validate() const {
  if (min_timestamp && max_timestamp && *min_timestamp > *max_timestamp)
    throw Error(ErrorCode::invalid_input, "corpus filter: min_timestamp > max_timestamp");
}

namespace {

bool is_alnum(unsigned char c) { return std::isalnum(c) != 0; }

bool starts_with_url(std::string_view s, std::size_t i) {
  const auto rest = s.substr(i);
  return rest.starts_with("http://") || rest.starts_with("https://") || rest.starts_with("www.");
}

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::string lower(text);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2 && cur.size() <= 50) tokens.push_back(cur);
    cur.clear();
  };
  for (std::size_t i = 0; i < lower.size();) {
    // A URL only starts at a token boundary; it runs to the next whitespace.
    if (cur.empty() && starts_with_url(lower, i)) {
      while (i < lower.size() && !is_space(static_cast<unsigned char>(lower[i]))) ++i;
      continue;
    }
    const auto c = static_cast<unsigned char>(lower[i]);
    if (is_alnum(c)) {
      cur += static_cast<char>(c);
    } else {
      flush();
    }
    ++i;
  }
  flush();
  return tokens;
}

namespace {

std::optional<std::int64_t> read_timestamp(const json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (!std::isfinite(d)) return std::nullopt;
    return static_cast<std::int64_t>(d);
  }
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    std::size_t pos = 0;
    try {
      const double d = std::stod(s, &pos);
      if (pos != s.size() || !std::isfinite(d)) return std::nullopt;
      return static_cast<std::int64_t>(d);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

bool passes(const CorpusFilter& f, const Document& d) {
  if (f.communities && !f.communities->contains(d.community)) return false;
  if (f.min_timestamp && d.timestamp < *f.min_timestamp) return false;
  if (f.max_timestamp && d.timestamp > *f.max_timestamp) return false;
  return !d.tokens.empty() && d.tokens.size() >= f.min_doc_tokens;
}

}  // namespace

IngestResult ingest_jsonl(std::istream& in, const CorpusFilter& filter) {
  filter.validate();
  if (!in) throw Error(ErrorCode::io, "unreadable input stream");

  IngestResult result;
  std::vector<Document> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++result.stats.lines;
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) {
      ++result.stats.malformed;
      continue;
    }
    auto author = obj.find("author");
    auto created = obj.find("created_utc");
    auto sub = obj.find("subreddit");
    auto body = obj.find("body");
    if (author == obj.end() || created == obj.end() || sub == obj.end() || body == obj.end() ||
        !author->is_string() || !sub->is_string() || !body->is_string()) {
      ++result.stats.malformed;
      continue;
    }
    const auto ts = read_timestamp(*created);
    if (!ts || *ts < 0) {
      ++result.stats.malformed;
      continue;
    }
    const auto& text = body->get_ref<const std::string&>();
    if (text == "[deleted]" || text == "[removed]") {
      ++result.stats.deleted;
      continue;
    }
    Document d{author->get<std::string>(), *ts, sub->get<std::string>(), tokenize(text)};
    if (!passes(filter, d)) {
      ++result.stats.filtered;
      continue;
    }
    docs.push_back(std::move(d));
  }
  if (in.bad()) throw Error(ErrorCode::io, "read error on input stream");
  if (docs.empty()) throw Error(ErrorCode::empty_corpus, "no documents survived ingestion");
  result.corpus = Corpus::from_documents(std::move(docs));
  return result;
}

IngestResult ingest_jsonl_file(const std::string& path, const CorpusFilter& filter) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  return ingest_jsonl(in, filter);
}

void write_corpus_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const auto& d : corpus.documents) {
    json j = {{"author", d.author}, {"ts", d.timestamp}, {"community", d.community},
              {"tokens", d.tokens}};
    out << j.dump() << '\n';
  }
}

Corpus read_corpus_jsonl(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      docs.push_back(Document{j.at("author").get<std::string>(), j.at("ts").get<std::int64_t>(),
                              j.at("community").get<std::string>(),
                              j.at("tokens").get<std::vector<std::string>>()});
    } catch (const json::exception& e) {
      throw Error(ErrorCode::format,
                  "corpus line " + std::to_string(lineno) + ": " + std::string(e.what()));
    }
  }
  return Corpus::from_documents(std::move(docs));
}

std::string MonthWindow::label() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u", year, month);
  return buf;
}

namespace {

std::pair<int, unsigned> utc_month(std::int64_t ts) {
  using namespace std::chrono;
  const sys_seconds t{seconds{ts}};
  const year_month_day ymd{floor<days>(t)};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month())};
}

}  // namespace

std::vector<MonthWindow> window_by_month(const Corpus& corpus) {
  std::map<std::pair<int, unsigned>, std::vector<Document>> buckets;
  for (const auto& d : corpus.documents) buckets[utc_month(d.timestamp)].push_back(d);
  std::vector<MonthWindow> out;
  out.reserve(buckets.size());
  for (auto& [key, docs] : buckets)
    out.push_back(MonthWindow{key.first, key.second, Corpus::from_documents(std::move(docs))});
  return out;
}

std::vector<std::pair<std::string, Corpus>> top_users(const Corpus& corpus, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::invalid_input, "top_users: k must be >= 1");
  if (corpus.empty()) throw Error(ErrorCode::empty_corpus, "top_users: empty corpus");
  std::map<std::string, std::size_t> counts;
  for (const auto& d : corpus.documents) counts[d.author] += d.tokens.size();
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  ranked.resize(std::min(k, ranked.size()));

  std::vector<std::pair<std::string, Corpus>> out;
  out.reserve(ranked.size());
  for (const auto& [author, _] : ranked) {
    std::vector<Document> docs;
    for (const auto& d : corpus.documents)
      if (d.author == author) docs.push_back(d);
    out.emplace_back(author, Corpus::from_documents(std::move(docs)));
  }
  return out;
}

}  // namespace creodrift
