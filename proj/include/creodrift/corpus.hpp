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

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace creodrift {

struct Document {
  std::string author;
  std::int64_t timestamp = 0;  // seconds since epoch, UTC
  std::string community;
  std::vector<std::string> tokens;

  bool operator==(const Document&) const = default;
};

/// Time-ordered collection of documents. `start`/`end` bound every timestamp.
struct Corpus {
  std::vector<Document> documents;
  std::int64_t start = 0;
  std::int64_t end = 0;

  bool empty() const noexcept { return documents.empty(); }
  std::size_t token_count() const noexcept;

  /// Sorts by timestamp (stable) and recomputes the span.
  static Corpus from_documents(std::vector<Document> docs);

  bool operator==(const Corpus&) const = default;
};

struct CorpusFilter {
  std::optional<std::set<std::string>> communities;
  std::optional<std::int64_t> min_timestamp;
  std::optional<std::int64_t> max_timestamp;
  std::size_t min_doc_tokens = 3;

  /// Throws invalid-input when the time bounds are inverted.
  void validate() const;
};

struct IngestStats {
  std::size_t lines = 0;
  std::size_t malformed = 0;  // unparseable JSON or missing/mistyped fields
  std::size_t deleted = 0;    // `[deleted]` / `[removed]` bodies
  std::size_t filtered = 0;   // rejected by the filter (incl. too few tokens)
};

struct IngestResult {
  Corpus corpus;
  IngestStats stats;
};

/// Lowercases, strips URLs, splits on non-alphanumerics and keeps tokens of
/// length 2..50.
std::vector<std::string> tokenize(std::string_view text);

/// Reads a Reddit-style comment dump, one JSON object per line.
/// Throws io on stream failure and empty-corpus if nothing survives.
IngestResult ingest_jsonl(std::istream& in, const CorpusFilter& filter = {});
IngestResult ingest_jsonl_file(const std::string& path, const CorpusFilter& filter = {});

/// Internal corpus format: JSONL with `author`, `ts`, `community`, `tokens`.
void write_corpus_jsonl(const Corpus& corpus, std::ostream& out);
Corpus read_corpus_jsonl(std::istream& in);

struct MonthWindow {
  int year = 0;
  unsigned month = 0;  // 1..12
  Corpus corpus;

  /// "YYYY-MM".
  std::string label() const;
};

/// Partitions by UTC calendar month, oldest first; empty months are omitted.
std::vector<MonthWindow> window_by_month(const Corpus& corpus);

/// Authors ranked by total token count (desc), ties by name; at most k.
std::vector<std::pair<std::string, Corpus>> top_users(const Corpus& corpus, std::size_t k);

}  // namespace creodrift
