// Copyright 2026 The Authors.
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

// CoNLL-U reader keeping the columns the word-order metrics need
// (ID, FORM, UPOS, HEAD, DEPREL). Multiword-token ranges and empty nodes are
// skipped; structurally invalid sentences are dropped and counted.

#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "typometrics/error.hpp"
#include "typometrics/reservoir.hpp"
#include "typometrics/text.hpp"

namespace typometrics {

struct DepToken {
  int index = 0;  // 1-based
  std::string form;
  std::string upos;
  int head = 0;  // 0 = root
  std::string deprel;
};

// Relation label without its subtype: "nsubj:pass" -> "nsubj".
inline std::string_view base_relation(std::string_view deprel) {
  return deprel.substr(0, deprel.find(':'));
}

struct DepSentence {
  std::string sentence_id;
  std::vector<DepToken> tokens;

  std::size_t size() const { return tokens.size(); }
  const DepToken& at(int index) const { return tokens.at(static_cast<std::size_t>(index - 1)); }
};

using DepForest = std::vector<DepSentence>;

enum class DropReason { kBadId, kBadHead, kHeadOutOfRange, kSelfLoop, kRootCount, kCycle };

inline std::string_view to_string(DropReason r) {
  switch (r) {
    case DropReason::kBadId: return "non-sequential or non-integer id";
    case DropReason::kBadHead: return "non-integer head";
    case DropReason::kHeadOutOfRange: return "head refers to a missing token";
    case DropReason::kSelfLoop: return "token is its own head";
    case DropReason::kRootCount: return "not exactly one root";
    case DropReason::kCycle: return "cyclic head relation";
  }
  return "unknown";
}

struct ParseDiagnostic {
  std::size_t line = 0;  // first line of the dropped sentence
  DropReason reason;
};

struct ParseResult {
  DepForest sentences;
  std::size_t dropped = 0;
  std::vector<ParseDiagnostic> diagnostics;
  std::size_t skipped_ranges = 0;
  std::size_t skipped_empty_nodes = 0;

  std::map<std::string, std::size_t> drop_counts() const {
    std::map<std::string, std::size_t> out;
    for (const auto& d : diagnostics) ++out[std::string(to_string(d.reason))];
    return out;
  }
};

// Returns the reason a sentence violates the single-root / in-range /
// acyclic invariants, or nothing when it is well formed.
inline std::optional<DropReason> check_sentence(const DepSentence& s) {
  const int n = static_cast<int>(s.tokens.size());
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const auto& t = s.tokens[static_cast<std::size_t>(i)];
    if (t.index != i + 1) return DropReason::kBadId;
    if (t.head < 0 || t.head > n) return DropReason::kHeadOutOfRange;
    if (t.head == t.index) return DropReason::kSelfLoop;
    if (t.head == 0) {
      ++roots;
      if (base_relation(t.deprel) != "root") return DropReason::kRootCount;
    }
  }
  if (roots != 1) return DropReason::kRootCount;
  // Each walk up the head chain must reach the root within n steps.
  std::vector<int> state(static_cast<std::size_t>(n) + 1, 0);  // 0 new, 1 active, 2 done
  state[0] = 2;
  for (int start = 1; start <= n; ++start) {
    std::vector<int> path;
    int cur = start;
    while (state[static_cast<std::size_t>(cur)] == 0) {
      state[static_cast<std::size_t>(cur)] = 1;
      path.push_back(cur);
      cur = s.tokens[static_cast<std::size_t>(cur - 1)].head;
    }
    if (state[static_cast<std::size_t>(cur)] == 1) return DropReason::kCycle;
    for (int p : path) state[static_cast<std::size_t>(p)] = 2;
  }
  return std::nullopt;
}

namespace detail {

class ConlluBuilder {
 public:
  explicit ConlluBuilder(ParseResult& out) : out_(out) {}

  void comment(std::string_view line) {
    std::string_view body = text::trim(line.substr(1));
    if (body.rfind("sent_id", 0) == 0) {
      const auto eq = body.find('=');
      if (eq != std::string_view::npos) current_.sentence_id = text::trim(body.substr(eq + 1));
    }
    if (!start_line_) start_line_ = line_no_;
  }

  void token_line(std::string_view line) {
    if (!start_line_) start_line_ = line_no_;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 10) {
      throw ParseError("expected 10 tab-separated columns, found " +
                           std::to_string(cols.size()),
                       line_no_);
    }
    const std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos) {
      ++out_.skipped_ranges;
      return;
    }
    if (id.find('.') != std::string_view::npos) {
      ++out_.skipped_empty_nodes;
      return;
    }
    DepToken t;
    if (!text::parse_int(id, t.index) || t.index < 1) {
      defect_ = defect_ ? defect_ : std::optional(DropReason::kBadId);
      return;
    }
    if (!text::parse_int(cols[6], t.head)) {
      defect_ = defect_ ? defect_ : std::optional(DropReason::kBadHead);
      return;
    }
    t.form = cols[1];
    t.upos = cols[3];
    t.deprel = cols[7];
    current_.tokens.push_back(std::move(t));
  }

  void end_sentence() {
    if (current_.tokens.empty() && !defect_) {
      reset();
      return;
    }
    auto reason = defect_ ? defect_ : check_sentence(current_);
    if (reason) {
      ++out_.dropped;
      out_.diagnostics.push_back({start_line_, *reason});
    } else {
      if (current_.sentence_id.empty()) {
        current_.sentence_id = "s" + std::to_string(out_.sentences.size() + out_.dropped + 1);
      }
      out_.sentences.push_back(std::move(current_));
    }
    reset();
  }

  void set_line(std::size_t n) { line_no_ = n; }

 private:
  void reset() {
    current_ = DepSentence{};
    defect_.reset();
    start_line_ = 0;
  }

  ParseResult& out_;
  DepSentence current_;
  std::optional<DropReason> defect_;
  std::size_t line_no_ = 0;
  std::size_t start_line_ = 0;
};

}  // namespace detail

// Throws ParseError (with line number) on a line whose column count is not
// 10; every other defect drops only the sentence it occurs in.
inline ParseResult parse_conllu(std::istream& in) {
  ParseResult result;
  detail::ConlluBuilder builder(result);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    builder.set_line(line_no);
    const std::string_view line = text::chomp(raw);
    if (text::trim(line).empty()) {
      builder.end_sentence();
    } else if (line.front() == '#') {
      builder.comment(line);
    } else {
      builder.token_line(line);
    }
  }
  builder.end_sentence();
  return result;
}

inline ParseResult parse_conllu(std::string_view content) {
  std::istringstream in{std::string(content)};
  return parse_conllu(in);
}

// Writes the modeled columns back out; unmodeled columns become "_".
inline void write_conllu(std::ostream& out, const DepSentence& s) {
  if (!s.sentence_id.empty()) out << "# sent_id = " << s.sentence_id << '\n';
  for (const auto& t : s.tokens) {
    out << t.index << '\t' << t.form << "\t_\t" << t.upos << "\t_\t_\t" << t.head << '\t'
        << t.deprel << "\t_\t_\n";
  }
  out << '\n';
}

// Uniform subsample of min(n, |forest|) sentences, kept in input order.
inline DepForest take_sentences(const DepForest& forest, std::size_t n, std::uint64_t seed) {
  Reservoir<const DepSentence*> reservoir(n, seed);
  for (const auto& s : forest) reservoir.offer(&s);
  DepForest out;
  for (const DepSentence* s : std::move(reservoir).take()) out.push_back(*s);
  return out;
}

// First min(n, |forest|) sentences.
inline DepForest take_prefix(const DepForest& forest, std::size_t n) {
  return DepForest(forest.begin(),
                   forest.begin() + static_cast<std::ptrdiff_t>(std::min(n, forest.size())));
}

}  // namespace typometrics
