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

// Word-order flexibility from dependency treebanks, as plug-in conditional
// entropies (bits):
//
//   HDE     outcome: head left/right of its dependent;
//           condition: (base deprel, head UPOS, dependent UPOS).
//   ROE     outcome: linear arrangement of a head and its immediate
//           dependents' relations; condition: (head UPOS, sorted relations).
//   SO-ROE  unconditional binary entropy of subject/object order in clauses
//           with both an nsubj and an obj dependent.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "typometrics/conllu.hpp"
#include "typometrics/error.hpp"
#include "typometrics/text.hpp"

namespace typometrics {

class ConditionalDistribution {
 public:
  void add(const std::string& condition, const std::string& outcome, std::uint64_t count = 1) {
    table_[condition][outcome] += count;
    total_ += count;
  }

  void merge(const ConditionalDistribution& other) {
    for (const auto& [c, outcomes] : other.table_) {
      for (const auto& [o, n] : outcomes) add(c, o, n);
    }
  }

  std::uint64_t total() const { return total_; }
  std::size_t condition_count() const { return table_.size(); }
  const std::map<std::string, std::map<std::string, std::uint64_t>>& table() const {
    return table_;
  }

 private:
  std::map<std::string, std::map<std::string, std::uint64_t>> table_;
  std::uint64_t total_ = 0;
};

// Shannon entropy (bits) of a count vector. Counts are summed in sorted
// order so relabeling outcomes cannot perturb the last bit.
template <typename Counts>
double entropy_bits(const Counts& counts) {
  std::vector<std::uint64_t> sorted(std::begin(counts), std::end(counts));
  std::sort(sorted.begin(), sorted.end());
  double n = 0.0;
  for (const auto c : sorted) n += static_cast<double>(c);
  if (n <= 0.0) return 0.0;
  double h = 0.0;
  for (const auto c : sorted) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

// H(O|C) = sum_c p(c) H(O|c) with maximum-likelihood estimates.
inline double conditional_entropy(const ConditionalDistribution& dist) {
  if (dist.total() == 0) throw Error("conditional entropy of an empty distribution");
  double h = 0.0;
  std::vector<std::uint64_t> counts;
  for (const auto& [condition, outcomes] : dist.table()) {
    counts.clear();
    std::uint64_t n = 0;
    for (const auto& [o, c] : outcomes) counts.push_back(c), n += c;
    h += static_cast<double>(n) / static_cast<double>(dist.total()) * entropy_bits(counts);
  }
  return h;
}

struct WordOrderOptions {
  std::size_t max_dependents = 5;
  bool root_only = false;  // SO-ROE only on the root predicate
};

inline ConditionalDistribution head_direction_counts(const DepForest& forest) {
  ConditionalDistribution dist;
  for (const auto& s : forest) {
    for (const auto& t : s.tokens) {
      if (t.head == 0) continue;
      const auto& head = s.at(t.head);
      std::string cond = std::string(base_relation(t.deprel)) + "|" + head.upos + "|" + t.upos;
      dist.add(cond, t.head < t.index ? "head-left" : "head-right");
    }
  }
  return dist;
}

inline double head_direction_entropy(const DepForest& forest) {
  const auto dist = head_direction_counts(forest);
  if (dist.total() == 0) throw Error("forest has no non-root tokens");
  return conditional_entropy(dist);
}

struct RelationOrderCounts {
  ConditionalDistribution dist;
  std::size_t skipped_heads = 0;  // heads with more than max_dependents
};

inline RelationOrderCounts relation_order_counts(const DepForest& forest,
                                                 std::size_t max_dependents) {
  RelationOrderCounts out;
  for (const auto& s : forest) {
    std::vector<std::vector<int>> deps(s.size() + 1);
    for (const auto& t : s.tokens) {
      if (t.head > 0) deps[static_cast<std::size_t>(t.head)].push_back(t.index);
    }
    for (const auto& head : s.tokens) {
      const auto& d = deps[static_cast<std::size_t>(head.index)];
      if (d.empty()) continue;
      if (d.size() > max_dependents) {
        ++out.skipped_heads;
        continue;
      }
      std::vector<std::string> rels;
      for (int i : d) rels.emplace_back(base_relation(s.at(i).deprel));
      std::vector<std::string> sorted = rels;
      std::sort(sorted.begin(), sorted.end());
      std::string cond = head.upos + "|";
      for (std::size_t k = 0; k < sorted.size(); ++k) cond += (k ? "," : "") + sorted[k];

      // Dependents are already in index order; slot the head marker in.
      std::string arrangement;
      bool head_placed = false;
      for (std::size_t k = 0; k < d.size(); ++k) {
        if (!head_placed && head.index < d[k]) {
          arrangement += arrangement.empty() ? "*" : " *";
          head_placed = true;
        }
        arrangement += (arrangement.empty() ? "" : " ") + rels[k];
      }
      if (!head_placed) arrangement += " *";
      out.dist.add(cond, arrangement);
    }
  }
  return out;
}

inline double relation_order_entropy(const DepForest& forest, std::size_t max_dependents = 5) {
  const auto counts = relation_order_counts(forest, max_dependents);
  if (counts.dist.total() == 0) throw Error("no qualifying subtrees for relation order entropy");
  return conditional_entropy(counts.dist);
}

struct SubjectObjectCounts {
  std::size_t clauses = 0;
  // One observation per (subject, object) pair of a clause.
  std::uint64_t subject_first = 0;
  std::uint64_t object_first = 0;
};

inline SubjectObjectCounts subject_object_counts(const DepForest& forest, bool root_only = false) {
  SubjectObjectCounts out;
  for (const auto& s : forest) {
    std::vector<std::vector<int>> subj(s.size() + 1), obj(s.size() + 1);
    for (const auto& t : s.tokens) {
      if (t.head == 0) continue;
      const auto rel = base_relation(t.deprel);
      if (rel == "nsubj") subj[static_cast<std::size_t>(t.head)].push_back(t.index);
      if (rel == "obj") obj[static_cast<std::size_t>(t.head)].push_back(t.index);
    }
    for (const auto& head : s.tokens) {
      if (root_only && head.head != 0) continue;
      const auto& sv = subj[static_cast<std::size_t>(head.index)];
      const auto& ov = obj[static_cast<std::size_t>(head.index)];
      if (sv.empty() || ov.empty()) continue;
      ++out.clauses;
      for (int si : sv) {
        for (int oi : ov) (si < oi ? out.subject_first : out.object_first) += 1;
      }
    }
  }
  return out;
}

class NoClausesError : public Error {
 public:
  NoClausesError() : Error("no clause has both an nsubj and an obj dependent (so_clause_count = 0)") {}
  std::size_t so_clause_count() const { return 0; }
};

inline double subject_object_roe(const DepForest& forest, bool root_only = false) {
  const auto c = subject_object_counts(forest, root_only);
  if (c.clauses == 0) throw NoClausesError();
  return entropy_bits(std::vector<std::uint64_t>{c.subject_first, c.object_first});
}

struct WordOrderReport {
  std::optional<double> hde;
  std::optional<double> roe;
  std::optional<double> so_roe;
  std::size_t sentence_count = 0;
  std::size_t so_clause_count = 0;
  std::uint64_t hde_arcs = 0;
  std::uint64_t roe_subtrees = 0;
  std::size_t roe_skipped_heads = 0;
  std::uint64_t so_subject_first = 0;
  std::uint64_t so_object_first = 0;
  WordOrderOptions options;
  std::map<std::string, std::string> errors;

  static std::string csv_header() { return "language,hde,roe,so_roe,sentences,so_clauses"; }

  std::string csv_row(const std::string& language) const {
    const auto cell = [](const std::optional<double>& v) {
      return v ? text::format_double(*v) : std::string();
    };
    return language + "," + cell(hde) + "," + cell(roe) + "," + cell(so_roe) + "," +
           std::to_string(sentence_count) + "," + std::to_string(so_clause_count);
  }

  nlohmann::json to_json() const {
    const auto val = [](const std::optional<double>& v) -> nlohmann::json {
      return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    return {{"hde", val(hde)},
            {"roe", val(roe)},
            {"so_roe", val(so_roe)},
            {"sentence_count", sentence_count},
            {"so_clause_count", so_clause_count},
            {"hde_arcs", hde_arcs},
            {"roe_subtrees", roe_subtrees},
            {"roe_skipped_heads", roe_skipped_heads},
            {"so_subject_first", so_subject_first},
            {"so_object_first", so_object_first},
            {"errors", errors},
            {"metadata",
             {{"hde_condition", "base deprel, head UPOS, dependent UPOS"},
              {"roe_condition", "head UPOS, sorted base deprels of dependents"},
              {"roe_max_dependents", options.max_dependents},
              {"so_roe_scope", options.root_only ? "root predicate" : "any head with nsubj and obj"},
              {"so_roe_observations", "one per (nsubj, obj) pair"},
              {"relation_subtypes", "folded to base relation"},
              {"estimator", "plug-in maximum likelihood, base 2"}}}};
  }
};

// All three metrics; a metric that cannot be estimated is left empty and its
// error recorded instead of failing the whole report.
inline WordOrderReport word_order_report(const DepForest& forest,
                                         const WordOrderOptions& opts = {}) {
  WordOrderReport r;
  r.options = opts;
  r.sentence_count = forest.size();

  const auto hd = head_direction_counts(forest);
  r.hde_arcs = hd.total();
  if (hd.total() > 0) {
    r.hde = conditional_entropy(hd);
  } else {
    r.errors["hde"] = "forest has no non-root tokens";
  }

  const auto ro = relation_order_counts(forest, opts.max_dependents);
  r.roe_subtrees = ro.dist.total();
  r.roe_skipped_heads = ro.skipped_heads;
  if (ro.dist.total() > 0) {
    r.roe = conditional_entropy(ro.dist);
  } else {
    r.errors["roe"] = "no qualifying subtrees";
  }

  const auto so = subject_object_counts(forest, opts.root_only);
  r.so_clause_count = so.clauses;
  r.so_subject_first = so.subject_first;
  r.so_object_first = so.object_first;
  if (so.clauses > 0) {
    r.so_roe = entropy_bits(std::vector<std::uint64_t>{so.subject_first, so.object_first});
  } else {
    r.errors["so_roe"] = "so_clause_count = 0";
  }
  return r;
}

}  // namespace typometrics
