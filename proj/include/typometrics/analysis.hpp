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

// Joins per-language metric tables with downstream performance tables:
// relative performance drops between positional-encoding variants, rank and
// linear correlations, and long-form scatter data.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "typometrics/error.hpp"
#include "typometrics/reservoir.hpp"
#include "typometrics/text.hpp"

namespace typometrics {

inline constexpr std::array<std::string_view, 3> kPosTypes = {"no-pos", "absolute", "relative"};

inline std::string check_pos_type(std::string_view s) {
  if (std::find(kPosTypes.begin(), kPosTypes.end(), s) == kPosTypes.end()) {
    throw Error("unknown positional encoding type '" + std::string(s) +
                "' (expected no-pos, absolute or relative)");
  }
  return std::string(s);
}

inline std::size_t pos_type_rank(const std::string& s) {
  return static_cast<std::size_t>(std::find(kPosTypes.begin(), kPosTypes.end(), s) -
                                  kPosTypes.begin());
}

namespace detail {

inline std::vector<std::vector<std::string>> read_csv_rows(std::istream& in,
                                                           std::vector<std::string>& header) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view l = text::chomp(line);
    if (text::trim(l).empty()) continue;
    std::vector<std::string> cells;
    for (auto c : text::split(l, ',')) cells.emplace_back(text::trim(c));
    if (header.empty()) {
      header = std::move(cells);
      continue;
    }
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       line_no);
    }
    rows.push_back(std::move(cells));
  }
  if (header.empty()) throw ParseError("empty CSV input", 0);
  return rows;
}

}  // namespace detail

class MetricTable {
 public:
  void set(const std::string& language, const std::string& metric, double value) {
    if (!std::isfinite(value)) {
      throw Error("non-finite value for " + language + "/" + metric);
    }
    if (!values_.emplace(std::make_pair(language, metric), value).second) {
      throw Error("duplicate metric entry " + language + "/" + metric);
    }
  }

  std::optional<double> get(const std::string& language, const std::string& metric) const {
    const auto it = values_.find({language, metric});
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::set<std::string> languages() const {
    std::set<std::string> out;
    for (const auto& [key, v] : values_) out.insert(key.first);
    return out;
  }

  std::map<std::string, std::string>& provenance() { return provenance_; }
  const std::map<std::string, std::string>& provenance() const { return provenance_; }

  // Wide format `language,<metric>,...` (empty cells are absent), or long
  // format `language,metric,value`.
  static MetricTable read_csv(std::istream& in) {
    std::vector<std::string> header;
    const auto rows = detail::read_csv_rows(in, header);
    if (header.empty() || header[0] != "language") {
      throw ParseError("metric table header must start with 'language'", 1);
    }
    MetricTable t;
    const bool long_form = header.size() == 3 && header[1] == "metric" && header[2] == "value";
    for (const auto& r : rows) {
      if (long_form) {
        t.set(r[0], r[1], text::parse_double(r[2]));
        continue;
      }
      for (std::size_t c = 1; c < r.size(); ++c) {
        if (!r[c].empty()) t.set(r[0], header[c], text::parse_double(r[c]));
      }
    }
    return t;
  }

 private:
  std::map<std::pair<std::string, std::string>, double> values_;
  std::map<std::string, std::string> provenance_;
};

struct PerformanceCell {
  double score = 0.0;
  std::optional<double> stddev;
};

class PerformanceTable {
 public:
  void set(const std::string& language, const std::string& task, const std::string& pos_type,
           PerformanceCell cell) {
    if (!std::isfinite(cell.score)) throw Error("non-finite score for " + language + "/" + task);
    const auto key = std::make_tuple(language, task, check_pos_type(pos_type));
    if (!cells_.emplace(key, cell).second) {
      throw Error("duplicate score " + language + "/" + task + "/" + pos_type);
    }
  }

  std::optional<PerformanceCell> get(const std::string& language, const std::string& task,
                                     const std::string& pos_type) const {
    const auto it = cells_.find(std::make_tuple(language, task, pos_type));
    if (it == cells_.end()) return std::nullopt;
    return it->second;
  }

  std::set<std::string> languages() const {
    std::set<std::string> out;
    for (const auto& [key, v] : cells_) out.insert(std::get<0>(key));
    return out;
  }

  // Header `language,task,pos_type,score[,stddev]`.
  static PerformanceTable read_csv(std::istream& in) {
    std::vector<std::string> header;
    const auto rows = detail::read_csv_rows(in, header);
    if (header.size() < 4 || header[0] != "language" || header[1] != "task" ||
        header[2] != "pos_type" || header[3] != "score") {
      throw ParseError("performance table header must be language,task,pos_type,score[,stddev]", 1);
    }
    PerformanceTable t;
    for (const auto& r : rows) {
      PerformanceCell cell{text::parse_double(r[3]), std::nullopt};
      if (r.size() > 4 && !r[4].empty()) cell.stddev = text::parse_double(r[4]);
      t.set(r[0], r[1], r[2], cell);
    }
    return t;
  }

 private:
  std::map<std::tuple<std::string, std::string, std::string>, PerformanceCell> cells_;
};

// (baseline - ablated) / baseline.
inline double relative_drop(const PerformanceTable& perf, const std::string& language,
                            const std::string& task, const std::string& baseline_pos,
                            const std::string& ablated_pos) {
  const auto base = perf.get(language, task, baseline_pos);
  const auto abl = perf.get(language, task, ablated_pos);
  if (!base) throw Error("missing score " + language + "/" + task + "/" + baseline_pos);
  if (!abl) throw Error("missing score " + language + "/" + task + "/" + ablated_pos);
  if (base->score == 0.0) throw Error("zero baseline score for " + language + "/" + task);
  return (base->score - abl->score) / base->score;
}

// Ranks starting at 1; tied values share their average rank.
inline std::vector<double> average_ranks(const std::vector<double>& xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&xs](std::size_t a, std::size_t b) {
    return xs[a] < xs[b];
  });
  std::vector<double> ranks(xs.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

// Empty when either input is constant.
inline std::optional<double> pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw Error("correlation inputs differ in length");
  if (xs.size() < 3) throw Error("correlation needs at least 3 observations");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline std::optional<double> spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw Error("correlation inputs differ in length");
  return pearson(average_ranks(xs), average_ranks(ys));
}

// Two-sided permutation p-value of |rho|: exact over all orderings for
// n <= 8, otherwise Monte Carlo with `rounds` shuffles.
inline std::optional<double> spearman_permutation_p(const std::vector<double>& xs,
                                                    const std::vector<double>& ys,
                                                    std::uint64_t seed, std::size_t rounds = 10000) {
  const auto observed = spearman(xs, ys);
  if (!observed) return std::nullopt;
  const double target = std::abs(*observed) - 1e-12;
  std::vector<double> perm = ys;
  std::size_t hits = 0, total = 0;
  const auto check = [&] {
    const auto r = spearman(xs, perm);
    if (r && std::abs(*r) >= target) ++hits;
    ++total;
  };
  if (xs.size() <= 8) {
    std::vector<std::size_t> idx(ys.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    do {
      for (std::size_t i = 0; i < idx.size(); ++i) perm[i] = ys[idx[i]];
      check();
    } while (std::next_permutation(idx.begin(), idx.end()));
  } else {
    std::mt19937_64 rng(seed);
    for (std::size_t r = 0; r < rounds; ++r) {
      for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[uniform_below(rng, i)]);
      check();
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

// What a metric is correlated against: either the relative drop between two
// positional-encoding variants, or the raw score of one variant.
struct Contrast {
  std::optional<std::string> baseline;
  std::string ablated;

  static Contrast parse(std::string_view s) {
    const auto vs = s.find("-vs-");
    if (vs == std::string_view::npos) return {std::nullopt, check_pos_type(s)};
    return {check_pos_type(s.substr(0, vs)), check_pos_type(s.substr(vs + 4))};
  }

  std::string name() const { return baseline ? *baseline + "-vs-" + ablated : ablated; }

  std::optional<double> value(const PerformanceTable& perf, const std::string& language,
                              const std::string& task) const {
    if (baseline) {
      if (!perf.get(language, task, *baseline) || !perf.get(language, task, ablated)) {
        return std::nullopt;
      }
      return relative_drop(perf, language, task, *baseline, ablated);
    }
    const auto cell = perf.get(language, task, ablated);
    return cell ? std::optional(cell->score) : std::nullopt;
  }
};

struct CorrelationSpec {
  std::string metric;
  std::string task;
  Contrast contrast;
};

// Header `metric,task,contrast`.
inline std::vector<CorrelationSpec> read_correlation_specs(std::istream& in) {
  std::vector<std::string> header;
  const auto rows = detail::read_csv_rows(in, header);
  if (header != std::vector<std::string>{"metric", "task", "contrast"}) {
    throw ParseError("correlation spec header must be metric,task,contrast", 1);
  }
  std::vector<CorrelationSpec> out;
  for (const auto& r : rows) out.push_back({r[0], r[1], Contrast::parse(r[2])});
  return out;
}

// Metric x task grid of the morphological-complexity and word-order scatter
// panels, each against the relative-vs-no-pos drop.
inline std::vector<CorrelationSpec> default_correlation_grid() {
  std::vector<CorrelationSpec> out;
  for (const char* metric : {"av", "mattr", "eta", "hde", "so_roe"}) {
    for (const char* task : {"ud", "wikiann", "sib200", "multiblimp"}) {
      out.push_back({metric, task, Contrast{"relative", "no-pos"}});
    }
  }
  return out;
}

struct CorrelationReport {
  std::string metric;
  std::string task;
  std::string contrast;
  std::optional<double> spearman_rho;
  std::optional<double> pearson_r;
  std::optional<double> permutation_p;
  std::size_t n = 0;
  std::size_t dropped = 0;
  std::vector<std::string> languages;
  std::vector<double> metric_values;
  std::vector<double> outcome_values;

  bool defined() const { return spearman_rho.has_value(); }

  static std::string csv_header() {
    return "metric,task,contrast,n,dropped,spearman_rho,pearson_r,permutation_p";
  }

  std::string csv_row() const {
    const auto cell = [](const std::optional<double>& v) {
      return v ? text::format_double(*v) : std::string("undefined");
    };
    return metric + "," + task + "," + contrast + "," + std::to_string(n) + "," +
           std::to_string(dropped) + "," + cell(spearman_rho) + "," + cell(pearson_r) + "," +
           (permutation_p ? text::format_double(*permutation_p) : std::string());
  }

  nlohmann::json to_json() const {
    const auto val = [](const std::optional<double>& v) -> nlohmann::json {
      return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    nlohmann::json scatter = nlohmann::json::array();
    for (std::size_t i = 0; i < languages.size(); ++i) {
      scatter.push_back({{"language", languages[i]},
                         {"metric_value", metric_values[i]},
                         {"value", outcome_values[i]}});
    }
    return {{"metric", metric},     {"task", task},
            {"contrast", contrast}, {"n", n},
            {"dropped", dropped},   {"spearman_rho", val(spearman_rho)},
            {"pearson_r", val(pearson_r)}, {"permutation_p", val(permutation_p)},
            {"undefined", !defined()},     {"scatter", scatter}};
  }
};

struct CorrelateOptions {
  bool permutation_test = false;
  std::uint64_t seed = 0;
};

inline CorrelationReport correlate_one(const MetricTable& metrics, const PerformanceTable& perf,
                                       const CorrelationSpec& spec,
                                       const CorrelateOptions& opts = {}) {
  CorrelationReport r;
  r.metric = spec.metric;
  r.task = spec.task;
  r.contrast = spec.contrast.name();
  std::set<std::string> all = metrics.languages();
  const auto pl = perf.languages();
  all.insert(pl.begin(), pl.end());
  for (const auto& lang : all) {
    const auto m = metrics.get(lang, spec.metric);
    const auto y = spec.contrast.value(perf, lang, spec.task);
    if (!m || !y) {
      ++r.dropped;
      continue;
    }
    r.languages.push_back(lang);
    r.metric_values.push_back(*m);
    r.outcome_values.push_back(*y);
  }
  r.n = r.languages.size();
  if (r.n < 3) {
    throw Error("fewer than 3 languages with both " + spec.metric + " and " + spec.task + "/" +
                r.contrast + " (" + std::to_string(r.n) + ")");
  }
  r.spearman_rho = spearman(r.metric_values, r.outcome_values);
  r.pearson_r = pearson(r.metric_values, r.outcome_values);
  if (opts.permutation_test) {
    r.permutation_p = spearman_permutation_p(r.metric_values, r.outcome_values, opts.seed);
  }
  return r;
}

inline std::vector<CorrelationReport> correlate_metrics(const MetricTable& metrics,
                                                        const PerformanceTable& perf,
                                                        const std::vector<CorrelationSpec>& specs,
                                                        const CorrelateOptions& opts = {}) {
  std::vector<CorrelationReport> out;
  for (const auto& s : specs) out.push_back(correlate_one(metrics, perf, s, opts));
  return out;
}

struct ScatterRow {
  std::string language;
  double metric_value = 0.0;
  std::string pos_type;
  double score = 0.0;

  friend bool operator==(const ScatterRow&, const ScatterRow&) = default;
};

// Long-form rows grouped by pos type (no-pos, absolute, relative) and sorted
// by metric value within each group.
inline std::vector<ScatterRow> emit_scatter(const MetricTable& metrics, const PerformanceTable& perf,
                                            const std::string& metric, const std::string& task) {
  std::vector<ScatterRow> rows;
  std::set<std::string> shared;
  for (const auto& lang : metrics.languages()) {
    const auto m = metrics.get(lang, metric);
    if (!m) continue;
    for (auto pos : kPosTypes) {
      if (const auto cell = perf.get(lang, task, std::string(pos))) {
        rows.push_back({lang, *m, std::string(pos), cell->score});
        shared.insert(lang);
      }
    }
  }
  if (shared.size() < 3) {
    throw Error("fewer than 3 languages with both " + metric + " and " + task + " scores");
  }
  std::sort(rows.begin(), rows.end(), [](const ScatterRow& a, const ScatterRow& b) {
    const auto ra = pos_type_rank(a.pos_type), rb = pos_type_rank(b.pos_type);
    if (ra != rb) return ra < rb;
    if (a.metric_value != b.metric_value) return a.metric_value < b.metric_value;
    return a.language < b.language;
  });
  return rows;
}

inline void write_scatter_csv(std::ostream& out, const std::vector<ScatterRow>& rows) {
  out << "language,metric_value,pos_type,score\n";
  for (const auto& r : rows) {
    out << r.language << ',' << text::format_double(r.metric_value) << ',' << r.pos_type << ','
        << text::format_double(r.score) << '\n';
  }
}

inline std::vector<ScatterRow> read_scatter_csv(std::istream& in) {
  std::vector<std::string> header;
  const auto rows = detail::read_csv_rows(in, header);
  if (header != std::vector<std::string>{"language", "metric_value", "pos_type", "score"}) {
    throw ParseError("scatter header must be language,metric_value,pos_type,score", 1);
  }
  std::vector<ScatterRow> out;
  for (const auto& r : rows) {
    out.push_back({r[0], text::parse_double(r[1]), check_pos_type(r[2]), text::parse_double(r[3])});
  }
  return out;
}

}  // namespace typometrics
