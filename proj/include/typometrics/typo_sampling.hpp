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

// Typological language sampling over categorical feature vectors.
//
// Distances are normalized Hamming distances over jointly defined features.
// MaxSum picks the k languages with the largest sum of pairwise distances,
// either exhaustively or greedily; sample diagnostics are
//
//   MPD      mean pairwise distance within the sample;
//   FVI      fraction of (feature, value) pairs attested in the frame that
//            also occur in the sample;
//   FVO      mean over features of (modal value count - 1) / (n - 1);
//   Entropy  sum over features of the Shannon entropy (bits) of the values.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "typometrics/error.hpp"
#include "typometrics/text.hpp"

namespace typometrics {

using FeatureValue = std::optional<std::string>;  // nullopt = missing

class FeatureMatrix {
 public:
  FeatureMatrix(std::vector<std::string> languages, std::vector<std::string> features,
                std::vector<std::vector<FeatureValue>> values)
      : languages_(std::move(languages)),
        features_(std::move(features)),
        values_(std::move(values)) {
    if (values_.size() != languages_.size()) throw Error("feature matrix is not rectangular");
    for (std::size_t i = 0; i < languages_.size(); ++i) {
      if (values_[i].size() != features_.size()) {
        throw Error("feature matrix row for '" + languages_[i] + "' has " +
                    std::to_string(values_[i].size()) + " values, expected " +
                    std::to_string(features_.size()));
      }
      if (!index_.emplace(languages_[i], i).second) {
        throw Error("duplicate language '" + languages_[i] + "'");
      }
    }
    for (std::size_t f = 0; f < features_.size(); ++f) {
      const bool attested = std::any_of(values_.begin(), values_.end(),
                                        [f](const auto& row) { return row[f].has_value(); });
      if (!attested) throw Error("feature '" + features_[f] + "' has no values");
    }
  }

  // CSV with header `language,<feature>,...`; empty cells and "?" are
  // missing values.
  static FeatureMatrix read_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> features;
    std::vector<std::string> langs;
    std::vector<std::vector<FeatureValue>> values;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string_view l = text::chomp(line);
      if (text::trim(l).empty()) continue;
      const auto cells = text::split(l, ',');
      if (features.empty() && langs.empty() && line_no == 1) {
        if (cells.size() < 2) throw ParseError("header needs language and features", line_no);
        for (std::size_t i = 1; i < cells.size(); ++i) features.emplace_back(text::trim(cells[i]));
        continue;
      }
      if (cells.size() != features.size() + 1) {
        throw ParseError("expected " + std::to_string(features.size() + 1) + " cells, found " +
                             std::to_string(cells.size()),
                         line_no);
      }
      langs.emplace_back(text::trim(cells[0]));
      std::vector<FeatureValue> row;
      for (std::size_t i = 1; i < cells.size(); ++i) {
        const auto v = text::trim(cells[i]);
        row.push_back(v.empty() || v == "?" ? FeatureValue{} : FeatureValue{std::string(v)});
      }
      values.push_back(std::move(row));
    }
    if (features.empty()) throw ParseError("empty feature file", 0);
    return FeatureMatrix(std::move(langs), std::move(features), std::move(values));
  }

  std::size_t language_count() const { return languages_.size(); }
  std::size_t feature_count() const { return features_.size(); }
  const std::vector<std::string>& languages() const { return languages_; }
  const std::vector<std::string>& features() const { return features_; }
  const FeatureValue& value(std::size_t lang, std::size_t feature) const {
    return values_[lang][feature];
  }

  std::size_t index_of(const std::string& code) const {
    const auto it = index_.find(code);
    if (it == index_.end()) throw Error("unknown language '" + code + "'");
    return it->second;
  }

 private:
  std::vector<std::string> languages_;
  std::vector<std::string> features_;
  std::vector<std::vector<FeatureValue>> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct PairDistance {
  double distance = 0.0;
  std::size_t jointly_defined = 0;
};

inline PairDistance pairwise_distance_info(const FeatureMatrix& m, std::size_t a, std::size_t b) {
  std::size_t defined = 0;
  std::size_t disagree = 0;
  for (std::size_t f = 0; f < m.feature_count(); ++f) {
    const auto& va = m.value(a, f);
    const auto& vb = m.value(b, f);
    if (!va || !vb) continue;
    ++defined;
    if (*va != *vb) ++disagree;
  }
  if (defined == 0) {
    throw Error("languages '" + m.languages()[a] + "' and '" + m.languages()[b] +
                "' share no defined feature");
  }
  return {static_cast<double>(disagree) / static_cast<double>(defined), defined};
}

inline double pairwise_distance(const FeatureMatrix& m, const std::string& a,
                                const std::string& b) {
  return pairwise_distance_info(m, m.index_of(a), m.index_of(b)).distance;
}

enum class MaxSumMode { kExact, kGreedy };

inline MaxSumMode parse_maxsum_mode(std::string_view s) {
  if (s == "exact") return MaxSumMode::kExact;
  if (s == "greedy") return MaxSumMode::kGreedy;
  throw Error("unknown MaxSum mode '" + std::string(s) + "'");
}

inline constexpr std::size_t kExactMaxLanguages = 20;

namespace detail {

// Languages ordered by code, with their full distance matrix.
struct SortedFrame {
  std::vector<std::size_t> order;  // position -> matrix index
  std::vector<std::vector<double>> dist;

  explicit SortedFrame(const FeatureMatrix& m) {
    order.resize(m.language_count());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&m](std::size_t a, std::size_t b) {
      return m.languages()[a] < m.languages()[b];
    });
    const std::size_t n = order.size();
    dist.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        dist[i][j] = dist[j][i] = pairwise_distance_info(m, order[i], order[j]).distance;
      }
    }
  }

  std::vector<std::string> codes(const FeatureMatrix& m, const std::vector<std::size_t>& pos) const {
    std::vector<std::string> out;
    for (std::size_t p : pos) out.push_back(m.languages()[order[p]]);
    return out;
  }
};

inline bool strictly_greater(double a, double b) {
  return a > b + 1e-12 * std::max(1.0, std::abs(b));
}

}  // namespace detail

inline void check_k(const FeatureMatrix& m, std::size_t k) {
  if (k < 2 || k > m.language_count()) {
    throw Error("sample size k=" + std::to_string(k) + " outside [2, " +
                std::to_string(m.language_count()) + "]");
  }
}

// Sum of pairwise distances, accumulated over pairs in code order.
inline double maxsum_objective(const FeatureMatrix& m, const std::vector<std::string>& sample) {
  std::vector<std::string> sorted = sample;
  std::sort(sorted.begin(), sorted.end());
  double s = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) s += pairwise_distance(m, sorted[i], sorted[j]);
  }
  return s;
}

// Greedy MaxSum in selection order: farthest pair first, then the language
// with the largest summed distance to the current sample. Ties go to the
// smaller language code.
inline std::vector<std::string> greedy_maxsum_order(const FeatureMatrix& m, std::size_t k) {
  check_k(m, k);
  const detail::SortedFrame frame(m);
  const std::size_t n = frame.order.size();
  std::size_t bi = 0, bj = 1;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (detail::strictly_greater(frame.dist[i][j], frame.dist[bi][bj])) bi = i, bj = j;
    }
  }
  std::vector<std::size_t> chosen{bi, bj};
  std::vector<bool> used(n, false);
  used[bi] = used[bj] = true;
  while (chosen.size() < k) {
    std::optional<std::size_t> best;
    double best_gain = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (used[c]) continue;
      double gain = 0.0;
      for (std::size_t s : chosen) gain += frame.dist[c][s];
      if (!best || detail::strictly_greater(gain, best_gain)) best = c, best_gain = gain;
    }
    chosen.push_back(*best);
    used[*best] = true;
  }
  return frame.codes(m, chosen);
}

// Exhaustive MaxSum over all k-subsets; the lexicographically smallest
// subset wins ties.
inline std::vector<std::string> exact_maxsum(const FeatureMatrix& m, std::size_t k) {
  check_k(m, k);
  if (m.language_count() > kExactMaxLanguages) {
    throw Error("exact MaxSum supports at most " + std::to_string(kExactMaxLanguages) +
                " languages, got " + std::to_string(m.language_count()));
  }
  const detail::SortedFrame frame(m);
  const std::size_t n = frame.order.size();
  std::vector<std::size_t> comb(k);
  std::iota(comb.begin(), comb.end(), std::size_t{0});
  std::vector<std::size_t> best;
  double best_value = -1.0;
  while (true) {
    double v = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) v += frame.dist[comb[i]][comb[j]];
    }
    if (best.empty() || detail::strictly_greater(v, best_value)) best = comb, best_value = v;
    // Next combination in lexicographic order.
    std::size_t i = k;
    while (i > 0 && comb[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) break;
    ++comb[i - 1];
    for (std::size_t j = i; j < k; ++j) comb[j] = comb[j - 1] + 1;
  }
  return frame.codes(m, best);
}

// Selected language codes, sorted.
inline std::vector<std::string> select_maxsum(const FeatureMatrix& m, std::size_t k,
                                              MaxSumMode mode) {
  auto out = mode == MaxSumMode::kExact ? exact_maxsum(m, k) : greedy_maxsum_order(m, k);
  std::sort(out.begin(), out.end());
  return out;
}

struct SampleQualityReport {
  std::vector<std::string> sample;
  double mpd = 0.0;
  double fvi = 0.0;
  double fvo = 0.0;
  double entropy = 0.0;
  // Jointly defined feature count per sampled pair, in sample order.
  std::vector<std::pair<std::pair<std::string, std::string>, std::size_t>> pair_coverage;

  static std::string csv_header() { return "k,mpd,fvi,fvo,entropy,sample"; }

  std::string csv_row() const {
    std::string langs;
    for (std::size_t i = 0; i < sample.size(); ++i) langs += (i ? ";" : "") + sample[i];
    return std::to_string(sample.size()) + "," + text::format_double(mpd) + "," +
           text::format_double(fvi) + "," + text::format_double(fvo) + "," +
           text::format_double(entropy) + "," + langs;
  }

  nlohmann::json to_json() const {
    nlohmann::json coverage = nlohmann::json::array();
    for (const auto& [pair, n] : pair_coverage) coverage.push_back({pair.first, pair.second, n});
    return {{"sample", sample},
            {"mpd", mpd},
            {"fvi", fvi},
            {"fvo", fvo},
            {"entropy", entropy},
            {"pair_coverage", coverage},
            {"metadata",
             {{"fvo_definition", "mean over features of (modal count - 1)/(n - 1)"},
              {"entropy_definition", "sum over features, bits"},
              {"missing_values", "excluded from all counts"}}}};
  }
};

inline SampleQualityReport quality(const FeatureMatrix& m, const std::vector<std::string>& sample) {
  if (sample.size() < 2) throw Error("sample must contain at least 2 languages");
  std::vector<std::size_t> idx;
  for (const auto& code : sample) idx.push_back(m.index_of(code));
  if (std::set<std::size_t>(idx.begin(), idx.end()).size() != idx.size()) {
    throw Error("sample contains a language twice");
  }

  SampleQualityReport r;
  r.sample = sample;

  double dsum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      const auto pd = pairwise_distance_info(m, idx[i], idx[j]);
      dsum += pd.distance;
      ++pairs;
      r.pair_coverage.push_back({{sample[i], sample[j]}, pd.jointly_defined});
    }
  }
  r.mpd = dsum / static_cast<double>(pairs);

  std::size_t attested_frame = 0;
  std::size_t attested_sample = 0;
  double fvo_sum = 0.0;
  std::size_t fvo_features = 0;
  for (std::size_t f = 0; f < m.feature_count(); ++f) {
    std::set<std::string> frame_values;
    for (std::size_t l = 0; l < m.language_count(); ++l) {
      if (const auto& v = m.value(l, f)) frame_values.insert(*v);
    }
    std::map<std::string, std::size_t> counts;
    std::size_t n = 0;
    for (std::size_t l : idx) {
      if (const auto& v = m.value(l, f)) ++counts[*v], ++n;
    }
    attested_frame += frame_values.size();
    attested_sample += counts.size();
    std::vector<std::size_t> cv;
    std::size_t modal = 0;
    for (const auto& [v, c] : counts) cv.push_back(c), modal = std::max(modal, c);
    std::sort(cv.begin(), cv.end());  // value labels must not affect rounding
    if (n >= 2) {
      fvo_sum += static_cast<double>(modal - 1) / static_cast<double>(n - 1);
      ++fvo_features;
    }
    double h = 0.0;
    for (std::size_t c : cv) {
      const double p = static_cast<double>(c) / static_cast<double>(n);
      h -= p * std::log2(p);
    }
    r.entropy += h;
  }
  r.fvi = static_cast<double>(attested_sample) / static_cast<double>(attested_frame);
  r.fvo = fvo_features ? fvo_sum / static_cast<double>(fvo_features) : 0.0;
  return r;
}

// Quality of MaxSum samples of size 2..k_max. Greedy samples are prefixes of
// one greedy run; exact samples are solved per size.
inline std::vector<SampleQualityReport> saturation_curve(const FeatureMatrix& m, std::size_t k_max,
                                                         MaxSumMode mode) {
  check_k(m, k_max);
  std::vector<SampleQualityReport> out;
  if (mode == MaxSumMode::kGreedy) {
    const auto order = greedy_maxsum_order(m, k_max);
    for (std::size_t k = 2; k <= k_max; ++k) {
      std::vector<std::string> s(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(s.begin(), s.end());
      out.push_back(quality(m, s));
    }
  } else {
    for (std::size_t k = 2; k <= k_max; ++k) out.push_back(quality(m, exact_maxsum(m, k)));
  }
  return out;
}

}  // namespace typometrics
