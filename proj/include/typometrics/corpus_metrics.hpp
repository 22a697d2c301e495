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

// Sliding-window lexical statistics over subword token streams.
//
//   MATTR  mean over windows of (distinct types in window) / window_size.
//   AV     per window, the mean over types of their number of distinct
//          successor types; then averaged over windows.
//   eta    per window, the mean over types with >= 2 distinct successors of
//          H(successors) / log2(#distinct successors); averaged over the
//          windows where at least one type qualifies.
//
// Successor pairs never cross a window boundary, and pairs touching the
// unknown id are left out of the successor statistics (but the unknown id
// still counts as a type for MATTR and TTR).
//
// The stream is evaluated in fixed blocks of consecutive windows. Each block
// rebuilds its window state from scratch, so results are bit-identical for
// any number of worker threads.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <ranges>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "typometrics/bpe.hpp"
#include "typometrics/error.hpp"
#include "typometrics/reservoir.hpp"
#include "typometrics/text.hpp"

namespace typometrics {

struct WindowConfig {
  std::size_t window_size = 1000;
  std::size_t step = 1;

  void validate() const {
    if (window_size < 2) throw Error("window_size must be >= 2");
    if (step < 1) throw Error("step must be >= 1");
    if (step > window_size) throw Error("step must not exceed window_size");
  }

  std::uint64_t window_count(std::uint64_t tokens) const {
    if (tokens < window_size) return 0;
    return (tokens - window_size) / step + 1;
  }
};

enum class AccessorSide { kRight, kLeft };

inline std::string_view to_string(AccessorSide side) {
  return side == AccessorSide::kRight ? "right" : "left";
}

struct WindowOptions {
  AccessorSide side = AccessorSide::kRight;
  // Tokens with this id are excluded from successor statistics.
  std::optional<TokenId> unknown_id;
};

class ShortStreamError : public Error {
 public:
  ShortStreamError(std::uint64_t token_count, std::size_t window_size)
      : Error("stream of " + std::to_string(token_count) +
              " tokens is shorter than the window size " + std::to_string(window_size)),
        token_count_(token_count),
        window_size_(window_size) {}

  std::uint64_t token_count() const { return token_count_; }
  std::size_t window_size() const { return window_size_; }

 private:
  std::uint64_t token_count_;
  std::size_t window_size_;
};

// Per-window sums. AV and eta are accumulated as 64.64 fixed point, so the
// totals do not depend on how the stream was split into blocks.
struct WindowTotals {
  static constexpr long double kScale = 18446744073709551616.0L;  // 2^64

  std::uint64_t windows = 0;
  std::uint64_t distinct_sum = 0;  // sum of distinct-type counts
  __int128 av_fx = 0;
  std::uint64_t av_windows = 0;
  __int128 eta_fx = 0;
  std::uint64_t eta_windows = 0;

  void add_av(double v) {
    av_fx += static_cast<__int128>(static_cast<long double>(v) * kScale);
    ++av_windows;
  }
  void add_eta(double v) {
    eta_fx += static_cast<__int128>(static_cast<long double>(v) * kScale);
    ++eta_windows;
  }

  double av_mean() const { return mean(av_fx, av_windows); }
  double eta_mean() const { return mean(eta_fx, eta_windows); }

  WindowTotals& operator+=(const WindowTotals& o) {
    windows += o.windows;
    distinct_sum += o.distinct_sum;
    av_fx += o.av_fx;
    av_windows += o.av_windows;
    eta_fx += o.eta_fx;
    eta_windows += o.eta_windows;
    return *this;
  }

  bool operator==(const WindowTotals&) const = default;

 private:
  static double mean(__int128 fx, std::uint64_t n) {
    if (n == 0) return 0.0;
    return static_cast<double>(static_cast<long double>(fx) / kScale / static_cast<long double>(n));
  }
};

namespace detail {

// Incrementally maintained statistics of the tokens currently in a window.
class WindowState {
 public:
  WindowState(std::size_t window_size, const WindowOptions& opts)
      : capacity_(window_size), opts_(opts), ring_(window_size) {
    xlogx_.resize(window_size + 1, 0.0);
    log2_.resize(window_size + 1, 0.0);
    for (std::size_t c = 1; c <= window_size; ++c) {
      log2_[c] = std::log2(static_cast<double>(c));
      xlogx_[c] = static_cast<double>(c) * log2_[c];
    }
  }

  std::size_t size() const { return size_; }
  std::size_t distinct() const { return distinct_; }

  void push_back(TokenId id) {
    const std::uint32_t t = intern(id);
    if (size_ > 0) link(back(), Slot{id, t}, +1);
    ring_[(head_ + size_) % capacity_] = Slot{id, t};
    ++size_;
    if (types_[t].occ++ == 0) ++distinct_;
  }

  void pop_front() {
    const Slot f = ring_[head_];
    if (size_ > 1) link(f, ring_[(head_ + 1) % capacity_], -1);
    head_ = (head_ + 1) % capacity_;
    --size_;
    if (--types_[f.type].occ == 0) {
      --distinct_;
      release(f);
    }
  }

  // Returns false when no type has a counted successor.
  bool av(double& out) const {
    if (active_types_ == 0) return false;
    out = static_cast<double>(distinct_successor_sum_) / static_cast<double>(active_types_);
    return true;
  }

  bool eta(double& out) const {
    if (qualifying_types_ == 0) return false;
    out = static_cast<double>(static_cast<long double>(eff_sum_) / kEffScale /
                              static_cast<long double>(qualifying_types_));
    return true;
  }

 private:
  struct Slot {
    TokenId id;
    std::uint32_t type;
  };
  struct TypeStats {
    std::uint32_t occ = 0;
    std::uint32_t total = 0;  // counted successor occurrences
    std::vector<std::pair<std::uint32_t, std::uint32_t>> succ;  // (type, count)
    std::int64_t eff = 0;  // fixed point, units of 1/kEffScale
  };

  // Efficiencies are summed as integers so sliding add/remove never drifts.
  static constexpr long double kEffScale = 4503599627370496.0L;  // 2^52

  const Slot& back() const { return ring_[(head_ + size_ - 1) % capacity_]; }

  std::uint32_t intern(TokenId id) {
    auto [it, inserted] = dense_.try_emplace(id, 0);
    if (inserted) {
      if (!free_.empty()) {
        it->second = free_.back();
        free_.pop_back();
      } else {
        it->second = static_cast<std::uint32_t>(types_.size());
        types_.emplace_back();
      }
    }
    return it->second;
  }

  void release(const Slot& s) {
    dense_.erase(s.id);
    free_.push_back(s.type);
  }

  bool excluded(TokenId id) const { return opts_.unknown_id && *opts_.unknown_id == id; }

  void link(const Slot& left, const Slot& right, int delta) {
    if (excluded(left.id) || excluded(right.id)) return;
    const bool rightward = opts_.side == AccessorSide::kRight;
    const std::uint32_t src = rightward ? left.type : right.type;
    const std::uint32_t dst = rightward ? right.type : left.type;
    TypeStats& ts = types_[src];

    retract(ts);
    auto it = std::find_if(ts.succ.begin(), ts.succ.end(),
                           [dst](const auto& p) { return p.first == dst; });
    if (delta > 0) {
      if (it == ts.succ.end()) {
        ts.succ.emplace_back(dst, 1);
      } else {
        ++it->second;
      }
      ++ts.total;
    } else {
      if (--it->second == 0) {
        *it = ts.succ.back();
        ts.succ.pop_back();
      }
      --ts.total;
    }
    contribute(ts);
  }

  void retract(const TypeStats& ts) {
    if (ts.succ.empty()) return;
    --active_types_;
    distinct_successor_sum_ -= ts.succ.size();
    if (ts.succ.size() >= 2) {
      --qualifying_types_;
      eff_sum_ -= ts.eff;
    }
  }

  void contribute(TypeStats& ts) {
    if (ts.succ.empty()) return;
    ++active_types_;
    distinct_successor_sum_ += ts.succ.size();
    if (ts.succ.size() >= 2) {
      double s = 0.0;
      for (const auto& [type, count] : ts.succ) s += xlogx_[count];
      const double h = log2_[ts.total] - s / static_cast<double>(ts.total);
      const double e = std::clamp(h / log2_[ts.succ.size()], 0.0, 1.0);
      ts.eff = static_cast<std::int64_t>(std::llround(static_cast<long double>(e) * kEffScale));
      ++qualifying_types_;
      eff_sum_ += ts.eff;
    }
  }

  std::size_t capacity_;
  WindowOptions opts_;
  std::vector<Slot> ring_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  std::size_t distinct_ = 0;

  std::unordered_map<TokenId, std::uint32_t> dense_;
  std::vector<std::uint32_t> free_;
  std::vector<TypeStats> types_;

  std::uint64_t active_types_ = 0;
  std::uint64_t distinct_successor_sum_ = 0;
  std::uint64_t qualifying_types_ = 0;
  __int128 eff_sum_ = 0;

  std::vector<double> xlogx_;
  std::vector<double> log2_;
};

}  // namespace detail

// Evaluates every window fully contained in `tokens`, starting at offsets
// 0, step, 2*step, ...
inline WindowTotals evaluate_windows(std::span<const TokenId> tokens, const WindowConfig& cfg,
                                     const WindowOptions& opts = {}) {
  cfg.validate();
  WindowTotals totals;
  if (tokens.size() < cfg.window_size) return totals;
  detail::WindowState state(cfg.window_size, opts);
  const auto record = [&] {
    ++totals.windows;
    totals.distinct_sum += state.distinct();
    double v;
    if (state.av(v)) totals.add_av(v);
    if (state.eta(v)) totals.add_eta(v);
  };
  for (std::size_t i = 0; i < cfg.window_size; ++i) state.push_back(tokens[i]);
  record();
  for (std::size_t start = 1; start + cfg.window_size <= tokens.size(); ++start) {
    state.pop_front();
    state.push_back(tokens[start + cfg.window_size - 1]);
    if (start % cfg.step == 0) record();
  }
  return totals;
}

// Feeds tokens one at a time and evaluates fixed-size blocks of windows,
// optionally on several threads. Memory is bounded by
// threads * (block span + window size) tokens.
class StreamingWindowMetrics {
 public:
  static constexpr std::size_t kBlockTokens = std::size_t{1} << 16;

  StreamingWindowMetrics(WindowConfig cfg, WindowOptions opts = {}, unsigned threads = 1)
      : cfg_(cfg), opts_(opts), threads_(std::max(1u, threads)) {
    cfg_.validate();
    block_windows_ = std::max<std::size_t>(1, kBlockTokens / cfg_.step);
    block_advance_ = block_windows_ * cfg_.step;
    slice_len_ = (block_windows_ - 1) * cfg_.step + cfg_.window_size;
  }

  void push(TokenId id) {
    buffer_.push_back(id);
    ++tokens_;
    if (buffer_.size() == slice_len_) {
      pending_.emplace_back(buffer_.begin(), buffer_.end());
      buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(block_advance_));
      if (pending_.size() >= threads_) drain();
    }
  }

  void push(std::span<const TokenId> ids) {
    for (TokenId id : ids) push(id);
  }

  std::uint64_t token_count() const { return tokens_; }

  WindowTotals finish() {
    if (!buffer_.empty()) {
      pending_.push_back(std::move(buffer_));
      buffer_.clear();
    }
    drain();
    return totals_;
  }

 private:
  void drain() {
    if (pending_.size() == 1) {
      totals_ += evaluate_windows(pending_.front(), cfg_, opts_);
    } else if (!pending_.empty()) {
      std::vector<std::future<WindowTotals>> jobs;
      for (const auto& slice : pending_) {
        jobs.push_back(std::async(std::launch::async, [this, &slice] {
          return evaluate_windows(slice, cfg_, opts_);
        }));
      }
      for (auto& j : jobs) totals_ += j.get();
    }
    pending_.clear();
  }

  WindowConfig cfg_;
  WindowOptions opts_;
  unsigned threads_;
  std::size_t block_windows_ = 0;
  std::size_t block_advance_ = 0;
  std::size_t slice_len_ = 0;
  std::vector<TokenId> buffer_;
  std::vector<std::vector<TokenId>> pending_;
  std::uint64_t tokens_ = 0;
  WindowTotals totals_;
};

inline WindowTotals window_totals(std::span<const TokenId> tokens, const WindowConfig& cfg,
                                  const WindowOptions& opts = {}, unsigned threads = 1) {
  cfg.validate();
  if (tokens.size() < cfg.window_size) throw ShortStreamError(tokens.size(), cfg.window_size);
  StreamingWindowMetrics s(cfg, opts, threads);
  s.push(tokens);
  return s.finish();
}

inline double mattr(std::span<const TokenId> tokens, const WindowConfig& cfg) {
  const auto t = window_totals(tokens, cfg);
  return static_cast<double>(t.distinct_sum) /
         (static_cast<double>(t.windows) * static_cast<double>(cfg.window_size));
}

struct AccessorVariety {
  double av = 0.0;
  double eta = 0.0;
  // False when no window had a type with >= 2 distinct successors; eta is
  // then reported as 0.
  bool eta_defined = false;
  std::uint64_t eta_windows = 0;
};

inline AccessorVariety accessor_variety(std::span<const TokenId> tokens, const WindowConfig& cfg,
                                        const WindowOptions& opts = {}) {
  const auto t = window_totals(tokens, cfg, opts);
  AccessorVariety out;
  out.av = t.av_mean();
  out.eta_windows = t.eta_windows;
  out.eta_defined = t.eta_windows > 0;
  out.eta = t.eta_mean();
  return out;
}

inline double global_ttr(std::span<const TokenId> tokens) {
  if (tokens.empty()) throw Error("type-token ratio of an empty stream");
  const std::unordered_set<TokenId> types(tokens.begin(), tokens.end());
  return static_cast<double>(types.size()) / static_cast<double>(tokens.size());
}

// Uniform sample of min(n, |corpus|) lines, in corpus order.
template <std::ranges::input_range Lines>
std::vector<std::string> sample_lines(Lines&& lines, std::size_t n, std::uint64_t seed) {
  Reservoir<std::string> reservoir(n, seed);
  for (const auto& line : lines) reservoir.offer(std::string(line));
  return std::move(reservoir).take();
}

struct WindowMetricsReport {
  std::string language;
  double mattr = 0.0;
  double av = 0.0;
  double eta = 0.0;
  bool eta_defined = false;
  double ttr_global = 0.0;
  std::optional<double> fertility;  // absent for pre-tokenized id input
  std::uint64_t window_count = 0;
  std::uint64_t token_count = 0;
  std::uint64_t word_count = 0;
  WindowConfig config;
  AccessorSide side = AccessorSide::kRight;

  static std::string csv_header() {
    return "language,mattr,av,eta,ttr,fertility,window_size,step,tokens";
  }

  std::string csv_row() const {
    using text::format_double;
    return language + "," + format_double(mattr) + "," + format_double(av) + "," +
           format_double(eta) + "," + format_double(ttr_global) + "," +
           (fertility ? format_double(*fertility) : std::string()) + "," +
           std::to_string(config.window_size) + "," +
           std::to_string(config.step) + "," + std::to_string(token_count);
  }

  nlohmann::json to_json() const {
    nlohmann::json flags = nlohmann::json::array();
    if (!eta_defined) flags.push_back("eta_undefined");
    return {{"language", language},
            {"mattr", mattr},
            {"av", av},
            {"eta", eta},
            {"ttr", ttr_global},
            {"fertility", fertility ? nlohmann::json(*fertility) : nlohmann::json(nullptr)},
            {"window_count", window_count},
            {"token_count", token_count},
            {"word_count", word_count},
            {"window_size", config.window_size},
            {"step", config.step},
            {"flags", flags},
            {"metadata",
             {{"accessor", std::string(to_string(side))},
              {"av_aggregation", "type-averaged within window, mean over windows"},
              {"eta_aggregation", "mean over types with >=2 distinct successors"},
              {"unknown_id_in_successors", "excluded"},
              {"successors_cross_windows", false},
              {"entropy_base", 2}}}};
  }
};

// One streaming pass over raw lines: tokenization, window statistics,
// global TTR and fertility. Only the current blocks and the type set are
// held in memory.
class CorpusMetricsPass {
 public:
  CorpusMetricsPass(const TokenizerModel& model, WindowConfig cfg, AccessorSide side,
                    unsigned threads)
      : encoder_(model),
        windows_(cfg, WindowOptions{side, model.unknown_id()}, threads),
        cfg_(cfg),
        side_(side) {}

  void add_line(std::string_view line) {
    scratch_.ids.clear();
    scratch_.word_start.clear();
    encoder_.encode_into(line, scratch_);
    words_ += scratch_.word_count();
    for (TokenId id : scratch_.ids) {
      types_.insert(id);
      windows_.push(id);
    }
  }

  WindowMetricsReport finish(std::string language) {
    const std::uint64_t tokens = windows_.token_count();
    if (words_ == 0) throw Error("no words in corpus");
    if (tokens < cfg_.window_size) throw ShortStreamError(tokens, cfg_.window_size);
    const auto t = windows_.finish();
    WindowMetricsReport r;
    r.language = std::move(language);
    r.config = cfg_;
    r.side = side_;
    r.token_count = tokens;
    r.word_count = words_;
    r.window_count = t.windows;
    r.mattr = static_cast<double>(t.distinct_sum) /
              (static_cast<double>(t.windows) * static_cast<double>(cfg_.window_size));
    r.av = t.av_mean();
    r.eta_defined = t.eta_windows > 0;
    r.eta = t.eta_mean();
    r.ttr_global = static_cast<double>(types_.size()) / static_cast<double>(tokens);
    r.fertility = static_cast<double>(tokens) / static_cast<double>(words_);
    return r;
  }

 private:
  CachingEncoder encoder_;
  StreamingWindowMetrics windows_;
  WindowConfig cfg_;
  AccessorSide side_;
  TokenStream scratch_;
  std::unordered_set<TokenId> types_;
  std::uint64_t words_ = 0;
};

}  // namespace typometrics
