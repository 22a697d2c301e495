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

// Monolingual character-level byte-pair encoding.
//
// Base symbols are Unicode scalar values. Training greedily merges the most
// frequent adjacent pair inside pretokens (ties go to the lexicographically
// smallest pair of strings) until the vocabulary reaches its target size or
// no pair occurs at least twice. Encoding replays the merges in training
// order; characters outside the vocabulary map to a reserved unknown id equal
// to the vocabulary size.

#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <queue>
#include <ranges>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "typometrics/error.hpp"
#include "typometrics/text.hpp"

namespace typometrics {

using TokenId = std::uint32_t;

enum class Pretokenizer { kWhitespace, kWhitespacePunct };

inline std::string_view to_string(Pretokenizer rule) {
  return rule == Pretokenizer::kWhitespace ? "whitespace" : "whitespace+punct-split";
}

inline Pretokenizer parse_pretokenizer(std::string_view name) {
  if (name == "whitespace") return Pretokenizer::kWhitespace;
  if (name == "whitespace+punct-split" || name == "punct") {
    return Pretokenizer::kWhitespacePunct;
  }
  throw Error("unknown pretokenizer rule '" + std::string(name) + "'");
}

// Splits a line into pretokens (words). With punctuation splitting every
// punctuation character becomes a pretoken of its own.
inline std::vector<std::string> pretokenize(std::string_view line, Pretokenizer rule) {
  std::vector<std::string> words;
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) words.push_back(std::move(current)), current.clear();
  };
  for (char32_t c : text::decode_utf8(line)) {
    if (text::is_space(c)) {
      flush();
    } else if (rule == Pretokenizer::kWhitespacePunct && text::is_punct(c)) {
      flush();
      text::append_utf8(current, c);
      flush();
    } else {
      text::append_utf8(current, c);
    }
  }
  flush();
  return words;
}

// Token ids plus a flag per token marking the first token of each pretoken.
struct TokenStream {
  std::vector<TokenId> ids;
  std::vector<bool> word_start;

  std::size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
  void push(TokenId id, bool starts_word) {
    ids.push_back(id);
    word_start.push_back(starts_word);
  }
  std::size_t word_count() const {
    return static_cast<std::size_t>(std::count(word_start.begin(), word_start.end(), true));
  }
  friend bool operator==(const TokenStream&, const TokenStream&) = default;
};

using Merge = std::pair<std::string, std::string>;

class TokenizerModel {
 public:
  static constexpr int kFormatVersion = 1;

  // Validates the vocabulary/merge invariants; throws Error on violation.
  TokenizerModel(std::vector<std::string> vocab, std::vector<Merge> merges,
                 Pretokenizer rule, std::size_t vocab_size_target)
      : vocab_(std::move(vocab)),
        merges_(std::move(merges)),
        rule_(rule),
        vocab_size_target_(vocab_size_target) {
    if (vocab_.size() > vocab_size_target_) {
      throw Error("vocabulary larger than its target size");
    }
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      if (vocab_[i].empty()) throw Error("empty vocabulary entry at id " + std::to_string(i));
      if (!index_.emplace(vocab_[i], static_cast<TokenId>(i)).second) {
        throw Error("duplicate vocabulary entry '" + vocab_[i] + "'");
      }
    }
    std::unordered_set<std::string> produced;
    for (std::size_t r = 0; r < merges_.size(); ++r) {
      const auto& [left, right] = merges_[r];
      const auto l = id_of(left);
      const auto rr = id_of(right);
      const auto m = id_of(left + right);
      if (!l || !rr || !m) {
        throw Error("merge " + std::to_string(r) + " ('" + left + "','" + right +
                    "') refers to symbols outside the vocabulary");
      }
      ranks_.try_emplace(pair_key(*l, *rr), static_cast<std::uint32_t>(r), *m);
      produced.insert(left + right);
    }
    for (const auto& tok : vocab_) {
      if (text::decode_utf8(tok).size() != 1 && !produced.count(tok)) {
        throw Error("vocabulary entry '" + tok + "' is neither a character nor a merge result");
      }
    }
  }

  std::size_t vocab_size() const { return vocab_.size(); }
  std::size_t vocab_size_target() const { return vocab_size_target_; }
  TokenId unknown_id() const { return static_cast<TokenId>(vocab_.size()); }
  Pretokenizer pretokenizer() const { return rule_; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  const std::vector<Merge>& merges() const { return merges_; }

  std::optional<TokenId> id_of(std::string_view token) const {
    const auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& token(TokenId id) const {
    if (id >= vocab_.size()) throw Error("unknown token id " + std::to_string(id));
    return vocab_[id];
  }

  // Segments one pretoken using only merges with rank < merge_limit.
  std::vector<TokenId> encode_word(std::string_view word,
                                   std::size_t merge_limit = SIZE_MAX) const {
    std::vector<TokenId> syms;
    std::string buf;
    for (char32_t c : text::decode_utf8(word)) {
      buf.clear();
      text::append_utf8(buf, c);
      syms.push_back(id_of(buf).value_or(unknown_id()));
    }
    while (syms.size() > 1) {
      std::uint32_t best_rank = UINT32_MAX;
      std::size_t best_pos = 0;
      TokenId best_id = 0;
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
        const auto it = ranks_.find(pair_key(syms[i], syms[i + 1]));
        if (it != ranks_.end() && it->second.first < best_rank &&
            it->second.first < merge_limit) {
          best_rank = it->second.first;
          best_pos = i;
          best_id = it->second.second;
        }
      }
      if (best_rank == UINT32_MAX) break;
      syms[best_pos] = best_id;
      syms.erase(syms.begin() + static_cast<std::ptrdiff_t>(best_pos) + 1);
    }
    return syms;
  }

  TokenStream encode(std::string_view line, std::size_t merge_limit = SIZE_MAX) const {
    TokenStream out;
    for (const auto& word : typometrics::pretokenize(line, rule_)) {
      bool first = true;
      for (TokenId id : encode_word(word, merge_limit)) {
        out.push(id, first);
        first = false;
      }
    }
    return out;
  }

  // Unknown-id tokens decode to U+FFFD; ids beyond it are rejected.
  std::string decode(const TokenStream& stream) const {
    std::string out;
    for (std::size_t i = 0; i < stream.size(); ++i) {
      const TokenId id = stream.ids[i];
      if (id > unknown_id()) throw Error("unknown token id " + std::to_string(id));
      if (i > 0 && stream.word_start[i]) out.push_back(' ');
      if (id == unknown_id()) {
        text::append_utf8(out, text::kReplacementChar);
      } else {
        out += vocab_[id];
      }
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json merges = nlohmann::json::array();
    for (const auto& [l, r] : merges_) merges.push_back({l, r});
    return {{"version", kFormatVersion},
            {"pretokenizer_rule", std::string(to_string(rule_))},
            {"vocab", vocab_},
            {"merges", std::move(merges)}};
  }

  std::string serialize() const { return to_json().dump(1) + "\n"; }

  static TokenizerModel from_json(const nlohmann::json& j) {
    try {
      if (j.at("version").get<int>() != kFormatVersion) {
        throw Error("unsupported tokenizer model version");
      }
      auto vocab = j.at("vocab").get<std::vector<std::string>>();
      std::vector<Merge> merges;
      for (const auto& m : j.at("merges")) {
        if (!m.is_array() || m.size() != 2) throw Error("merge entries must be [left, right]");
        merges.emplace_back(m[0].get<std::string>(), m[1].get<std::string>());
      }
      const auto rule = parse_pretokenizer(j.at("pretokenizer_rule").get<std::string>());
      const std::size_t n = vocab.size();
      return TokenizerModel(std::move(vocab), std::move(merges), rule, n);
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("malformed tokenizer model: ") + e.what());
    }
  }

  static TokenizerModel load(std::istream& in) {
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("malformed tokenizer model: ") + e.what());
    }
  }

 private:
  static std::uint64_t pair_key(TokenId a, TokenId b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }

  std::vector<std::string> vocab_;
  std::vector<Merge> merges_;
  Pretokenizer rule_;
  std::size_t vocab_size_target_;
  std::unordered_map<std::string, TokenId> index_;
  // (left, right) -> (rank, merged id); first occurrence wins for repeats.
  std::unordered_map<std::uint64_t, std::pair<std::uint32_t, TokenId>> ranks_;
};

// Per-thread encoder that memoizes word segmentations. The model it wraps
// must outlive it.
class CachingEncoder {
 public:
  explicit CachingEncoder(const TokenizerModel& model, std::size_t max_entries = 1 << 20)
      : model_(&model), max_entries_(max_entries) {}

  void encode_into(std::string_view line, TokenStream& out) {
    for (auto& word : pretokenize(line, model_->pretokenizer())) {
      auto it = cache_.find(word);
      if (it == cache_.end()) {
        if (cache_.size() >= max_entries_) cache_.clear();
        auto ids = model_->encode_word(word);
        it = cache_.emplace(std::move(word), std::move(ids)).first;
      }
      bool first = true;
      for (TokenId id : it->second) {
        out.push(id, first);
        first = false;
      }
    }
  }

  TokenStream encode(std::string_view line) {
    TokenStream out;
    encode_into(line, out);
    return out;
  }

 private:
  const TokenizerModel* model_;
  std::size_t max_entries_;
  std::unordered_map<std::string, std::vector<TokenId>> cache_;
};

// Accumulates pretoken frequencies line by line, then runs the merge loop.
// Memory is proportional to the number of distinct pretokens.
class BpeTrainer {
 public:
  explicit BpeTrainer(Pretokenizer rule = Pretokenizer::kWhitespace) : rule_(rule) {}

  void add_line(std::string_view line) {
    for (auto& w : pretokenize(line, rule_)) ++word_counts_[std::move(w)];
  }

  std::size_t distinct_words() const { return word_counts_.size(); }

  TokenizerModel train(std::size_t vocab_size_target) const {
    if (word_counts_.empty()) throw Error("empty corpus");

    // Deterministic word order regardless of hash-table layout.
    std::vector<std::pair<std::string, std::uint64_t>> sorted(word_counts_.begin(),
                                                              word_counts_.end());
    std::sort(sorted.begin(), sorted.end());

    std::map<std::string, int> alphabet;
    std::vector<std::u32string> decoded;
    decoded.reserve(sorted.size());
    for (const auto& [w, c] : sorted) {
      decoded.push_back(text::decode_utf8(w));
      for (char32_t cp : decoded.back()) alphabet.emplace(text::encode_utf8({&cp, 1}), 0);
    }
    if (vocab_size_target < alphabet.size()) {
      throw Error("vocab_size_target " + std::to_string(vocab_size_target) +
                  " is smaller than the base alphabet; need at least " +
                  std::to_string(alphabet.size()));
    }

    std::vector<std::string> symbols;
    std::unordered_map<std::string, int> symbol_id;
    for (auto& [s, id] : alphabet) {
      id = static_cast<int>(symbols.size());
      symbols.push_back(s);
      symbol_id.emplace(s, id);
    }

    std::vector<Word> words;
    words.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      Word w{{}, sorted[i].second};
      for (char32_t cp : decoded[i]) w.syms.push_back(symbol_id.at(text::encode_utf8({&cp, 1})));
      words.push_back(std::move(w));
    }

    std::unordered_map<std::uint64_t, std::int64_t> pair_count;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> where;
    for (std::uint32_t wi = 0; wi < words.size(); ++wi) {
      const auto& w = words[wi];
      for (std::size_t i = 0; i + 1 < w.syms.size(); ++i) {
        const auto key = key_of(w.syms[i], w.syms[i + 1]);
        pair_count[key] += static_cast<std::int64_t>(w.freq);
        auto& list = where[key];
        if (list.empty() || list.back() != wi) list.push_back(wi);
      }
    }

    const auto better = [&symbols](const HeapEntry& a, const HeapEntry& b) {
      // priority_queue pops the "largest"; invert so the best pair is on top.
      if (a.count != b.count) return a.count < b.count;
      const int al = first_of(a.key), ar = second_of(a.key);
      const int bl = first_of(b.key), br = second_of(b.key);
      if (symbols[al] != symbols[bl]) return symbols[al] > symbols[bl];
      return symbols[ar] > symbols[br];
    };
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, decltype(better)> heap(better);
    for (const auto& [key, count] : pair_count) heap.push({count, key});

    std::vector<Merge> merges;
    std::unordered_set<std::string> in_vocab(symbols.begin(), symbols.end());
    std::vector<std::string> vocab = symbols;
    std::vector<std::uint32_t> stamp(words.size(), UINT32_MAX);

    while (vocab.size() < vocab_size_target && !heap.empty()) {
      const HeapEntry top = heap.top();
      heap.pop();
      const auto cur = pair_count.find(top.key);
      if (cur == pair_count.end() || cur->second != top.count) continue;  // stale
      if (top.count < 2) break;

      const int a = first_of(top.key);
      const int b = second_of(top.key);
      std::string merged = symbols[a] + symbols[b];
      merges.emplace_back(symbols[a], symbols[b]);
      int new_id;
      if (auto it = symbol_id.find(merged); it != symbol_id.end()) {
        new_id = it->second;
      } else {
        new_id = static_cast<int>(symbols.size());
        symbols.push_back(merged);
        symbol_id.emplace(merged, new_id);
      }
      if (in_vocab.insert(merged).second) vocab.push_back(merged);

      const auto round = static_cast<std::uint32_t>(merges.size());
      std::vector<std::uint64_t> touched;
      const auto affected = where[top.key];
      for (std::uint32_t wi : affected) {
        if (stamp[wi] == round) continue;
        stamp[wi] = round;
        Word& w = words[wi];
        std::vector<int> next;
        next.reserve(w.syms.size());
        bool changed = false;
        for (std::size_t i = 0; i < w.syms.size(); ++i) {
          if (i + 1 < w.syms.size() && w.syms[i] == a && w.syms[i + 1] == b) {
            next.push_back(new_id);
            ++i;
            changed = true;
          } else {
            next.push_back(w.syms[i]);
          }
        }
        if (!changed) continue;
        const auto delta = static_cast<std::int64_t>(w.freq);
        for (std::size_t i = 0; i + 1 < w.syms.size(); ++i) {
          const auto key = key_of(w.syms[i], w.syms[i + 1]);
          pair_count[key] -= delta;
          touched.push_back(key);
        }
        for (std::size_t i = 0; i + 1 < next.size(); ++i) {
          const auto key = key_of(next[i], next[i + 1]);
          pair_count[key] += delta;
          touched.push_back(key);
          auto& list = where[key];
          if (list.empty() || list.back() != wi) list.push_back(wi);
        }
        w.syms = std::move(next);
      }
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
      for (auto key : touched) {
        const auto c = pair_count[key];
        if (c <= 0) {
          pair_count.erase(key);
          where.erase(key);
        } else {
          heap.push({c, key});
        }
      }
    }
    return TokenizerModel(std::move(vocab), std::move(merges), rule_, vocab_size_target);
  }

 private:
  struct Word {
    std::vector<int> syms;
    std::uint64_t freq;
  };
  struct HeapEntry {
    std::int64_t count;
    std::uint64_t key;
  };
  static std::uint64_t key_of(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  }
  static int first_of(std::uint64_t key) { return static_cast<int>(key >> 32); }
  static int second_of(std::uint64_t key) { return static_cast<int>(key & 0xFFFFFFFFu); }

  Pretokenizer rule_;
  std::unordered_map<std::string, std::uint64_t> word_counts_;
};

template <std::ranges::input_range Lines>
TokenizerModel train_bpe(Lines&& lines, std::size_t vocab_size_target,
                         Pretokenizer rule = Pretokenizer::kWhitespace) {
  BpeTrainer trainer(rule);
  for (const auto& line : lines) trainer.add_line(line);
  return trainer.train(vocab_size_target);
}

// Streaming token/word counter behind fertility().
class FertilityCounter {
 public:
  explicit FertilityCounter(const TokenizerModel& model) : encoder_(model) {}

  void add_line(std::string_view line) {
    const auto stream = encoder_.encode(line);
    tokens_ += stream.size();
    words_ += stream.word_count();
  }

  std::uint64_t tokens() const { return tokens_; }
  std::uint64_t words() const { return words_; }

  double value() const {
    if (words_ == 0) throw Error("no words in corpus");
    return static_cast<double>(tokens_) / static_cast<double>(words_);
  }

 private:
  CachingEncoder encoder_;
  std::uint64_t tokens_ = 0;
  std::uint64_t words_ = 0;
};

// Subword tokens per pretoken over the whole corpus.
template <std::ranges::input_range Lines>
double fertility(const TokenizerModel& model, Lines&& lines) {
  FertilityCounter counter(model);
  for (const auto& line : lines) counter.add_line(line);
  return counter.value();
}

}  // namespace typometrics
