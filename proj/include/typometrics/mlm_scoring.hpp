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

// Pseudo-log-likelihood scoring and minimal-pair accuracy over an abstract
// masked-token scorer.

#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <fcntl.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "typometrics/bpe.hpp"
#include "typometrics/error.hpp"
#include "typometrics/text.hpp"

namespace typometrics {

// Natural-log probability of the true token at `position` given every other
// token. Implementations must be deterministic and safe for concurrent
// const calls.
class MaskedScorer {
 public:
  virtual ~MaskedScorer() = default;
  virtual double score(const TokenStream& tokens, std::size_t position) const = 0;
};

struct PseudoLikelihood {
  double pll = 0.0;  // nats
  std::size_t length = 0;

  double pseudo_perplexity() const { return std::exp(-pll / static_cast<double>(length)); }
};

inline PseudoLikelihood pseudo_log_likelihood(const MaskedScorer& scorer, const TokenStream& tokens) {
  if (tokens.empty()) throw Error("pseudo-log-likelihood of an empty token stream");
  PseudoLikelihood out{0.0, tokens.size()};
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double lp = scorer.score(tokens, i);
    if (!std::isfinite(lp) || lp > 0.0) {
      throw Error("scorer returned invalid log-probability " + text::format_double(lp) +
                  " at position " + std::to_string(i));
    }
    out.pll += lp;
  }
  return out;
}

struct MinimalPair {
  std::string id;
  std::string sentence_good;
  std::string sentence_bad;
  std::string phenomenon;
};

// TSV with header id, sentence_good, sentence_bad, phenomenon.
inline std::vector<MinimalPair> read_minimal_pairs(std::istream& in) {
  std::vector<MinimalPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view l = text::chomp(line);
    if (line_no == 1) {
      const auto h = text::split(l, '\t');
      if (h.size() != 4 || h[0] != "id" || h[1] != "sentence_good" || h[2] != "sentence_bad" ||
          h[3] != "phenomenon") {
        throw ParseError("expected header id<TAB>sentence_good<TAB>sentence_bad<TAB>phenomenon",
                         line_no);
      }
      continue;
    }
    if (text::trim(l).empty()) continue;
    const auto cells = text::split(l, '\t');
    if (cells.size() != 4) {
      throw ParseError("expected 4 tab-separated fields, found " + std::to_string(cells.size()),
                       line_no);
    }
    MinimalPair p{std::string(cells[0]), std::string(cells[1]), std::string(cells[2]),
                  std::string(cells[3])};
    if (p.sentence_good.empty() || p.sentence_bad.empty()) {
      throw ParseError("minimal pair with an empty sentence", line_no);
    }
    if (p.sentence_good == p.sentence_bad) {
      throw ParseError("minimal pair with identical sentences", line_no);
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

struct PairTally {
  std::size_t correct = 0;
  std::size_t ties = 0;
  std::size_t total = 0;

  // Ties count half.
  double accuracy() const {
    return total ? (static_cast<double>(correct) + 0.5 * static_cast<double>(ties)) /
                       static_cast<double>(total)
                 : 0.0;
  }
};

struct MinimalPairReport {
  PairTally overall;
  std::map<std::string, PairTally> by_phenomenon;

  double accuracy() const { return overall.accuracy(); }

  nlohmann::json to_json() const {
    const auto tally = [](const PairTally& t) {
      return nlohmann::json{{"accuracy", t.accuracy()},
                            {"correct", t.correct},
                            {"ties", t.ties},
                            {"total", t.total}};
    };
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [name, t] : by_phenomenon) per[name] = tally(t);
    return {{"overall", tally(overall)},
            {"phenomena", per},
            {"metadata",
             {{"decision", "PLL(good) > PLL(bad), strict"},
              {"ties", "count 0.5"},
              {"masking", "one token position at a time"}}}};
  }
};

inline MinimalPairReport minimal_pair_accuracy(const MaskedScorer& scorer,
                                               const TokenizerModel& model,
                                               const std::vector<MinimalPair>& pairs) {
  if (pairs.empty()) throw Error("no minimal pairs");
  MinimalPairReport report;
  for (const auto& p : pairs) {
    const auto good = model.encode(p.sentence_good);
    const auto bad = model.encode(p.sentence_bad);
    if (good.empty() || bad.empty()) {
      throw Error("minimal pair '" + p.id + "' tokenizes to an empty stream");
    }
    const double g = pseudo_log_likelihood(scorer, good).pll;
    const double b = pseudo_log_likelihood(scorer, bad).pll;
    for (PairTally* t : {&report.overall, &report.by_phenomenon[p.phenomenon]}) {
      ++t->total;
      if (g > b) {
        ++t->correct;
      } else if (g == b) {
        ++t->ties;
      }
    }
  }
  return report;
}

// Unigram scorer with add-one smoothing; position-blind by construction.
class BagOfWordsScorer final : public MaskedScorer {
 public:
  BagOfWordsScorer(const std::vector<TokenStream>& corpus, std::size_t vocab_size)
      : vocab_size_(vocab_size) {
    if (corpus.empty()) throw Error("bag-of-words scorer needs a nonempty corpus");
    for (const auto& s : corpus) {
      for (TokenId id : s.ids) ++counts_[id], ++total_;
    }
  }

  double score(const TokenStream& tokens, std::size_t position) const override {
    const auto it = counts_.find(tokens.ids.at(position));
    const double c = it == counts_.end() ? 0.0 : static_cast<double>(it->second);
    return std::log((c + 1.0) / static_cast<double>(total_ + vocab_size_));
  }

 private:
  std::size_t vocab_size_;
  std::uint64_t total_ = 0;
  std::unordered_map<TokenId, std::uint64_t> counts_;
};

// Left-context bigram scorer with add-one smoothing; position 0 is
// conditioned on a sentence-start marker. A toy stand-in for a real model.
class BigramScorer final : public MaskedScorer {
 public:
  BigramScorer(const std::vector<TokenStream>& corpus, std::size_t vocab_size)
      : vocab_size_(vocab_size) {
    for (const auto& s : corpus) {
      std::uint64_t prev = kStart;
      for (TokenId id : s.ids) {
        ++pair_[(prev << 32) | id];
        ++context_[prev];
        prev = id;
      }
    }
  }

  double score(const TokenStream& tokens, std::size_t position) const override {
    const std::uint64_t prev = position == 0 ? kStart : tokens.ids.at(position - 1);
    const std::uint64_t key = (prev << 32) | tokens.ids.at(position);
    const auto p = pair_.find(key);
    const auto c = context_.find(prev);
    const double num = (p == pair_.end() ? 0.0 : static_cast<double>(p->second)) + 1.0;
    const double den = (c == context_.end() ? 0.0 : static_cast<double>(c->second)) +
                       static_cast<double>(vocab_size_);
    return std::log(num / den);
  }

 private:
  static constexpr std::uint64_t kStart = 0xFFFFFFFFull;
  std::size_t vocab_size_;
  std::unordered_map<std::uint64_t, std::uint64_t> pair_;
  std::unordered_map<std::uint64_t, std::uint64_t> context_;
};

// Talks to an external process over newline-delimited JSON on its
// stdin/stdout: request {"tokens": [...], "position": i}, response
// {"logprob": x}. Queries are serialized.
class CommandScorer final : public MaskedScorer {
 public:
  explicit CommandScorer(const std::string& command) {
    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) throw Error("pipe() failed");
    pid_ = fork();
    if (pid_ < 0) throw Error("fork() failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    signal(SIGPIPE, SIG_IGN);
  }

  CommandScorer(const CommandScorer&) = delete;
  CommandScorer& operator=(const CommandScorer&) = delete;

  ~CommandScorer() override {
    if (write_fd_ >= 0) close(write_fd_);
    if (read_fd_ >= 0) close(read_fd_);
    if (pid_ > 0) {
      int status = 0;
      waitpid(pid_, &status, 0);
    }
  }

  double score(const TokenStream& tokens, std::size_t position) const override {
    std::lock_guard<std::mutex> lock(mu_);
    const std::string request =
        nlohmann::json{{"tokens", tokens.ids}, {"position", position}}.dump() + "\n";
    std::size_t off = 0;
    while (off < request.size()) {
      const ssize_t n = ::write(write_fd_, request.data() + off, request.size() - off);
      if (n <= 0) throw Error("remote scorer closed its input");
      off += static_cast<std::size_t>(n);
    }
    const std::string line = read_line();
    try {
      const auto j = nlohmann::json::parse(line);
      return j.at("logprob").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw Error("malformed remote scorer response '" + line + "': " + e.what());
    }
  }

 private:
  std::string read_line() const {
    while (true) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      char chunk[4096];
      const ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
      if (n <= 0) throw Error("remote scorer exited without a response");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  mutable std::mutex mu_;
  mutable std::string buffer_;
};

}  // namespace typometrics
