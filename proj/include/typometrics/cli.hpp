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

// Command-line front end. `run` never exits the process; it returns
// 0 on success or help, 1 on a usage error and 2 on a data error.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "typometrics/analysis.hpp"
#include "typometrics/bpe.hpp"
#include "typometrics/conllu.hpp"
#include "typometrics/corpus_metrics.hpp"
#include "typometrics/error.hpp"
#include "typometrics/manifest.hpp"
#include "typometrics/mlm_scoring.hpp"
#include "typometrics/reservoir.hpp"
#include "typometrics/text.hpp"
#include "typometrics/typo_sampling.hpp"
#include "typometrics/word_order.hpp"

#ifndef TYPOMETRICS_DATA_DIR
#define TYPOMETRICS_DATA_DIR "data"
#endif

namespace typometrics::cli {

namespace fs = std::filesystem;

// Raised for invalid combinations that CLI11 cannot express; maps to exit 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void with_input(const std::string& path, std::istream& stdin_stream,
                       const std::function<void(std::istream&)>& fn) {
  if (path.empty() || path == "-") {
    fn(stdin_stream);
    return;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  fn(in);
}

inline void for_each_line(const std::string& path, std::istream& stdin_stream,
                          const std::function<void(std::string_view)>& fn) {
  with_input(path, stdin_stream, [&](std::istream& in) {
    std::string line;
    while (std::getline(in, line)) fn(text::chomp(line));
  });
}

// A reservoir sample of `n` lines, or every line streamed straight through
// when n is 0.
inline void for_each_sampled_line(const std::string& path, std::istream& stdin_stream,
                                  std::size_t n, std::uint64_t seed,
                                  const std::function<void(std::string_view)>& fn) {
  if (n == 0) {
    for_each_line(path, stdin_stream, fn);
    return;
  }
  Reservoir<std::string> reservoir(n, seed);
  for_each_line(path, stdin_stream, [&](std::string_view l) { reservoir.offer(std::string(l)); });
  for (const auto& l : std::move(reservoir).take()) fn(l);
}

inline void write_output(const std::string& path, std::ostream& out, const std::string& content) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  f << content;
  if (!f) throw Error("write failed for '" + path + "'");
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// Independent stream per labelled task, all derived from the one seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  text::Fnv1a64 h;
  h.update(std::to_string(seed));
  h.update(":");
  h.update(label);
  return h.value();
}

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

inline std::map<std::string, std::string> collect_flags(const CLI::App& sub) {
  std::map<std::string, std::string> flags;
  for (const CLI::Option* o : sub.get_options()) {
    std::string name = o->get_name();
    if (name == "--help" || name == "--version") continue;
    while (!name.empty() && name.front() == '-') name.erase(0, 1);
    std::string value;
    if (o->count() > 0) {
      const auto& res = o->results();
      if (res.empty()) value = "true";
      for (std::size_t i = 0; i < res.size(); ++i) value += (i ? "," : "") + res[i];
    } else {
      value = o->get_default_str();
    }
    flags[name] = value;
  }
  return flags;
}

inline std::string subcommand_path(const CLI::App& app) {
  std::string path;
  const CLI::App* cur = &app;
  while (true) {
    const auto subs = cur->get_subcommands();
    if (subs.empty()) break;
    cur = subs.front();
    path += (path.empty() ? "" : " ") + cur->get_name();
  }
  return path;
}

inline const CLI::App& leaf_subcommand(const CLI::App& app) {
  const CLI::App* cur = &app;
  while (!cur->get_subcommands().empty()) cur = cur->get_subcommands().front();
  return *cur;
}

inline TokenizerModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model '" + path + "'");
  return TokenizerModel::load(in);
}

inline DepForest load_forest(const std::string& path, std::istream& stdin_stream,
                             std::ostream* diag) {
  ParseResult result;
  with_input(path, stdin_stream, [&](std::istream& in) { result = parse_conllu(in); });
  if (diag) {
    for (const auto& d : result.diagnostics) {
      *diag << path << ":" << d.line << ": dropped sentence (" << to_string(d.reason) << ")\n";
    }
  }
  return std::move(result.sentences);
}

inline std::vector<TokenId> parse_id_line(std::string_view line, std::size_t line_no) {
  std::vector<TokenId> ids;
  for (auto tok : text::split_whitespace(line)) {
    TokenId id = 0;
    if (!text::parse_int(tok, id)) {
      throw ParseError("invalid token id '" + std::string(tok) + "'", line_no);
    }
    ids.push_back(id);
  }
  return ids;
}

// Window metrics over pre-tokenized integer ids; fertility is undefined.
inline WindowMetricsReport id_stream_metrics(const std::vector<std::string>& lines,
                                             const WindowConfig& cfg, const WindowOptions& opts,
                                             unsigned threads, const std::string& language) {
  StreamingWindowMetrics windows(cfg, opts, threads);
  std::unordered_set<TokenId> types;
  std::size_t line_no = 0;
  for (const auto& l : lines) {
    for (TokenId id : parse_id_line(l, ++line_no)) {
      types.insert(id);
      windows.push(id);
    }
  }
  const std::uint64_t tokens = windows.token_count();
  if (tokens < cfg.window_size) throw ShortStreamError(tokens, cfg.window_size);
  const auto t = windows.finish();
  WindowMetricsReport r;
  r.language = language;
  r.config = cfg;
  r.side = opts.side;
  r.token_count = tokens;
  r.window_count = t.windows;
  r.mattr = static_cast<double>(t.distinct_sum) /
            (static_cast<double>(t.windows) * static_cast<double>(cfg.window_size));
  r.av = t.av_mean();
  r.eta_defined = t.eta_windows > 0;
  r.eta = t.eta_mean();
  r.ttr_global = static_cast<double>(types.size()) / static_cast<double>(tokens);
  return r;
}

inline std::unique_ptr<MaskedScorer> make_scorer(const std::string& spec,
                                                 const TokenizerModel& model,
                                                 std::istream& stdin_stream) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw UsageError("scorer must be bow:<corpus>, bigram:<corpus> or cmd:<command>");
  }
  const std::string kind = spec.substr(0, colon);
  const std::string arg = spec.substr(colon + 1);
  if (kind == "cmd") return std::make_unique<CommandScorer>(arg);
  if (kind != "bow" && kind != "bigram") throw UsageError("unknown scorer kind '" + kind + "'");
  std::vector<TokenStream> corpus;
  CachingEncoder enc(model);
  for_each_line(arg, stdin_stream, [&](std::string_view l) {
    auto s = enc.encode(l);
    if (!s.empty()) corpus.push_back(std::move(s));
  });
  // The unknown id is a possible outcome, hence vocab + 1.
  const std::size_t v = model.vocab_size() + 1;
  if (kind == "bow") return std::make_unique<BagOfWordsScorer>(corpus, v);
  return std::make_unique<BigramScorer>(corpus, v);
}

struct PipelineLanguage {
  std::string code;
  std::string corpus;
  std::string conllu;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out = "pipeline-out";
  std::size_t vocab_size = 1000;
  Pretokenizer pretokenizer = Pretokenizer::kWhitespace;
  std::size_t corpus_sample = 0;
  WindowConfig window;
  AccessorSide side = AccessorSide::kRight;
  std::size_t ud_sentences = 1000;
  bool ud_prefix = false;
  bool ud_root_only = false;
  std::size_t max_dependents = 5;
  std::string features;
  std::size_t k = 0;
  MaxSumMode mode = MaxSumMode::kGreedy;
  bool curve = false;
  std::vector<PipelineLanguage> languages;
};

inline PipelineConfig read_pipeline_config(const std::string& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.message(), e.line());
  }
  const fs::path base = fs::path(path).parent_path();
  const auto resolve = [&](const std::string& p) {
    if (p.empty()) return p;
    const fs::path q(p);
    return (q.is_absolute() ? q : base / q).lexically_normal().string();
  };
  const auto get = [&](const std::string& key) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '/'))) {
      return std::string(text::trim(*v));
    }
    return std::nullopt;
  };
  const auto get_uint = [&](const std::string& key, auto fallback) {
    using T = decltype(fallback);
    const auto v = get(key);
    if (!v) return fallback;
    T value{};
    if (!text::parse_int(*v, value)) {
      throw Error("config key '" + key + "' must be a non-negative integer, got '" + *v + "'");
    }
    return value;
  };
  const auto get_bool = [&](const std::string& key, bool fallback) {
    const auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw Error("config key '" + key + "' must be a boolean, got '" + *v + "'");
  };

  PipelineConfig c;
  c.seed = get_uint("run/seed", std::uint64_t{0});
  c.threads = get_uint("run/threads", 1u);
  if (const auto v = get("run/out")) c.out = resolve(*v);
  c.vocab_size = get_uint("tokenizer/vocab_size", c.vocab_size);
  if (const auto v = get("tokenizer/pretokenizer")) c.pretokenizer = parse_pretokenizer(*v);
  c.corpus_sample = get_uint("corpus/sample", c.corpus_sample);
  c.window.window_size = get_uint("corpus/window", c.window.window_size);
  c.window.step = get_uint("corpus/step", c.window.step);
  if (const auto v = get("corpus/accessor")) {
    if (*v == "left") {
      c.side = AccessorSide::kLeft;
    } else if (*v != "right") {
      throw Error("config key 'corpus/accessor' must be left or right");
    }
  }
  c.ud_sentences = get_uint("ud/sentences", c.ud_sentences);
  c.ud_prefix = get_bool("ud/prefix", c.ud_prefix);
  c.ud_root_only = get_bool("ud/root_only", c.ud_root_only);
  c.max_dependents = get_uint("ud/max_deps", c.max_dependents);
  if (const auto v = get("sampling/features")) c.features = resolve(*v);
  c.k = get_uint("sampling/k", c.k);
  if (const auto v = get("sampling/mode")) c.mode = parse_maxsum_mode(*v);
  c.curve = get_bool("sampling/curve", c.curve);

  for (const auto& [section, body] : tree) {
    constexpr std::string_view kPrefix = "language:";
    if (section.rfind(kPrefix, 0) != 0) continue;
    PipelineLanguage lang;
    lang.code = section.substr(kPrefix.size());
    if (lang.code.empty()) throw Error("empty language code in section [" + section + "]");
    lang.corpus = resolve(std::string(text::trim(body.get<std::string>("corpus", ""))));
    lang.conllu = resolve(std::string(text::trim(body.get<std::string>("conllu", ""))));
    if (lang.corpus.empty() && lang.conllu.empty()) {
      throw Error("language '" + lang.code + "' has neither corpus nor conllu");
    }
    c.languages.push_back(std::move(lang));
  }
  if (c.languages.empty()) throw Error("config declares no [language:<code>] sections");
  std::sort(c.languages.begin(), c.languages.end(),
            [](const auto& a, const auto& b) { return a.code < b.code; });
  return c;
}

inline std::string pipeline_csv_header() {
  return "language,mattr,av,eta,ttr,fertility,hde,roe,so_roe,window_size,step,tokens,sentences";
}

inline std::string pipeline_csv_row(const std::string& code,
                                    const std::optional<WindowMetricsReport>& corpus,
                                    const std::optional<WordOrderReport>& ud) {
  using text::format_double;
  const auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  std::string row = code + ",";
  if (corpus) {
    row += format_double(corpus->mattr) + "," + format_double(corpus->av) + "," +
           (corpus->eta_defined ? format_double(corpus->eta) : std::string()) + "," +
           format_double(corpus->ttr_global) + "," + opt(corpus->fertility) + ",";
  } else {
    row += ",,,,,";
  }
  if (ud) {
    row += opt(ud->hde) + "," + opt(ud->roe) + "," + opt(ud->so_roe) + ",";
  } else {
    row += ",,,";
  }
  if (corpus) {
    row += std::to_string(corpus->config.window_size) + "," +
           std::to_string(corpus->config.step) + "," + std::to_string(corpus->token_count);
  } else {
    row += ",,";
  }
  row += "," + (ud ? std::to_string(ud->sentence_count) : std::string());
  return row;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
               std::ostream& err) {
  using namespace detail;
  const auto started = std::chrono::steady_clock::now();

  CLI::App app{"Corpus and treebank complexity metrics, typological sampling and analysis",
               "typometrics"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(TYPOMETRICS_VERSION));
  app.failure_message(CLI::FailureMessage::help);

  // tokenizer
  auto* tok = app.add_subcommand("tokenizer", "Train or apply a BPE tokenizer");
  tok->require_subcommand(1);
  struct {
    std::string input = "-", out, pretokenizer = "whitespace";
    std::size_t vocab_size = 0, sample = 0;
    std::uint64_t seed = 0;
  } train_o;
  auto* tok_train = tok->add_subcommand("train", "Train a tokenizer on raw text lines");
  tok_train->add_option("--input", train_o.input, "Corpus file, one sentence per line (- = stdin)");
  tok_train->add_option("--vocab-size", train_o.vocab_size, "Target vocabulary size")->required();
  tok_train->add_option("--out", train_o.out, "Model JSON path")->required();
  tok_train->add_option("--pretokenizer", train_o.pretokenizer, "whitespace | whitespace+punct-split");
  tok_train->add_option("--sample", train_o.sample, "Reservoir-sample this many lines (0 = all)");
  tok_train->add_option("--seed", train_o.seed, "Sampling seed");

  struct {
    std::string model, input = "-";
    bool ids = false;
  } enc_o;
  auto* tok_enc = tok->add_subcommand("encode", "Tokenize lines from stdin or a file");
  tok_enc->add_option("--model", enc_o.model, "Model JSON")->required();
  tok_enc->add_option("--input", enc_o.input, "Input text (- = stdin)");
  tok_enc->add_flag("--ids", enc_o.ids, "Print token ids instead of token strings");

  // metrics
  auto* met = app.add_subcommand("metrics", "Corpus or treebank metrics");
  met->require_subcommand(1);
  struct {
    std::string model, input = "-", language = "unk";
    std::size_t sample = 0, window = 1000, step = 1;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    bool csv = false, ids = false, left = false;
    std::optional<TokenId> unknown_id;
  } corp_o;
  auto* met_corpus = met->add_subcommand("corpus", "MATTR, accessor variety and efficiency");
  met_corpus->add_option("--model", corp_o.model, "Tokenizer model JSON");
  met_corpus->add_option("--input", corp_o.input, "Corpus lines (- = stdin)");
  met_corpus->add_option("--sample", corp_o.sample, "Reservoir-sample this many lines (0 = all)");
  met_corpus->add_option("--window", corp_o.window, "Window size in tokens")->check(CLI::PositiveNumber);
  met_corpus->add_option("--step", corp_o.step, "Window step")->check(CLI::PositiveNumber);
  met_corpus->add_option("--seed", corp_o.seed, "Sampling seed");
  met_corpus->add_option("--language", corp_o.language, "Language label for the report");
  met_corpus->add_option("--threads", corp_o.threads, "Worker threads (0 = all cores)");
  met_corpus->add_flag("--csv", corp_o.csv, "CSV instead of JSON");
  met_corpus->add_flag("--ids", corp_o.ids, "Input lines hold whitespace-separated token ids");
  met_corpus->add_option("--unknown-id", corp_o.unknown_id,
                         "With --ids, id excluded from successor statistics");
  met_corpus->add_flag("--left-accessor", corp_o.left, "Count left neighbours instead of right");

  struct {
    std::string conllu = "-", language = "unk";
    std::size_t sentences = 1000, max_deps = 5;
    std::uint64_t seed = 0;
    bool prefix = false, root_only = false, csv = false;
  } ud_o;
  auto* met_ud = met->add_subcommand("ud", "HDE, ROE and SO-ROE over a CoNLL-U treebank");
  met_ud->add_option("--conllu", ud_o.conllu, "CoNLL-U file (- = stdin)");
  met_ud->add_option("--sentences", ud_o.sentences, "Sentence budget (0 = all)");
  met_ud->add_option("--seed", ud_o.seed, "Sentence sampling seed");
  met_ud->add_option("--language", ud_o.language, "Language label for the report");
  met_ud->add_flag("--prefix", ud_o.prefix, "Take the first sentences instead of sampling");
  met_ud->add_flag("--root-only", ud_o.root_only, "SO-ROE only on root predicates");
  met_ud->add_option("--max-deps", ud_o.max_deps, "Skip heads with more dependents in ROE");
  met_ud->add_flag("--csv", ud_o.csv, "CSV instead of JSON");

  // parse
  struct {
    std::string conllu = "-";
    bool stats = false;
  } parse_o;
  auto* parse = app.add_subcommand("parse", "Validate a CoNLL-U file and re-emit kept sentences");
  parse->add_option("--conllu", parse_o.conllu, "CoNLL-U file (- = stdin)");
  parse->add_flag("--stats", parse_o.stats, "Print a JSON summary instead of the sentences");

  // sample
  struct {
    std::string features, mode = "greedy", curve_csv;
    std::size_t k = 0;
    bool curve = false, csv = false;
  } samp_o;
  auto* samp = app.add_subcommand("sample", "MaxSum language sampling and sample quality");
  samp->add_option("--features", samp_o.features, "Feature matrix CSV")->required();
  samp->add_option("--k", samp_o.k, "Sample size")->required();
  samp->add_option("--mode", samp_o.mode, "exact | greedy");
  samp->add_flag("--curve", samp_o.curve, "Report quality for every size 2..k");
  samp->add_option("--curve-csv", samp_o.curve_csv, "Also write the curve as CSV to this path");
  samp->add_flag("--csv", samp_o.csv, "CSV instead of JSON");

  // blimp
  struct {
    std::string model, pairs, scorer;
  } blimp_o;
  auto* blimp = app.add_subcommand("blimp", "Minimal-pair accuracy under pseudo-log-likelihood");
  blimp->add_option("--model", blimp_o.model, "Tokenizer model JSON")->required();
  blimp->add_option("--pairs", blimp_o.pairs, "Minimal pairs TSV")->required();
  blimp->add_option("--scorer", blimp_o.scorer,
                    "bow:<corpus> | bigram:<corpus> | cmd:<shell command>")
      ->required();

  // correlate / scatter
  const std::string data_dir = TYPOMETRICS_DATA_DIR;
  struct {
    std::string metrics, perf, spec;
    bool permutation = false, csv = false;
    std::uint64_t seed = 0;
  } corr_o;
  corr_o.metrics = data_dir + "/reference/language_metrics.csv";
  corr_o.perf = data_dir + "/reference/downstream_scores.csv";
  auto* corr = app.add_subcommand("correlate", "Spearman correlation of metrics with performance");
  corr->add_option("--metrics", corr_o.metrics, "Metric table CSV");
  corr->add_option("--perf", corr_o.perf, "Performance table CSV");
  corr->add_option("--spec", corr_o.spec, "metric,task,contrast CSV (default: full grid)");
  corr->add_flag("--permutation", corr_o.permutation, "Add permutation-test p-values");
  corr->add_option("--seed", corr_o.seed, "Permutation seed");
  corr->add_flag("--csv", corr_o.csv, "CSV instead of JSON");

  struct {
    std::string metrics, perf, metric, task, out = "-";
  } scat_o;
  scat_o.metrics = corr_o.metrics;
  scat_o.perf = corr_o.perf;
  auto* scat = app.add_subcommand("scatter", "Long-form scatter rows for one metric and task");
  scat->add_option("--metric", scat_o.metric, "Metric column")->required();
  scat->add_option("--task", scat_o.task, "Downstream task")->required();
  scat->add_option("--metrics", scat_o.metrics, "Metric table CSV");
  scat->add_option("--perf", scat_o.perf, "Performance table CSV");
  scat->add_option("--out", scat_o.out, "Output CSV (- = stdout)");

  // pipeline
  struct {
    std::string config, out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
  } pipe_o;
  auto* pipe = app.add_subcommand("pipeline", "Run the full metric pipeline from a config file");
  pipe->add_option("--config", pipe_o.config, "INI-style config")->required();
  pipe->add_option("--seed", pipe_o.seed, "Override [run] seed");
  pipe->add_option("--threads", pipe_o.threads, "Override [run] threads");
  pipe->add_option("--out", pipe_o.out, "Override [run] out directory");

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("typometrics");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  RunManifest manifest;
  manifest.subcommand = subcommand_path(app);
  manifest.flags = collect_flags(leaf_subcommand(app));
  const auto finish_manifest = [&] {
    manifest.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };
  const auto with_manifest = [&](nlohmann::json j) {
    j["manifest"] = manifest.to_json();
    return dump(j);
  };

  try {
    if (*tok_train) {
      manifest.seed = train_o.seed;
      manifest.add_input(train_o.input);
      BpeTrainer trainer(parse_pretokenizer(train_o.pretokenizer));
      for_each_sampled_line(train_o.input, in, train_o.sample, train_o.seed,
                            [&](std::string_view l) { trainer.add_line(l); });
      const auto model = trainer.train(train_o.vocab_size);
      write_output(train_o.out, out, model.serialize());
      finish_manifest();
      if (train_o.out != "-") {
        write_output(train_o.out + ".manifest.json", out, dump(manifest.to_json(true)));
      }
      err << "trained " << model.vocab_size() << " types, " << model.merges().size()
          << " merges\n";
    } else if (*tok_enc) {
      const auto model = load_model(enc_o.model);
      CachingEncoder enc(model);
      for_each_line(enc_o.input, in, [&](std::string_view l) {
        const auto s = enc.encode(l);
        for (std::size_t i = 0; i < s.size(); ++i) {
          if (i) out << ' ';
          if (enc_o.ids) {
            out << s.ids[i];
          } else {
            out << (s.ids[i] == model.unknown_id() ? std::string("\xEF\xBF\xBD")
                                                   : model.token(s.ids[i]));
          }
        }
        out << '\n';
      });
    } else if (*met_corpus) {
      manifest.seed = corp_o.seed;
      manifest.add_input(corp_o.input);
      const WindowConfig cfg{corp_o.window, corp_o.step};
      cfg.validate();
      const AccessorSide side = corp_o.left ? AccessorSide::kLeft : AccessorSide::kRight;
      const unsigned threads = resolve_threads(corp_o.threads);
      WindowMetricsReport report;
      if (corp_o.ids) {
        if (!corp_o.model.empty()) throw UsageError("--ids and --model are mutually exclusive");
        std::vector<std::string> lines;
        for_each_sampled_line(corp_o.input, in, corp_o.sample, corp_o.seed,
                              [&](std::string_view l) { lines.emplace_back(l); });
        report = id_stream_metrics(lines, cfg, WindowOptions{side, corp_o.unknown_id}, threads,
                                   corp_o.language);
      } else {
        if (corp_o.model.empty()) throw UsageError("--model is required unless --ids is given");
        if (corp_o.unknown_id) throw UsageError("--unknown-id only applies with --ids");
        manifest.add_input(corp_o.model);
        const auto model = load_model(corp_o.model);
        CorpusMetricsPass pass(model, cfg, side, threads);
        for_each_sampled_line(corp_o.input, in, corp_o.sample, corp_o.seed,
                              [&](std::string_view l) { pass.add_line(l); });
        report = pass.finish(corp_o.language);
      }
      if (corp_o.csv) {
        out << WindowMetricsReport::csv_header() << '\n' << report.csv_row() << '\n';
      } else {
        out << with_manifest(report.to_json());
      }
    } else if (*met_ud) {
      manifest.seed = ud_o.seed;
      manifest.add_input(ud_o.conllu);
      auto forest = load_forest(ud_o.conllu, in, &err);
      if (ud_o.sentences > 0) {
        forest = ud_o.prefix ? take_prefix(forest, ud_o.sentences)
                             : take_sentences(forest, ud_o.sentences, ud_o.seed);
      }
      if (forest.empty()) throw Error("no usable sentences in '" + ud_o.conllu + "'");
      const auto report = word_order_report(forest, {ud_o.max_deps, ud_o.root_only});
      if (ud_o.csv) {
        out << WordOrderReport::csv_header() << '\n' << report.csv_row(ud_o.language) << '\n';
      } else {
        auto j = report.to_json();
        j["language"] = ud_o.language;
        out << with_manifest(j);
      }
    } else if (*parse) {
      manifest.add_input(parse_o.conllu);
      ParseResult result;
      with_input(parse_o.conllu, in, [&](std::istream& s) { result = parse_conllu(s); });
      for (const auto& d : result.diagnostics) {
        err << parse_o.conllu << ":" << d.line << ": dropped sentence (" << to_string(d.reason)
            << ")\n";
      }
      if (parse_o.stats) {
        std::size_t tokens = 0;
        for (const auto& s : result.sentences) tokens += s.size();
        out << with_manifest({{"sentences", result.sentences.size()},
                              {"tokens", tokens},
                              {"dropped", result.dropped},
                              {"drop_reasons", result.drop_counts()},
                              {"skipped_ranges", result.skipped_ranges},
                              {"skipped_empty_nodes", result.skipped_empty_nodes}});
      } else {
        for (const auto& s : result.sentences) write_conllu(out, s);
      }
    } else if (*samp) {
      manifest.add_input(samp_o.features);
      FeatureMatrix m = [&] {
        std::ifstream f(samp_o.features, std::ios::binary);
        if (!f) throw Error("cannot open '" + samp_o.features + "'");
        return FeatureMatrix::read_csv(f);
      }();
      const auto mode = parse_maxsum_mode(samp_o.mode);
      std::vector<SampleQualityReport> rows;
      if (samp_o.curve || !samp_o.curve_csv.empty()) {
        rows = saturation_curve(m, samp_o.k, mode);
      } else {
        rows.push_back(quality(m, select_maxsum(m, samp_o.k, mode)));
      }
      std::string csv = SampleQualityReport::csv_header() + "\n";
      for (const auto& r : rows) csv += r.csv_row() + "\n";
      if (!samp_o.curve_csv.empty()) write_output(samp_o.curve_csv, out, csv);
      if (samp_o.csv) {
        out << csv;
      } else {
        nlohmann::json j{{"mode", samp_o.mode}, {"k", samp_o.k}};
        if (samp_o.curve || !samp_o.curve_csv.empty()) {
          j["curve"] = nlohmann::json::array();
          for (const auto& r : rows) j["curve"].push_back(r.to_json());
        } else {
          j["result"] = rows.front().to_json();
        }
        out << with_manifest(j);
      }
    } else if (*blimp) {
      manifest.add_input(blimp_o.model);
      manifest.add_input(blimp_o.pairs);
      const auto model = load_model(blimp_o.model);
      std::vector<MinimalPair> pairs;
      with_input(blimp_o.pairs, in, [&](std::istream& s) { pairs = read_minimal_pairs(s); });
      const auto scorer = make_scorer(blimp_o.scorer, model, in);
      out << with_manifest(minimal_pair_accuracy(*scorer, model, pairs).to_json());
    } else if (*corr) {
      manifest.seed = corr_o.seed;
      manifest.add_input(corr_o.metrics);
      manifest.add_input(corr_o.perf);
      MetricTable metrics;
      PerformanceTable perf;
      with_input(corr_o.metrics, in, [&](std::istream& s) { metrics = MetricTable::read_csv(s); });
      with_input(corr_o.perf, in, [&](std::istream& s) { perf = PerformanceTable::read_csv(s); });
      std::vector<CorrelationSpec> specs = default_correlation_grid();
      if (!corr_o.spec.empty()) {
        manifest.add_input(corr_o.spec);
        with_input(corr_o.spec, in, [&](std::istream& s) { specs = read_correlation_specs(s); });
      }
      const auto reports =
          correlate_metrics(metrics, perf, specs, {corr_o.permutation, corr_o.seed});
      if (corr_o.csv) {
        out << CorrelationReport::csv_header() << '\n';
        for (const auto& r : reports) out << r.csv_row() << '\n';
      } else {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : reports) arr.push_back(r.to_json());
        out << with_manifest({{"correlations", arr}});
      }
    } else if (*scat) {
      MetricTable metrics;
      PerformanceTable perf;
      with_input(scat_o.metrics, in, [&](std::istream& s) { metrics = MetricTable::read_csv(s); });
      with_input(scat_o.perf, in, [&](std::istream& s) { perf = PerformanceTable::read_csv(s); });
      std::ostringstream csv;
      write_scatter_csv(csv, emit_scatter(metrics, perf, scat_o.metric, scat_o.task));
      write_output(scat_o.out, out, csv.str());
      if (scat_o.out != "-") {
        manifest.add_input(scat_o.metrics);
        manifest.add_input(scat_o.perf);
        finish_manifest();
        write_output(scat_o.out + ".manifest.json", out, dump(manifest.to_json(true)));
      }
    } else if (*pipe) {
      auto cfg = read_pipeline_config(pipe_o.config);
      if (pipe_o.seed) cfg.seed = *pipe_o.seed;
      if (pipe_o.threads) cfg.threads = *pipe_o.threads;
      if (!pipe_o.out.empty()) cfg.out = pipe_o.out;
      cfg.window.validate();
      manifest.seed = cfg.seed;
      manifest.flags["seed"] = std::to_string(cfg.seed);
      manifest.flags["threads"] = std::to_string(cfg.threads);
      manifest.flags["out"] = cfg.out;
      manifest.add_input(pipe_o.config);
      const unsigned threads = resolve_threads(cfg.threads);
      const fs::path out_dir(cfg.out);
      fs::create_directories(out_dir);

      std::string csv = pipeline_csv_header() + "\n";
      nlohmann::json langs = nlohmann::json::array();
      for (const auto& lang : cfg.languages) {
        std::optional<WindowMetricsReport> corpus;
        std::optional<WordOrderReport> ud;
        nlohmann::json entry{{"language", lang.code}};
        if (!lang.corpus.empty()) {
          manifest.add_input(lang.corpus);
          const std::uint64_t seed = derive_seed(cfg.seed, "corpus:" + lang.code);
          // Two streaming passes over the same sample: train, then measure.
          std::vector<std::string> sample;
          const bool sampled = cfg.corpus_sample > 0;
          BpeTrainer trainer(cfg.pretokenizer);
          for_each_sampled_line(lang.corpus, in, cfg.corpus_sample, seed, [&](std::string_view l) {
            trainer.add_line(l);
            if (sampled) sample.emplace_back(l);
          });
          const auto model = trainer.train(cfg.vocab_size);
          write_output((out_dir / ("tokenizer-" + lang.code + ".json")).string(), out,
                       model.serialize());
          CorpusMetricsPass pass(model, cfg.window, cfg.side, threads);
          if (sampled) {
            for (const auto& l : sample) pass.add_line(l);
          } else {
            for_each_line(lang.corpus, in, [&](std::string_view l) { pass.add_line(l); });
          }
          corpus = pass.finish(lang.code);
          entry["corpus"] = corpus->to_json();
          entry["tokenizer"] = {{"vocab_size", model.vocab_size()},
                                {"merges", model.merges().size()}};
        }
        if (!lang.conllu.empty()) {
          manifest.add_input(lang.conllu);
          auto forest = load_forest(lang.conllu, in, &err);
          if (cfg.ud_sentences > 0) {
            forest = cfg.ud_prefix
                         ? take_prefix(forest, cfg.ud_sentences)
                         : take_sentences(forest, cfg.ud_sentences,
                                          derive_seed(cfg.seed, "ud:" + lang.code));
          }
          if (forest.empty()) throw Error("no usable sentences in '" + lang.conllu + "'");
          ud = word_order_report(forest, {cfg.max_dependents, cfg.ud_root_only});
          entry["ud"] = ud->to_json();
        }
        csv += pipeline_csv_row(lang.code, corpus, ud) + "\n";
        langs.push_back(entry);
      }
      write_output((out_dir / "metrics.csv").string(), out, csv);
      nlohmann::json result{{"languages", langs}};

      if (!cfg.features.empty()) {
        if (cfg.k < 2) throw Error("config key 'sampling/k' must be at least 2");
        manifest.add_input(cfg.features);
        std::ifstream f(cfg.features, std::ios::binary);
        if (!f) throw Error("cannot open '" + cfg.features + "'");
        const auto m = FeatureMatrix::read_csv(f);
        const auto best = quality(m, select_maxsum(m, cfg.k, cfg.mode));
        result["sample"] = best.to_json();
        write_output((out_dir / "sample.json").string(), out,
                     with_manifest({{"result", best.to_json()}}));
        if (cfg.curve) {
          std::string curve = SampleQualityReport::csv_header() + "\n";
          for (const auto& r : saturation_curve(m, cfg.k, cfg.mode)) curve += r.csv_row() + "\n";
          write_output((out_dir / "saturation.csv").string(), out, curve);
        }
      }
      write_output((out_dir / "metrics.json").string(), out, with_manifest(result));
      finish_manifest();
      write_output((out_dir / "manifest.json").string(), out, dump(manifest.to_json(true)));
      err << "wrote " << (out_dir / "metrics.csv").string() << '\n';
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace typometrics::cli
