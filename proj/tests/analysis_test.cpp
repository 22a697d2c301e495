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

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "typometrics/analysis.hpp"

namespace tym = typometrics;

namespace {

const std::string kRef = std::string(TYPOMETRICS_DATA_DIR) + "/reference/";

tym::MetricTable reference_metrics() {
  std::ifstream in(kRef + "language_metrics.csv");
  return tym::MetricTable::read_csv(in);
}

tym::PerformanceTable reference_scores() {
  std::ifstream in(kRef + "downstream_scores.csv");
  return tym::PerformanceTable::read_csv(in);
}

tym::PerformanceTable two_cells(double base, double abl) {
  tym::PerformanceTable t;
  t.set("xx", "ud", "relative", {base, {}});
  t.set("xx", "ud", "no-pos", {abl, {}});
  return t;
}

std::vector<std::string> lang_codes(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("l" + std::to_string(100 + i));
  return out;
}

}  // namespace

TEST(RelativeDrop, Examples) {
  EXPECT_DOUBLE_EQ(tym::relative_drop(two_cells(0.8, 0.6), "xx", "ud", "relative", "no-pos"), 0.25);
  EXPECT_EQ(tym::relative_drop(two_cells(0.8, 0.8), "xx", "ud", "relative", "no-pos"), 0.0);
  EXPECT_THROW(tym::relative_drop(two_cells(0.0, 0.5), "xx", "ud", "relative", "no-pos"),
               tym::Error);
  EXPECT_THROW(tym::relative_drop(two_cells(0.8, 0.6), "xx", "ud", "relative", "absolute"),
               tym::Error);
  EXPECT_THROW(tym::relative_drop(two_cells(0.8, 0.6), "yy", "ud", "relative", "no-pos"),
               tym::Error);
}

TEST(RelativeDrop, EnglishUdReference) {
  const auto perf = reference_scores();
  EXPECT_EQ(perf.get("eng", "ud", "relative")->score, 86.61);
  EXPECT_EQ(perf.get("eng", "ud", "no-pos")->score, 13.87);
  const double d = tym::relative_drop(perf, "eng", "ud", "relative", "no-pos");
  EXPECT_NEAR(d, 0.840, 0.0005);
  EXPECT_NEAR(d, 0.8398, 1e-4);
}

TEST(RelativeDrop, ScaleFree) {
  std::mt19937_64 rng(601);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double b = u(rng), a = u(rng), c = std::ldexp(1.0, static_cast<int>(rng() % 20) - 10);
    const double d1 = tym::relative_drop(two_cells(b, a), "xx", "ud", "relative", "no-pos");
    const double d2 = tym::relative_drop(two_cells(b * c, a * c), "xx", "ud", "relative", "no-pos");
    EXPECT_EQ(d1, d2);
    const double k = u(rng);
    const double d3 = tym::relative_drop(two_cells(b * k, a * k), "xx", "ud", "relative", "no-pos");
    EXPECT_NEAR(d1, d3, 1e-12 * std::max(1.0, std::abs(d1)));
  }
}

TEST(Spearman, Examples) {
  EXPECT_DOUBLE_EQ(*tym::spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0);
  EXPECT_DOUBLE_EQ(*tym::spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
  EXPECT_NEAR(*tym::spearman({1, 2, 3, 4}, {1, 3, 2, 4}), 0.8, 1e-15);
  EXPECT_FALSE(tym::spearman({1, 1, 1}, {1, 2, 3}));
  EXPECT_THROW(tym::spearman({1, 2, 3}, {1, 2}), tym::Error);
  EXPECT_THROW(tym::spearman({1, 2}, {1, 2}), tym::Error);
}

TEST(Spearman, AverageRanks) {
  EXPECT_EQ(tym::average_ranks({10, 20, 20, 5}), (std::vector<double>{2, 3.5, 3.5, 1}));
}

TEST(Spearman, MatchesOracle) {
  std::mt19937_64 rng(602);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 3 + rng() % 20;
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = static_cast<double>(rng() % 6);
    for (auto& v : y) v = static_cast<double>(rng() % 50) / 7.0;
    const auto got = tym::spearman(x, y);
    const auto want = tmtest::naive_spearman(x, y);
    ASSERT_EQ(got.has_value(), want.has_value());
    if (got) {
      ASSERT_NEAR(*got, *want, 1e-12);
    }
  }
}

TEST(Spearman, MonotoneInvariance) {
  std::mt19937_64 rng(603);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 3 + rng() % 15;
    std::vector<double> x(n), y(n), fx(n), fy(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::round(g(rng) * 3);
      y[i] = g(rng);
      fx[i] = std::exp(x[i]) + 5;
      fy[i] = -std::pow(y[i], 3);
    }
    const auto a = tym::spearman(x, y);
    const auto b = tym::spearman(fx, fy);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (a) {
      EXPECT_NEAR(*a, -*b, 1e-12);
    }
  }
}

TEST(PermutationTest, ExactForSmallSamples) {
  // Perfect ordering over 5 items: only the identity and its reverse reach |rho| = 1.
  const auto p = tym::spearman_permutation_p({1, 2, 3, 4, 5}, {2, 4, 6, 8, 10}, 1);
  EXPECT_DOUBLE_EQ(*p, 2.0 / 120.0);
  EXPECT_FALSE(tym::spearman_permutation_p({1, 1, 1}, {1, 2, 3}, 1));
  std::vector<double> x(12), y(12);
  for (int i = 0; i < 12; ++i) x[i] = i, y[i] = (i * 7) % 12;
  const auto a = tym::spearman_permutation_p(x, y, 5, 2000);
  EXPECT_EQ(a, tym::spearman_permutation_p(x, y, 5, 2000));
  EXPECT_GE(*a, 0.0);
  EXPECT_LE(*a, 1.0);
}

TEST(Correlate, ConstantInputsUndefined) {
  tym::MetricTable m;
  tym::PerformanceTable p;
  for (const auto& l : lang_codes(5)) {
    m.set(l, "mattr", 0.5);
    p.set(l, "ud", "relative", {80, {}});
    p.set(l, "ud", "no-pos", {40, {}});
  }
  const auto r = tym::correlate_one(m, p, {"mattr", "ud", tym::Contrast::parse("relative-vs-no-pos")});
  EXPECT_FALSE(r.defined());
  EXPECT_EQ(r.n, 5u);
  EXPECT_EQ(r.csv_row(), "mattr,ud,relative-vs-no-pos,5,0,undefined,undefined,");
  EXPECT_EQ(r.to_json().at("undefined"), true);
}

TEST(Correlate, MonotoneDropGivesOne) {
  std::mt19937_64 rng(604);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  tym::MetricTable m;
  tym::PerformanceTable p;
  for (const auto& l : lang_codes(9)) {
    const double mattr = u(rng);
    m.set(l, "mattr", mattr);
    // Relative drop equals mattr, so the drops are 2*mattr up to scale.
    p.set(l, "ud", "relative", {100.0, {}});
    p.set(l, "ud", "no-pos", {100.0 * (1 - mattr), {}});
  }
  const auto r = tym::correlate_one(m, p, {"mattr", "ud", tym::Contrast::parse("relative-vs-no-pos")});
  EXPECT_NEAR(*r.spearman_rho, 1.0, 1e-15);
  tym::MetricTable doubled;
  for (const auto& l : lang_codes(9)) doubled.set(l, "drop2", 2 * *m.get(l, "mattr"));
  for (const auto& l : lang_codes(9)) doubled.set(l, "mattr", *m.get(l, "mattr"));
  const auto r2 = tym::correlate_one(doubled, p, {"drop2", "ud", tym::Contrast::parse("relative-vs-no-pos")});
  EXPECT_NEAR(*r2.spearman_rho, 1.0, 1e-15);
}

TEST(Correlate, DroppedLanguageCompositionality) {
  std::mt19937_64 rng(605);
  std::uniform_real_distribution<double> u(1, 100);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 4 + rng() % 10;
    const auto langs = lang_codes(k);
    const std::size_t missing = rng() % k;
    tym::MetricTable m;
    tym::PerformanceTable p;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < k; ++i) {
      const double x = std::round(u(rng)), base = u(rng) + 100, abl = u(rng);
      m.set(langs[i], "av", x);
      p.set(langs[i], "wikiann", "relative", {base, {}});
      if (i == missing) continue;
      p.set(langs[i], "wikiann", "no-pos", {abl, {}});
      xs.push_back(x);
      ys.push_back((base - abl) / base);
    }
    const auto r = tym::correlate_one(m, p, {"av", "wikiann", tym::Contrast::parse("relative-vs-no-pos")});
    EXPECT_EQ(r.dropped, 1u);
    EXPECT_EQ(r.n, k - 1);
    EXPECT_EQ(r.spearman_rho, tym::spearman(xs, ys));
  }
}

TEST(Correlate, TooFewLanguages) {
  tym::MetricTable m;
  tym::PerformanceTable p;
  for (const auto& l : lang_codes(2)) {
    m.set(l, "av", 1);
    p.set(l, "ud", "no-pos", {1, {}});
  }
  EXPECT_THROW(tym::correlate_one(m, p, {"av", "ud", tym::Contrast::parse("no-pos")}), tym::Error);
}

TEST(Correlate, ReferenceTablesMattrUd) {
  const auto r = tym::correlate_one(reference_metrics(), reference_scores(),
                                    {"mattr", "ud", tym::Contrast::parse("relative-vs-no-pos")});
  EXPECT_EQ(r.n, 7u);
  EXPECT_EQ(r.dropped, 0u);
  ASSERT_TRUE(r.spearman_rho);
  EXPECT_TRUE(std::isfinite(*r.spearman_rho));
  EXPECT_EQ(r.to_json().at("scatter").size(), 7u);
}

TEST(Correlate, DefaultGridOnReferenceTables) {
  const auto reports = tym::correlate_metrics(reference_metrics(), reference_scores(),
                                              tym::default_correlation_grid());
  EXPECT_EQ(reports.size(), 20u);
  for (const auto& r : reports) {
    EXPECT_EQ(r.n, 7u) << r.metric << "/" << r.task;
    EXPECT_TRUE(r.defined());
  }
}

TEST(Correlate, SpecParsing) {
  std::istringstream in("metric,task,contrast\nav,ud,relative-vs-no-pos\nhde,sib200,absolute\n");
  const auto specs = tym::read_correlation_specs(in);
  ASSERT_EQ(specs.size(), 2u);
  EXPECT_EQ(specs[0].contrast.name(), "relative-vs-no-pos");
  EXPECT_FALSE(specs[1].contrast.baseline);
  EXPECT_THROW(tym::Contrast::parse("rotary"), tym::Error);
  std::istringstream bad("metric,task\nav,ud\n");
  EXPECT_THROW(tym::read_correlation_specs(bad), tym::ParseError);
}

TEST(Tables, ReadAndValidate) {
  std::istringstream wide("language,av,eta\neng,25.2,\ntur,10,0.5\n");
  const auto m = tym::MetricTable::read_csv(wide);
  EXPECT_EQ(*m.get("eng", "av"), 25.2);
  EXPECT_FALSE(m.get("eng", "eta"));
  std::istringstream longf("language,metric,value\neng,av,3\n");
  EXPECT_EQ(*tym::MetricTable::read_csv(longf).get("eng", "av"), 3.0);
  std::istringstream ragged("language,av\neng,1,2\n");
  EXPECT_THROW(tym::MetricTable::read_csv(ragged), tym::ParseError);
  std::istringstream badpos("language,task,pos_type,score\neng,ud,rope,3\n");
  EXPECT_THROW(tym::PerformanceTable::read_csv(badpos), tym::Error);
  std::istringstream dup("language,task,pos_type,score\neng,ud,no-pos,3\neng,ud,no-pos,4\n");
  EXPECT_THROW(tym::PerformanceTable::read_csv(dup), tym::Error);
  const auto p = reference_scores();
  EXPECT_EQ(p.get("eng", "ud", "relative")->stddev, 0.07);
  EXPECT_FALSE(p.get("eng", "multiblimp", "relative")->stddev);
}

TEST(Scatter, ReferenceCardinalityOrderAndRoundTrip) {
  const auto rows = tym::emit_scatter(reference_metrics(), reference_scores(), "mattr", "ud");
  ASSERT_EQ(rows.size(), 21u);
  for (std::size_t g = 0; g < 3; ++g) {
    for (std::size_t i = 0; i < 7; ++i) {
      const auto& r = rows[g * 7 + i];
      EXPECT_EQ(r.pos_type, std::string(tym::kPosTypes[g]));
      if (i > 0) {
        EXPECT_LE(rows[g * 7 + i - 1].metric_value, r.metric_value);
      }
    }
  }
  std::stringstream buf;
  tym::write_scatter_csv(buf, rows);
  EXPECT_EQ(tym::read_scatter_csv(buf), rows);
}

TEST(Scatter, RandomRoundTripIsExact) {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  tym::MetricTable m;
  tym::PerformanceTable p;
  for (const auto& l : lang_codes(30)) {
    m.set(l, "eta", u(rng) * 1e-9);
    for (auto pos : tym::kPosTypes) p.set(l, "sib200", std::string(pos), {u(rng), {}});
  }
  const auto rows = tym::emit_scatter(m, p, "eta", "sib200");
  EXPECT_EQ(rows.size(), 90u);
  std::stringstream buf;
  tym::write_scatter_csv(buf, rows);
  EXPECT_EQ(tym::read_scatter_csv(buf), rows);
}

TEST(Scatter, TooFewLanguages) {
  EXPECT_THROW(tym::emit_scatter(reference_metrics(), reference_scores(), "mattr", "nope"),
               tym::Error);
}
