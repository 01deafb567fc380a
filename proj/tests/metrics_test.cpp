// Copyright 2026 The dtta Authors. All Rights Reserved.
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

#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <random>

#include "dtta/dtta.hpp"
#include "test_util.hpp"

namespace dtta {
namespace {

using U = std::vector<std::uint32_t>;

TEST(Accuracy, Basics) {
  EXPECT_EQ(accuracy(U{0, 1, 2}, U{0, 1, 2}), 100.0);
  EXPECT_EQ(accuracy(U{1, 0}, U{0, 1}), 0.0);
  EXPECT_EQ(accuracy(U{0, 1, 1, 1}, U{0, 1, 1, 0}), 75.0);
  EXPECT_THROW(accuracy(U{}, U{}), Error);
  EXPECT_THROW(accuracy(U{0}, U{0, 1}), Error);
}

TEST(Mcc, Basics) {
  EXPECT_DOUBLE_EQ(mcc(U{0, 1, 1, 0}, U{0, 1, 1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(mcc(U{1, 0, 0, 1}, U{0, 1, 1, 0}), -1.0);
  EXPECT_EQ(mcc(U{1, 1, 1}, U{0, 1, 0}), 0.0);  // empty predicted-negative marginal
  EXPECT_THROW(mcc(U{2}, U{1}), Error);
}

TEST(Mcc, ConfusionCounts) {
  // TP=3, FP=1, FN=2, TN=4
  const U pred{1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
  const U gold{1, 1, 1, 0, 1, 1, 0, 0, 0, 0};
  EXPECT_NEAR(mcc(pred, gold), 0.408248290463863, 1e-14);
}

TEST(Mcc, RangeAndSymmetryProperty) {
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = testing::uniform(rng, 1, 30);
    U p(n), g(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = coin(rng);
      g[i] = coin(rng);
    }
    const double m = mcc(p, g);
    EXPECT_GE(m, -1.0 - 1e-12);
    EXPECT_LE(m, 1.0 + 1e-12);
    EXPECT_NEAR(m, mcc(g, p), 1e-12);
  }
}

TEST(RescaleMcc, Values) {
  EXPECT_EQ(rescale_mcc(-1.0), 0.0);
  EXPECT_EQ(rescale_mcc(1.0), 1.0);
  EXPECT_NEAR(rescale_mcc(0.4944), 0.7472, 1e-12);
  EXPECT_THROW(rescale_mcc(1.5), Error);
}

TEST(DialectalGap, PublishedCells) {
  EXPECT_NEAR(dialectal_gap(49.44, std::vector<double>{15.55}, MetricKind::kMcc).gaps[0], 16.95,
              0.01);
  EXPECT_NEAR(dialectal_gap(91.97, std::vector<double>{87.52}, MetricKind::kAccuracy).gaps[0], 4.45,
              1e-9);
  EXPECT_NEAR(dialectal_gap(58.12, std::vector<double>{58.57}, MetricKind::kAccuracy).gaps[0],
              -0.45, 1e-9);
  EXPECT_EQ(dialectal_gap(70.0, std::vector<double>{70.0}, MetricKind::kAccuracy).gaps[0], 0.0);
}

TEST(DialectalGap, AverageAndErrors) {
  const auto g = dialectal_gap(80.0, std::vector<double>{70.0, 75.0, 90.0}, MetricKind::kAccuracy);
  EXPECT_NEAR(g.average, (10.0 + 5.0 - 10.0) / 3.0, 1e-12);
  EXPECT_THROW(dialectal_gap(80.0, std::vector<double>{}, MetricKind::kAccuracy), Error);
  const EvalResult self{"cola", "sae", "sae", EvalMode::kF, MetricKind::kMcc, 40.0};
  const std::vector<EvalResult> cross{
      {"cola", "sae", "indian", EvalMode::kF, MetricKind::kAccuracy, 30.0}};
  EXPECT_THROW(dialectal_gap(self, cross), Error);
}

TEST(DialectalGap, MccGapIsHalfTheRawDifferenceProperty) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 100; ++i) {
    const double a = u(rng), b = u(rng);
    EXPECT_NEAR(dialectal_gap(a, std::vector<double>{b}, MetricKind::kMcc).gaps[0], (a - b) / 2.0,
                1e-9);
  }
}

TEST(IncompleteBeta, MatchesBoost) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> shape(0.2, 30.0), x(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const double a = shape(rng), b = shape(rng), v = x(rng);
    EXPECT_NEAR(incomplete_beta(a, b, v), boost::math::ibeta(a, b, v), 1e-12)
        << a << ' ' << b << ' ' << v;
  }
}

TEST(StudentT, TwoSidedMatchesBoost) {
  for (double df : {1.0, 2.0, 3.5, 7.0, 30.0, 200.0}) {
    const boost::math::students_t dist(df);
    for (double t : {0.0, 0.1, 0.5, 1.0, 2.0, 4.2, 10.0, -3.0}) {
      const double expected = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
      EXPECT_NEAR(student_t_two_sided(t, df), expected, 1e-12) << df << ' ' << t;
    }
  }
}

TEST(Pearson, Extremes) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y, z;
  for (double v : x) {
    y.push_back(2 * v + 1);
    z.push_back(-v);
  }
  EXPECT_NEAR(pearson(x, y).r, 1.0, 1e-15);
  EXPECT_EQ(pearson(x, y).p, 0.0);
  EXPECT_NEAR(pearson(x, z).r, -1.0, 1e-15);
}

TEST(Pearson, PublishedGapDeltaPairs) {
  const std::vector<double> gap{16.95, 14.97, 21.99, 4.45, 3.96, 5.58, -0.45, -0.84, -0.05};
  const std::vector<double> delta{2.73, 2.02, 3.47, 0.37, 0.88, 0.25, 1.19, 1.20, 0.79};
  const auto r = pearson(gap, delta);
  EXPECT_EQ(r.n, 9u);
  EXPECT_NEAR(r.r, 0.8455386895541140, 1e-12);
  EXPECT_NEAR(r.p, 0.004086202983057606, 1e-12);
  EXPECT_NEAR(r.r, 0.8455, 0.001);
  EXPECT_NEAR(r.p, 0.0041, 0.0005);
}

TEST(Pearson, PValueMatchesBoostProperty) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = testing::uniform(rng, 3, 40);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = g(rng);
      y[i] = 0.5 * x[i] + g(rng);
    }
    const auto r = pearson(x, y);
    EXPECT_LE(std::abs(r.r), 1.0);
    const double df = static_cast<double>(n - 2);
    const double t = r.r * std::sqrt(df / (1 - r.r * r.r));
    const boost::math::students_t dist(df);
    EXPECT_NEAR(r.p, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 1e-12);
  }
}

TEST(Pearson, Errors) {
  try {
    pearson(std::vector<double>{1, 2, 3}, std::vector<double>{4, 4, 4});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUndefined);
  }
  EXPECT_THROW(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), Error);
  EXPECT_THROW(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), Error);
}

TEST(EvalResult, ValueRange) {
  EvalResult r{"t", "a", "b", EvalMode::kF, MetricKind::kAccuracy, -1.0};
  EXPECT_THROW(r.validate(), Error);
  r.metric = MetricKind::kMcc;
  EXPECT_NO_THROW(r.validate());
  EXPECT_EQ(parse_eval_mode("TTA"), EvalMode::kTta);
  EXPECT_THROW(parse_eval_mode("x"), Error);
}

}  // namespace
}  // namespace dtta
