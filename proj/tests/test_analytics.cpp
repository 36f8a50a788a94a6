#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "db4hls/analytics.hpp"
#include "support/generators.hpp"

using namespace db4hls;
using namespace db4hls::analytics;
using db4hls::testing::brute_force_front;
using db4hls::testing::PointShape;
using db4hls::testing::random_points;

namespace {

DesignPoint pt(std::vector<double> v, std::int64_t id = 0) { return {std::move(v), id}; }

std::vector<DesignPoint> as_points(const std::vector<std::vector<double>>& raw) {
  std::vector<DesignPoint> out;
  for (std::size_t i = 0; i < raw.size(); ++i) out.push_back({raw[i], static_cast<std::int64_t>(i)});
  return out;
}

/// Hand-rolled ADRS straight from its definition, for cross-checking.
double adrs_oracle(const std::vector<DesignPoint>& ref, const std::vector<DesignPoint>& approx) {
  double total = 0;
  for (const auto& g : ref) {
    double best = 1e300;
    for (const auto& w : approx) {
      double worst = 0;
      for (std::size_t j = 0; j < g.size(); ++j) worst = std::max(worst, std::max(0.0, (w[j] - g[j]) / g[j]));
      best = std::min(best, worst);
    }
    total += best;
  }
  return total / static_cast<double>(ref.size());
}

}  // namespace

TEST(Dominates, Basics) {
  EXPECT_TRUE(dominates(pt({1, 1}), pt({2, 2})));
  EXPECT_FALSE(dominates(pt({2, 2}), pt({1, 1})));
  EXPECT_FALSE(dominates(pt({1, 2}), pt({2, 1})));
  EXPECT_FALSE(dominates(pt({2, 1}), pt({1, 2})));
  EXPECT_FALSE(dominates(pt({1, 1}), pt({1, 1})));
  EXPECT_TRUE(dominates(pt({1, 1}), pt({1, 2})));
  EXPECT_THROW(dominates(pt({1, 1}), pt({1, 1, 1})), AnalyticsError);
}

TEST(ParetoFront, HandExample) {
  std::vector<DesignPoint> pts{pt({1, 3}, 1), pt({2, 2}, 2), pt({3, 1}, 3), pt({3, 3}, 4)};
  auto f = pareto_front(pts);
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[0].objectives, (std::vector<double>{1, 3}));
  EXPECT_EQ(f[1].objectives, (std::vector<double>{2, 2}));
  EXPECT_EQ(f[2].objectives, (std::vector<double>{3, 1}));
}

TEST(ParetoFront, SinglePointAndErrors) {
  std::vector<DesignPoint> one{pt({5, 5}, 9)};
  auto f = pareto_front(one);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].configuration_id, 9);
  EXPECT_THROW(pareto_front(std::vector<DesignPoint>{}), AnalyticsError);
  EXPECT_THROW(pareto_front(std::vector<DesignPoint>{pt({1, 2}), pt({1})}), AnalyticsError);
  EXPECT_THROW(pareto_front(std::vector<DesignPoint>{pt({NAN, 2})}), AnalyticsError);
}

TEST(ParetoFront, DuplicatesKeepLowestIdAndReportAll) {
  std::vector<DesignPoint> pts{pt({2, 2}, 7), pt({1, 3}, 5), pt({2, 2}, 3), pt({2, 2}, 11), pt({4, 4}, 1)};
  auto f = pareto_front(pts);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[1].configuration_id, 3);
  EXPECT_EQ(f.ids[1], (std::vector<std::int64_t>{3, 7, 11}));
  // Same in 3-D.
  std::vector<DesignPoint> pts3{pt({2, 2, 2}, 7), pt({2, 2, 2}, 3), pt({1, 3, 3}, 4)};
  auto f3 = pareto_front(pts3);
  ASSERT_EQ(f3.size(), 2u);
  EXPECT_EQ(f3[1].configuration_id, 3);
  EXPECT_EQ(f3.ids[1], (std::vector<std::int64_t>{3, 7}));
}

TEST(ParetoFront, StrictlyDecreasingSecondObjective) {
  std::mt19937_64 rng(3);
  auto f = pareto_front(as_points(random_points(rng, 2000, 2, PointShape::Grid)));
  for (std::size_t i = 1; i < f.size(); ++i) {
    EXPECT_LT(f[i - 1][0], f[i][0]);
    EXPECT_GT(f[i - 1][1], f[i][1]);
  }
}

TEST(ParetoFront, MatchesBruteForce) {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 60; ++iter) {
    auto dim = static_cast<std::size_t>(2 + iter % 3);
    auto shape = static_cast<PointShape>(iter % 3);
    std::uniform_int_distribution<std::size_t> n(1, 1500);
    auto raw = random_points(rng, n(rng), dim, shape);
    auto f = pareto_front(as_points(raw));
    std::set<std::int64_t> got;
    for (const auto& p : f) got.insert(p.configuration_id);
    auto want_idx = brute_force_front(raw);
    std::set<std::int64_t> want(want_idx.begin(), want_idx.end());
    ASSERT_EQ(got, want) << "iter " << iter;
  }
}

TEST(ParetoFront, ScaleInvariantMembership) {
  std::mt19937_64 rng(21);
  auto raw = random_points(rng, 3000, 2, PointShape::Uniform);
  auto pts = as_points(raw);
  auto f = pareto_front(pts);
  for (auto& p : pts) p.objectives[1] *= 37.5;
  auto g = pareto_front(pts);
  ASSERT_EQ(f.size(), g.size());
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f[i].configuration_id, g[i].configuration_id);
}

TEST(Adrs, Identities) {
  std::vector<DesignPoint> f{pt({1, 3}), pt({2, 2}), pt({3, 1})};
  EXPECT_EQ(adrs(f, f), 0.0);
  std::vector<DesignPoint> g{pt({1, 1})}, w{pt({2, 1})};
  EXPECT_DOUBLE_EQ(adrs(g, w), 1.0);
  // Approximation improving on the reference scores zero.
  EXPECT_EQ(adrs(g, std::vector<DesignPoint>{pt({0.5, 0.5})}), 0.0);
}

TEST(Adrs, HandComputedMixedExample) {
  // ref {(10,100),(20,50)}, approx {(12,100),(20,60)}:
  //   (10,100): min(max(.2,0), max(1,-.4)) = .2 ; (20,50): min(max(-.4,1), max(0,.2)) = .2
  std::vector<DesignPoint> ref{pt({10, 100}), pt({20, 50})};
  std::vector<DesignPoint> approx{pt({12, 100}), pt({20, 60})};
  EXPECT_NEAR(adrs(ref, approx), 0.2, 1e-12);
}

TEST(Adrs, Errors) {
  std::vector<DesignPoint> zero{pt({0, 1})}, one{pt({1, 1})};
  EXPECT_THROW(adrs(zero, one), AnalyticsError);
  EXPECT_THROW(adrs(one, std::vector<DesignPoint>{}), AnalyticsError);
  EXPECT_THROW(adrs(std::vector<DesignPoint>{}, one), AnalyticsError);
  EXPECT_THROW(adrs(one, std::vector<DesignPoint>{pt({1, 1, 1})}), AnalyticsError);
}

TEST(Adrs, MatchesOracleAndMonotoneUnderSuperset) {
  std::mt19937_64 rng(77);
  for (int iter = 0; iter < 100; ++iter) {
    auto all = as_points(random_points(rng, 400, 2, iter % 2 ? PointShape::Grid : PointShape::Uniform));
    auto ref = pareto_front(all).points;
    std::vector<DesignPoint> small, big;
    for (const auto& p : all) {
      auto r = rng() % 10;
      if (r == 0) small.push_back(p);
      if (r <= 3) big.push_back(p);
    }
    if (small.empty()) small.push_back(all.front());
    big.insert(big.end(), small.begin(), small.end());
    double a = adrs(ref, small), b = adrs(ref, big);
    EXPECT_NEAR(a, adrs_oracle(ref, small), 1e-12);
    EXPECT_LE(b, a);
    EXPECT_GE(b, 0.0);
    // Zero iff every reference point is matched or improved upon.
    EXPECT_EQ(adrs(ref, all), 0.0);
  }
}

TEST(Hypervolume, Exact) {
  EXPECT_EQ(hypervolume_2d(std::vector<DesignPoint>{pt({0, 0})}, pt({1, 1})), 1.0);
  EXPECT_EQ(hypervolume_2d(std::vector<DesignPoint>{pt({0, 0.5}), pt({0.5, 0})}, pt({1, 1})), 0.75);
  EXPECT_EQ(hypervolume_2d(std::vector<DesignPoint>{pt({0, 0.5}), pt({0.5, 0}), pt({0.6, 0.6})}, pt({1, 1})),
            0.75);
  EXPECT_EQ(hypervolume_2d(std::vector<DesignPoint>{}, pt({1, 1})), 0.0);
  EXPECT_THROW(hypervolume_2d(std::vector<DesignPoint>{pt({2, 0})}, pt({1, 1})), AnalyticsError);
  EXPECT_THROW(hypervolume_2d(std::vector<DesignPoint>{pt({0, 0, 0})}, pt({1, 1})), AnalyticsError);
}

TEST(Hypervolume, MonotoneAndDominanceInvariant) {
  std::mt19937_64 rng(5);
  for (int iter = 0; iter < 50; ++iter) {
    auto pts = as_points(random_points(rng, 300, 2, PointShape::Uniform));
    auto ref = pt({1000, 1000});
    std::vector<DesignPoint> prefix;
    double last = 0;
    for (const auto& p : pts) {
      prefix.push_back(p);
      double hv = hypervolume_2d(prefix, ref);
      ASSERT_GE(hv, last - 1e-9);
      last = hv;
    }
    auto front = pareto_front(pts);
    EXPECT_NEAR(hypervolume_2d(front.points, ref), last, 1e-6 * last);
  }
}

namespace {

struct HarnessFixture {
  csd::Csd csd = csd::parse_csd("unroll;f;a;{1,2,4,8}\nunroll;f;b;{1,2,4,8,16}\nresource;f;m;{x,y}\nclock;{10}");
  space::SpaceIndex index{csd};
  std::vector<std::int64_t> ids;
  std::unordered_map<std::int64_t, std::optional<DesignPoint>> results;

  HarnessFixture() {
    for (std::uint64_t i = 0; i < index.total(); ++i) {
      auto id = static_cast<std::int64_t>(100 + i);
      ids.push_back(id);
      auto c = index.decode(i);
      double u = static_cast<double>(c.assignments[0][0].number() * c.assignments[1][0].number());
      double extra = c.assignments[2][0].token() == "x" ? 1.0 : 1.5;
      results.emplace(id, DesignPoint{{1000.0 / u * extra, 10.0 * u + extra}, id});
    }
    results[ids[7]] = std::nullopt;  // one failed synthesis
  }
  SpaceView view() const { return {index, ids}; }
};

class GreedyOverspender final : public Strategy {
 public:
  std::string name() const override { return "overspend"; }
  std::vector<std::int64_t> explore(const SpaceView& s, QueryOracle& o) override {
    for (auto id : s.config_ids) o.query(id);
    return {s.config_ids.begin(), s.config_ids.end()};
  }
};

class Cheater final : public Strategy {
 public:
  std::string name() const override { return "cheat"; }
  std::vector<std::int64_t> explore(const SpaceView& s, QueryOracle& o) override {
    o.query(s.config_ids[0]);
    return {s.config_ids[0], s.config_ids[1]};
  }
};

}  // namespace

TEST(Harness, ExhaustiveIsExact) {
  HarnessFixture h;
  ExhaustiveStrategy s;
  auto ev = evaluate_strategy(h.view(), h.results, s, h.index.total());
  EXPECT_EQ(ev.queries_used, h.index.total());
  ASSERT_TRUE(ev.adrs_value);
  EXPECT_EQ(*ev.adrs_value, 0.0);
  EXPECT_FALSE(ev.truncated);
}

TEST(Harness, RandomFullBudgetIsExactAndSeeded) {
  HarnessFixture h;
  RandomStrategy s(4);
  auto ev = evaluate_strategy(h.view(), h.results, s, h.index.total());
  EXPECT_EQ(*ev.adrs_value, 0.0);

  RandomStrategy a(9), b(9);
  auto ea = evaluate_strategy(h.view(), h.results, a, 8);
  auto eb = evaluate_strategy(h.view(), h.results, b, 8);
  EXPECT_EQ(ea.queries_used, 8u);
  EXPECT_EQ(ea.adrs_value, eb.adrs_value);
  ASSERT_EQ(ea.trace.size(), eb.trace.size());
  for (std::size_t i = 0; i < ea.trace.size(); ++i) EXPECT_EQ(ea.trace[i].configuration_id, eb.trace[i].configuration_id);
  std::set<std::int64_t> uniq;
  for (const auto& t : ea.trace) uniq.insert(t.configuration_id);
  EXPECT_EQ(uniq.size(), ea.trace.size());
}

TEST(Harness, HillClimbStaysWithinBudget) {
  HarnessFixture h;
  for (std::uint64_t budget : {1u, 5u, 13u, 40u}) {
    HillClimbStrategy s(budget);
    auto ev = evaluate_strategy(h.view(), h.results, s, budget);
    EXPECT_LE(ev.queries_used, budget);
    EXPECT_FALSE(ev.truncated);
    std::set<std::int64_t> uniq;
    for (const auto& t : ev.trace) uniq.insert(t.configuration_id);
    EXPECT_EQ(uniq.size(), ev.trace.size());
  }
  HillClimbStrategy full(1);
  auto ev = evaluate_strategy(h.view(), h.results, full, h.index.total());
  EXPECT_EQ(ev.queries_used, h.index.total());
  EXPECT_EQ(*ev.adrs_value, 0.0);
}

TEST(Harness, BudgetOverrunIsTruncatedAndFlagged) {
  HarnessFixture h;
  GreedyOverspender s;
  auto ev = evaluate_strategy(h.view(), h.results, s, 5);
  EXPECT_TRUE(ev.truncated);
  EXPECT_EQ(ev.queries_used, 5u);
  EXPECT_EQ(ev.trace.size(), 5u);
}

TEST(Harness, Errors) {
  HarnessFixture h;
  Cheater cheat;
  EXPECT_THROW(evaluate_strategy(h.view(), h.results, cheat, 10), AnalyticsError);
  QueryOracle oracle(h.results, 3);
  EXPECT_THROW(oracle.query(-1), UnknownConfiguration);
  EXPECT_THROW(make_strategy("lattice", 1), AnalyticsError);
}
