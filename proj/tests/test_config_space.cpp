#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "db4hls/config_space.hpp"
#include "support/generators.hpp"

using namespace db4hls;
using namespace db4hls::space;
using db4hls::testing::data_path;
using db4hls::testing::read_file;

namespace {

csd::Csd snippet() { return csd::parse_csd(read_file(data_path("csd/last_step_scan.csd"))); }

csd::Csd strip_binds(csd::Csd c) {
  for (auto& k : c.knobs) k.bind_tag.reset();
  return c;
}

}  // namespace

TEST(Cardinality, SnippetWithAndWithoutBind) {
  auto c = snippet();
  EXPECT_EQ(cardinality(c), 1600u);
  EXPECT_EQ(cardinality(strip_binds(c)), 12800u);
}

TEST(Cardinality, ClockOnly) { EXPECT_EQ(cardinality(csd::parse_csd("clock;{10}")), 1u); }

TEST(Cardinality, Overflow) {
  std::string text;
  for (int i = 0; i < 11; ++i) text += "pipeline;f;p" + std::to_string(i) + ";{1->4611686018427387904,pow_2}\n";
  text += "clock;{10}\n";
  EXPECT_THROW(cardinality(csd::parse_csd(text)), OverflowError);
}

TEST(BuildIndex, SnippetAxes) {
  auto idx = build_index(snippet());
  EXPECT_EQ(idx.total(), 1600u);
  std::vector<std::uint64_t> nontrivial;
  for (auto r : idx.radices())
    if (r > 1) nontrivial.push_back(r);
  // bucket partition 2x10, sum strategy 2, shared factor 8, last_2 5.
  EXPECT_EQ(nontrivial, (std::vector<std::uint64_t>{20, 2, 8, 5}));
  const auto& shared = idx.axes()[4];
  EXPECT_EQ(shared.kind, Axis::Kind::Shared);
  EXPECT_EQ(shared.tag, "a");
  EXPECT_EQ(shared.members, (std::vector<int>{3, 4}));
}

TEST(BuildIndex, TwoKnobToy) {
  auto idx = build_index(csd::parse_csd("unroll;f;l;{1,2}\nresource;f;a;{a,b}\nclock;{10}"));
  EXPECT_EQ(idx.total(), 4u);
  EXPECT_EQ(idx.radices(), (std::vector<std::uint64_t>{2, 2, 1}));
  // First axis varies slowest.
  EXPECT_EQ(idx.decode(1).key_text, "unroll;f;l;1|resource;f;a;b|clock;10");
  EXPECT_EQ(idx.decode(2).key_text, "unroll;f;l;2|resource;f;a;a|clock;10");
}

TEST(Decode, RangeAndFirst) {
  auto idx = build_index(snippet());
  EXPECT_EQ(idx.decode(0), *idx.begin());
  EXPECT_THROW(idx.decode(idx.total()), SpaceError);
  auto c0 = idx.decode(0);
  EXPECT_EQ(c0.key, sha256_hex(c0.key_text));
  EXPECT_EQ(c0.key.size(), 64u);
}

TEST(Enumerate, SnippetDistinctAndBound) {
  auto idx = build_index(snippet());
  std::set<std::string> keys;
  std::uint64_t n = 0;
  for (const auto& c : enumerate(idx)) {
    EXPECT_EQ(c.index, n);
    ++n;
    keys.insert(c.key);
    EXPECT_EQ(c.assignments[3][1], c.assignments[4][0]);
  }
  EXPECT_EQ(n, 1600u);
  EXPECT_EQ(keys.size(), 1600u);
}

TEST(Enumerate, ToyMatchesNestedLoops) {
  auto c = csd::parse_csd(
      "unroll;f;l1;{1,2,4}@bind_u\n"
      "array_partition;f;a;1;{cyclic,block};{1,2,4}@bind_u\n"
      "resource;f;b;{RAM_1P,RAM_2P}\n"
      "clock;{10}\n");
  auto idx = build_index(c);
  std::set<std::vector<std::vector<csd::Value>>> got, want;
  for (const auto& cfg : enumerate(idx)) got.insert(cfg.assignments);
  for (auto& a : db4hls::testing::brute_force_space(c)) want.insert(a);
  EXPECT_EQ(got, want);
  EXPECT_EQ(idx.total(), 12u);
}

TEST(Enumerate, RandomPropertiesAgainstBruteForce) {
  std::mt19937_64 rng(20240101);
  for (int iter = 0; iter < 150; ++iter) {
    auto c = db4hls::testing::random_csd(rng, 4, 5);
    auto idx = build_index(c);
    auto oracle = db4hls::testing::brute_force_space(c);
    ASSERT_EQ(idx.total(), oracle.size()) << csd::serialize_csd(c);
    EXPECT_EQ(db4hls::testing::unbound_product(c) % idx.total(), 0u);

    std::set<std::vector<std::vector<csd::Value>>> got(oracle.begin(), oracle.end());
    std::set<std::string> keys;
    std::vector<std::map<std::uint64_t, std::uint64_t>> digit_counts(idx.axes().size());
    for (std::uint64_t i = 0; i < idx.total(); ++i) {
      auto cfg = idx.decode(i);
      ASSERT_EQ(idx.encode(cfg), i);
      ASSERT_TRUE(got.count(cfg.assignments));
      keys.insert(cfg.key);
      auto d = idx.digits(i);
      for (std::size_t a = 0; a < d.size(); ++a) ++digit_counts[a][d[a]];
    }
    ASSERT_EQ(keys.size(), idx.total());
    for (std::size_t a = 0; a < idx.axes().size(); ++a)
      for (const auto& [digit, count] : digit_counts[a])
        ASSERT_EQ(count, idx.total() / idx.axes()[a].radix);
  }
}

TEST(Encode, RejectsForeignConfigurations) {
  auto idx = build_index(snippet());
  auto cfg = idx.decode(17);
  cfg.assignments[4][0] = csd::Value(std::int64_t{64});
  cfg.assignments[3][1] = csd::Value(std::int64_t{32});
  EXPECT_THROW(idx.encode(cfg), SpaceError);
  cfg.assignments[3][1] = csd::Value(std::int64_t{1024});
  EXPECT_THROW(idx.encode(cfg), SpaceError);
}

TEST(Sample, WholeSpaceAndDeterminism) {
  auto c = snippet();
  auto all = sample(c, 1600, 3);
  std::set<std::uint64_t> idxs;
  for (const auto& cfg : all) idxs.insert(cfg.index);
  EXPECT_EQ(idxs.size(), 1600u);

  auto a = sample(c, 10, 42);
  auto b = sample(c, 10, 42);
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].index, b[i].index);
  EXPECT_THROW(sample(c, 1601, 1), SpaceError);
}

TEST(Sample, AxisValuesRoughlyUniform) {
  // Chi-squared per axis over many seeds; df = radix - 1, threshold at the
  // mean + 3 standard deviations of the chi-squared distribution.
  auto idx = build_index(snippet());
  const int seeds = 400;
  const std::uint64_t n = 20;
  std::vector<std::vector<double>> counts;
  for (const auto& a : idx.axes()) counts.emplace_back(a.radix, 0.0);
  for (int s = 0; s < seeds; ++s)
    for (const auto& cfg : sample(idx, n, static_cast<std::uint64_t>(s))) {
      auto d = idx.digits(cfg.index);
      for (std::size_t a = 0; a < d.size(); ++a) counts[a][d[a]] += 1;
    }
  for (std::size_t a = 0; a < counts.size(); ++a) {
    auto k = counts[a].size();
    if (k < 2) continue;
    double expected = static_cast<double>(seeds * n) / static_cast<double>(k);
    double chi2 = 0;
    for (double o : counts[a]) chi2 += (o - expected) * (o - expected) / expected;
    double df = static_cast<double>(k - 1);
    EXPECT_LT(chi2, df + 3 * std::sqrt(2 * df)) << "axis " << a;
  }
}

TEST(ConfigJson, Shape) {
  auto idx = build_index(snippet());
  auto j = idx.to_json(idx.decode(0));
  ASSERT_TRUE(j.is_array());
  ASSERT_EQ(j.size(), 7u);
  EXPECT_EQ(j[2]["knob"], "array_partition;last_step_scan;bucket;1");
  EXPECT_EQ(j[2]["values"], nlohmann::json::array({"cyclic", 1}));
  EXPECT_EQ(j[6]["values"], nlohmann::json::array({10}));
}
