#include <algorithm>
#include <limits>
#include <set>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "timepop/splitter.hpp"

using namespace timepop;

namespace {

std::vector<Interaction> linear_user(const std::string& user, int n, Timestamp start = 1) {
  std::vector<Interaction> out;
  for (int k = 0; k < n; ++k) out.push_back({user, "i" + std::to_string(k), 4, start + k});
  return out;
}

std::vector<Interaction> concat(std::initializer_list<std::vector<Interaction>> parts) {
  std::vector<Interaction> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

TEST(CountEligibleUsers, BoundaryExactlyMet) {
  const auto ds = build_dataset(linear_user("u", 20));
  EXPECT_EQ(count_eligible_users(ds, 16, 15, 5), 1u);
  EXPECT_EQ(count_eligible_users(ds, 17, 15, 5), 0u);
}

TEST(CountEligibleUsers, MatchesNaiveRecount) {
  synthetic::Rng rng(5);
  const auto records = oracle::random_records(rng, 30, 40, 900, 100);
  const auto ds = build_dataset(records);
  const auto table = oracle::tabulate(records);
  for (Timestamp c = -1; c <= 102; ++c)
    ASSERT_EQ(count_eligible_users(ds, c, 4, 3), oracle::eligible(table, c, 4, 3)) << "c=" << c;
}

TEST(FindBestSplit, UniqueMaximizer) {
  // Three users become eligible only at t=16; elsewhere at most two are.
  const auto records = concat({linear_user("a", 20), linear_user("b", 20), linear_user("c", 21, 0),
                               linear_user("d", 21, 5)});
  const auto ds = build_dataset(records);
  const auto table = oracle::tabulate(records);
  const auto [time, count] = oracle::best_split(table, 15, 5);
  const auto spec = find_best_split(ds, 15, 5);
  EXPECT_EQ(spec.split_time, time);
  EXPECT_EQ(count_eligible_users(ds, spec.split_time, 15, 5), count);
  EXPECT_EQ(spec.split_time, 16);
  EXPECT_EQ(count, 3u);
}

TEST(FindBestSplit, TieGoesToEarliest) {
  // One user of 21 interactions is eligible at t=16 and t=17.
  const auto ds = build_dataset(linear_user("u", 21));
  EXPECT_EQ(count_eligible_users(ds, 16, 15, 5), 1u);
  EXPECT_EQ(count_eligible_users(ds, 17, 15, 5), 1u);
  EXPECT_EQ(find_best_split(ds, 15, 5).split_time, 16);
}

TEST(FindBestSplit, InfeasibleThrows) {
  const auto ds = build_dataset(concat({linear_user("a", 19), linear_user("b", 10)}));
  try {
    find_best_split(ds, 15, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasible);
    EXPECT_STREQ(e.what(), "no feasible split");
  }
  EXPECT_THROW(find_best_split(ds, 0, 5), Error);
}

TEST(FindBestSplit, InvariantToRecordOrder) {
  synthetic::Rng rng(77);
  for (int round = 0; round < 20; ++round) {
    auto records = oracle::random_records(rng, 25, 30, 800, 300);
    const auto first = build_dataset(records);
    if (oracle::best_split(oracle::tabulate(records), 5, 3).second == 0) {
      EXPECT_THROW(find_best_split(first, 5, 3), Error);
      continue;
    }
    const auto a = find_best_split(first, 5, 3).split_time;
    std::reverse(records.begin(), records.end());
    for (std::size_t k = records.size(); k > 1; --k) std::swap(records[k - 1], records[rng.below(k)]);
    ASSERT_EQ(find_best_split(build_dataset(records), 5, 3).split_time, a);
  }
}

TEST(FindBestSplit, DistinctTimestampGridLosesNoMaximizer) {
  // The objective only changes at interaction times, so probing midpoints
  // between grid points never beats the best grid point.
  synthetic::Rng rng(8);
  for (int round = 0; round < 30; ++round) {
    auto records = oracle::random_records(rng, 20, 30, 600, 400);
    for (auto& r : records) r.timestamp *= 2;
    const auto ds = build_dataset(records);
    std::size_t best_anywhere = 0;
    for (Timestamp c = -1; c <= 802; ++c) best_anywhere = std::max(best_anywhere, count_eligible_users(ds, c, 4, 2));
    if (best_anywhere == 0) continue;
    const auto spec = find_best_split(ds, 4, 2);
    ASSERT_EQ(count_eligible_users(ds, spec.split_time, 4, 2), best_anywhere);
  }
}

TEST(FindBestSplit, TrainBoundaryConvention) {
  // 20 interactions at t=1..20: with the instant kept in train, t=15 is the
  // only split leaving 15 past and 5 future interactions.
  const auto ds = build_dataset(linear_user("u", 20));
  EXPECT_EQ(count_eligible_users(ds, 15, 15, 5, SplitBoundary::kEqualToTrain), 1u);
  EXPECT_EQ(count_eligible_users(ds, 16, 15, 5, SplitBoundary::kEqualToTrain), 0u);
  EXPECT_EQ(find_best_split(ds, 15, 5, SplitBoundary::kEqualToTrain).split_time, 15);
}

TEST(ApplySplit, PerUserCounts) {
  const auto ds = build_dataset(concat({linear_user("u", 20), linear_user("old", 6, 0)}));
  const auto res = apply_split(ds, {16, 15, 5});
  EXPECT_EQ(res.evaluated_users, std::vector<std::string>{"u"});
  EXPECT_EQ(std::count_if(res.train.begin(), res.train.end(), [](const auto& r) { return r.user == "u"; }), 15);
  EXPECT_EQ(std::count_if(res.test.begin(), res.test.end(), [](const auto& r) { return r.user == "u"; }), 5);
  // Non-evaluated history stays in train only.
  EXPECT_EQ(std::count_if(res.train.begin(), res.train.end(), [](const auto& r) { return r.user == "old"; }), 6);
  EXPECT_EQ(std::count_if(res.test.begin(), res.test.end(), [](const auto& r) { return r.user == "old"; }), 0);
  EXPECT_THROW(apply_split(ds, {1000, 15, 5}), Error);
}

TEST(ApplySplit, RandomDatasetsMatchRecount) {
  synthetic::Rng rng(31);
  int checked = 0;
  for (int round = 0; round < 60; ++round) {
    const auto records = oracle::random_records(rng, 30, 40, 1500, 500);
    const auto ds = build_dataset(records);
    SplitSpec spec;
    try {
      spec = find_best_split(ds, 8, 3);
    } catch (const Error&) {
      continue;
    }
    ++checked;
    const auto res = apply_split(ds, spec);
    const auto table = oracle::tabulate(records);
    std::set<std::string> evaluated(res.evaluated_users.begin(), res.evaluated_users.end());
    ASSERT_EQ(evaluated.size(), oracle::eligible(table, spec.split_time, 8, 3));
    for (const auto& [u, row] : table) {
      std::size_t before = 0, after = 0;
      Timestamp max_train = -1, min_test = std::numeric_limits<Timestamp>::max();
      for (const auto& [i, v] : row) (v.first < spec.split_time ? before : after)++;
      const bool is_eval = before >= 8 && after >= 3;
      ASSERT_EQ(evaluated.count(u) == 1, is_eval);
      std::size_t tr = 0, te = 0;
      for (const auto& r : res.train)
        if (r.user == u) ++tr, max_train = std::max(max_train, r.timestamp);
      for (const auto& r : res.test)
        if (r.user == u) ++te, min_test = std::min(min_test, r.timestamp);
      ASSERT_EQ(tr, before);
      ASSERT_EQ(te, is_eval ? after : 0);
      if (is_eval) {
        ASSERT_LT(max_train, spec.split_time);
        ASSERT_LE(spec.split_time, min_test);
      }
    }
  }
  EXPECT_GT(checked, 20);
}
