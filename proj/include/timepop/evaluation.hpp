#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "timepop/core.hpp"
#include "timepop/parallel.hpp"
#include "timepop/recommender.hpp"

namespace timepop {

struct EvalConfig {
  std::size_t top_n_max = 10;  // curves cover N = 2..top_n_max
  double relevance_threshold = 4.0;
  bool skip_users_without_relevant = true;
};

struct UserResult {
  std::string user;
  std::vector<double> ndcg;  // ndcg[k] is nDCG@(k + 2)
};

struct EvalReport {
  std::vector<std::pair<std::size_t, double>> per_n;  // (N, mean nDCG@N)
  std::vector<UserResult> per_user;                   // id_less order
  std::size_t evaluated_count = 0;
};

using ItemSet = std::set<std::string>;

/// Test items whose rating reaches the threshold.
inline ItemSet relevant_items(std::span<const Interaction> test_records, const EvalConfig& config) {
  ItemSet out;
  for (const auto& r : test_records)
    if (r.rating >= config.relevance_threshold) out.insert(r.item);
  return out;
}

/// Binary-gain nDCG@n with discount 1/log2(p + 1) for 1-based position p.
inline double ndcg_at(std::span<const std::string> ranked, const ItemSet& relevant, std::size_t n) {
  if (n < 1) throw Error(ErrorKind::kConfig, "cutoff must be at least 1");
  if (relevant.empty()) throw Error(ErrorKind::kDegenerate, "no relevant items");
  double dcg = 0.0;
  const std::size_t depth = std::min(n, ranked.size());
  for (std::size_t p = 0; p < depth; ++p)
    if (relevant.count(ranked[p])) dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  double idcg = 0.0;
  const std::size_t ideal = std::min(n, relevant.size());
  for (std::size_t p = 0; p < ideal; ++p) idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  return dcg / idcg;
}

inline std::vector<std::string> ranked_ids(const Dataset& ds, const RankedList& list) {
  std::vector<std::string> ids;
  ids.reserve(list.entries.size());
  for (const auto& e : list.entries) ids.push_back(ds.item_id(e.item));
  return ids;
}

inline double ndcg_at(const Dataset& ds, const RankedList& list, const ItemSet& relevant, std::size_t n) {
  const auto ids = ranked_ids(ds, list);
  return ndcg_at(ids, relevant, n);
}

/// Test records grouped by user in id_less order.
inline std::vector<std::pair<std::string, std::vector<Interaction>>> group_by_user(
    std::span<const Interaction> records) {
  std::map<std::string, std::vector<Interaction>, IdLess> grouped;
  for (const auto& r : records) grouped[r.user].push_back(r);
  return {grouped.begin(), grouped.end()};
}

/// All-unrated-items evaluation: every test user gets a ranked list over the
/// items absent from their training profile, scored against the test items
/// that meet the relevance threshold. `recommend(user, n)` must depend only
/// on the training data.
template <typename Recommend>
EvalReport evaluate(const Dataset& train, std::span<const Interaction> test, Recommend&& recommend,
                    const EvalConfig& config, std::size_t workers = 1) {
  if (config.top_n_max < 2) throw Error(ErrorKind::kConfig, "top_n_max must be at least 2");
  const auto users = group_by_user(test);
  for (const auto& [user, recs] : users)
    if (!train.has_user(user)) throw Error(ErrorKind::kInvalidInput, "test user '" + user + "' has no training data");

  const std::size_t curve = config.top_n_max - 1;
  std::vector<std::optional<UserResult>> slots(users.size());
  parallel_for(users.size(), workers, [&](std::size_t k) {
    const auto& [user, recs] = users[k];
    const auto relevant = relevant_items(recs, config);
    if (relevant.empty()) {
      if (!config.skip_users_without_relevant) slots[k] = UserResult{user, std::vector<double>(curve, 0.0)};
      return;
    }
    const RankedList list = recommend(train.user_handle(user), config.top_n_max);
    const auto ids = ranked_ids(train, list);
    UserResult res{user, {}};
    res.ndcg.reserve(curve);
    for (std::size_t n = 2; n <= config.top_n_max; ++n) res.ndcg.push_back(ndcg_at(ids, relevant, n));
    slots[k] = std::move(res);
  });

  EvalReport report;
  for (auto& s : slots)
    if (s) report.per_user.push_back(std::move(*s));
  report.evaluated_count = report.per_user.size();
  if (report.evaluated_count == 0) throw Error(ErrorKind::kDegenerate, "no users with relevant test items");
  for (std::size_t k = 0; k < curve; ++k) {
    double sum = 0.0;
    for (const auto& u : report.per_user) sum += u.ndcg[k];
    report.per_n.emplace_back(k + 2, sum / static_cast<double>(report.evaluated_count));
  }
  return report;
}

struct TTestResult {
  double t_statistic;
  double p_value;
  std::size_t common_users;
};

/// Two-sided paired Student's t-test over users present in both maps.
inline TTestResult paired_ttest(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
  std::vector<double> diffs;
  for (const auto& [user, va] : a)
    if (auto it = b.find(user); it != b.end()) diffs.push_back(va - it->second);
  const std::size_t m = diffs.size();
  if (m < 2) throw Error(ErrorKind::kDegenerate, "paired t-test needs at least 2 common users");
  if (std::all_of(diffs.begin(), diffs.end(), [&](double d) { return d == diffs.front(); }))
    throw Error(ErrorKind::kDegenerate, "degenerate sample");

  double mean = 0.0;
  for (double d : diffs) mean += d;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double d : diffs) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / static_cast<double>(m - 1));
  if (!(sd > 0.0)) throw Error(ErrorKind::kDegenerate, "degenerate sample");

  const double t = mean / (sd / std::sqrt(static_cast<double>(m)));
  boost::math::students_t dist(static_cast<double>(m - 1));
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
  return {t, std::min(1.0, p), m};
}

}  // namespace timepop
