#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "timepop/core.hpp"

namespace timepop {

/// Which side of the split an interaction exactly at split_time falls on.
enum class SplitBoundary { kEqualToTest, kEqualToTrain };

struct SplitSpec {
  Timestamp split_time = 0;
  std::size_t min_train = 15;
  std::size_t min_test = 5;
  SplitBoundary boundary = SplitBoundary::kEqualToTest;
};

struct SplitResult {
  std::vector<Interaction> train;
  std::vector<Interaction> test;
  std::vector<std::string> evaluated_users;  // id_less order
  Timestamp split_time = 0;
};

namespace detail {

inline void check_minimums(std::size_t min_train, std::size_t min_test) {
  if (min_train < 1 || min_test < 1) throw Error(ErrorKind::kConfig, "min_train and min_test must be at least 1");
}

inline bool in_train(Timestamp t, Timestamp split, SplitBoundary b) {
  return b == SplitBoundary::kEqualToTest ? t < split : t <= split;
}

}  // namespace detail

inline std::size_t count_eligible_users(const Dataset& ds, Timestamp candidate_time, std::size_t min_train,
                                        std::size_t min_test,
                                        SplitBoundary boundary = SplitBoundary::kEqualToTest) {
  std::size_t eligible = 0;
  for (const auto& p : ds.profiles()) {
    std::size_t before = 0;
    for (const auto& e : p.interactions)
      if (detail::in_train(e.timestamp, candidate_time, boundary)) ++before;
    const std::size_t after = p.interactions.size() - before;
    if (before >= min_train && after >= min_test) ++eligible;
  }
  return eligible;
}

/// Picks the distinct interaction timestamp that maximises the number of
/// users with at least min_train past and min_test future interactions,
/// preferring the earliest on ties.
///
/// Each user is eligible on a contiguous run of candidate times bounded by
/// its min_train-th and (n - min_test + 1)-th timestamps, so one sweep over
/// interval endpoints replaces a per-candidate recount.
inline SplitSpec find_best_split(const Dataset& ds, std::size_t min_train, std::size_t min_test,
                                 SplitBoundary boundary = SplitBoundary::kEqualToTest) {
  detail::check_minimums(min_train, min_test);

  std::vector<Timestamp> grid;
  grid.reserve(ds.num_interactions());
  for (const auto& p : ds.profiles())
    for (const auto& e : p.interactions) grid.push_back(e.timestamp);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<std::int64_t> delta(grid.size() + 1, 0);
  for (const auto& p : ds.profiles()) {
    const auto n = p.interactions.size();
    if (n < min_train + min_test) continue;
    const Timestamp last_train = p.interactions[min_train - 1].timestamp;
    const Timestamp first_test = p.interactions[n - min_test].timestamp;
    std::size_t lo, hi;  // eligible grid indices [lo, hi)
    if (boundary == SplitBoundary::kEqualToTest) {
      // last_train < c <= first_test
      lo = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), last_train) - grid.begin());
      hi = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), first_test) - grid.begin());
    } else {
      // last_train <= c < first_test
      lo = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), last_train) - grid.begin());
      hi = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), first_test) - grid.begin());
    }
    if (lo < hi) {
      ++delta[lo];
      --delta[hi];
    }
  }

  std::int64_t running = 0, best = 0;
  std::size_t best_index = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    running += delta[k];
    if (running > best) {
      best = running;
      best_index = k;
    }
  }
  if (best == 0) throw Error(ErrorKind::kInfeasible, "no feasible split");
  return {grid[best_index], min_train, min_test, boundary};
}

inline SplitResult apply_split(const Dataset& ds, const SplitSpec& spec) {
  detail::check_minimums(spec.min_train, spec.min_test);
  SplitResult out;
  out.split_time = spec.split_time;
  for (const auto& p : ds.profiles()) {
    std::size_t before = 0;
    for (const auto& e : p.interactions)
      if (detail::in_train(e.timestamp, spec.split_time, spec.boundary)) ++before;
    const bool evaluated = before >= spec.min_train && p.interactions.size() - before >= spec.min_test;
    if (evaluated) out.evaluated_users.push_back(ds.user_id(p.user));
    for (const auto& e : p.interactions) {
      Interaction rec{ds.user_id(p.user), ds.item_id(e.item), e.rating, e.timestamp};
      if (detail::in_train(e.timestamp, spec.split_time, spec.boundary))
        out.train.push_back(std::move(rec));
      else if (evaluated)
        out.test.push_back(std::move(rec));
    }
  }
  if (out.evaluated_users.empty()) throw Error(ErrorKind::kInfeasible, "split leaves no evaluated users");
  return out;
}

}  // namespace timepop
