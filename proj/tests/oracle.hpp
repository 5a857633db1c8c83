#pragma once

// Brute-force reference implementations used only by the test suites. They
// work directly on raw interaction records and external ids and share no code
// path with the indexed library beyond the Interaction struct and id_less.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "timepop/core.hpp"
#include "timepop/synthetic.hpp"

namespace oracle {

using timepop::Interaction;
using timepop::Timestamp;

struct Less {
  bool operator()(const std::string& a, const std::string& b) const { return timepop::id_less(a, b); }
};

// user -> item -> (timestamp, rating), earliest record per pair.
using Table = std::map<std::string, std::map<std::string, std::pair<Timestamp, double>, Less>, Less>;

inline Table tabulate(const std::vector<Interaction>& records) {
  Table t;
  for (const auto& r : records) {
    auto& row = t[r.user];
    auto it = row.find(r.item);
    if (it == row.end() || r.timestamp < it->second.first ||
        (r.timestamp == it->second.first && r.rating > it->second.second))
      row[r.item] = {r.timestamp, r.rating};
  }
  return t;
}

inline std::map<std::string, std::size_t, Less> popularity(const Table& t) {
  std::map<std::string, std::size_t, Less> pop;
  for (const auto& [u, row] : t)
    for (const auto& [i, v] : row) ++pop[i];
  return pop;
}

// Pairwise scan: every other user against each of the target's items.
inline std::map<std::string, std::size_t, Less> candidates(const Table& t, const std::string& target) {
  std::map<std::string, std::size_t, Less> out;
  const auto& mine = t.at(target);
  for (const auto& [other, row] : t) {
    if (other == target) continue;
    std::size_t count = 0;
    for (const auto& [item, when] : mine) {
      auto b = row.find(item);
      if (b != row.end() && b->second.first < when.first) ++count;
    }
    if (count > 0) out[other] = count;
  }
  return out;
}

struct Precursors {
  double tau = 0.0;
  std::set<std::string, Less> members;
};

inline Precursors precursors(const Table& t, const std::string& target, double fixed_tau = -1.0) {
  Precursors p;
  const auto cands = candidates(t, target);
  if (cands.empty()) return p;
  if (fixed_tau >= 0.0) {
    p.tau = fixed_tau;
  } else {
    long double sum = 0;
    for (const auto& [u, c] : cands) sum += c;
    p.tau = static_cast<double>(sum / cands.size());
  }
  for (const auto& [u, c] : cands)
    if (static_cast<double>(c) >= p.tau) p.members.insert(u);
  return p;
}

struct Entry {
  std::string item;
  double score;
  bool backfill;
};

inline std::vector<Entry> rank(const Table& t, const std::string& target, std::map<std::string, double, Less> scores,
                               std::size_t n) {
  const auto pop = popularity(t);
  const auto& mine = t.at(target);
  std::vector<Entry> scored;
  for (const auto& [i, s] : scores) scored.push_back({i, s, false});
  std::sort(scored.begin(), scored.end(), [&](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;
    if (pop.at(a.item) != pop.at(b.item)) return pop.at(a.item) > pop.at(b.item);
    return timepop::id_less(a.item, b.item);
  });
  if (scored.size() > n) scored.resize(n);
  std::vector<std::pair<std::string, std::size_t>> by_pop(pop.begin(), pop.end());
  std::stable_sort(by_pop.begin(), by_pop.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [i, c] : by_pop) {
    if (scored.size() >= n) break;
    if (mine.count(i)) continue;
    if (std::any_of(scored.begin(), scored.end(), [&](const Entry& e) { return e.item == i; })) continue;
    scored.push_back({i, 0.0, true});
  }
  return scored;
}

inline std::vector<Entry> timepop(const Table& t, const std::string& target, Timestamp t0, double beta,
                                  std::size_t n) {
  const auto pre = precursors(t, target);
  const auto& mine = t.at(target);
  std::map<std::string, double, Less> scores;
  for (const auto& p : pre.members) {
    const auto& row = t.at(p);
    Timestamp last = 0;
    for (const auto& [i, v] : row) last = std::max(last, v.first);
    for (const auto& [i, v] : row) {
      if (mine.count(i)) continue;
      const double days = std::fabs(static_cast<double>(t0) - 2.0 * static_cast<double>(last) +
                                    static_cast<double>(v.first)) / 86400.0;
      scores[i] += std::exp(-beta * days);
    }
  }
  return rank(t, target, scores, n);
}

inline std::vector<Entry> most_popular(const Table& t, const std::string& target, std::size_t n) {
  const auto pop = popularity(t);
  std::map<std::string, double, Less> scores;
  for (const auto& [i, c] : pop)
    if (!t.at(target).count(i)) scores[i] = static_cast<double>(c);
  return rank(t, target, scores, n);
}

inline double cosine(const std::map<std::string, std::pair<Timestamp, double>, Less>& a,
                     const std::map<std::string, std::pair<Timestamp, double>, Less>& b) {
  std::size_t common = 0;
  for (const auto& [i, v] : a) common += b.count(i);
  return static_cast<double>(common) / std::sqrt(static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

inline std::vector<Entry> user_knn(const Table& t, const std::string& target, Timestamp t0, std::size_t k,
                                   double beta, bool decay, std::size_t n) {
  std::vector<std::pair<std::string, double>> sims;
  for (const auto& [v, row] : t) {
    if (v == target) continue;
    const double s = cosine(t.at(target), row);
    if (s > 0) sims.emplace_back(v, s);
  }
  std::sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : timepop::id_less(a.first, b.first);
  });
  if (sims.size() > k) sims.resize(k);
  std::map<std::string, double, Less> scores;
  for (const auto& [v, s] : sims)
    for (const auto& [i, val] : t.at(v)) {
      if (t.at(target).count(i)) continue;
      const double w = decay ? std::exp(-beta * static_cast<double>(t0 - val.first) / 86400.0) : 1.0;
      scores[i] += s * w;
    }
  return rank(t, target, scores, n);
}

inline std::vector<Entry> item_knn(const Table& t, const std::string& target, Timestamp t0, std::size_t k,
                                   double beta, bool decay, std::size_t n) {
  // item -> user -> ts
  std::map<std::string, std::map<std::string, std::pair<Timestamp, double>, Less>, Less> cols;
  for (const auto& [u, row] : t)
    for (const auto& [i, v] : row) cols[i][u] = v;
  const auto& mine = t.at(target);
  std::map<std::string, double, Less> scores;
  for (const auto& [i, ci] : cols) {
    if (mine.count(i)) continue;
    std::vector<std::pair<std::string, double>> sims;
    for (const auto& [j, cj] : cols) {
      if (j == i) continue;
      const double s = cosine(ci, cj);
      if (s > 0) sims.emplace_back(j, s);
    }
    std::sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : timepop::id_less(a.first, b.first);
    });
    if (sims.size() > k) sims.resize(k);
    bool any = false;
    double total = 0.0;
    for (const auto& [j, s] : sims) {
      auto it = mine.find(j);
      if (it == mine.end()) continue;
      const double w = decay ? std::exp(-beta * static_cast<double>(t0 - it->second.first) / 86400.0) : 1.0;
      total += s * w;
      any = true;
    }
    if (any) scores[i] = total;
  }
  return rank(t, target, scores, n);
}

inline std::size_t eligible(const Table& t, Timestamp c, std::size_t min_train, std::size_t min_test) {
  std::size_t count = 0;
  for (const auto& [u, row] : t) {
    std::size_t before = 0, after = 0;
    for (const auto& [i, v] : row) (v.first < c ? before : after)++;
    if (before >= min_train && after >= min_test) ++count;
  }
  return count;
}

// Exhaustive scan over distinct timestamps; returns (time, count), count 0 if
// infeasible. Each candidate is recounted per user by binary search.
inline std::pair<Timestamp, std::size_t> best_split(const Table& t, std::size_t min_train, std::size_t min_test) {
  std::set<Timestamp> times;
  std::vector<std::vector<Timestamp>> per_user;
  for (const auto& [u, row] : t) {
    auto& ts = per_user.emplace_back();
    for (const auto& [i, v] : row) {
      times.insert(v.first);
      ts.push_back(v.first);
    }
    std::sort(ts.begin(), ts.end());
  }
  std::pair<Timestamp, std::size_t> best{0, 0};
  for (Timestamp c : times) {
    std::size_t e = 0;
    for (const auto& ts : per_user) {
      const auto before = static_cast<std::size_t>(std::lower_bound(ts.begin(), ts.end(), c) - ts.begin());
      if (before >= min_train && ts.size() - before >= min_test) ++e;
    }
    if (e > best.second) best = {c, e};
  }
  return best;
}

// Reference nDCG: natural-log discount, ideal list built explicitly.
inline double ndcg(const std::vector<std::string>& ranked, const std::set<std::string>& relevant, std::size_t n) {
  std::vector<int> gains;
  for (std::size_t p = 0; p < ranked.size() && p < n; ++p)
    gains.push_back(std::find(relevant.begin(), relevant.end(), ranked[p]) != relevant.end() ? 1 : 0);
  double dcg = 0.0;
  for (std::size_t p = 0; p < gains.size(); ++p) dcg += gains[p] * std::log(2.0) / std::log(p + 2.0);
  std::vector<int> ideal(relevant.size(), 1);
  ideal.resize(std::min(ideal.size(), n));
  double idcg = 0.0;
  for (std::size_t p = 0; p < ideal.size(); ++p) idcg += ideal[p] * std::log(2.0) / std::log(p + 2.0);
  return dcg / idcg;
}

// Random records with string ids, including duplicate pairs and timestamp ties.
inline std::vector<Interaction> random_records(timepop::synthetic::Rng& rng, std::size_t max_users,
                                               std::size_t max_items, std::size_t max_interactions,
                                               Timestamp time_range = 200) {
  const auto users = 2 + rng.below(max_users - 1);
  const auto items = 2 + rng.below(max_items - 1);
  const auto count = 1 + rng.below(max_interactions);
  std::vector<Interaction> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back({"u" + std::to_string(rng.below(users)), "i" + std::to_string(rng.below(items)),
                   static_cast<double>(rng.between(1, 5)), rng.between(0, time_range)});
  }
  return out;
}

}  // namespace oracle
